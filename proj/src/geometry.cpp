#include "cprfit/geometry.hpp"

#include "cprfit/errors.hpp"

#include <cstdio>

namespace cprfit {

FloorPlane::FloorPlane(Vec3 normal, double offset) : normal_(normal), offset_(offset) {
  if (!normal.is_finite() || !std::isfinite(offset)) {
    throw GeometryError("floor plane has non-finite coefficients");
  }
  if (dot(normal, normal) == 0.0) {
    throw GeometryError("floor plane normal is zero");
  }
}

std::string_view to_string(JointType joint) {
  switch (joint) {
  case JointType::shoulders: return "shoulders";
  case JointType::elbows: return "elbows";
  case JointType::wrists: return "wrists";
  case JointType::hands: return "hands";
  }
  return "unknown";
}

std::optional<JointType> parse_joint_type(std::string_view name) {
  for (JointType type : kAllJointTypes) {
    if (to_string(type) == name) {
      return type;
    }
  }
  return std::nullopt;
}

Vec3 combine_pair(Vec3 left, Vec3 right) {
  if (!left.is_finite() || !right.is_finite()) {
    throw InvalidFrameError("joint pair has non-finite coordinates");
  }
  return {(left.x + right.x) / 2.0, (left.y + right.y) / 2.0, (left.z + right.z) / 2.0};
}

double plane_distance(const FloorPlane &plane, Vec3 point) {
  const Vec3 n = plane.normal();
  const double len = norm(n);
  if (len == 0.0) {
    throw GeometryError("floor plane normal is zero");
  }
  return (n.x * point.x + n.y * point.y + n.z * point.z - plane.offset()) / len;
}

std::optional<Sample> frame_to_sample(const JointFrame &frame, JointType joint) {
  const auto &pair = frame.joint(joint);
  if (!pair) {
    return std::nullopt;
  }
  return Sample{frame.t, plane_distance(frame.plane, combine_pair(pair->left, pair->right))};
}

std::vector<Sample> frames_to_samples(std::span<const JointFrame> frames, JointType joint,
                                      IngestStats *stats) {
  std::vector<Sample> samples;
  samples.reserve(frames.size());
  IngestStats local;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (i > 0 && !(frames[i].t > frames[i - 1].t)) {
      char msg[128];
      std::snprintf(msg, sizeof msg, "frame %zu: timestamp %.9g does not exceed previous %.9g", i,
                    frames[i].t, frames[i - 1].t);
      throw StreamOrderError(msg);
    }
    ++local.frames;
    if (auto sample = frame_to_sample(frames[i], joint)) {
      samples.push_back(*sample);
      ++local.samples;
    } else {
      ++local.skipped_missing_joint;
    }
  }
  if (stats) {
    *stats = local;
  }
  return samples;
}

} // namespace cprfit
