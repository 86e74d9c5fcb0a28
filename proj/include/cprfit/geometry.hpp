#pragma once

// Reduction of 3D skeleton joints to a scalar joint-to-floor distance signal.

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cprfit {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator*(double s, Vec3 v) { return {s * v.x, s * v.y, s * v.z}; }
  friend constexpr bool operator==(Vec3, Vec3) = default;

  bool is_finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 v) { return std::sqrt(dot(v, v)); }

/// Floor plane `n . x - a = 0`. The normal need not be unit length; the
/// offset is in the same scale as the normal.
class FloorPlane {
public:
  /// Throws GeometryError on a zero or non-finite normal.
  FloorPlane(Vec3 normal, double offset);

  Vec3 normal() const { return normal_; }
  double offset() const { return offset_; }
  Vec3 unit_normal() const { return (1.0 / norm(normal_)) * normal_; }

  friend bool operator==(const FloorPlane &, const FloorPlane &) = default;

private:
  Vec3 normal_;
  double offset_;
};

enum class JointType : std::size_t { shoulders = 0, elbows = 1, wrists = 2, hands = 3 };

inline constexpr std::size_t kJointTypeCount = 4;
inline constexpr std::array<JointType, kJointTypeCount> kAllJointTypes = {
    JointType::shoulders, JointType::elbows, JointType::wrists, JointType::hands};

std::string_view to_string(JointType joint);
/// Accepts the lower-case names used in frame files and on the command line.
std::optional<JointType> parse_joint_type(std::string_view name);

struct JointPair {
  Vec3 left;
  Vec3 right;

  friend bool operator==(const JointPair &, const JointPair &) = default;
};

/// One timestamped skeleton observation.
struct JointFrame {
  double t = 0.0;
  FloorPlane plane{{0.0, 1.0, 0.0}, 0.0};
  std::array<std::optional<JointPair>, kJointTypeCount> joints{};

  const std::optional<JointPair> &joint(JointType type) const {
    return joints[static_cast<std::size_t>(type)];
  }
  std::optional<JointPair> &joint(JointType type) { return joints[static_cast<std::size_t>(type)]; }

  friend bool operator==(const JointFrame &, const JointFrame &) = default;
};

/// Distance of the combined joint from the floor at time t.
struct Sample {
  double t = 0.0;
  double d = 0.0;

  friend bool operator==(const Sample &, const Sample &) = default;
};

/// Midpoint of the left and right joint. Throws InvalidFrameError on
/// non-finite input.
Vec3 combine_pair(Vec3 left, Vec3 right);

/// Signed point-to-plane distance, normalized by |n|.
double plane_distance(const FloorPlane &plane, Vec3 point);

/// nullopt when the frame lacks the requested joint (the frame is skipped).
std::optional<Sample> frame_to_sample(const JointFrame &frame, JointType joint);

struct IngestStats {
  std::size_t frames = 0;
  std::size_t samples = 0;
  std::size_t skipped_missing_joint = 0;
};

/// Converts a frame sequence into samples. Throws StreamOrderError if
/// timestamps do not strictly increase.
std::vector<Sample> frames_to_samples(std::span<const JointFrame> frames, JointType joint,
                                      IngestStats *stats = nullptr);

} // namespace cprfit
