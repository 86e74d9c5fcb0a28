#include "cprfit/synth.hpp"

#include "cprfit/errors.hpp"
#include "cprfit/io.hpp"
#include "cprfit/sinusoid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace cprfit {

Schedule::Schedule(std::vector<ScheduleKnot> knots) : knots_(std::move(knots)) {
  if (knots_.empty()) {
    throw ConfigError("schedule", "at least one knot required");
  }
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    const ScheduleKnot &k = knots_[i];
    if (!std::isfinite(k.t) || (i > 0 && k.t < knots_[i - 1].t)) {
      throw ConfigError("schedule", "knot times must be finite and non-decreasing");
    }
    if (!(k.cpm >= 30.0 && k.cpm <= 200.0)) {
      throw ConfigError("schedule", "cpm must lie in [30, 200]");
    }
    if (!(k.depth_cm >= 0.0) || !std::isfinite(k.depth_cm)) {
      throw ConfigError("schedule", "depth must be non-negative");
    }
  }
}

Schedule Schedule::constant(double cpm, double depth_cm) {
  return Schedule({{0.0, cpm, depth_cm}});
}

namespace {

template <typename Field> double interpolate(const std::vector<ScheduleKnot> &knots, double t,
                                             Field field) {
  if (t <= knots.front().t) {
    return field(knots.front());
  }
  if (t >= knots.back().t) {
    return field(knots.back());
  }
  // First knot strictly after t; its predecessor is at or before t.
  auto hi = std::upper_bound(knots.begin(), knots.end(), t,
                             [](double v, const ScheduleKnot &k) { return v < k.t; });
  auto lo = hi - 1;
  const double span = hi->t - lo->t;
  const double u = (t - lo->t) / span;
  return field(*lo) + u * (field(*hi) - field(*lo));
}

} // namespace

double Schedule::cpm(double t) const {
  return interpolate(knots_, t, [](const ScheduleKnot &k) { return k.cpm; });
}

double Schedule::depth_cm(double t) const {
  return interpolate(knots_, t, [](const ScheduleKnot &k) { return k.depth_cm; });
}

double Schedule::cycles(double t) const {
  // Exact integral of the piecewise-linear rate over [0, t], per segment.
  auto integral = [this](double a, double b) {
    double total = 0.0;
    auto constant_part = [&](double lo, double hi, double rate) {
      lo = std::max(lo, a);
      hi = std::min(hi, b);
      if (hi > lo) {
        total += rate * (hi - lo);
      }
    };
    constant_part(-INFINITY, knots_.front().t, knots_.front().cpm);
    for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
      const ScheduleKnot &k0 = knots_[i];
      const ScheduleKnot &k1 = knots_[i + 1];
      const double lo = std::max(k0.t, a);
      const double hi = std::min(k1.t, b);
      if (hi > lo) {
        auto rate = [&](double x) { return k0.cpm + (x - k0.t) / (k1.t - k0.t) * (k1.cpm - k0.cpm); };
        total += 0.5 * (rate(lo) + rate(hi)) * (hi - lo);
      }
    }
    constant_part(knots_.back().t, INFINITY, knots_.back().cpm);
    return total;
  };
  return (t >= 0.0 ? integral(0.0, t) : -integral(t, 0.0)) / 60.0;
}

void SynthSpec::validate() const {
  if (!(duration_s > 0.0) || !std::isfinite(duration_s)) {
    throw ConfigError("duration-s", "duration must be positive");
  }
  if (!(frame_rate > 0.0) || !std::isfinite(frame_rate)) {
    throw ConfigError("frame-rate", "frame rate must be positive");
  }
  if (!(noise_cm >= 0.0) || !std::isfinite(noise_cm)) {
    throw ConfigError("noise-cm", "noise must be non-negative");
  }
  if (!(dropout_prob >= 0.0 && dropout_prob <= 1.0)) {
    throw ConfigError("dropout", "dropout probability must lie in [0, 1]");
  }
  if (!(lateral_jitter_m >= 0.0) || !std::isfinite(lateral_jitter_m)) {
    throw ConfigError("lateral-jitter", "jitter must be non-negative");
  }
}

double synth_phase(const SynthSpec &spec, double t) {
  return spec.phase0 + kTwoPi * spec.schedule.cycles(t);
}

double synth_distance(const SynthSpec &spec, JointType joint, double t) {
  const double amplitude_m = spec.schedule.depth_cm(t) / 200.0;
  return spec.baseline_m[static_cast<std::size_t>(joint)] +
         amplitude_m * std::sin(synth_phase(spec, t));
}

namespace {

// Orthonormal pair spanning the plane's tangent space.
std::pair<Vec3, Vec3> tangent_basis(Vec3 n) {
  const Vec3 helper = std::abs(n.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 0.0, 1.0};
  Vec3 e1{n.y * helper.z - n.z * helper.y, n.z * helper.x - n.x * helper.z,
          n.x * helper.y - n.y * helper.x};
  e1 = (1.0 / norm(e1)) * e1;
  const Vec3 e2{n.y * e1.z - n.z * e1.y, n.z * e1.x - n.x * e1.z, n.x * e1.y - n.y * e1.x};
  return {e1, e2};
}

// Time of the cycle boundary with phase `target`, by bisection on [lo, hi].
double solve_phase(const SynthSpec &spec, double target, double lo, double hi) {
  for (int iter = 0; iter < 200 && hi - lo > 1e-13; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (synth_phase(spec, mid) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

constexpr std::array<double, kJointTypeCount> kHalfWidth = {0.19, 0.15, 0.06, 0.05};
constexpr std::array<double, kJointTypeCount> kForward = {0.25, 0.20, 0.10, 0.05};

} // namespace

Dataset generate(const SynthSpec &spec) {
  spec.validate();
  Dataset data;
  const auto n_frames = static_cast<std::size_t>(std::llround(spec.duration_s * spec.frame_rate));
  const Vec3 unit_n = spec.plane.unit_normal();
  const double plane_len = norm(spec.plane.normal());
  const Vec3 foot = (spec.plane.offset() / plane_len) * unit_n;
  const auto [lateral, forward] = tangent_basis(unit_n);

  std::mt19937_64 engine(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto unit = [&engine] { return static_cast<double>(engine() >> 11) * 0x1.0p-53; };

  data.frames.reserve(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    JointFrame frame;
    frame.t = static_cast<double>(i) / spec.frame_rate;
    frame.plane = spec.plane;
    for (JointType joint : kAllJointTypes) {
      const std::size_t j = static_cast<std::size_t>(joint);
      const bool dropped = unit() < spec.dropout_prob;
      const double noise = gauss(engine) * spec.noise_cm / 100.0;
      const double jitter = (2.0 * unit() - 1.0) * spec.lateral_jitter_m;
      if (dropped) {
        continue;
      }
      const double height = synth_distance(spec, joint, frame.t) + noise;
      const Vec3 mid = foot + kForward[j] * forward + height * unit_n;
      const Vec3 half = (kHalfWidth[j] + jitter) * lateral;
      frame.joint(joint) = JointPair{mid + half, mid - half};
    }
    data.frames.push_back(std::move(frame));
  }

  if (data.frames.empty()) {
    return data;
  }
  // Cycles run from one top (phase = pi/2 mod 2 pi) to the next.
  const double t_end = data.frames.back().t;
  const double top = 0.5 * std::numbers::pi;
  const double phase_begin = synth_phase(spec, 0.0);
  const double phase_end = synth_phase(spec, t_end);
  double k = std::ceil((phase_begin - top) / kTwoPi - 1e-12);
  double prev = -1.0;
  for (;; k += 1.0) {
    const double target = top + kTwoPi * k;
    if (target > phase_end) {
      break;
    }
    const double t = target <= phase_begin ? 0.0 : solve_phase(spec, target, 0.0, t_end);
    if (prev >= 0.0) {
      const double mid = 0.5 * (prev + t);
      data.events.push_back({prev, t, spec.schedule.depth_cm(mid), spec.schedule.cpm(mid)});
    }
    prev = t;
  }
  return data;
}

void write_dataset(const Dataset &data, const std::filesystem::path &frames_path,
                   const std::filesystem::path &events_path) {
  std::ostringstream frames;
  io::write_frames_jsonl(frames, data.frames);
  std::ostringstream events;
  io::write_events_csv(events, data.events);
  io::write_file_atomic(frames_path, frames.str());
  io::write_file_atomic(events_path, events.str());
}

} // namespace cprfit
