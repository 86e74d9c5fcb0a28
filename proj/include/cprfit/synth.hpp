#pragma once

// Ground-truth generator: skeleton streams whose joint-to-floor distance is a
// known sinusoid, plus the matching per-cycle reference events.

#include "cprfit/evaluation.hpp"
#include "cprfit/geometry.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace cprfit {

struct ScheduleKnot {
  double t = 0.0;        // seconds
  double cpm = 110.0;    // compressions per minute
  double depth_cm = 5.0; // peak-to-peak
};

/// Piecewise-linear rate/depth schedule, constant outside the knot range.
/// Two knots at the same time give a step change.
class Schedule {
public:
  /// Throws ConfigError for an empty list, decreasing times, cpm outside
  /// [30, 200] or negative depth.
  explicit Schedule(std::vector<ScheduleKnot> knots);
  static Schedule constant(double cpm, double depth_cm);

  double cpm(double t) const;
  double depth_cm(double t) const;
  /// Number of compression cycles completed between 0 and t, i.e.
  /// integral of cpm / 60 over [0, t].
  double cycles(double t) const;

  const std::vector<ScheduleKnot> &knots() const { return knots_; }

private:
  std::vector<ScheduleKnot> knots_;
};

struct SynthSpec {
  double duration_s = 120.0;
  double frame_rate = 30.0;
  Schedule schedule = Schedule::constant(110.0, 5.0);
  double noise_cm = 0.0; ///< Gaussian sigma along the plane normal
  FloorPlane plane{{0.0, 1.0, 0.0}, 0.0};
  /// Rest height above the floor of each joint type, meters.
  std::array<double, kJointTypeCount> baseline_m = {0.75, 0.55, 0.42, 0.38};
  double dropout_prob = 0.0; ///< per frame and joint
  /// Lateral antisymmetric left/right jitter amplitude, meters.
  double lateral_jitter_m = 0.01;
  /// Oscillator phase at t = 0; pi/2 starts the stream at a cycle top.
  double phase0 = 1.5707963267948966;
  std::uint64_t seed = 42;

  void validate() const;
};

struct Dataset {
  std::vector<JointFrame> frames;
  std::vector<CompressionEvent> events;
};

/// Oscillator phase at t.
double synth_phase(const SynthSpec &spec, double t);

/// Noise-free joint-to-floor distance at t.
double synth_distance(const SynthSpec &spec, JointType joint, double t);

/// round(duration * frame_rate) frames at t = i / frame_rate, and one event
/// per complete cycle (top to top) inside [0, last frame time].
Dataset generate(const SynthSpec &spec);

/// Frames as JSON Lines, events as CSV. Both files are replaced atomically.
void write_dataset(const Dataset &data, const std::filesystem::path &frames_path,
                   const std::filesystem::path &events_path);

} // namespace cprfit
