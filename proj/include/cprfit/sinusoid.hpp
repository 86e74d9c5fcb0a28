#pragma once

// Four-parameter sinusoid y(t) = A sin(omega t + phi) + D, its search box,
// and the least-squares costs used to fit it to a window of samples.

#include "cprfit/geometry.hpp"

#include <array>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace cprfit {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Windows with fewer samples than this are not fitted.
inline constexpr std::size_t kMinWindowSamples = 8;

/// Tolerance for comparing sample timestamps against update/window bounds.
inline constexpr double kTimeEpsilon = 1e-9;

struct SineParams {
  double amplitude = 0.0; ///< meters
  double omega = kTwoPi;  ///< rad/s
  double phase = 0.0;     ///< rad
  double offset = 0.0;    ///< meters

  /// Optimizer ordering: (A, omega, phi, D).
  std::array<double, 4> to_array() const { return {amplitude, omega, phase, offset}; }
  static SineParams from_span(std::span<const double> x);

  friend bool operator==(const SineParams &, const SineParams &) = default;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  bool contains(double v) const { return v >= lo && v <= hi; }
  double clamp(double v) const { return v < lo ? lo : (v > hi ? hi : v); }

  friend bool operator==(const Interval &, const Interval &) = default;
};

/// Closed search box for the sine parameters.
struct ParamBounds {
  Interval amplitude{-2.0, 2.0};
  Interval omega{kTwoPi, 16.0 * std::numbers::pi / 3.0}; // 60..160 cpm
  Interval phase{0.0, kTwoPi};
  Interval offset{-2.0, 2.0};

  std::array<Interval, 4> to_array() const { return {amplitude, omega, phase, offset}; }
  bool contains(const SineParams &p) const;
  /// Throws ConfigError unless lo < hi for every parameter and omega > 0.
  void validate() const;

  friend bool operator==(const ParamBounds &, const ParamBounds &) = default;
};

/// Time-ordered slice of samples covering (start, end].
class Window {
public:
  /// Throws WindowTooSmallError below kMinWindowSamples, WindowError if the
  /// samples are unordered or fall outside [start, end] (within kTimeEpsilon).
  Window(std::vector<Sample> samples, double start, double end);

  std::span<const Sample> samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  double start() const { return start_; }
  double end() const { return end_; }
  double length() const { return end_ - start_; }

private:
  std::vector<Sample> samples_;
  double start_;
  double end_;
};

double eval_sine(const SineParams &p, double t);

/// Sum of squared residuals at the samples' own timestamps.
/// Throws WindowError on an empty sample set.
double cost_sse(const SineParams &p, std::span<const Sample> samples);
double cost_sse(const SineParams &p, const Window &w);

/// sqrt(SSE / T).
double cost_rmse(const SineParams &p, std::span<const Sample> samples);
double cost_rmse(const SineParams &p, const Window &w);

double omega_to_cpm(double omega);
double cpm_to_omega(double cpm);

struct DepthReading {
  double half_cm = 0.0;         ///< |A| in cm
  double peak_to_peak_cm = 0.0; ///< 2|A| in cm, compared against mannequin depth
};

DepthReading amplitude_to_depth(double amplitude_m);

/// One window's fitted model.
struct FitResult {
  SineParams params; ///< phase is relative to window_start
  double sse = 0.0;
  double rmse = 0.0;
  double window_start = 0.0;
  double window_end = 0.0;
  double t_update = 0.0;
  std::size_t n_samples = 0;
  std::size_t generations_run = 0;
  bool converged_by_vtr = false;

  double cpm() const { return omega_to_cpm(params.omega); }
  double depth_p2p_cm() const { return amplitude_to_depth(params.amplitude).peak_to_peak_cm; }

  friend bool operator==(const FitResult &, const FitResult &) = default;
};

} // namespace cprfit
