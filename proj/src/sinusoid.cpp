#include "cprfit/sinusoid.hpp"

#include "cprfit/errors.hpp"

#include <cmath>
#include <string>

namespace cprfit {

SineParams SineParams::from_span(std::span<const double> x) {
  if (x.size() != 4) {
    throw Error("sine parameter vector must have 4 components, got " + std::to_string(x.size()));
  }
  return {x[0], x[1], x[2], x[3]};
}

bool ParamBounds::contains(const SineParams &p) const {
  return amplitude.contains(p.amplitude) && omega.contains(p.omega) && phase.contains(p.phase) &&
         offset.contains(p.offset);
}

void ParamBounds::validate() const {
  auto check = [](const Interval &iv, const char *name) {
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.lo < iv.hi)) {
      throw ConfigError(name, "bound requires finite lo < hi");
    }
  };
  check(amplitude, "amplitude");
  check(omega, "omega");
  check(phase, "phase");
  check(offset, "offset");
  if (!(omega.lo > 0.0)) {
    throw ConfigError("omega", "lower bound must be positive");
  }
}

Window::Window(std::vector<Sample> samples, double start, double end)
    : samples_(std::move(samples)), start_(start), end_(end) {
  if (!(start < end)) {
    throw WindowError("window start must precede its end");
  }
  if (samples_.size() < kMinWindowSamples) {
    throw WindowTooSmallError("window holds " + std::to_string(samples_.size()) +
                              " samples, at least " + std::to_string(kMinWindowSamples) +
                              " required");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const Sample &s = samples_[i];
    if (!std::isfinite(s.d) || s.t < start_ - kTimeEpsilon || s.t > end_ + kTimeEpsilon) {
      throw WindowError("sample " + std::to_string(i) + " is non-finite or outside the window");
    }
    if (i > 0 && !(s.t > samples_[i - 1].t)) {
      throw WindowError("window samples are not strictly time-ordered");
    }
  }
}

double eval_sine(const SineParams &p, double t) {
  return p.amplitude * std::sin(p.omega * t + p.phase) + p.offset;
}

double cost_sse(const SineParams &p, std::span<const Sample> samples) {
  if (samples.empty()) {
    throw WindowError("cost of an empty window is undefined");
  }
  double sum = 0.0;
  for (const Sample &s : samples) {
    const double r = s.d - eval_sine(p, s.t);
    sum += r * r;
  }
  return sum;
}

double cost_sse(const SineParams &p, const Window &w) { return cost_sse(p, w.samples()); }

double cost_rmse(const SineParams &p, std::span<const Sample> samples) {
  return std::sqrt(cost_sse(p, samples) / static_cast<double>(samples.size()));
}

double cost_rmse(const SineParams &p, const Window &w) { return cost_rmse(p, w.samples()); }

double omega_to_cpm(double omega) { return 60.0 * omega / kTwoPi; }

double cpm_to_omega(double cpm) { return cpm * kTwoPi / 60.0; }

DepthReading amplitude_to_depth(double amplitude_m) {
  const double half = std::abs(amplitude_m) * 100.0;
  return {half, 2.0 * half};
}

} // namespace cprfit
