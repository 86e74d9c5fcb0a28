#include "cprfit/errors.hpp"
#include "cprfit/sinusoid.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace cprfit;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<Sample> constant_samples(std::size_t n, double d) {
  std::vector<Sample> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({static_cast<double>(i) / 30.0, d});
  }
  return out;
}

SineParams random_params(std::mt19937_64 &rng) {
  const ParamBounds b;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return {b.amplitude.lo + u(rng) * b.amplitude.width(), b.omega.lo + u(rng) * b.omega.width(),
          b.phase.lo + u(rng) * b.phase.width(), b.offset.lo + u(rng) * b.offset.width()};
}

} // namespace

TEST_CASE("eval_sine examples") {
  CHECK(eval_sine({0.0, 2 * kPi, 0.0, 0.7}, 12.34) == doctest::Approx(0.7));
  CHECK(eval_sine({1.0, 2 * kPi, 0.0, 0.0}, 0.25) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(eval_sine({0.05, 16 * kPi / 3, kPi, 1.0}, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("cost_sse and cost_rmse examples") {
  const SineParams p{0.025, cpm_to_omega(110), 1.0, 0.8};
  std::vector<Sample> exact;
  for (int i = 0; i < 90; ++i) {
    const double t = i / 30.0;
    exact.push_back({t, eval_sine(p, t)});
  }
  CHECK(cost_sse(p, exact) == 0.0);
  CHECK(cost_rmse(p, exact) == 0.0);

  const auto ones = constant_samples(10, 1.0);
  CHECK(cost_sse({0.0, 2 * kPi, 0.0, 0.0}, ones) == doctest::Approx(10.0));
  CHECK(cost_sse({0.0, 2 * kPi, 0.0, 1.0}, ones) == 0.0);
  CHECK(cost_rmse({0.0, 2 * kPi, 0.0, 0.0}, ones) == doctest::Approx(1.0));
}

TEST_CASE("cost identities and invariances") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Sample> samples;
    for (int i = 0; i < 40; ++i) {
      samples.push_back({i / 30.0, noise(rng)});
    }
    const SineParams p = random_params(rng);
    const double sse = cost_sse(p, samples);
    const double rmse = cost_rmse(p, samples);
    CHECK(sse >= 0.0);
    CHECK(rmse * rmse * 40.0 == doctest::Approx(sse).epsilon(1e-12));

    std::vector<Sample> shuffled = samples;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(cost_sse(p, shuffled) == doctest::Approx(sse).epsilon(1e-12));
  }
}

TEST_CASE("SSE and RMSE order candidates identically") {
  std::mt19937_64 rng(5);
  std::vector<Sample> samples;
  std::normal_distribution<double> noise(0.0, 0.1);
  for (int i = 0; i < 60; ++i) {
    samples.push_back({i / 30.0, 0.8 + 0.02 * std::sin(11.5 * i / 30.0) + noise(rng)});
  }
  for (int i = 0; i < 200; ++i) {
    const SineParams a = random_params(rng);
    const SineParams b = random_params(rng);
    CHECK((cost_sse(a, samples) < cost_sse(b, samples)) ==
          (cost_rmse(a, samples) < cost_rmse(b, samples)));
  }
}

TEST_CASE("periodicity and amplitude-sign gauge") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> t_dist(0.0, 10.0);
  for (int i = 0; i < 500; ++i) {
    const SineParams p = random_params(rng);
    const double t = t_dist(rng);
    CHECK(std::abs(eval_sine(p, t + kTwoPi / p.omega) - eval_sine(p, t)) <= 1e-9);
    const SineParams flipped{-p.amplitude, p.omega, std::fmod(p.phase + kPi, kTwoPi), p.offset};
    CHECK(std::abs(eval_sine(flipped, t) - eval_sine(p, t)) <= 1e-9);
  }
}

TEST_CASE("frequency and depth conversions") {
  // Search bounds 2 pi .. 16 pi / 3 rad/s correspond to 60 .. 160 cpm.
  CHECK(omega_to_cpm(2 * kPi) == doctest::Approx(60.0).epsilon(1e-14));
  CHECK(omega_to_cpm(16 * kPi / 3) == doctest::Approx(160.0).epsilon(1e-14));
  CHECK(omega_to_cpm(kPi) == doctest::Approx(30.0).epsilon(1e-14));
  CHECK(cpm_to_omega(omega_to_cpm(7.3)) == doctest::Approx(7.3));

  const DepthReading d = amplitude_to_depth(0.025);
  CHECK(d.half_cm == doctest::Approx(2.5));
  CHECK(d.peak_to_peak_cm == doctest::Approx(5.0));
  const DepthReading neg = amplitude_to_depth(-0.025);
  CHECK(neg.half_cm == d.half_cm);
  CHECK(neg.peak_to_peak_cm == d.peak_to_peak_cm);
  CHECK(amplitude_to_depth(0.0).peak_to_peak_cm == 0.0);
}

TEST_CASE("default bounds") {
  const ParamBounds b;
  CHECK(b.amplitude == Interval{-2.0, 2.0});
  CHECK(b.offset == Interval{-2.0, 2.0});
  CHECK(b.phase == Interval{0.0, kTwoPi});
  CHECK(omega_to_cpm(b.omega.lo) == doctest::Approx(60.0));
  CHECK(omega_to_cpm(b.omega.hi) == doctest::Approx(160.0));
  CHECK_NOTHROW(b.validate());
  CHECK(b.contains({2.0, b.omega.hi, 0.0, -2.0}));

  ParamBounds bad = b;
  bad.omega = {3.0, 3.0};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("window validation") {
  CHECK_THROWS_AS(Window(constant_samples(7, 1.0), 0.0, 1.0), WindowTooSmallError);
  CHECK_NOTHROW(Window(constant_samples(8, 1.0), 0.0, 1.0));
  CHECK_THROWS_AS(Window(constant_samples(20, 1.0), 0.0, 0.3), WindowError);
  auto unordered = constant_samples(10, 1.0);
  std::swap(unordered[2], unordered[3]);
  CHECK_THROWS_AS(Window(unordered, 0.0, 1.0), WindowError);

  const Window w(constant_samples(10, 1.0), 0.0, 0.5);
  CHECK(w.size() == 10);
  CHECK(cost_sse({0.0, 2 * kPi, 0.0, 0.0}, w) == doctest::Approx(10.0));

  CHECK_THROWS_AS(cost_sse({}, std::span<const Sample>{}), WindowError);
}
