#include "cprfit/errors.hpp"
#include "cprfit/geometry.hpp"
#include "cprfit/io.hpp"
#include "cprfit/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace cprfit;

namespace {

// Composite Simpson over [0, t] on a fine grid; reference for Schedule::cycles.
double simpson_cycles(const Schedule &s, double t) {
  const int n = 20000;
  const double h = t / n;
  double acc = s.cpm(0.0) + s.cpm(t);
  for (int i = 1; i < n; ++i) {
    acc += (i % 2 ? 4.0 : 2.0) * s.cpm(i * h);
  }
  return acc * h / 3.0 / 60.0;
}

// Signed distance of p from the plane n.x - a = 0, computed by projecting
// onto the normalized normal.
double projected_distance(Vec3 n, double a, Vec3 p) {
  const double len = std::hypot(n.x, n.y, n.z);
  return (p.x * n.x / len + p.y * n.y / len + p.z * n.z / len) - a / len;
}

} // namespace

TEST_CASE("constant schedule, 120 s") {
  SynthSpec spec;
  const Dataset data = generate(spec);
  CHECK(data.frames.size() == 3600);
  // 110 cpm over the 119.967 s covered by frames: 219 complete cycles.
  CHECK(data.events.size() >= 218);
  CHECK(data.events.size() <= 220);
  for (const CompressionEvent &e : data.events) {
    CHECK(e.freq_cpm == 110.0);
    CHECK(e.depth_cm == 5.0);
    CHECK(e.end - e.start == doctest::Approx(60.0 / 110.0).epsilon(1e-9));
  }
  CHECK(data.events.front().start == 0.0);
  CHECK(data.events.back().end <= data.frames.back().t);
}

TEST_CASE("noiseless axis plane reproduces d(t)") {
  SynthSpec spec;
  spec.duration_s = 10.0;
  const Dataset data = generate(spec);
  for (const JointFrame &f : data.frames) {
    for (JointType j : kAllJointTypes) {
      const auto s = frame_to_sample(f, j);
      REQUIRE(s);
      const double expected = spec.baseline_m[static_cast<std::size_t>(j)] +
                              0.025 * std::sin(std::numbers::pi / 2 + 2 * std::numbers::pi * 110.0 / 60.0 * f.t);
      CHECK(std::abs(s->d - expected) <= 1e-12);
    }
  }
}

TEST_CASE("rotated plane gives the same distances as the axis-aligned twin") {
  SynthSpec axis;
  axis.duration_s = 10.0;
  SynthSpec rotated = axis;
  rotated.plane = FloorPlane({1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0}, 0.4);
  SynthSpec scaled = axis;
  scaled.plane = FloorPlane({-2.0, 0.5, 3.0}, -1.7);

  const Dataset a = generate(axis);
  const Dataset b = generate(rotated);
  const Dataset c = generate(scaled);
  REQUIRE(a.frames.size() == b.frames.size());
  CHECK(a.events == b.events);
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    for (JointType j : kAllJointTypes) {
      const double da = frame_to_sample(a.frames[i], j)->d;
      const double db = frame_to_sample(b.frames[i], j)->d;
      const double dc = frame_to_sample(c.frames[i], j)->d;
      CHECK(std::abs(da - db) <= 1e-9);
      CHECK(std::abs(da - dc) <= 1e-9);
      const JointPair &p = *b.frames[i].joint(j);
      const Vec3 mid = 0.5 * (p.left + p.right);
      CHECK(std::abs(projected_distance(rotated.plane.normal(), 0.4, mid) - da) <= 1e-9);
    }
  }
}

TEST_CASE("events tile the timeline") {
  SynthSpec spec;
  spec.duration_s = 60.0;
  spec.schedule = Schedule({{0.0, 80.0, 4.0}, {20.0, 80.0, 4.0}, {40.0, 140.0, 6.0}});
  spec.phase0 = 0.3;
  const Dataset data = generate(spec);
  REQUIRE(data.events.size() > 50);
  for (std::size_t i = 0; i < data.events.size(); ++i) {
    const CompressionEvent &e = data.events[i];
    CHECK(e.start < e.end);
    CHECK(e.freq_cpm >= 80.0 - 1e-9);
    CHECK(e.freq_cpm <= 140.0 + 1e-9);
    if (i + 1 < data.events.size()) {
      CHECK(e.end <= data.events[i + 1].start);
      CHECK(e.end == doctest::Approx(data.events[i + 1].start).epsilon(1e-12));
    }
    // Each event spans exactly one cycle.
    CHECK(synth_phase(spec, e.end) - synth_phase(spec, e.start) ==
          doctest::Approx(2 * std::numbers::pi).epsilon(1e-9));
    CHECK(std::sin(synth_phase(spec, e.start)) == doctest::Approx(1.0).epsilon(1e-9));
  }
  // Started mid-cycle, so the first event begins at the first top after 0.
  CHECK(data.events.front().start > 0.0);
}

TEST_CASE("schedule cycles match quadrature") {
  const Schedule ramp({{5.0, 60.0, 5.0}, {25.0, 150.0, 5.0}, {25.0, 100.0, 5.0}, {40.0, 100.0, 3.0}});
  for (double t : {0.0, 3.0, 5.0, 10.0, 24.999, 25.0, 33.3, 40.0, 70.0}) {
    // Quadrature on either side of the step keeps Simpson exact for linear pieces.
    const double reference = t < 25.0 ? simpson_cycles(ramp, t)
                                      : simpson_cycles(ramp, 25.0 - 1e-10) + (t - 25.0) * 100.0 / 60.0;
    CHECK(ramp.cycles(t) == doctest::Approx(reference).epsilon(1e-9));
  }
  CHECK(ramp.cpm(25.0) == 100.0);
  CHECK(ramp.cpm(15.0) == doctest::Approx(105.0));
  CHECK(ramp.depth_cm(32.5) == doctest::Approx(4.0));
  CHECK(Schedule::constant(120, 5).cycles(30.0) == doctest::Approx(60.0));
}

TEST_CASE("phase is continuous across schedule changes") {
  SynthSpec spec;
  spec.schedule = Schedule({{0.0, 100.0, 5.0}, {10.0, 100.0, 5.0}, {10.0, 130.0, 5.0}});
  const double before = synth_phase(spec, 10.0 - 1e-9);
  const double after = synth_phase(spec, 10.0 + 1e-9);
  CHECK(std::abs(after - before) < 1e-6);
  CHECK(std::abs(synth_distance(spec, JointType::hands, 10.0 + 1e-9) -
                 synth_distance(spec, JointType::hands, 10.0 - 1e-9)) < 1e-8);
}

TEST_CASE("determinism and seeds") {
  SynthSpec spec;
  spec.duration_s = 5.0;
  spec.noise_cm = 1.0;
  spec.dropout_prob = 0.1;
  CHECK(generate(spec).frames == generate(spec).frames);
  SynthSpec other = spec;
  other.seed = 43;
  CHECK_FALSE(generate(spec).frames == generate(other).frames);
}

TEST_CASE("noise is along the normal and has the requested spread") {
  SynthSpec spec;
  spec.duration_s = 200.0;
  spec.noise_cm = 1.0;
  const Dataset data = generate(spec);
  double sum = 0.0;
  double sum2 = 0.0;
  for (const JointFrame &f : data.frames) {
    const double r = frame_to_sample(f, JointType::wrists)->d - synth_distance(spec, JointType::wrists, f.t);
    sum += r;
    sum2 += r * r;
  }
  const double n = static_cast<double>(data.frames.size());
  CHECK(std::abs(sum / n) < 0.001);
  CHECK(std::sqrt(sum2 / n) == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("dropout removes joints") {
  SynthSpec spec;
  spec.duration_s = 100.0;
  spec.dropout_prob = 0.25;
  const Dataset data = generate(spec);
  std::size_t missing = 0;
  for (const JointFrame &f : data.frames) {
    for (JointType j : kAllJointTypes) {
      missing += f.joint(j).has_value() ? 0 : 1;
    }
  }
  const double rate = static_cast<double>(missing) / (4.0 * data.frames.size());
  CHECK(rate == doctest::Approx(0.25).epsilon(0.05));

  spec.dropout_prob = 1.0;
  const Dataset empty = generate(spec);
  CHECK(frames_to_samples(empty.frames, JointType::shoulders).empty());
}

TEST_CASE("invalid specs") {
  CHECK_THROWS_AS(Schedule({}), ConfigError);
  CHECK_THROWS_AS(Schedule({{0, 250, 5}}), ConfigError);
  CHECK_THROWS_AS(Schedule({{0, 20, 5}}), ConfigError);
  CHECK_THROWS_AS(Schedule({{0, 100, -1}}), ConfigError);
  CHECK_THROWS_AS(Schedule({{5, 100, 5}, {1, 100, 5}}), ConfigError);
  SynthSpec spec;
  spec.frame_rate = 0.0;
  CHECK_THROWS_AS(generate(spec), ConfigError);
  spec = SynthSpec{};
  spec.noise_cm = -1.0;
  CHECK_THROWS_AS(generate(spec), ConfigError);
  spec = SynthSpec{};
  spec.dropout_prob = 1.5;
  CHECK_THROWS_AS(generate(spec), ConfigError);
}

TEST_CASE("write_dataset") {
  const auto dir = std::filesystem::temp_directory_path() / "cprfit_synth_test";
  std::filesystem::create_directories(dir);
  SynthSpec spec;
  const Dataset data = generate(spec);
  write_dataset(data, dir / "a.frames.jsonl", dir / "a.events.csv");
  CHECK(io::read_frames_jsonl(dir / "a.frames.jsonl") == data.frames);
  const auto events = io::read_events_csv(dir / "a.events.csv");
  REQUIRE(events.size() == data.events.size());
  for (std::size_t i = 0; i < events.size(); ++i) {
    // Event CSV carries nine significant digits.
    CHECK(events[i].start == doctest::Approx(data.events[i].start).epsilon(1e-8));
    CHECK(events[i].end == doctest::Approx(data.events[i].end).epsilon(1e-8));
    CHECK(events[i].freq_cpm == data.events[i].freq_cpm);
  }
  const std::string text = io::read_text_file(dir / "a.frames.jsonl");
  CHECK(std::count(text.begin(), text.end(), '\n') == 3600);
  std::filesystem::remove_all(dir);
}
