#include "cprfit/errors.hpp"
#include "cprfit/streaming.hpp"
#include "cprfit/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace cprfit;

namespace {

// Gap-free 30 Hz stream over [0, n_frames / 30) with a shoulder sinusoid.
std::vector<JointFrame> simple_stream(std::size_t n_frames, double cpm = 110.0) {
  std::vector<JointFrame> frames(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    const double t = static_cast<double>(i) / 30.0;
    const double h = 0.7 + 0.025 * std::sin(cpm_to_omega(cpm) * t);
    frames[i].t = t;
    frames[i].joint(JointType::shoulders) = JointPair{{-0.2, h, 1.0}, {0.2, h, 1.0}};
  }
  return frames;
}

StreamConfig cheap_config() {
  StreamConfig cfg;
  cfg.de.population_size = 4;
  cfg.de.max_generations = 1;
  return cfg;
}

} // namespace

TEST_CASE("first fit after one window, then one per update period") {
  const auto frames = simple_stream(3601); // t = 0 .. 120
  const StreamOutput out = run_stream(frames, cheap_config());
  REQUIRE(out.windows.size() == 118);
  for (std::size_t k = 0; k < out.windows.size(); ++k) {
    CHECK(out.windows[k].t_update == doctest::Approx(3.0 + static_cast<double>(k)));
    CHECK(out.windows[k].fit.has_value());
  }
  CHECK(out.windows.back().t_update == doctest::Approx(120.0));
  CHECK(expected_update_count(120.0, cheap_config()) == 118);

  const auto synth_frames = simple_stream(3600); // t = 0 .. 119.967
  CHECK(run_stream(synth_frames, cheap_config()).windows.size() == 117);
}

TEST_CASE("update count formula holds on gap-free streams") {
  for (double hz : {0.25, 0.5, 0.75, 1.0, 1.5, 2.0}) {
    for (double len : {1.0, 2.0, 3.0, 4.0, 5.0}) {
      for (std::size_t n : {30u, 150u, 451u, 907u}) {
        StreamConfig cfg = cheap_config();
        cfg.update_hz = hz;
        cfg.window_s = len;
        const auto frames = simple_stream(n);
        const double duration = frames.back().t - frames.front().t;
        const StreamOutput out = run_stream(frames, cfg);
        CHECK(out.windows.size() == expected_update_count(duration, cfg));
        const auto times = update_times(frames.front().t, frames.back().t, cfg);
        REQUIRE(times.size() == out.windows.size());
        for (std::size_t k = 0; k < times.size(); ++k) {
          CHECK(out.windows[k].t_update == times[k]);
          if (k > 0) {
            CHECK(times[k] - times[k - 1] == doctest::Approx(1.0 / hz));
          }
        }
      }
    }
  }
}

TEST_CASE("windows never hold samples newer than their update time") {
  StreamConfig cfg = cheap_config();
  cfg.update_hz = 1.5;
  cfg.window_s = 2.0;
  StreamingFitter fitter(cfg);
  std::size_t jobs = 0;
  for (const JointFrame &f : simple_stream(900)) {
    for (const WindowJob &job : fitter.push_deferred(f)) {
      ++jobs;
      for (const Sample &s : job.samples) {
        CHECK(s.t <= job.t_update + kTimeEpsilon);
        CHECK(s.t > job.t_update - cfg.window_s);
      }
      CHECK(job.samples.size() == 60);
    }
  }
  CHECK(jobs > 0);
}

TEST_CASE("adjacent windows partition samples when the window equals the update period") {
  StreamConfig cfg = cheap_config();
  cfg.update_hz = 1.0;
  cfg.window_s = 1.0;
  StreamingFitter fitter(cfg);
  std::set<double> seen;
  std::size_t total = 0;
  for (const JointFrame &f : simple_stream(301)) {
    for (const WindowJob &job : fitter.push_deferred(f)) {
      for (const Sample &s : job.samples) {
        seen.insert(s.t);
        ++total;
      }
    }
  }
  CHECK(total == seen.size()); // no sample in two windows
  CHECK(total == 300);         // every sample after t = 0 is covered once
}

TEST_CASE("slow updates with long windows interleave") {
  StreamConfig cfg = cheap_config();
  cfg.update_hz = 0.25;
  cfg.window_s = 5.0;
  const StreamOutput out = run_stream(simple_stream(600), cfg);
  REQUIRE(out.windows.size() >= 3);
  CHECK(out.windows[0].t_update == doctest::Approx(5.0));
  CHECK(out.windows[1].t_update == doctest::Approx(9.0));
  // Consecutive windows (0,5] and (4,9] share one second.
  CHECK(out.windows[0].window_end - out.windows[1].window_start == doctest::Approx(1.0));
}

TEST_CASE("windows with too few samples become gap markers") {
  auto frames = simple_stream(600);
  for (auto &f : frames) {
    if (f.t > 5.0 && f.t < 9.0) {
      f.joint(JointType::shoulders).reset();
    }
  }
  const StreamOutput out = run_stream(frames, cheap_config());
  std::size_t gaps = 0;
  for (const WindowRecord &w : out.windows) {
    if (w.is_gap()) {
      ++gaps;
      CHECK(w.n_samples < kMinWindowSamples);
      CHECK(w.t_update > 7.5);
      CHECK(w.t_update < 9.5);
    }
  }
  CHECK(gaps == out.gap_count());
  CHECK(gaps == 2); // (5,8] is empty, (6,9] holds only t = 9
  CHECK(out.ingest.skipped_missing_joint == 119);
}

TEST_CASE("short windows raise a configuration warning") {
  StreamConfig cfg;
  cfg.window_s = 0.4;
  CHECK_FALSE(cfg.warnings().empty());
  cfg.window_s = 3.0;
  CHECK(cfg.warnings().empty());
}

TEST_CASE("configuration validation") {
  StreamConfig cfg;
  cfg.update_hz = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.window_s = -1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.de.population_size = 3;
  CHECK_THROWS_AS(StreamingFitter{cfg}, ConfigError);
}

TEST_CASE("per-window seeds") {
  CHECK(derive_window_seed(42, 0) == derive_window_seed(42, 0));
  CHECK(derive_window_seed(42, 0) != derive_window_seed(43, 0));
  std::set<std::uint64_t> seeds;
  for (std::size_t i = 0; i < 20000; ++i) {
    seeds.insert(derive_window_seed(42, i));
  }
  CHECK(seeds.size() == 20000);

  de::DEConfig base;
  base.seed = 42;
  const de::DEConfig run = independent_restart_policy(nullptr, base, 0);
  CHECK(run.seed == derive_window_seed(42, 0));
  CHECK(run.population_size == base.population_size);
  FitResult prev;
  CHECK(independent_restart_policy(&prev, base, 5).seed == derive_window_seed(42, 5));
}

TEST_CASE("stream ordering is enforced") {
  auto frames = simple_stream(100);
  frames[50].t = frames[49].t;
  CHECK_THROWS_AS(run_stream(frames, cheap_config()), StreamOrderError);

  SampleBuffer buffer;
  buffer.push({1.0, 0.0});
  CHECK_THROWS_AS(buffer.push({1.0, 0.0}), StreamOrderError);
  buffer.push({2.0, 0.0});
  buffer.push({3.0, 0.0});
  buffer.evict_through(2.0);
  CHECK(buffer.size() == 1);
}

TEST_CASE("select_window matches the buffer snapshot") {
  std::vector<Sample> samples;
  SampleBuffer buffer;
  for (int i = 0; i < 200; ++i) {
    samples.push_back({i / 30.0, 0.0});
    buffer.push(samples.back());
  }
  for (double end : {3.0, 4.5, 6.6}) {
    CHECK(select_window(samples, end, 3.0) == buffer.snapshot(end, 3.0));
  }
}

TEST_CASE("noiseless 110 cpm stream is recovered in every window") {
  SynthSpec spec;
  spec.duration_s = 20.0;
  const Dataset data = generate(spec);
  StreamConfig cfg;
  cfg.de.max_generations = 500;
  const StreamOutput out = run_stream(data.frames, cfg);
  REQUIRE(out.windows.size() == 17);
  for (const FitResult &f : out.fits()) {
    CHECK(std::abs(f.cpm() - 110.0) <= 0.5);
    CHECK(f.rmse == doctest::Approx(std::sqrt(f.sse / static_cast<double>(f.n_samples))));
    CHECK(f.window_end - f.window_start == doctest::Approx(3.0));
    CHECK(cfg.bounds.contains(f.params));
  }
}

TEST_CASE("replay is deterministic regardless of workers or live ingestion") {
  SynthSpec spec;
  spec.duration_s = 12.0;
  spec.noise_cm = 1.0;
  const Dataset data = generate(spec);
  StreamConfig cfg;
  cfg.de.max_generations = 40;
  const auto a = run_stream(data.frames, cfg).fits();
  const auto b = run_stream(data.frames, cfg).fits();
  CHECK(a == b);
  cfg.jobs = 3;
  CHECK(run_stream(data.frames, cfg).fits() == a);

  cfg.jobs = 1;
  StreamingFitter live(cfg);
  std::vector<FitResult> pushed;
  for (const JointFrame &f : data.frames) {
    for (const WindowRecord &r : live.push(f)) {
      if (r.fit) {
        pushed.push_back(*r.fit);
      }
    }
  }
  CHECK(pushed == a);
}

TEST_CASE("cost traces are kept on request") {
  StreamConfig cfg;
  cfg.de.max_generations = 15;
  cfg.de.value_to_reach = -1.0;
  const StreamOutput out = run_stream(simple_stream(200), cfg, true);
  REQUIRE_FALSE(out.windows.empty());
  for (const WindowRecord &w : out.windows) {
    CHECK(w.cost_trace.size() == 16);
    for (std::size_t g = 1; g < w.cost_trace.size(); ++g) {
      CHECK(w.cost_trace[g] <= w.cost_trace[g - 1]);
    }
  }
}
