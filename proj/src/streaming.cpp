#include "cprfit/streaming.hpp"

#include "cprfit/errors.hpp"
#include "cprfit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace cprfit {

namespace {

// Samples older than the next window start by more than this are evicted.
constexpr double kEvictionSlack = 1.0;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

} // namespace

void StreamConfig::validate() const {
  if (!(update_hz > 0.0) || !std::isfinite(update_hz)) {
    throw ConfigError("update-hz", "f_U must be a finite positive number");
  }
  if (!(window_s > 0.0) || !std::isfinite(window_s)) {
    throw ConfigError("window-s", "S_len must be a finite positive number");
  }
  de.validate();
  bounds.validate();
}

std::vector<std::string> StreamConfig::warnings() const {
  std::vector<std::string> out;
  const double half_period = std::numbers::pi / bounds.omega.lo;
  if (window_s < half_period) {
    char msg[192];
    std::snprintf(msg, sizeof msg,
                  "window of %.9g s is shorter than half the period of the slowest admissible "
                  "frequency (%.9g s); the lower frequency bound cannot be resolved",
                  window_s, half_period);
    out.emplace_back(msg);
  }
  return out;
}

void SampleBuffer::push(const Sample &sample) {
  if (!samples_.empty() && !(sample.t > samples_.back().t)) {
    throw StreamOrderError("sample timestamps must strictly increase");
  }
  samples_.push_back(sample);
}

std::vector<Sample> SampleBuffer::snapshot(double end, double length) const {
  std::vector<Sample> out;
  const double lo = end - length + kTimeEpsilon;
  const double hi = end + kTimeEpsilon;
  auto first = std::partition_point(samples_.begin(), samples_.end(),
                                    [&](const Sample &s) { return s.t <= lo; });
  for (auto it = first; it != samples_.end() && it->t <= hi; ++it) {
    out.push_back(*it);
  }
  return out;
}

void SampleBuffer::evict_through(double cutoff) {
  while (!samples_.empty() && samples_.front().t <= cutoff) {
    samples_.pop_front();
  }
}

std::vector<Sample> select_window(std::span<const Sample> sorted, double end, double length) {
  const double lo = end - length + kTimeEpsilon;
  const double hi = end + kTimeEpsilon;
  auto first =
      std::partition_point(sorted.begin(), sorted.end(), [&](const Sample &s) { return s.t <= lo; });
  auto last =
      std::partition_point(first, sorted.end(), [&](const Sample &s) { return s.t <= hi; });
  return {first, last};
}

std::vector<double> update_times(double first_t, double last_t, const StreamConfig &cfg) {
  std::vector<double> times;
  for (std::size_t k = 0;; ++k) {
    const double t = first_t + cfg.window_s + static_cast<double>(k) / cfg.update_hz;
    if (t > last_t + kTimeEpsilon) {
      break;
    }
    times.push_back(t);
  }
  return times;
}

std::size_t expected_update_count(double duration, const StreamConfig &cfg) {
  if (duration + kTimeEpsilon < cfg.window_s) {
    return 0;
  }
  return static_cast<std::size_t>(std::floor((duration - cfg.window_s) * cfg.update_hz + 1e-9)) + 1;
}

std::uint64_t derive_window_seed(std::uint64_t base_seed, std::size_t index) {
  return mix64(base_seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(index) + 1));
}

de::DEConfig independent_restart_policy(const FitResult * /*previous*/, const de::DEConfig &base,
                                        std::size_t window_index) {
  de::DEConfig cfg = base;
  cfg.seed = derive_window_seed(base.seed, window_index);
  return cfg;
}

FitResult fit_window(const Window &window, double t_update, const ParamBounds &bounds,
                     const de::DEConfig &cfg, de::DEOutcome *outcome) {
  std::vector<Sample> local(window.samples().begin(), window.samples().end());
  for (Sample &s : local) {
    s.t -= window.start();
  }
  const auto box = bounds.to_array();
  const de::CostFunction cost = [&local](std::span<const double> x) {
    return cost_sse(SineParams::from_span(x), local);
  };
  // VTR is an RMSE threshold; the optimizer compares it against SSE.
  de::DEConfig run_cfg = cfg;
  if (cfg.value_to_reach > 0.0) {
    run_cfg.value_to_reach =
        cfg.value_to_reach * cfg.value_to_reach * static_cast<double>(local.size());
  }
  de::DEOutcome result = de::optimize(cost, box, run_cfg);

  FitResult fit;
  fit.params = SineParams::from_span(result.best.x);
  fit.sse = result.best.cost;
  fit.rmse = std::sqrt(fit.sse / static_cast<double>(local.size()));
  fit.window_start = window.start();
  fit.window_end = window.end();
  fit.t_update = t_update;
  fit.n_samples = local.size();
  fit.generations_run = result.generations_run;
  fit.converged_by_vtr = result.converged_by_vtr;
  if (outcome) {
    *outcome = std::move(result);
  }
  return fit;
}

StreamingFitter::StreamingFitter(StreamConfig cfg, bool keep_cost_trace)
    : cfg_(std::move(cfg)), keep_cost_trace_(keep_cost_trace) {
  cfg_.validate();
}

double StreamingFitter::update_time(std::size_t index) const {
  return *first_t_ + cfg_.window_s + static_cast<double>(index) / cfg_.update_hz;
}

std::vector<WindowJob> StreamingFitter::push_deferred(const JointFrame &frame) {
  if (last_t_ && !(frame.t > *last_t_)) {
    char msg[160];
    std::snprintf(msg, sizeof msg, "frame at t=%.9g does not follow previous frame at t=%.9g",
                  frame.t, *last_t_);
    throw StreamOrderError(msg);
  }
  if (!std::isfinite(frame.t)) {
    throw InvalidFrameError("frame timestamp is not finite");
  }
  last_t_ = frame.t;
  if (!first_t_) {
    first_t_ = frame.t;
  }
  ++stats_.frames;
  if (auto sample = frame_to_sample(frame, cfg_.joint)) {
    buffer_.push(*sample);
    ++stats_.samples;
  } else {
    ++stats_.skipped_missing_joint;
  }

  std::vector<WindowJob> due;
  while (update_time(next_index_) <= frame.t + kTimeEpsilon) {
    const double t = update_time(next_index_);
    due.push_back({next_index_, t, buffer_.snapshot(t, cfg_.window_s)});
    ++next_index_;
  }
  buffer_.evict_through(update_time(next_index_) - cfg_.window_s - kEvictionSlack);
  return due;
}

WindowRecord StreamingFitter::fit(const WindowJob &job) const {
  WindowRecord rec;
  rec.index = job.index;
  rec.t_update = job.t_update;
  rec.window_start = job.t_update - cfg_.window_s;
  rec.window_end = job.t_update;
  rec.n_samples = job.samples.size();
  if (job.samples.size() < kMinWindowSamples) {
    return rec;
  }
  const Window window(job.samples, rec.window_start, rec.window_end);
  const de::DEConfig run_cfg = independent_restart_policy(nullptr, cfg_.de, job.index);
  de::DEOutcome outcome;
  rec.fit = fit_window(window, job.t_update, cfg_.bounds, run_cfg, &outcome);
  if (keep_cost_trace_) {
    rec.cost_trace = std::move(outcome.cost_trace);
  }
  return rec;
}

std::vector<WindowRecord> StreamingFitter::push(const JointFrame &frame) {
  std::vector<WindowRecord> out;
  for (const WindowJob &job : push_deferred(frame)) {
    out.push_back(fit(job));
  }
  return out;
}

std::vector<FitResult> StreamOutput::fits() const {
  std::vector<FitResult> out;
  for (const WindowRecord &w : windows) {
    if (w.fit) {
      out.push_back(*w.fit);
    }
  }
  return out;
}

std::size_t StreamOutput::gap_count() const {
  return static_cast<std::size_t>(
      std::count_if(windows.begin(), windows.end(), [](const WindowRecord &w) { return w.is_gap(); }));
}

StreamOutput run_stream(std::span<const JointFrame> frames, const StreamConfig &cfg,
                        bool keep_cost_trace) {
  StreamingFitter fitter(cfg, keep_cost_trace);
  std::vector<WindowJob> jobs;
  for (const JointFrame &frame : frames) {
    for (WindowJob &job : fitter.push_deferred(frame)) {
      jobs.push_back(std::move(job));
    }
  }
  StreamOutput out;
  out.windows.resize(jobs.size());
  parallel_for(jobs.size(), cfg.jobs, [&](std::size_t i) { out.windows[i] = fitter.fit(jobs[i]); });
  std::sort(out.windows.begin(), out.windows.end(),
            [](const WindowRecord &a, const WindowRecord &b) { return a.t_update < b.t_update; });
  out.ingest = fitter.stats();
  out.warnings = cfg.warnings();
  return out;
}

} // namespace cprfit
