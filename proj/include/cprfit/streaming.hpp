#pragma once

// Sliding-window fitting over a joint-frame stream. Updates run on the frame
// clock: the first at first_frame.t + window_s, then every 1 / update_hz
// seconds while a frame at or beyond the update time exists. Each update fits
// the samples in (t_update - window_s, t_update].

#include "cprfit/de_optimizer.hpp"
#include "cprfit/geometry.hpp"
#include "cprfit/sinusoid.hpp"

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cprfit {

struct StreamConfig {
  double update_hz = 1.0; // f_U
  double window_s = 3.0;  // S_len
  JointType joint = JointType::shoulders;
  de::DEConfig de{};
  ParamBounds bounds{};
  /// Workers for fitting independent windows in offline replay; 0 = hardware.
  std::size_t jobs = 1;

  void validate() const;
  /// Non-fatal configuration concerns (e.g. window shorter than half the
  /// slowest admissible period).
  std::vector<std::string> warnings() const;
};

/// Time-ordered sample store that keeps only what pending windows still need.
class SampleBuffer {
public:
  /// Throws StreamOrderError unless t exceeds the newest buffered sample.
  void push(const Sample &sample);
  /// Samples with t in (end - length, end].
  std::vector<Sample> snapshot(double end, double length) const;
  /// Drops samples with t <= cutoff.
  void evict_through(double cutoff);

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }

private:
  std::deque<Sample> samples_;
};

/// Samples of a sorted sequence with t in (end - length, end].
std::vector<Sample> select_window(std::span<const Sample> sorted, double end, double length);

/// Update times for a gap-free stream spanning [first_t, last_t].
std::vector<double> update_times(double first_t, double last_t, const StreamConfig &cfg);

/// floor((duration - window_s) * update_hz) + 1, or 0 for streams shorter
/// than one window.
std::size_t expected_update_count(double duration, const StreamConfig &cfg);

/// Seed for window `index`: a bijective 64-bit mix of base + index step.
std::uint64_t derive_window_seed(std::uint64_t base_seed, std::size_t index);

/// Every window is an independent fresh run; `previous` is not carried over.
de::DEConfig independent_restart_policy(const FitResult *previous, const de::DEConfig &base,
                                        std::size_t window_index);

/// Fits one window with times rebased to window.start(). Candidates are
/// selected on SSE; cfg.value_to_reach is read as an RMSE threshold (meters)
/// and converted to SSE for the window's sample count. Throws OptimizerError
/// if the cost becomes non-finite.
FitResult fit_window(const Window &window, double t_update, const ParamBounds &bounds,
                     const de::DEConfig &cfg, de::DEOutcome *outcome = nullptr);

/// One scheduled update. `fit` is empty for a gap (too few samples).
struct WindowRecord {
  std::size_t index = 0;
  double t_update = 0.0;
  double window_start = 0.0;
  double window_end = 0.0;
  std::size_t n_samples = 0;
  std::optional<FitResult> fit;
  std::vector<double> cost_trace;

  bool is_gap() const { return !fit.has_value(); }
};

struct WindowJob {
  std::size_t index = 0;
  double t_update = 0.0;
  std::vector<Sample> samples;
};

class StreamingFitter {
public:
  /// Throws ConfigError for an invalid configuration.
  explicit StreamingFitter(StreamConfig cfg, bool keep_cost_trace = false);

  /// Ingests one frame and fits every update that became due.
  std::vector<WindowRecord> push(const JointFrame &frame);
  /// Ingests one frame and returns snapshots of due windows without fitting.
  std::vector<WindowJob> push_deferred(const JointFrame &frame);
  WindowRecord fit(const WindowJob &job) const;

  const IngestStats &stats() const { return stats_; }
  const StreamConfig &config() const { return cfg_; }

private:
  StreamConfig cfg_;
  bool keep_cost_trace_;
  SampleBuffer buffer_;
  IngestStats stats_;
  std::optional<double> first_t_;
  std::optional<double> last_t_;
  std::size_t next_index_ = 0;

  double update_time(std::size_t index) const;
};

struct StreamOutput {
  std::vector<WindowRecord> windows; // ordered by t_update
  IngestStats ingest;
  std::vector<std::string> warnings;

  std::vector<FitResult> fits() const;
  std::size_t gap_count() const;
};

StreamOutput run_stream(std::span<const JointFrame> frames, const StreamConfig &cfg,
                        bool keep_cost_trace = false);

} // namespace cprfit
