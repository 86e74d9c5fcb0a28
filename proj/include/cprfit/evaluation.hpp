#pragma once

// Comparison of windowed model predictions with reference compression
// events, median-absolute-error sweeps over system and optimizer settings,
// and correlation-ratio sensitivity of the resulting errors.

#include "cprfit/geometry.hpp"
#include "cprfit/sinusoid.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cprfit {

/// One reference compression cycle as logged by the mannequin.
struct CompressionEvent {
  double start = 0.0;
  double end = 0.0;
  double depth_cm = 0.0;
  double freq_cpm = 0.0;

  /// Throws ConfigError unless start < end, depth >= 0, freq > 0.
  void validate() const;

  friend bool operator==(const CompressionEvent &, const CompressionEvent &) = default;
};

/// |[w0, w1] intersect [e0, e1]| / (w1 - w0), in [0, 1].
double overlap_ratio(double w0, double w1, double e0, double e1);

/// sum(w_i v_i) / sum(w_i). Throws Error if the weights sum to zero.
double weighted_mean(std::span<const double> values, std::span<const double> weights);

struct Contribution {
  std::size_t fit_index = 0; ///< index into the fits passed to combine_predictions
  double sigma = 0.0;
};

struct AlignedPrediction {
  CompressionEvent event;
  double p_freq = 0.0;  ///< cpm
  double p_depth = 0.0; ///< cm, peak to peak
  std::vector<Contribution> contributing;
};

/// Overlap-weighted mean of every fit whose window overlaps the event.
/// nullopt when no fit overlaps it.
std::optional<AlignedPrediction> combine_predictions(const CompressionEvent &event,
                                                     std::span<const FitResult> fits);

/// Median of |predicted - reference|; the mean of the two middle values for
/// an even count. nullopt for an empty list.
std::optional<double> median_abs_error(std::span<const std::pair<double, double>> pairs);

enum class EventStatus { aligned, warmup, unaligned };

std::string_view to_string(EventStatus status);

struct EventEvaluation {
  CompressionEvent event;
  EventStatus status = EventStatus::unaligned;
  std::optional<AlignedPrediction> prediction;
};

struct EvaluationReport {
  std::size_t n_events = 0;
  std::size_t n_aligned = 0;
  /// Events ending before the first fitted window starts producing output.
  std::size_t n_warmup = 0;
  std::size_t n_unaligned = 0;
  std::optional<double> mae_cpm;
  std::optional<double> mae_cm;
  std::vector<EventEvaluation> events;
  std::vector<std::pair<double, double>> freq_pairs;  ///< (predicted, reference)
  std::vector<std::pair<double, double>> depth_pairs; ///< (predicted, reference)
};

EvaluationReport evaluate_predictions(std::span<const CompressionEvent> events,
                                      std::span<const FitResult> fits);

// ---------------------------------------------------------------------------
// Sweeps

struct Trial {
  std::string name;
  std::vector<JointFrame> frames;
  std::vector<CompressionEvent> events;
};

struct SweepPoint {
  JointType joint = JointType::shoulders;
  double update_hz = 1.0;
  double window_s = 3.0;
  std::size_t np = 50;
  std::size_t g_max = 500;

  friend bool operator==(const SweepPoint &, const SweepPoint &) = default;
};

/// Cartesian product of the listed values.
struct GridBlock {
  std::vector<JointType> joints;
  std::vector<double> update_hz;
  std::vector<double> window_s;
  std::vector<std::size_t> np;
  std::vector<std::size_t> g_max;
};

struct SweepGrid {
  std::vector<GridBlock> blocks;
  double crossover_rate = 0.5;
  double amplification = 0.8;
  double value_to_reach = 1e-4;
  std::uint64_t seed = 42;

  /// Two blocks: all joints over window lengths {1..5} s and update rates
  /// {0.25..2} Hz at NP=50, G_max=500; then shoulders at 1 Hz / 3 s over
  /// NP {10..100, 150, 200} and G_max {10..100}.
  static SweepGrid standard();

  /// Distinct points in block order.
  std::vector<SweepPoint> points() const;
};

struct SweepCell {
  SweepPoint point;
  std::optional<double> mae_freq; ///< cpm
  std::optional<double> mae_depth; ///< cm
  std::size_t n_events = 0;        ///< aligned events pooled over trials
};

/// Seed of one (cell, trial) run; depends only on the cell's values.
std::uint64_t derive_cell_seed(std::uint64_t base_seed, const SweepPoint &point,
                               std::size_t trial_index);

/// Runs every grid point over every trial, pooling aligned events across
/// trials before taking medians. Output order follows SweepGrid::points().
std::vector<SweepCell> run_sweep(std::span<const Trial> trials, const SweepGrid &grid,
                                 std::size_t jobs = 1);

// ---------------------------------------------------------------------------
// Sensitivity

/// Var[E(Y|X)] / Var(Y) with population variances. Levels are grouped by
/// exact equality. Throws SensitivityError with fewer than two levels or
/// when Var(Y) = 0.
double correlation_ratio(std::span<const std::pair<double, double>> level_and_value);
double correlation_ratio(std::span<const std::pair<std::string, double>> level_and_value);

enum class SensitivityTarget { mae_cpm, mae_cm };

std::string_view to_string(SensitivityTarget target);
std::optional<SensitivityTarget> parse_sensitivity_target(std::string_view name);

struct SensitivityRow {
  std::string variable; ///< sweep CSV column name
  SensitivityTarget target = SensitivityTarget::mae_cpm;
  std::optional<double> value; ///< empty when undefined for this sweep
};

/// One row per sweep variable that takes at least two levels. Cells without
/// a value for the target are ignored.
std::vector<SensitivityRow> sensitivity(std::span<const SweepCell> cells, SensitivityTarget target);

} // namespace cprfit
