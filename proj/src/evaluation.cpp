#include "cprfit/evaluation.hpp"

#include "cprfit/errors.hpp"
#include "cprfit/parallel.hpp"
#include "cprfit/streaming.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numbers>

namespace cprfit {

void CompressionEvent::validate() const {
  if (!std::isfinite(start) || !std::isfinite(end) || !(start < end)) {
    throw ConfigError("event", "start must precede end");
  }
  if (!(depth_cm >= 0.0) || !std::isfinite(depth_cm)) {
    throw ConfigError("event", "depth must be non-negative");
  }
  if (!(freq_cpm > 0.0) || !std::isfinite(freq_cpm)) {
    throw ConfigError("event", "frequency must be positive");
  }
}

double overlap_ratio(double w0, double w1, double e0, double e1) {
  const double length = w1 - w0;
  if (!(length > 0.0)) {
    return 0.0;
  }
  const double overlap = std::min(w1, e1) - std::max(w0, e0);
  return overlap > 0.0 ? std::min(1.0, overlap / length) : 0.0;
}

double weighted_mean(std::span<const double> values, std::span<const double> weights) {
  // Weights are taken relative to the largest one: equal weights become
  // exactly 1, so the result is then the plain arithmetic mean, and a uniform
  // power-of-two rescaling leaves every term bit-identical.
  double top = 0.0;
  for (double w : weights) {
    top = std::max(top, w);
  }
  if (!(top > 0.0) || !std::isfinite(top)) {
    throw Error("weighted mean needs a positive total weight");
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = weights[i] / top;
    num += w * values[i];
    den += w;
  }
  return num / den;
}

std::optional<AlignedPrediction> combine_predictions(const CompressionEvent &event,
                                                     std::span<const FitResult> fits) {
  AlignedPrediction out;
  out.event = event;
  std::vector<double> weights;
  std::vector<double> freqs;
  std::vector<double> depths;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    const double sigma =
        overlap_ratio(fits[i].window_start, fits[i].window_end, event.start, event.end);
    if (sigma > 0.0) {
      out.contributing.push_back({i, sigma});
      weights.push_back(sigma);
      freqs.push_back(fits[i].cpm());
      depths.push_back(fits[i].depth_p2p_cm());
    }
  }
  if (weights.empty()) {
    return std::nullopt;
  }
  out.p_freq = weighted_mean(freqs, weights);
  out.p_depth = weighted_mean(depths, weights);
  return out;
}

std::optional<double> median_abs_error(std::span<const std::pair<double, double>> pairs) {
  if (pairs.empty()) {
    return std::nullopt;
  }
  std::vector<double> errors;
  errors.reserve(pairs.size());
  for (const auto &[predicted, reference] : pairs) {
    errors.push_back(std::abs(predicted - reference));
  }
  std::sort(errors.begin(), errors.end());
  const std::size_t n = errors.size();
  if (n % 2 == 1) {
    return errors[n / 2];
  }
  return (errors[n / 2 - 1] + errors[n / 2]) / 2.0;
}

std::string_view to_string(EventStatus status) {
  switch (status) {
  case EventStatus::aligned: return "aligned";
  case EventStatus::warmup: return "warmup";
  case EventStatus::unaligned: return "unaligned";
  }
  return "unknown";
}

EvaluationReport evaluate_predictions(std::span<const CompressionEvent> events,
                                      std::span<const FitResult> fits) {
  EvaluationReport report;
  report.n_events = events.size();
  std::optional<double> first_update;
  for (const FitResult &f : fits) {
    if (!first_update || f.t_update < *first_update) {
      first_update = f.t_update;
    }
  }
  for (const CompressionEvent &event : events) {
    EventEvaluation ev;
    ev.event = event;
    ev.prediction = combine_predictions(event, fits);
    if (ev.prediction) {
      ev.status = EventStatus::aligned;
      ++report.n_aligned;
      report.freq_pairs.emplace_back(ev.prediction->p_freq, event.freq_cpm);
      report.depth_pairs.emplace_back(ev.prediction->p_depth, event.depth_cm);
    } else if (first_update && event.end <= *first_update) {
      ev.status = EventStatus::warmup;
      ++report.n_warmup;
    } else {
      ev.status = EventStatus::unaligned;
      ++report.n_unaligned;
    }
    report.events.push_back(std::move(ev));
  }
  report.mae_cpm = median_abs_error(report.freq_pairs);
  report.mae_cm = median_abs_error(report.depth_pairs);
  return report;
}

SweepGrid SweepGrid::standard() {
  SweepGrid grid;
  GridBlock system;
  system.joints.assign(kAllJointTypes.begin(), kAllJointTypes.end());
  system.update_hz = {0.25, 0.5, 0.75, 1.0, 1.5, 2.0};
  system.window_s = {1.0, 2.0, 3.0, 4.0, 5.0};
  system.np = {50};
  system.g_max = {500};
  grid.blocks.push_back(system);

  GridBlock optimizer;
  optimizer.joints = {JointType::shoulders};
  optimizer.update_hz = {1.0};
  optimizer.window_s = {3.0};
  optimizer.np = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100, 150, 200};
  optimizer.g_max = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  grid.blocks.push_back(optimizer);
  return grid;
}

std::vector<SweepPoint> SweepGrid::points() const {
  std::vector<SweepPoint> out;
  for (const GridBlock &b : blocks) {
    for (JointType joint : b.joints) {
      for (double hz : b.update_hz) {
        for (double len : b.window_s) {
          for (std::size_t np : b.np) {
            for (std::size_t g : b.g_max) {
              const SweepPoint p{joint, hz, len, np, g};
              if (std::find(out.begin(), out.end(), p) == out.end()) {
                out.push_back(p);
              }
            }
          }
        }
      }
    }
  }
  return out;
}

std::uint64_t derive_cell_seed(std::uint64_t base_seed, const SweepPoint &point,
                               std::size_t trial_index) {
  std::uint64_t h = derive_window_seed(base_seed, static_cast<std::size_t>(point.joint));
  h = derive_window_seed(h, std::bit_cast<std::uint64_t>(point.update_hz));
  h = derive_window_seed(h, std::bit_cast<std::uint64_t>(point.window_s));
  h = derive_window_seed(h, point.np);
  h = derive_window_seed(h, point.g_max);
  return derive_window_seed(h, trial_index);
}

std::vector<SweepCell> run_sweep(std::span<const Trial> trials, const SweepGrid &grid,
                                 std::size_t jobs) {
  const std::vector<SweepPoint> points = grid.points();
  std::vector<SweepCell> cells(points.size());
  parallel_for(points.size(), jobs, [&](std::size_t c) {
    const SweepPoint &p = points[c];
    StreamConfig cfg;
    cfg.joint = p.joint;
    cfg.update_hz = p.update_hz;
    cfg.window_s = p.window_s;
    cfg.de.population_size = p.np;
    cfg.de.max_generations = p.g_max;
    cfg.de.crossover_rate = grid.crossover_rate;
    cfg.de.amplification = grid.amplification;
    cfg.de.value_to_reach = grid.value_to_reach;
    cfg.jobs = 1;

    std::vector<std::pair<double, double>> freq_pairs;
    std::vector<std::pair<double, double>> depth_pairs;
    for (std::size_t t = 0; t < trials.size(); ++t) {
      cfg.de.seed = derive_cell_seed(grid.seed, p, t);
      const std::vector<FitResult> fits = run_stream(trials[t].frames, cfg).fits();
      const EvaluationReport report = evaluate_predictions(trials[t].events, fits);
      freq_pairs.insert(freq_pairs.end(), report.freq_pairs.begin(), report.freq_pairs.end());
      depth_pairs.insert(depth_pairs.end(), report.depth_pairs.begin(), report.depth_pairs.end());
    }
    cells[c].point = p;
    cells[c].mae_freq = median_abs_error(freq_pairs);
    cells[c].mae_depth = median_abs_error(depth_pairs);
    cells[c].n_events = freq_pairs.size();
  });
  return cells;
}

namespace {

template <typename Level>
double correlation_ratio_impl(std::span<const std::pair<Level, double>> data) {
  std::map<Level, std::pair<double, std::size_t>> groups; // level -> (sum, count)
  double total = 0.0;
  for (const auto &[level, y] : data) {
    auto &g = groups[level];
    g.first += y;
    ++g.second;
    total += y;
  }
  if (groups.size() < 2) {
    throw SensitivityError("correlation ratio needs at least two distinct levels");
  }
  const double n = static_cast<double>(data.size());
  const double mean = total / n;
  double total_var = 0.0;
  for (const auto &[level, y] : data) {
    total_var += (y - mean) * (y - mean);
  }
  total_var /= n;
  if (!(total_var > 0.0)) {
    throw SensitivityError("output variance is zero; sensitivity is undefined");
  }
  double between_var = 0.0;
  for (const auto &[level, g] : groups) {
    const double level_mean = g.first / static_cast<double>(g.second);
    between_var += static_cast<double>(g.second) * (level_mean - mean) * (level_mean - mean);
  }
  between_var /= n;
  return std::clamp(between_var / total_var, 0.0, 1.0);
}

} // namespace

double correlation_ratio(std::span<const std::pair<double, double>> level_and_value) {
  return correlation_ratio_impl<double>(level_and_value);
}

double correlation_ratio(std::span<const std::pair<std::string, double>> level_and_value) {
  return correlation_ratio_impl<std::string>(level_and_value);
}

std::string_view to_string(SensitivityTarget target) {
  return target == SensitivityTarget::mae_cpm ? "mae_cpm" : "mae_cm";
}

std::optional<SensitivityTarget> parse_sensitivity_target(std::string_view name) {
  if (name == "mae_cpm") {
    return SensitivityTarget::mae_cpm;
  }
  if (name == "mae_cm") {
    return SensitivityTarget::mae_cm;
  }
  return std::nullopt;
}

std::vector<SensitivityRow> sensitivity(std::span<const SweepCell> cells, SensitivityTarget target) {
  std::vector<const SweepCell *> usable;
  for (const SweepCell &c : cells) {
    const auto &y = target == SensitivityTarget::mae_cpm ? c.mae_freq : c.mae_depth;
    if (y) {
      usable.push_back(&c);
    }
  }
  auto value_of = [target](const SweepCell &c) {
    return target == SensitivityTarget::mae_cpm ? *c.mae_freq : *c.mae_depth;
  };

  std::vector<SensitivityRow> rows;
  auto add_row = [&](const char *name, auto level_of) {
    using Level = decltype(level_of(*usable.front()));
    std::vector<std::pair<Level, double>> data;
    for (const SweepCell *c : usable) {
      data.emplace_back(level_of(*c), value_of(*c));
    }
    std::map<Level, int> distinct;
    for (const auto &d : data) {
      distinct[d.first] = 1;
    }
    if (distinct.size() < 2) {
      return;
    }
    SensitivityRow row{name, target, std::nullopt};
    try {
      row.value = correlation_ratio(std::span<const std::pair<Level, double>>(data));
    } catch (const SensitivityError &) {
      row.value.reset();
    }
    rows.push_back(std::move(row));
  };
  if (usable.empty()) {
    return rows;
  }
  add_row("joint", [](const SweepCell &c) { return std::string(to_string(c.point.joint)); });
  add_row("f_u_hz", [](const SweepCell &c) { return c.point.update_hz; });
  add_row("s_len_s", [](const SweepCell &c) { return c.point.window_s; });
  add_row("np", [](const SweepCell &c) { return static_cast<double>(c.point.np); });
  add_row("g_max", [](const SweepCell &c) { return static_cast<double>(c.point.g_max); });
  return rows;
}

} // namespace cprfit
