#pragma once

// Differential Evolution, strategy DE/rand/1/bin, over a box of real
// parameters.
//
// Random draws come from one seeded 64-bit engine per optimize() call and are
// consumed in this fixed order, so a run replays exactly from its seed:
//   1. initialization: for each individual i, for each component j, one
//      uniform draw in [lo_j, hi_j];
//   2. each generation, for each target i in order: r1, r2, r3 (rejection
//      sampled to be pairwise distinct and != i), then j_rand, then one
//      crossover draw per component.
// Trial costs are evaluated after all draws of a generation, against a frozen
// snapshot of the previous generation.

#include "cprfit/sinusoid.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

namespace cprfit::de {

struct DEConfig {
  std::size_t population_size = 50;  // NP
  std::size_t max_generations = 500; // G_max
  double amplification = 0.8;        // F
  double crossover_rate = 0.5;       // CR
  double value_to_reach = 1e-4;      // VTR
  std::uint64_t seed = 42;
  /// Worker threads for trial-cost evaluation; 0 = hardware concurrency.
  std::size_t jobs = 1;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct Individual {
  std::vector<double> x;
  double cost = 0.0;

  friend bool operator==(const Individual &, const Individual &) = default;
};

using Population = std::vector<Individual>;
using CostFunction = std::function<double(std::span<const double>)>;

struct DEOutcome {
  Individual best;
  std::size_t generations_run = 0;
  bool converged_by_vtr = false;
  /// Best cost of the initial population followed by one entry per generation.
  std::vector<double> cost_trace;

  friend bool operator==(const DEOutcome &, const DEOutcome &) = default;
};

/// Seeded engine plus the exact draw conversions the optimizer uses.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in (0, 1]; lets CR = 0 and CR = 1 act exactly.
  double unit();
  /// Uniform in [lo, hi]; returns lo when lo == hi.
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);

private:
  std::mt19937_64 engine_;
};

struct MutationDraw {
  std::size_t r1 = 0;
  std::size_t r2 = 0;
  std::size_t r3 = 0;
};

/// Optional instrumentation; either callback may be empty.
struct Observer {
  std::function<void(std::size_t generation, std::size_t target, const MutationDraw &)> on_mutation;
  std::function<void(std::size_t generation, const Population &)> on_generation;
};

/// Clamps each component into its interval.
void repair(std::span<double> x, std::span<const Interval> bounds);

Population initialize_population(const CostFunction &cost, std::span<const Interval> bounds,
                                 const DEConfig &cfg, Rng &rng);

/// Draws r1, r2, r3 distinct from each other and from `target`. Needs np >= 4.
MutationDraw draw_mutation_indices(std::size_t np, std::size_t target, Rng &rng);

/// x_r1 + F (x_r2 - x_r3), unrepaired.
std::vector<double> differential_mutant(std::span<const double> base, std::span<const double> a,
                                        std::span<const double> b, double amplification);

/// Full mutation step for `target`: index draw, differential mutant, repair.
std::vector<double> mutate(const Population &population, std::size_t target,
                           double amplification, std::span<const Interval> bounds, Rng &rng,
                           MutationDraw *draw = nullptr);

/// Binomial crossover with one forced mutant component j_rand.
std::vector<double> crossover(std::span<const double> parent, std::span<const double> mutant,
                              double crossover_rate, Rng &rng);

/// The trial survives only on strictly lower cost.
const Individual &select(const Individual &parent, const Individual &trial);

DEOutcome optimize(const CostFunction &cost, std::span<const Interval> bounds,
                   const DEConfig &cfg, const Observer *observer = nullptr);

/// Writes `generation,best_cost` rows.
void write_cost_trace(std::ostream &out, const DEOutcome &outcome);

} // namespace cprfit::de
