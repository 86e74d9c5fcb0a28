#include "cprfit/de_optimizer.hpp"

#include "cprfit/errors.hpp"
#include "cprfit/parallel.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>

namespace cprfit::de {

void DEConfig::validate() const {
  if (population_size < 4) {
    throw ConfigError("np", "NP >= 4 required (mutation needs r1, r2, r3 distinct from i)");
  }
  if (max_generations < 1) {
    throw ConfigError("gmax", "G_max >= 1 required");
  }
  if (!(amplification > 0.0) || !std::isfinite(amplification)) {
    throw ConfigError("f", "F must be a finite positive number");
  }
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
    throw ConfigError("cr", "CR must lie in [0, 1]");
  }
  if (std::isnan(value_to_reach)) {
    throw ConfigError("vtr", "VTR must not be NaN");
  }
}

double Rng::unit() {
  // 53 random bits mapped onto (0, 1].
  return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53; // [0, 1)
  const double v = lo + u * (hi - lo);
  return v > hi ? hi : v;
}

std::size_t Rng::index(std::size_t n) {
  const std::uint64_t bound = n;
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = engine_();
    if (x >= threshold) {
      return static_cast<std::size_t>(x % bound);
    }
  }
}

void repair(std::span<double> x, std::span<const Interval> bounds) {
  for (std::size_t j = 0; j < x.size(); ++j) {
    x[j] = bounds[j].clamp(x[j]);
  }
}

namespace {

std::string describe(std::span<const double> x) {
  std::string out = "(";
  char buf[32];
  for (std::size_t j = 0; j < x.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%s%.9g", j ? ", " : "", x[j]);
    out += buf;
  }
  return out + ")";
}

double checked_cost(const CostFunction &cost, std::span<const double> x) {
  const double c = cost(x);
  if (!std::isfinite(c)) {
    throw OptimizerError("cost function returned a non-finite value at " + describe(x));
  }
  return c;
}

std::size_t best_index(const Population &population) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < population.size(); ++i) {
    if (population[i].cost < population[best].cost) {
      best = i;
    }
  }
  return best;
}

} // namespace

Population initialize_population(const CostFunction &cost, std::span<const Interval> bounds,
                                 const DEConfig &cfg, Rng &rng) {
  Population population(cfg.population_size);
  for (Individual &ind : population) {
    ind.x.resize(bounds.size());
    for (std::size_t j = 0; j < bounds.size(); ++j) {
      ind.x[j] = rng.uniform(bounds[j].lo, bounds[j].hi);
    }
  }
  parallel_for(population.size(), cfg.jobs,
               [&](std::size_t i) { population[i].cost = checked_cost(cost, population[i].x); });
  return population;
}

MutationDraw draw_mutation_indices(std::size_t np, std::size_t target, Rng &rng) {
  if (np < 4) {
    throw ConfigError("np", "NP >= 4 required");
  }
  MutationDraw d;
  do {
    d.r1 = rng.index(np);
  } while (d.r1 == target);
  do {
    d.r2 = rng.index(np);
  } while (d.r2 == target || d.r2 == d.r1);
  do {
    d.r3 = rng.index(np);
  } while (d.r3 == target || d.r3 == d.r1 || d.r3 == d.r2);
  return d;
}

std::vector<double> differential_mutant(std::span<const double> base, std::span<const double> a,
                                        std::span<const double> b, double amplification) {
  std::vector<double> v(base.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    v[j] = base[j] + amplification * (a[j] - b[j]);
  }
  return v;
}

std::vector<double> mutate(const Population &population, std::size_t target,
                           double amplification, std::span<const Interval> bounds, Rng &rng,
                           MutationDraw *draw) {
  const MutationDraw d = draw_mutation_indices(population.size(), target, rng);
  if (draw) {
    *draw = d;
  }
  std::vector<double> v =
      differential_mutant(population[d.r1].x, population[d.r2].x, population[d.r3].x, amplification);
  repair(v, bounds);
  return v;
}

std::vector<double> crossover(std::span<const double> parent, std::span<const double> mutant,
                              double crossover_rate, Rng &rng) {
  if (parent.size() != mutant.size()) {
    throw Error("crossover operands differ in length");
  }
  std::vector<double> trial(parent.begin(), parent.end());
  if (trial.empty()) {
    return trial;
  }
  const std::size_t forced = rng.index(trial.size());
  for (std::size_t j = 0; j < trial.size(); ++j) {
    const double r = rng.unit();
    if (r <= crossover_rate || j == forced) {
      trial[j] = mutant[j];
    }
  }
  return trial;
}

const Individual &select(const Individual &parent, const Individual &trial) {
  return trial.cost < parent.cost ? trial : parent;
}

DEOutcome optimize(const CostFunction &cost, std::span<const Interval> bounds,
                   const DEConfig &cfg, const Observer *observer) {
  cfg.validate();
  Rng rng(cfg.seed);
  Population population = initialize_population(cost, bounds, cfg, rng);
  if (observer && observer->on_generation) {
    observer->on_generation(0, population);
  }

  DEOutcome outcome;
  outcome.cost_trace.push_back(population[best_index(population)].cost);

  Population trials(population.size());
  for (std::size_t g = 1; g <= cfg.max_generations; ++g) {
    for (std::size_t i = 0; i < population.size(); ++i) {
      MutationDraw draw;
      const std::vector<double> mutant =
          mutate(population, i, cfg.amplification, bounds, rng, &draw);
      if (observer && observer->on_mutation) {
        observer->on_mutation(g, i, draw);
      }
      trials[i].x = crossover(population[i].x, mutant, cfg.crossover_rate, rng);
    }
    parallel_for(trials.size(), cfg.jobs,
                 [&](std::size_t i) { trials[i].cost = checked_cost(cost, trials[i].x); });
    for (std::size_t i = 0; i < population.size(); ++i) {
      if (&select(population[i], trials[i]) == &trials[i]) {
        population[i] = trials[i];
      }
    }
    if (observer && observer->on_generation) {
      observer->on_generation(g, population);
    }
    const double best = population[best_index(population)].cost;
    outcome.cost_trace.push_back(best);
    outcome.generations_run = g;
    if (best <= cfg.value_to_reach) {
      outcome.converged_by_vtr = true;
      break;
    }
  }
  outcome.best = population[best_index(population)];
  return outcome;
}

void write_cost_trace(std::ostream &out, const DEOutcome &outcome) {
  out << "generation,best_cost\n";
  char buf[64];
  for (std::size_t g = 0; g < outcome.cost_trace.size(); ++g) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g\n", g, outcome.cost_trace[g]);
    out << buf;
  }
}

} // namespace cprfit::de
