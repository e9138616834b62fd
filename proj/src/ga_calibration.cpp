#include "cfbench/ga_calibration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "cfbench/error.hpp"
#include "cfbench/evaluation.hpp"

namespace cfb {

void GaConfig::validate() const {
  if (population_size < 4) throw Error(Errc::InvalidConfig, "ga.population_size must be >= 4");
  if (generations < 1) throw Error(Errc::InvalidConfig, "ga.generations must be >= 1");
  if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
    throw Error(Errc::InvalidConfig, "ga.crossover_rate must lie in [0, 1]");
  }
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) {
    throw Error(Errc::InvalidConfig, "ga.mutation_rate must lie in [0, 1]");
  }
  if (elitism >= population_size) {
    throw Error(Errc::InvalidConfig, "ga.elitism must be below ga.population_size");
  }
  if (workers < 1) throw Error(Errc::InvalidConfig, "ga.workers must be >= 1");
}

namespace {

using Genome = std::vector<double>;

void evaluate(const FitnessFn& fitness, const std::vector<Genome>& pop, std::size_t begin,
              std::vector<double>& out, std::size_t workers) {
  const std::size_t n = pop.size() - begin;
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) {
      const double f = fitness(pop[begin + i]);
      out[begin + i] = std::isfinite(f) ? f : std::numeric_limits<double>::max();
    }
  };
  if (workers <= 1 || n < 2) {
    work(0, n);
    return;
  }
  const std::size_t chunks = std::min(workers, n);
  std::vector<std::jthread> threads;
  threads.reserve(chunks);
  for (std::size_t c = 0; c < chunks; ++c) {
    threads.emplace_back(work, n * c / chunks, n * (c + 1) / chunks);
  }
}

}  // namespace

CalibrationResult run_ga(const FitnessFn& fitness, std::span<const ParamBound> bounds,
                         const GaConfig& config) {
  config.validate();
  const std::size_t dim = bounds.size();
  if (dim == 0) throw Error(Errc::InvalidConfig, "empty parameter box");
  for (const auto& b : bounds) {
    if (!std::isfinite(b.low) || !std::isfinite(b.high) || !(b.low < b.high)) {
      throw Error(Errc::InvalidConfig, "bound for '" + b.name + "' is not a finite interval");
    }
  }

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto clip = [&](Genome& g) {
    for (std::size_t i = 0; i < dim; ++i) g[i] = std::clamp(g[i], bounds[i].low, bounds[i].high);
  };

  const std::size_t n_pop = config.population_size;
  std::vector<Genome> pop(n_pop, Genome(dim));
  for (auto& g : pop) {
    for (std::size_t i = 0; i < dim; ++i) {
      g[i] = bounds[i].low + (bounds[i].high - bounds[i].low) * unit(rng);
    }
  }
  std::vector<double> fit(n_pop);
  evaluate(fitness, pop, 0, fit, config.workers);

  CalibrationResult result;
  result.evaluations = n_pop;
  double best = std::numeric_limits<double>::infinity();
  std::size_t stall = 0;
  std::vector<std::size_t> order(n_pop);

  for (std::size_t gen = 0; gen < config.generations; ++gen) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fit[a] < fit[b]; });
    if (fit[order[0]] < best) {
      best = fit[order[0]];
      result.params = pop[order[0]];
      stall = 0;
    } else {
      ++stall;
    }
    result.history.push_back(best);
    if (gen + 1 == config.generations || stall >= config.stall_generations) break;

    auto tournament = [&]() -> const Genome& {
      std::size_t winner = static_cast<std::size_t>(unit(rng) * static_cast<double>(n_pop)) % n_pop;
      for (int k = 1; k < 3; ++k) {
        const std::size_t c = static_cast<std::size_t>(unit(rng) * static_cast<double>(n_pop)) % n_pop;
        if (fit[c] < fit[winner]) winner = c;
      }
      return pop[winner];
    };

    std::vector<Genome> next;
    std::vector<double> next_fit(n_pop);
    next.reserve(n_pop);
    for (std::size_t e = 0; e < config.elitism; ++e) {
      next.push_back(pop[order[e]]);
      next_fit[e] = fit[order[e]];
    }
    constexpr double kAlpha = 0.5;
    // Mutation width shrinks linearly from 10 % to 0.5 % of the box so late
    // generations refine instead of jumping around.
    const double progress = static_cast<double>(gen) / static_cast<double>(config.generations);
    const double mut_scale = 0.005 + 0.095 * (1.0 - progress);
    while (next.size() < n_pop) {
      const Genome& p1 = tournament();
      const Genome& p2 = tournament();
      Genome child = p1;
      if (unit(rng) < config.crossover_rate) {
        for (std::size_t i = 0; i < dim; ++i) {
          const double lo = std::min(p1[i], p2[i]);
          const double hi = std::max(p1[i], p2[i]);
          const double ext = kAlpha * (hi - lo);
          child[i] = lo - ext + (hi - lo + 2.0 * ext) * unit(rng);
        }
      }
      for (std::size_t i = 0; i < dim; ++i) {
        if (unit(rng) < config.mutation_rate) {
          child[i] += mut_scale * (bounds[i].high - bounds[i].low) * gauss(rng);
        }
      }
      clip(child);
      next.push_back(std::move(child));
    }
    pop = std::move(next);
    fit = std::move(next_fit);
    evaluate(fitness, pop, config.elitism, fit, config.workers);
    result.evaluations += n_pop - config.elitism;
  }
  result.train_rmse = best;
  return result;
}

double objective(std::span<const double> params, ClassicalKind kind, const Trajectory& train,
                 TargetKind target) {
  const ClassicalModel model{kind, std::vector<double>(params.begin(), params.end())};
  const RolloutResult sim = rollout_classical(model, train);
  if (sim.diverged || sim.collision_step) {
    return kCollisionPenalty + static_cast<double>(train.size() - sim.size());
  }
  const auto scores = evaluate_rollout(sim, train);
  return scores.get(target);
}

CalibrationResult calibrate(ClassicalKind kind, const Trajectory& train, TargetKind target,
                            std::span<const ParamBound> bounds, const GaConfig& config) {
  if (bounds.size() != param_count(kind)) {
    throw Error(Errc::DimensionMismatch, std::string(to_string(kind)) + " needs " +
                                             std::to_string(param_count(kind)) + " bounds");
  }
  return run_ga([&](std::span<const double> p) { return objective(p, kind, train, target); },
                bounds, config);
}

}  // namespace cfb
