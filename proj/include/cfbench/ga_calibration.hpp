#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cfbench/classical_models.hpp"
#include "cfbench/rollout.hpp"
#include "cfbench/trajectory.hpp"

namespace cfb {

struct GaConfig {
  std::size_t population_size = 100;
  std::size_t generations = 200;
  double crossover_rate = 0.8;
  double mutation_rate = 0.1;
  std::size_t elitism = 2;
  std::uint64_t seed = 0;
  std::size_t stall_generations = 30;
  std::size_t workers = 1;  // concurrent fitness evaluations per generation

  void validate() const;
};

struct CalibrationResult {
  std::vector<double> params;
  double train_rmse = 0.0;
  std::vector<double> history;  // best-so-far fitness per generation
  std::size_t evaluations = 0;

  bool operator==(const CalibrationResult&) const = default;
};

using FitnessFn = std::function<double(std::span<const double>)>;

/// Real-coded GA minimising `fitness` inside the box: tournament selection
/// (k = 3), BLX-0.5 crossover, per-gene Gaussian mutation with sigma = 10 %
/// of the box width, elitism, and a stall-based early stop. Children are
/// clipped to the box. Randomness is consumed only in the sequential
/// breeding phase, so results do not depend on `workers`.
CalibrationResult run_ga(const FitnessFn& fitness, std::span<const ParamBound> bounds,
                         const GaConfig& config);

/// Penalty floor for candidates whose free simulation collides or diverges.
inline constexpr double kCollisionPenalty = 1e6;

/// Free-simulation RMSE of the target variable over the training segment.
/// Collisions and divergence score kCollisionPenalty plus the number of
/// steps the rollout fell short of the segment.
double objective(std::span<const double> params, ClassicalKind kind, const Trajectory& train,
                 TargetKind target);

CalibrationResult calibrate(ClassicalKind kind, const Trajectory& train, TargetKind target,
                            std::span<const ParamBound> bounds, const GaConfig& config);

}  // namespace cfb
