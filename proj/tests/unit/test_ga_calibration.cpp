#include <cmath>
#include <mutex>

#include "cfbench/ga_calibration.hpp"
#include "cfbench/synthesis.hpp"
#include "doctest.h"

using namespace cfb;

TEST_CASE("GA finds the minimum of a 1-D quadratic") {
  const std::vector<ParamBound> box{{"x", -10.0, 10.0, "-"}};
  GaConfig cfg;
  cfg.population_size = 40;
  cfg.generations = 80;
  cfg.seed = 3;
  const auto res = run_ga([](std::span<const double> x) { return (x[0] - 3.0) * (x[0] - 3.0); }, box, cfg);
  CHECK(std::abs(res.params[0] - 3.0) <= 0.05);
}

TEST_CASE("GA history is monotone and candidates stay in the box") {
  const std::vector<ParamBound> box{{"x", -1.0, 2.0, "-"}, {"y", 0.5, 4.0, "-"}};
  GaConfig cfg;
  cfg.population_size = 30;
  cfg.generations = 50;
  cfg.seed = 11;
  std::mutex mu;
  bool inside = true;
  const auto res = run_ga(
      [&](std::span<const double> p) {
        std::lock_guard lock(mu);
        inside = inside && p[0] >= -1.0 && p[0] <= 2.0 && p[1] >= 0.5 && p[1] <= 4.0;
        return std::pow(p[0] - 1.7, 2) + std::pow(p[1] - 0.6, 2) + std::sin(5 * p[0]);
      },
      box, cfg);
  CHECK(inside);
  for (std::size_t g = 1; g < res.history.size(); ++g) CHECK(res.history[g] <= res.history[g - 1]);
  CHECK(res.train_rmse == res.history.back());
}

TEST_CASE("GA is deterministic and independent of the worker count") {
  const std::vector<ParamBound> box{{"x", -5.0, 5.0, "-"}, {"y", -5.0, 5.0, "-"}};
  auto f = [](std::span<const double> p) { return std::pow(p[0] * p[1] - 1.0, 2) + 0.1 * p[0] * p[0]; };
  GaConfig cfg;
  cfg.population_size = 24;
  cfg.generations = 30;
  cfg.seed = 5;
  const auto a = run_ga(f, box, cfg);
  const auto b = run_ga(f, box, cfg);
  cfg.workers = 4;
  const auto c = run_ga(f, box, cfg);
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("GA config validation") {
  GaConfig cfg;
  cfg.population_size = 3;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.crossover_rate = 1.5;
  CHECK_THROWS(cfg.validate());
}

TEST_CASE("objective: truth scores zero, collisions are penalized, perturbation hurts") {
  const auto spec = synthesis_preset(ClassicalKind::Idm, "paper-example", 0);
  const Trajectory t = synthesize(spec);
  for (TargetKind target : kAllTargets) {
    CHECK(objective(spec.follower.params, ClassicalKind::Idm, t, target) <= 1e-9);
  }
  // Sluggish FVDM barely reacts to the braking leader and runs into it.
  const std::vector<double> sluggish{0.01, 0.01, 45.0, 0.1, 5.0};
  CHECK(objective(sluggish, ClassicalKind::FvdmCth, t, TargetKind::S) >= kCollisionPenalty);

  auto perturbed = spec.follower.params;
  perturbed[0] *= 1.1;
  CHECK(objective(perturbed, ClassicalKind::Idm, t, TargetKind::S) >
        objective(spec.follower.params, ClassicalKind::Idm, t, TargetKind::S));
}

TEST_CASE("calibrate recovers a good spacing fit with a small budget") {
  const Trajectory t = synthesize(synthesis_preset(ClassicalKind::Idm, "paper-example", 0));
  auto [train, test] = split(t, {0.8});
  GaConfig cfg;
  cfg.population_size = 40;
  cfg.generations = 60;
  cfg.seed = 21;
  const auto res = calibrate(ClassicalKind::Idm, train, TargetKind::S, param_bounds(ClassicalKind::Idm), cfg);
  CHECK(res.params.size() == 6);
  CHECK(res.train_rmse < 0.5);
  CHECK(res.evaluations > 0);
  CHECK(calibrate(ClassicalKind::Idm, train, TargetKind::S, param_bounds(ClassicalKind::Idm), cfg) == res);
}
