#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace cfb {

struct LbfgsOptions {
  std::size_t max_iterations = 100;
  std::size_t memory = 8;
  double gtol = 1e-6;   // on the projected gradient, infinity norm
  double ftol = 1e-10;  // relative decrease between iterations
};

struct LbfgsResult {
  std::vector<double> x;
  double f = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

/// Returns f(x) and writes the gradient. Throwing (or returning a
/// non-finite value) marks the point infeasible; the line search backs off.
using ObjectiveWithGradient = std::function<double(std::span<const double> x, std::span<double> grad)>;

/// Box-projected limited-memory BFGS with Armijo backtracking.
/// The starting point must be feasible (it is clipped into the box).
LbfgsResult minimize_lbfgs(const ObjectiveWithGradient& fn, std::vector<double> x0,
                           std::span<const double> lower, std::span<const double> upper,
                           const LbfgsOptions& options = {});

}  // namespace cfb
