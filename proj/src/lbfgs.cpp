#include "cfbench/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "cfbench/error.hpp"

namespace cfb {

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct Pair {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

}  // namespace

LbfgsResult minimize_lbfgs(const ObjectiveWithGradient& fn, std::vector<double> x0,
                           std::span<const double> lower, std::span<const double> upper,
                           const LbfgsOptions& options) {
  const std::size_t n = x0.size();
  if (lower.size() != n || upper.size() != n) {
    throw Error(Errc::DimensionMismatch, "L-BFGS bounds do not match the start point");
  }
  auto clip = [&](std::vector<double>& x) {
    for (std::size_t i = 0; i < n; ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
  };
  auto evaluate = [&](const std::vector<double>& x, std::vector<double>& g) {
    try {
      const double f = fn(x, g);
      for (double gi : g) {
        if (!std::isfinite(gi)) return std::numeric_limits<double>::infinity();
      }
      return std::isfinite(f) ? f : std::numeric_limits<double>::infinity();
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  // Gradient with components that push out of the box removed.
  auto projected = [&](const std::vector<double>& x, const std::vector<double>& g) {
    std::vector<double> pg = g;
    for (std::size_t i = 0; i < n; ++i) {
      if ((x[i] <= lower[i] && g[i] > 0.0) || (x[i] >= upper[i] && g[i] < 0.0)) pg[i] = 0.0;
    }
    return pg;
  };

  LbfgsResult res;
  clip(x0);
  res.x = std::move(x0);
  std::vector<double> g(n, 0.0);
  res.f = evaluate(res.x, g);
  if (!std::isfinite(res.f)) throw Error(Errc::InvalidConfig, "L-BFGS start point is infeasible");

  std::deque<Pair> memory;
  for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
    std::vector<double> pg = projected(res.x, g);
    double pg_norm = 0.0;
    for (double v : pg) pg_norm = std::max(pg_norm, std::abs(v));
    if (pg_norm < options.gtol) {
      res.converged = true;
      break;
    }

    // Two-loop recursion on the projected gradient.
    std::vector<double> q = pg;
    std::vector<double> alphas(memory.size());
    for (std::size_t m = memory.size(); m-- > 0;) {
      alphas[m] = memory[m].rho * dot(memory[m].s, q);
      for (std::size_t i = 0; i < n; ++i) q[i] -= alphas[m] * memory[m].y[i];
    }
    if (!memory.empty()) {
      const auto& last = memory.back();
      const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
      for (double& v : q) v *= gamma;
    }
    for (std::size_t m = 0; m < memory.size(); ++m) {
      const double beta = memory[m].rho * dot(memory[m].y, q);
      for (std::size_t i = 0; i < n; ++i) q[i] += (alphas[m] - beta) * memory[m].s[i];
    }
    std::vector<double> dir(n);
    for (std::size_t i = 0; i < n; ++i) dir[i] = pg[i] == 0.0 ? 0.0 : -q[i];
    if (dot(dir, g) >= 0.0) {
      memory.clear();
      for (std::size_t i = 0; i < n; ++i) dir[i] = -pg[i];
    }
    if (memory.empty()) {
      // Unit-length first step.
      const double norm = std::sqrt(dot(dir, dir));
      if (norm > 1.0) {
        for (double& v : dir) v /= norm;
      }
    }

    double step = 1.0;
    std::vector<double> x_new(n), g_new(n);
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = res.x[i] + step * dir[i];
      clip(x_new);
      double decrease = 0.0;
      for (std::size_t i = 0; i < n; ++i) decrease += g[i] * (x_new[i] - res.x[i]);
      f_new = evaluate(x_new, g_new);
      if (std::isfinite(f_new) && f_new <= res.f + 1e-4 * decrease) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) break;

    Pair p{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      p.s[i] = x_new[i] - res.x[i];
      p.y[i] = g_new[i] - g[i];
    }
    const double sy = dot(p.s, p.y);
    if (sy > 1e-12) {
      p.rho = 1.0 / sy;
      memory.push_back(std::move(p));
      if (memory.size() > options.memory) memory.pop_front();
    }
    const double f_old = res.f;
    res.x = x_new;
    g = g_new;
    res.f = f_new;
    if (std::abs(f_old - f_new) <= options.ftol * std::max({1.0, std::abs(f_old), std::abs(f_new)})) {
      res.converged = true;
      ++res.iterations;
      break;
    }
  }
  return res;
}

}  // namespace cfb
