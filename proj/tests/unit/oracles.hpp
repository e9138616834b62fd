#pragma once

// Independent reference computations shared by the tests. Nothing here calls
// into the library's numerical code.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cfbench/error.hpp"
#include "cfbench/kernels.hpp"

namespace oracle {

/// Straight transcription of the IDM formula with the approach sign on dv.
inline double idm(double v, double s, double v_leader, const std::vector<double>& p) {
  const double a = p[0], vmax = p[1], delta = p[2], s0 = p[3], T = p[4], b = p[5];
  const double dv = v - v_leader;
  const double s_star = s0 + v * T + v * dv / (2.0 * std::sqrt(a * b));
  return a * (1.0 - std::pow(std::abs(v) / vmax, delta) - (s_star / s) * (s_star / s));
}

struct Series {
  std::vector<double> xl, vl, xf, vf;
};

/// Scripted follower integration: Euler speed, trapezoid position, speed
/// floored at zero. The leader positions come from the caller.
inline Series integrate_follower(const std::vector<double>& xl, const std::vector<double>& vl, double xf0,
                                 double vf0, double dt, double L,
                                 const std::function<double(double, double, double)>& accel) {
  Series out{xl, vl, {xf0}, {vf0}};
  for (std::size_t k = 0; k + 1 < xl.size(); ++k) {
    const double v = out.vf[k];
    const double s = xl[k] - out.xf[k] - L;
    double vn = v + accel(v, s, vl[k]) * dt;
    if (vn < 0) vn = 0;
    out.xf.push_back(out.xf[k] + 0.5 * (v + vn) * dt);
    out.vf.push_back(vn);
  }
  return out;
}

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols, double lo = -1, double hi = 1) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

inline double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("cfbench_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

/// Covariance formulas transcribed one point pair at a time; reads only the
/// hyperparameter fields of the config.
inline double kernel(const cfb::KernelConfig& c, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  using cfb::KernelKind;
  if (c.kind == KernelKind::Mlp) {
    const double num = c.sigma_w2 * x.dot(y) + c.sigma_b2;
    const double den = std::sqrt((c.sigma_w2 * x.squaredNorm() + c.sigma_b2 + 1.0) *
                                 (c.sigma_w2 * y.squaredNorm() + c.sigma_b2 + 1.0));
    return c.variance * 2.0 / std::numbers::pi * std::asin(num / den);
  }
  double r2 = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double l = c.lengthscales.size() == 1 ? c.lengthscales[0] : c.lengthscales[i];
    r2 += (x[i] - y[i]) * (x[i] - y[i]) / (l * l);
  }
  const double r = std::sqrt(r2);
  const double s3 = std::sqrt(3.0) * r, s5 = std::sqrt(5.0) * r;
  switch (c.kind) {
    case KernelKind::Rbf: return c.variance * std::exp(-r2 / 2.0);
    case KernelKind::Exponential: return c.variance * std::exp(-r);
    case KernelKind::RationalQuadratic: return c.variance * std::pow(1.0 + r2 / 2.0, -c.alpha);
    case KernelKind::Matern32: return c.variance * (1.0 + s3) * std::exp(-s3);
    case KernelKind::Matern52: return c.variance * (1.0 + s5 + 5.0 / 3.0 * r2) * std::exp(-s5);
    default: return NAN;
  }
}

inline Eigen::MatrixXd dense_gram(const cfb::KernelConfig& c, const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
  Eigen::MatrixXd K(A.rows(), B.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < B.rows(); ++j) K(i, j) = kernel(c, A.row(i).transpose(), B.row(j).transpose());
  return K;
}

/// Log marginal likelihood by a dense LU solve and determinant.
inline double gp_lml(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const cfb::KernelConfig& k, double noise) {
  const auto n = X.rows();
  const Eigen::MatrixXd Ks = dense_gram(k, X, X) + noise * Eigen::MatrixXd::Identity(n, n);
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(Ks);
  return -0.5 * y.dot(lu.solve(y)) - 0.5 * std::log(lu.determinant()) -
         0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

/// Error code thrown by `f`, or nothing if it returned normally.
inline std::optional<cfb::Errc> code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const cfb::Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace oracle
