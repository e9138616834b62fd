#include "cfbench/kernels.hpp"

#include <cctype>
#include <cmath>
#include <numbers>

#include "cfbench/error.hpp"
#include "cfbench/simd.hpp"

namespace cfb {

namespace {

constexpr double kSqrt3 = 1.7320508075688772;
constexpr double kSqrt5 = 2.23606797749979;

// Stationary profile g(r) from the squared scaled distance.
double profile(const KernelConfig& cfg, double r2) {
  switch (cfg.kind) {
    case KernelKind::Rbf: return std::exp(-0.5 * r2);
    case KernelKind::Exponential: return std::exp(-std::sqrt(r2));
    case KernelKind::RationalQuadratic: return std::pow(1.0 + 0.5 * r2, -cfg.alpha);
    case KernelKind::Matern32: {
      const double r = std::sqrt(r2);
      return (1.0 + kSqrt3 * r) * std::exp(-kSqrt3 * r);
    }
    case KernelKind::Matern52: {
      const double r = std::sqrt(r2);
      return (1.0 + kSqrt5 * r + (5.0 / 3.0) * r2) * std::exp(-kSqrt5 * r);
    }
    case KernelKind::Mlp: break;
  }
  return 0.0;
}

// -g'(r)/r, so that dk/dlog(l_i) = s2 * G(r) * (x_i - y_i)^2 / l_i^2.
double lengthscale_factor(const KernelConfig& cfg, double r2) {
  switch (cfg.kind) {
    case KernelKind::Rbf: return std::exp(-0.5 * r2);
    case KernelKind::Exponential: {
      const double r = std::sqrt(r2);
      return r > 0.0 ? std::exp(-r) / r : 0.0;
    }
    case KernelKind::RationalQuadratic: return cfg.alpha * std::pow(1.0 + 0.5 * r2, -cfg.alpha - 1.0);
    case KernelKind::Matern32: return 3.0 * std::exp(-kSqrt3 * std::sqrt(r2));
    case KernelKind::Matern52: {
      const double r = std::sqrt(r2);
      return (5.0 / 3.0) * (1.0 + kSqrt5 * r) * std::exp(-kSqrt5 * r);
    }
    case KernelKind::Mlp: break;
  }
  return 0.0;
}

std::vector<double> inverse_lengthscales(const KernelConfig& cfg, std::size_t dim) {
  std::vector<double> inv(dim);
  for (std::size_t k = 0; k < dim; ++k) {
    inv[k] = 1.0 / (cfg.lengthscales.size() == 1 ? cfg.lengthscales[0] : cfg.lengthscales[k]);
  }
  return inv;
}

double mlp_value(const KernelConfig& cfg, double xy, double xx, double yy) {
  const double num = cfg.sigma_w2 * xy + cfg.sigma_b2;
  const double den = std::sqrt((cfg.sigma_w2 * xx + cfg.sigma_b2 + 1.0) *
                               (cfg.sigma_w2 * yy + cfg.sigma_b2 + 1.0));
  return cfg.variance * (2.0 / std::numbers::pi) * std::asin(num / den);
}

void check_dims(const KernelConfig& cfg, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  if (X.cols() != Y.cols()) {
    throw Error(Errc::DimensionMismatch, "point sets have " + std::to_string(X.cols()) + " and " +
                                             std::to_string(Y.cols()) + " columns");
  }
  cfg.validate(static_cast<std::size_t>(X.cols()));
}

Eigen::VectorXd row_sqnorms(const Eigen::MatrixXd& X) { return X.rowwise().squaredNorm(); }

}  // namespace

std::string_view to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Rbf: return "RBF";
    case KernelKind::Exponential: return "Exponential";
    case KernelKind::RationalQuadratic: return "RationalQuadratic";
    case KernelKind::Mlp: return "MLP";
    case KernelKind::Matern32: return "Matern32";
    case KernelKind::Matern52: return "Matern52";
  }
  return "?";
}

KernelKind parse_kernel_kind(std::string_view name) {
  auto lower = [](std::string_view s) {
    std::string out;
    for (char c : s) {
      if (c != '_' && c != '-' && c != ' ' && c != '/') {
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      }
    }
    return out;
  };
  const std::string key = lower(name);
  for (KernelKind k : kAllKernels) {
    if (key == lower(to_string(k))) return k;
  }
  if (key == "exp") return KernelKind::Exponential;
  if (key == "rq") return KernelKind::RationalQuadratic;
  throw Error(Errc::InvalidConfig, "unknown kernel kind '" + std::string(name) + "'");
}

void KernelConfig::validate(std::size_t dim) const {
  if (!(variance > 0.0)) throw Error(Errc::InvalidConfig, "kernel variance must be positive");
  if (stationary()) {
    if (lengthscales.size() != 1 && lengthscales.size() != dim) {
      throw Error(Errc::DimensionMismatch, "kernel has " + std::to_string(lengthscales.size()) +
                                               " lengthscales for " + std::to_string(dim) +
                                               "-dimensional inputs");
    }
    for (double l : lengthscales) {
      if (!(l > 0.0)) throw Error(Errc::InvalidConfig, "kernel lengthscales must be positive");
    }
    if (kind == KernelKind::RationalQuadratic && !(alpha > 0.0)) {
      throw Error(Errc::InvalidConfig, "rational quadratic alpha must be positive");
    }
  } else if (!(sigma_w2 > 0.0) || !(sigma_b2 > 0.0)) {
    throw Error(Errc::InvalidConfig, "MLP sigma_w2 and sigma_b2 must be positive");
  }
}

std::vector<double> KernelConfig::log_hyperparams() const {
  std::vector<double> theta{std::log(variance)};
  if (stationary()) {
    for (double l : lengthscales) theta.push_back(std::log(l));
    if (kind == KernelKind::RationalQuadratic) theta.push_back(std::log(alpha));
  } else {
    theta.push_back(std::log(sigma_w2));
    theta.push_back(std::log(sigma_b2));
  }
  return theta;
}

void KernelConfig::set_log_hyperparams(std::span<const double> theta) {
  const std::size_t expected =
      stationary() ? 1 + lengthscales.size() + (kind == KernelKind::RationalQuadratic ? 1 : 0) : 3;
  if (theta.size() != expected) {
    throw Error(Errc::DimensionMismatch, "expected " + std::to_string(expected) +
                                             " log-hyperparameters, got " +
                                             std::to_string(theta.size()));
  }
  variance = std::exp(theta[0]);
  if (stationary()) {
    for (std::size_t i = 0; i < lengthscales.size(); ++i) lengthscales[i] = std::exp(theta[1 + i]);
    if (kind == KernelKind::RationalQuadratic) alpha = std::exp(theta[1 + lengthscales.size()]);
  } else {
    sigma_w2 = std::exp(theta[1]);
    sigma_b2 = std::exp(theta[2]);
  }
}

std::vector<std::string> KernelConfig::hyperparam_names() const {
  std::vector<std::string> names{"variance"};
  if (stationary()) {
    if (lengthscales.size() == 1) {
      names.emplace_back("lengthscale");
    } else {
      for (std::size_t i = 0; i < lengthscales.size(); ++i) {
        names.push_back("lengthscale_" + std::to_string(i));
      }
    }
    if (kind == KernelKind::RationalQuadratic) names.emplace_back("alpha");
  } else {
    names.emplace_back("sigma_w2");
    names.emplace_back("sigma_b2");
  }
  return names;
}

double eval(const KernelConfig& cfg, std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw Error(Errc::DimensionMismatch, "kernel inputs of sizes " + std::to_string(x.size()) +
                                             " and " + std::to_string(y.size()));
  }
  cfg.validate(x.size());
  if (!cfg.stationary()) {
    double xy = 0.0, xx = 0.0, yy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
      xy += x[k] * y[k];
      xx += x[k] * x[k];
      yy += y[k] * y[k];
    }
    return mlp_value(cfg, xy, xx, yy);
  }
  const auto inv = inverse_lengthscales(cfg, x.size());
  double r2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double t = (x[k] - y[k]) * inv[k];
    r2 += t * t;
  }
  return cfg.variance * profile(cfg, r2);
}

Eigen::MatrixXd gram(const KernelConfig& cfg, const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  check_dims(cfg, X, Y);
  const auto n = static_cast<std::size_t>(X.rows());
  const auto m = static_cast<std::size_t>(Y.rows());
  const auto d = static_cast<std::size_t>(X.cols());
  const auto& kt = simd::active();
  Eigen::MatrixXd K(X.rows(), Y.rows());
  std::vector<double> point(d);

  if (!cfg.stationary()) {
    const Eigen::VectorXd xx = row_sqnorms(X);
    const Eigen::VectorXd yy = row_sqnorms(Y);
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t k = 0; k < d; ++k) point[k] = Y(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
      double* col = K.col(static_cast<Eigen::Index>(j)).data();
      kt.cross_dot(point.data(), X.data(), n, d, col);
      for (std::size_t i = 0; i < n; ++i) col[i] = mlp_value(cfg, col[i], xx[static_cast<Eigen::Index>(i)], yy[static_cast<Eigen::Index>(j)]);
    }
    return K;
  }

  const auto inv = inverse_lengthscales(cfg, d);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 0; k < d; ++k) point[k] = Y(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
    double* col = K.col(static_cast<Eigen::Index>(j)).data();
    kt.scaled_sqdist(point.data(), X.data(), inv.data(), n, d, col);
    for (std::size_t i = 0; i < n; ++i) col[i] = cfg.variance * profile(cfg, col[i]);
  }
  return K;
}

Eigen::MatrixXd gram(const KernelConfig& cfg, const Eigen::MatrixXd& X) {
  Eigen::MatrixXd K = gram(cfg, X, X);
  K.triangularView<Eigen::StrictlyLower>() = K.transpose().triangularView<Eigen::StrictlyLower>();
  return K;
}

std::vector<Eigen::MatrixXd> grad_log_hyperparams(const KernelConfig& cfg, const Eigen::MatrixXd& X) {
  cfg.validate(static_cast<std::size_t>(X.cols()));
  const Eigen::Index n = X.rows();
  const auto d = static_cast<std::size_t>(X.cols());
  const Eigen::MatrixXd K = gram(cfg, X);
  std::vector<Eigen::MatrixXd> grads;
  grads.push_back(K);  // d/dlog(variance)

  if (!cfg.stationary()) {
    const Eigen::VectorXd sq = row_sqnorms(X);
    const Eigen::MatrixXd dots = X * X.transpose();
    Eigen::MatrixXd dw(n, n), db(n, n);
    const double w = cfg.sigma_w2;
    const double b = cfg.sigma_b2;
    const double scale = cfg.variance * 2.0 / std::numbers::pi;
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double B = w * sq[i] + b + 1.0;
        const double C = w * sq[j] + b + 1.0;
        const double root = std::sqrt(B * C);
        const double u = (w * dots(i, j) + b) / root;
        const double du_dw = dots(i, j) / root - 0.5 * u * (sq[i] / B + sq[j] / C);
        const double du_db = 1.0 / root - 0.5 * u * (1.0 / B + 1.0 / C);
        const double dasin = scale / std::sqrt(std::max(1e-300, 1.0 - u * u));
        dw(i, j) = dasin * du_dw * w;
        db(i, j) = dasin * du_db * b;
      }
    }
    grads.push_back(std::move(dw));
    grads.push_back(std::move(db));
    return grads;
  }

  const auto inv = inverse_lengthscales(cfg, d);
  // Per-dimension scaled squared differences, reusing the SIMD distance kernel with d = 1.
  const auto& kt = simd::active();
  std::vector<Eigen::MatrixXd> per_dim;
  per_dim.reserve(d);
  for (std::size_t k = 0; k < d; ++k) {
    Eigen::MatrixXd q(n, n);
    const double* xcol = X.col(static_cast<Eigen::Index>(k)).data();
    for (Eigen::Index j = 0; j < n; ++j) {
      kt.scaled_sqdist(xcol + j, xcol, &inv[k], static_cast<std::size_t>(n), 1, q.col(j).data());
    }
    per_dim.push_back(std::move(q));
  }
  Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(n, n);
  for (const auto& q : per_dim) r2 += q;

  Eigen::MatrixXd factor(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) factor(i, j) = cfg.variance * lengthscale_factor(cfg, r2(i, j));
  }
  if (cfg.lengthscales.size() == 1) {
    grads.push_back(factor.cwiseProduct(r2));
  } else {
    for (const auto& q : per_dim) grads.push_back(factor.cwiseProduct(q));
  }
  if (cfg.kind == KernelKind::RationalQuadratic) {
    Eigen::MatrixXd da(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) da(i, j) = -cfg.alpha * std::log1p(0.5 * r2(i, j)) * K(i, j);
    }
    grads.push_back(std::move(da));
  }
  return grads;
}

}  // namespace cfb
