#include "cfbench/gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "cfbench/error.hpp"
#include "cfbench/lbfgs.hpp"

namespace cfb::gp {

namespace {

bool try_factor(const Eigen::MatrixXd& A, Eigen::MatrixXd& lower) {
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) return false;
  lower = llt.matrixL();
  return lower.allFinite() && (lower.diagonal().array() > 0.0).all();
}

}  // namespace

Model fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelConfig& kernel,
          double noise, const FitOptions& options) {
  if (X.rows() < 1) throw Error(Errc::TooShort, "GP needs at least one training point");
  if (X.rows() != y.size()) {
    throw Error(Errc::DimensionMismatch, "X has " + std::to_string(X.rows()) + " rows, y has " +
                                             std::to_string(y.size()));
  }
  if (!X.allFinite() || !y.allFinite()) throw Error(Errc::InvalidConfig, "non-finite GP training data");
  kernel.validate(static_cast<std::size_t>(X.cols()));

  Model m;
  m.kernel = kernel;
  m.noise = std::max(noise, kNoiseFloor);
  m.standardizer = options.standardize ? Standardizer::fit(X, y) : Standardizer::identity(X.cols());
  m.X_train = m.standardizer.transform(X);
  m.y_train = m.standardizer.transform_target(y);

  Eigen::MatrixXd K = gram(kernel, m.X_train);
  K.diagonal().array() += m.noise;
  if (!try_factor(K, m.chol)) {
    bool ok = false;
    for (double j : kJitterLadder) {
      Eigen::MatrixXd Kj = K;
      Kj.diagonal().array() += j;
      if (try_factor(Kj, m.chol)) {
        m.jitter = j;
        ok = true;
        break;
      }
    }
    if (!ok) throw Error(Errc::SingularKernelMatrix, "K + noise I is not positive definite after jitter 1e-4");
  }
  m.alpha = m.chol.triangularView<Eigen::Lower>().solve(m.y_train);
  m.chol.triangularView<Eigen::Lower>().transpose().solveInPlace(m.alpha);
  return m;
}

Eigen::VectorXd predict_mean(const Model& model, const Eigen::MatrixXd& Xs) {
  const Eigen::MatrixXd Ks = gram(model.kernel, model.X_train, model.standardizer.transform(Xs));
  Eigen::VectorXd mu = Ks.transpose() * model.alpha;
  for (Eigen::Index i = 0; i < mu.size(); ++i) mu[i] = model.standardizer.inverse_target(mu[i]);
  return mu;
}

Eigen::MatrixXd predict_cov(const Model& model, const Eigen::MatrixXd& Xs) {
  const Eigen::MatrixXd Z = model.standardizer.transform(Xs);
  const Eigen::MatrixXd Ks = gram(model.kernel, model.X_train, Z);
  const Eigen::MatrixXd V = model.chol.triangularView<Eigen::Lower>().solve(Ks);
  Eigen::MatrixXd cov = gram(model.kernel, Z) - V.transpose() * V;
  cov = 0.5 * (cov + cov.transpose());
  const double scale = model.standardizer.target_std * model.standardizer.target_std;
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    if (cov(i, i) < 0.0 && cov(i, i) > -1e-8) cov(i, i) = 0.0;
  }
  return cov * scale;
}

Lml log_marginal_likelihood(const Model& model) {
  const auto n = static_cast<double>(model.y_train.size());
  Lml out;
  const double log_det = 2.0 * model.chol.diagonal().array().log().sum();
  out.value = -0.5 * model.y_train.dot(model.alpha) - 0.5 * log_det -
              0.5 * n * std::log(2.0 * std::numbers::pi);

  const Eigen::Index N = model.y_train.size();
  Eigen::MatrixXd W = Eigen::MatrixXd::Identity(N, N);
  model.chol.triangularView<Eigen::Lower>().solveInPlace(W);
  model.chol.triangularView<Eigen::Lower>().transpose().solveInPlace(W);
  const Eigen::MatrixXd inner = model.alpha * model.alpha.transpose() - W;

  for (const auto& dK : grad_log_hyperparams(model.kernel, model.X_train)) {
    out.gradient.push_back(0.5 * inner.cwiseProduct(dK).sum());
  }
  out.gradient.push_back(0.5 * model.noise * inner.trace());
  return out;
}

Model optimize_hyperparams(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, KernelKind kind,
                           const OptimizeOptions& options) {
  if (options.restarts < 1) throw Error(Errc::InvalidConfig, "gp.restarts must be >= 1");
  KernelConfig base;
  base.kind = kind;
  base.lengthscales.assign(options.ard ? static_cast<std::size_t>(X.cols()) : 1, 1.0);
  const std::size_t n_kernel = base.log_hyperparams().size();

  // Log-space search box, one entry per hyperparameter plus noise.
  std::vector<double> lower, upper;
  const auto names = base.hyperparam_names();
  for (const auto& name : names) {
    if (name == "variance" || name == "sigma_w2" || name == "sigma_b2") {
      lower.push_back(std::log(1e-4));
      upper.push_back(std::log(1e4));
    } else {
      lower.push_back(std::log(1e-3));
      upper.push_back(std::log(1e3));
    }
  }
  lower.push_back(std::log(kNoiseFloor));
  upper.push_back(std::log(10.0));

  const FitOptions fit_opts{options.standardize};
  auto build = [&](std::span<const double> theta) {
    KernelConfig cfg = base;
    cfg.set_log_hyperparams(theta.first(n_kernel));
    return fit(X, y, cfg, std::exp(theta[n_kernel]), fit_opts);
  };
  auto objective = [&](std::span<const double> theta, std::span<double> grad) {
    const Model m = build(theta);
    const Lml lml = log_marginal_likelihood(m);
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = -lml.gradient[i];
    return -lml.value;
  };

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto log_uniform = [&](double lo, double hi) {
    return std::log(lo) + (std::log(hi) - std::log(lo)) * unit(rng);
  };

  LbfgsOptions lb;
  lb.max_iterations = options.max_iterations;
  double best_f = std::numeric_limits<double>::infinity();
  std::vector<double> best_theta;
  for (std::size_t r = 0; r < options.restarts; ++r) {
    std::vector<double> theta0;
    for (std::size_t i = 0; i < n_kernel; ++i) theta0.push_back(log_uniform(0.1, 10.0));
    theta0.push_back(log_uniform(1e-4, 1.0));
    try {
      const LbfgsResult res = minimize_lbfgs(objective, theta0, lower, upper, lb);
      if (res.f < best_f) {
        best_f = res.f;
        best_theta = res.x;
      }
    } catch (const Error&) {
      // start point could not be factored; try the next one
    }
  }
  if (best_theta.empty()) {
    throw Error(Errc::AllRestartsFailed, std::string("every restart failed for kernel ") +
                                             std::string(to_string(kind)));
  }
  return build(best_theta);
}

}  // namespace cfb::gp
