#include <cmath>
#include <numbers>
#include <random>

#include "cfbench/gp.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cfb;

namespace {

const gp::FitOptions kRaw{false};

KernelConfig unit_kernel(KernelKind kind, std::size_t dim = 1) {
  KernelConfig c;
  c.kind = kind;
  c.lengthscales.assign(dim, 1.0);
  return c;
}

}  // namespace

TEST_CASE("single-point hand examples") {
  Eigen::MatrixXd X(1, 1);
  X << 0.5;
  Eigen::VectorXd y(1);
  y << 2.0;
  const KernelConfig k = unit_kernel(KernelKind::Rbf);

  const auto noiseless = gp::fit(X, y, k, 0.0, kRaw);
  CHECK(noiseless.noise == gp::kNoiseFloor);
  CHECK(gp::predict_mean(noiseless, X)(0) == doctest::Approx(2.0).epsilon(1e-6));

  const auto noisy = gp::fit(X, y, k, 1.0, kRaw);
  CHECK(gp::predict_mean(noisy, X)(0) == doctest::Approx(1.0).epsilon(1e-12));
  const double expect = -1.0 - 0.5 * std::log(2.0) - 0.5 * std::log(2.0 * std::numbers::pi);
  CHECK(gp::log_marginal_likelihood(noisy).value == doctest::Approx(expect).epsilon(1e-12));
  CHECK(gp::log_marginal_likelihood(noisy).value == doctest::Approx(-2.26551).epsilon(1e-5));
}

TEST_CASE("posterior mean and covariance match a dense-solve oracle") {
  std::mt19937_64 rng(11);
  for (KernelKind kind : kAllKernels) {
    CAPTURE(to_string(kind));
    const Eigen::MatrixXd X = oracle::random_matrix(rng, 5, 2, -2, 2);
    const Eigen::VectorXd y = oracle::random_matrix(rng, 5, 1, -3, 3);
    const Eigen::MatrixXd Xs = oracle::random_matrix(rng, 4, 2, -2, 2);
    const KernelConfig k = unit_kernel(kind, 2);
    const double noise = 0.1;
    const auto m = gp::fit(X, y, k, noise, kRaw);

    const Eigen::MatrixXd Ks = oracle::dense_gram(k, X, X) + noise * Eigen::MatrixXd::Identity(5, 5);
    const Eigen::MatrixXd Kx = oracle::dense_gram(k, X, Xs);
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(Ks);
    const Eigen::VectorXd mu = Kx.transpose() * lu.solve(y);
    const Eigen::MatrixXd cov = oracle::dense_gram(k, Xs, Xs) - Kx.transpose() * lu.solve(Kx);
    CHECK((gp::predict_mean(m, Xs) - mu).cwiseAbs().maxCoeff() <= 1e-10);
    const Eigen::MatrixXd pc = gp::predict_cov(m, Xs);
    CHECK((pc - cov).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK((pc - pc.transpose()).cwiseAbs().maxCoeff() <= 1e-12);

    const Eigen::MatrixXd rebuilt = m.chol * m.chol.transpose();
    const Eigen::MatrixXd target = oracle::dense_gram(k, X, X) + (m.noise + m.jitter) * Eigen::MatrixXd::Identity(5, 5);
    CHECK((rebuilt - target).norm() / target.norm() <= 1e-8);
  }
}

TEST_CASE("noiseless interpolation and zero variance at training points") {
  std::mt19937_64 rng(12);
  const Eigen::MatrixXd X = Eigen::VectorXd::LinSpaced(8, -4, 4);
  const Eigen::VectorXd y = oracle::random_matrix(rng, 8, 1, -1, 1);
  const auto m = gp::fit(X, y, unit_kernel(KernelKind::Matern52), 0.0);
  CHECK((gp::predict_mean(m, X) - y).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(gp::predict_cov(m, X).diagonal().cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("far from the data the posterior reverts to the prior") {
  std::mt19937_64 rng(13);
  const Eigen::MatrixXd X = oracle::random_matrix(rng, 20, 2, 0, 5);
  const Eigen::VectorXd y = oracle::random_matrix(rng, 20, 1, 3, 9);
  KernelConfig k = unit_kernel(KernelKind::Rbf, 2);
  k.variance = 1.7;
  const auto m = gp::fit(X, y, k, 0.05);
  Eigen::MatrixXd far(1, 2);
  far << 1e4, -1e4;
  CHECK(gp::predict_mean(m, far)(0) == doctest::Approx(y.mean()).epsilon(1e-9));
  const double prior = 1.7 * m.standardizer.target_std * m.standardizer.target_std;
  CHECK(gp::predict_cov(m, far)(0, 0) == doctest::Approx(prior).epsilon(1e-9));

  const Eigen::MatrixXd Xs = oracle::random_matrix(rng, 30, 2, -1, 6);
  const Eigen::VectorXd var = gp::predict_cov(m, Xs).diagonal();
  CHECK(var.maxCoeff() <= prior + 1e-8);
  CHECK(var.minCoeff() >= 0.0);
}

TEST_CASE("log marginal likelihood: value and gradient") {
  std::mt19937_64 rng(14);
  const double h = 1e-5;
  for (KernelKind kind : kAllKernels) {
    CAPTURE(to_string(kind));
    const Eigen::MatrixXd X = oracle::random_matrix(rng, 8, 2, -2, 2);
    const Eigen::VectorXd y = oracle::random_matrix(rng, 8, 1, -2, 2);
    KernelConfig k = unit_kernel(kind, 2);
    k.lengthscales = {0.8, 1.4};
    const double noise = 0.2;
    const auto m = gp::fit(X, y, k, noise, kRaw);
    const auto l = gp::log_marginal_likelihood(m);
    CHECK(l.value == doctest::Approx(oracle::gp_lml(X, y, k, noise)).epsilon(1e-10));

    auto theta = k.log_hyperparams();
    theta.push_back(std::log(noise));
    REQUIRE(l.gradient.size() == theta.size());
    for (std::size_t j = 0; j < theta.size(); ++j) {
      auto at = [&](double delta) {
        auto t = theta;
        t[j] += delta;
        KernelConfig kk = k;
        kk.set_log_hyperparams(std::span<const double>(t).first(t.size() - 1));
        return oracle::gp_lml(X, y, kk, std::exp(t.back()));
      };
      const double fd = (at(h) - at(-h)) / (2 * h);
      CHECK(oracle::rel_err(l.gradient[j], fd, 1e-4) <= 1e-5);
    }
  }

  const Eigen::MatrixXd X = oracle::random_matrix(rng, 6, 1, -2, 2);
  const auto zero = gp::fit(X, Eigen::VectorXd::Zero(6), unit_kernel(KernelKind::Rbf), 0.3, kRaw);
  const Eigen::MatrixXd Ks = oracle::dense_gram(unit_kernel(KernelKind::Rbf), X, X) + 0.3 * Eigen::MatrixXd::Identity(6, 6);
  CHECK(gp::log_marginal_likelihood(zero).value ==
        doctest::Approx(-0.5 * std::log(Ks.determinant()) - 3.0 * std::log(2.0 * std::numbers::pi)).epsilon(1e-10));
}

TEST_CASE("duplicated noiseless points are either rescued by jitter or rejected") {
  Eigen::MatrixXd X(3, 1);
  X << 1.0, 1.0, 2.0;
  Eigen::VectorXd y(3);
  y << 1.0, 1.5, 0.0;
  const auto code = oracle::code_of([&] {
    const auto m = gp::fit(X, y, unit_kernel(KernelKind::Rbf), 0.0, kRaw);
    CHECK(m.alpha.allFinite());
  });
  CHECK((!code || *code == Errc::SingularKernelMatrix));
}

TEST_CASE("dimension mismatches are rejected") {
  const Eigen::MatrixXd X = Eigen::MatrixXd::Random(4, 2);
  CHECK(oracle::code_of([&] { gp::fit(X, Eigen::VectorXd::Zero(3), unit_kernel(KernelKind::Rbf), 0.1); }) ==
        Errc::DimensionMismatch);
  const auto m = gp::fit(X, Eigen::VectorXd::Ones(4), unit_kernel(KernelKind::Rbf), 0.1);
  CHECK(oracle::code_of([&] { gp::predict_mean(m, Eigen::MatrixXd::Zero(2, 3)); }) == Errc::DimensionMismatch);
}

TEST_CASE("maximum likelihood at least matches the generating hyperparameters") {
  std::mt19937_64 rng(15);
  const int n = 40;
  const Eigen::MatrixXd X = oracle::random_matrix(rng, n, 1, -4, 4);
  const KernelConfig truth = unit_kernel(KernelKind::Rbf);
  const double noise = 0.01;
  const Eigen::MatrixXd K = oracle::dense_gram(truth, X, X) + noise * Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd L = K.llt().matrixL();
  std::normal_distribution<double> g;
  Eigen::VectorXd z(n);
  for (auto& v : z) v = g(rng);
  const Eigen::VectorXd y = L * z;

  gp::OptimizeOptions opt;
  opt.standardize = false;
  opt.seed = 3;
  opt.restarts = 1;
  const auto one = gp::optimize_hyperparams(X, y, KernelKind::Rbf, opt);
  opt.restarts = 5;
  const auto five = gp::optimize_hyperparams(X, y, KernelKind::Rbf, opt);
  const double at_truth = oracle::gp_lml(X, y, truth, noise);
  const double l1 = gp::log_marginal_likelihood(one).value;
  const double l5 = gp::log_marginal_likelihood(five).value;
  CHECK(l5 >= at_truth - 1e-6);
  CHECK(l5 >= l1 - 1e-9);
  CHECK(five.noise >= gp::kNoiseFloor);

  const auto again = gp::optimize_hyperparams(X, y, KernelKind::Rbf, opt);
  CHECK(again.kernel == five.kernel);
  CHECK(again.noise == five.noise);
}

TEST_CASE("constant targets do not break the optimizer") {
  std::mt19937_64 rng(16);
  const Eigen::MatrixXd X = oracle::random_matrix(rng, 15, 2, -1, 1);
  const auto m = gp::optimize_hyperparams(X, Eigen::VectorXd::Constant(15, 4.2), KernelKind::Matern32);
  CHECK((gp::predict_mean(m, X).array() - 4.2).abs().maxCoeff() <= 1e-6);
}
