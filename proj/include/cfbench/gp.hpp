#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "cfbench/kernels.hpp"
#include "cfbench/standardizer.hpp"

namespace cfb::gp {

/// Smallest observation noise variance the model accepts.
inline constexpr double kNoiseFloor = 1e-8;

/// Diagonal jitter tried, in order, when K + noise*I fails to factor.
inline constexpr double kJitterLadder[] = {1e-8, 1e-6, 1e-4};

struct FitOptions {
  bool standardize = true;
};

/// Exact GP regression with a zero-mean prior on (optionally standardized)
/// targets.
struct Model {
  Eigen::MatrixXd X_train;  // standardized features
  Eigen::VectorXd y_train;  // standardized targets
  Eigen::VectorXd alpha;    // (K + noise I)^-1 y
  Eigen::MatrixXd chol;     // lower factor of K + (noise + jitter) I
  KernelConfig kernel;
  double noise = kNoiseFloor;
  double jitter = 0.0;  // extra diagonal needed to factor, 0 if none
  Standardizer standardizer;
};

/// Throws SingularKernelMatrix once the jitter ladder is exhausted.
Model fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelConfig& kernel,
          double noise, const FitOptions& options = {});

/// Posterior mean in target units.
Eigen::VectorXd predict_mean(const Model& model, const Eigen::MatrixXd& Xs);

/// Posterior covariance of the latent function in target units^2. Diagonal
/// entries within 1e-8 below zero are clamped to zero.
Eigen::MatrixXd predict_cov(const Model& model, const Eigen::MatrixXd& Xs);

struct Lml {
  double value = 0.0;
  /// d/dtheta for [kernel log-hyperparameters..., log noise].
  std::vector<double> gradient;
};

/// -1/2 y'K^-1 y - 1/2 log|K| - N/2 log(2 pi) on the training targets the
/// model was fitted with, plus its gradient from the trace identity.
Lml log_marginal_likelihood(const Model& model);

struct OptimizeOptions {
  std::size_t restarts = 3;
  std::uint64_t seed = 0;
  std::size_t max_iterations = 100;
  bool standardize = true;
  bool ard = true;  // one lengthscale per input column
};

/// Maximum-likelihood hyperparameters from `restarts` log-uniform starts
/// (variance, lengthscales, alpha, sigma_w2, sigma_b2 in [0.1, 10]; noise in
/// [1e-4, 1]). Starts are drawn in sequence from `seed`, so a larger restart
/// count always includes the smaller one's starts.
Model optimize_hyperparams(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, KernelKind kind,
                           const OptimizeOptions& options = {});

}  // namespace cfb::gp
