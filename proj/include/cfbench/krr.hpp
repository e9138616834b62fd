#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "cfbench/kernels.hpp"
#include "cfbench/standardizer.hpp"

namespace cfb::krr {

struct FitOptions {
  bool standardize = true;
};

/// Kernel ridge regression in dual form: weights = (K + lambda I)^-1 y.
struct Model {
  Eigen::MatrixXd X_train;  // standardized features
  Eigen::VectorXd weights;
  KernelConfig kernel;
  double lambda = 1.0;
  Standardizer standardizer;
};

/// Solves with an LDL^T factorization. Throws SingularKernelMatrix when the
/// regularized Gram matrix is not positive definite.
Model fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelConfig& kernel,
          double lambda, const FitOptions& options = {});

Eigen::VectorXd predict(const Model& model, const Eigen::MatrixXd& Xs);

/// Kernel config the grid uses for one (kind, lengthscale) cell: unit
/// variance, shared lengthscale; for MLP the value sets sigma_w2 = 1/l^2.
KernelConfig grid_kernel(KernelKind kind, double lengthscale, std::size_t dim);

struct GridSpec {
  std::vector<KernelKind> kinds;
  std::vector<double> lambdas;
  std::vector<double> lengthscales;
  std::size_t k_folds = 5;
  std::uint64_t seed = 0;  // folds are contiguous blocks; kept for config symmetry

  /// All six kernels, lambda 1e-6..1e2 (9 values), lengthscale 0.1..100 (7 values).
  static GridSpec defaults();
};

struct CvRow {
  KernelKind kind;
  double lambda;
  double lengthscale;
  double mean_mse;  // mean validation MSE over folds, +inf if a fold failed
};

struct GridResult {
  Model best;
  std::vector<CvRow> table;
};

/// Blocked k-fold CV over every (kind, lambda, lengthscale) cell. The lowest
/// mean MSE wins; ties go to larger lambda, then larger lengthscale. The
/// winner is refitted on all data.
GridResult grid_search_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GridSpec& grid,
                          const FitOptions& options = {});

std::string cv_table_csv(const std::vector<CvRow>& table);

}  // namespace cfb::krr
