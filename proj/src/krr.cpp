#include "cfbench/krr.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "cfbench/error.hpp"
#include "csv_util.hpp"

namespace cfb::krr {

Model fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelConfig& kernel,
          double lambda, const FitOptions& options) {
  if (!(lambda > 0.0)) throw Error(Errc::InvalidConfig, "KRR lambda must be positive");
  if (X.rows() < 1 || X.rows() != y.size()) {
    throw Error(Errc::DimensionMismatch, "X has " + std::to_string(X.rows()) + " rows, y has " +
                                             std::to_string(y.size()));
  }
  kernel.validate(static_cast<std::size_t>(X.cols()));
  Model m;
  m.kernel = kernel;
  m.lambda = lambda;
  m.standardizer = options.standardize ? Standardizer::fit(X, y) : Standardizer::identity(X.cols());
  m.X_train = m.standardizer.transform(X);
  Eigen::MatrixXd K = gram(kernel, m.X_train);
  K.diagonal().array() += lambda;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(K);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      (ldlt.vectorD().array() <= 0.0).any()) {
    throw Error(Errc::SingularKernelMatrix, "K + lambda I is not positive definite");
  }
  m.weights = ldlt.solve(m.standardizer.transform_target(y));
  if (!m.weights.allFinite()) throw Error(Errc::SingularKernelMatrix, "non-finite KRR weights");
  return m;
}

Eigen::VectorXd predict(const Model& model, const Eigen::MatrixXd& Xs) {
  const Eigen::MatrixXd Ks = gram(model.kernel, model.X_train, model.standardizer.transform(Xs));
  Eigen::VectorXd out = Ks.transpose() * model.weights;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = model.standardizer.inverse_target(out[i]);
  return out;
}

KernelConfig grid_kernel(KernelKind kind, double lengthscale, std::size_t dim) {
  (void)dim;
  KernelConfig cfg;
  cfg.kind = kind;
  cfg.variance = 1.0;
  cfg.lengthscales = {lengthscale};
  if (kind == KernelKind::Mlp) {
    cfg.sigma_w2 = 1.0 / (lengthscale * lengthscale);
    cfg.sigma_b2 = 1.0;
  }
  return cfg;
}

GridSpec GridSpec::defaults() {
  GridSpec g;
  g.kinds.assign(std::begin(kAllKernels), std::end(kAllKernels));
  for (int e = -6; e <= 2; ++e) g.lambdas.push_back(std::pow(10.0, e));
  for (int i = 0; i < 7; ++i) g.lengthscales.push_back(0.1 * std::pow(10.0, i / 2.0));
  return g;
}

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(idx[i]);
  return out;
}

Eigen::VectorXd take(const Eigen::VectorXd& y, const std::vector<Eigen::Index>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = y[idx[i]];
  return out;
}

bool better(const CvRow& a, const CvRow& b) {
  const double tol = 1e-12 * std::max(1.0, std::abs(b.mean_mse));
  if (a.mean_mse < b.mean_mse - tol) return true;
  if (a.mean_mse > b.mean_mse + tol) return false;
  if (a.lambda != b.lambda) return a.lambda > b.lambda;
  return a.lengthscale > b.lengthscale;
}

}  // namespace

GridResult grid_search_cv(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const GridSpec& grid,
                          const FitOptions& options) {
  if (grid.k_folds < 2) throw Error(Errc::InvalidConfig, "krr.k_folds must be >= 2");
  if (grid.kinds.empty() || grid.lambdas.empty() || grid.lengthscales.empty()) {
    throw Error(Errc::InvalidConfig, "KRR grid has an empty axis");
  }
  const Eigen::Index n = X.rows();
  if (n < static_cast<Eigen::Index>(grid.k_folds) || n != y.size()) {
    throw Error(Errc::DimensionMismatch, "KRR CV needs at least k_folds matching rows");
  }
  const std::size_t dim = static_cast<std::size_t>(X.cols());

  struct Fold {
    Eigen::MatrixXd X_fit, X_val;
    Eigen::VectorXd y_fit, y_val;
  };
  std::vector<Fold> folds;
  for (std::size_t f = 0; f < grid.k_folds; ++f) {
    const auto lo = static_cast<Eigen::Index>(static_cast<std::size_t>(n) * f / grid.k_folds);
    const auto hi = static_cast<Eigen::Index>(static_cast<std::size_t>(n) * (f + 1) / grid.k_folds);
    std::vector<Eigen::Index> fit_idx, val_idx;
    for (Eigen::Index i = 0; i < n; ++i) (i >= lo && i < hi ? val_idx : fit_idx).push_back(i);
    folds.push_back({take_rows(X, fit_idx), take_rows(X, val_idx), take(y, fit_idx), take(y, val_idx)});
  }

  GridResult result;
  for (KernelKind kind : grid.kinds) {
    for (double lambda : grid.lambdas) {
      for (double ls : grid.lengthscales) {
        const KernelConfig cfg = grid_kernel(kind, ls, dim);
        double total = 0.0;
        for (const Fold& fold : folds) {
          try {
            const Model m = fit(fold.X_fit, fold.y_fit, cfg, lambda, options);
            const Eigen::VectorXd pred = predict(m, fold.X_val);
            total += (pred - fold.y_val).squaredNorm() / static_cast<double>(fold.y_val.size());
          } catch (const Error&) {
            total = std::numeric_limits<double>::infinity();
            break;
          }
          if (!std::isfinite(total)) {
            total = std::numeric_limits<double>::infinity();
            break;
          }
        }
        result.table.push_back({kind, lambda, ls, total / static_cast<double>(grid.k_folds)});
      }
    }
  }

  const CvRow* best = nullptr;
  for (const CvRow& row : result.table) {
    if (!std::isfinite(row.mean_mse)) continue;
    if (best == nullptr || better(row, *best)) best = &row;
  }
  if (best == nullptr) throw Error(Errc::SingularKernelMatrix, "every KRR grid cell failed");
  result.best = fit(X, y, grid_kernel(best->kind, best->lengthscale, dim), best->lambda, options);
  return result;
}

std::string cv_table_csv(const std::vector<CvRow>& table) {
  std::ostringstream out;
  out << "kernel,lambda,lengthscale,mean_mse\n";
  for (const auto& r : table) {
    out << to_string(r.kind) << ',' << detail::format_double(r.lambda) << ','
        << detail::format_double(r.lengthscale) << ',' << detail::format_double(r.mean_mse) << '\n';
  }
  return out.str();
}

}  // namespace cfb::krr
