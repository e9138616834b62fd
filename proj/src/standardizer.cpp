#include "cfbench/standardizer.hpp"

#include <cmath>

#include "cfbench/error.hpp"

namespace cfb {

namespace {
constexpr double kMinStd = 1e-12;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() == 0 || X.rows() != y.size()) {
    throw Error(Errc::DimensionMismatch, "standardizer needs matching, non-empty X and y");
  }
  const double n = static_cast<double>(X.rows());
  Standardizer st;
  st.feature_mean = X.colwise().mean();
  st.feature_std = ((X.rowwise() - st.feature_mean).array().square().colwise().sum() / n).sqrt();
  for (Eigen::Index k = 0; k < st.feature_std.size(); ++k) {
    if (st.feature_std[k] < kMinStd) st.feature_std[k] = 1.0;
  }
  st.target_mean = y.mean();
  st.target_std = std::sqrt((y.array() - st.target_mean).square().sum() / n);
  if (st.target_std < kMinStd) st.target_std = 1.0;
  return st;
}

Standardizer Standardizer::identity(Eigen::Index dim) {
  Standardizer st;
  st.feature_mean = Eigen::RowVectorXd::Zero(dim);
  st.feature_std = Eigen::RowVectorXd::Ones(dim);
  return st;
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& X) const {
  if (X.cols() != feature_mean.size()) {
    throw Error(Errc::DimensionMismatch, "expected " + std::to_string(feature_mean.size()) +
                                             " feature columns, got " + std::to_string(X.cols()));
  }
  return ((X.rowwise() - feature_mean).array().rowwise() / feature_std.array()).matrix();
}

Eigen::VectorXd Standardizer::transform_target(const Eigen::VectorXd& y) const {
  return (y.array() - target_mean) / target_std;
}

}  // namespace cfb
