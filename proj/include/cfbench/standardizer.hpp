#pragma once

#include <Eigen/Dense>

namespace cfb {

/// Per-column affine scaling of features plus one for the target. Columns
/// with (population) std below 1e-12 keep unit scale.
struct Standardizer {
  Eigen::RowVectorXd feature_mean;
  Eigen::RowVectorXd feature_std;
  double target_mean = 0.0;
  double target_std = 1.0;

  static Standardizer fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);
  static Standardizer identity(Eigen::Index dim);

  Eigen::MatrixXd transform(const Eigen::MatrixXd& X) const;
  Eigen::VectorXd transform_target(const Eigen::VectorXd& y) const;
  double inverse_target(double y) const { return y * target_std + target_mean; }

  bool operator==(const Standardizer&) const = default;
};

}  // namespace cfb
