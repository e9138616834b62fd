#include "cfbench/predictors.hpp"

#include "cfbench/error.hpp"

namespace cfb {

Regression make_regression(const Trajectory& segment, TargetKind target) {
  const std::size_t n = segment.size();
  if (n < 2) throw Error(Errc::TooShort, "regression needs at least two samples");
  const auto d = derive_kinematics(segment);
  const auto vf = segment.v_follower();
  const auto vl = segment.v_leader();
  Regression r;
  const auto rows = static_cast<Eigen::Index>(n - 1);
  r.X.resize(rows, 3);
  r.y.resize(rows);
  for (Eigen::Index k = 0; k < rows; ++k) {
    const auto i = static_cast<std::size_t>(k);
    r.X(k, 0) = vf[i];
    r.X(k, 1) = vl[i];
    r.X(k, 2) = d.s[i];
    switch (target) {
      case TargetKind::A: r.y[k] = d.a_follower[i]; break;
      case TargetKind::V: r.y[k] = vf[i + 1]; break;
      case TargetKind::S: r.y[k] = d.s[i + 1]; break;
    }
  }
  return r;
}

Eigen::RowVectorXd feature_vector(const FeatureRow& row) {
  Eigen::RowVectorXd x(3);
  x << row.v_follower, row.v_leader, row.s;
  return x;
}

namespace {

const FeatureRow& last_row(std::span<const FeatureRow> rows) {
  if (rows.size() != 1) throw Error(Errc::ShapeMismatch, "single-step model expects one row");
  return rows.front();
}

}  // namespace

double GpPredictor::predict(std::span<const FeatureRow> rows) const {
  return gp::predict_mean(model_, feature_vector(last_row(rows)))[0];
}

double KrrPredictor::predict(std::span<const FeatureRow> rows) const {
  return krr::predict(model_, feature_vector(last_row(rows)))[0];
}

double LstmPredictor::predict(std::span<const FeatureRow> rows) const {
  return lstm::predict(model_, rows);
}

}  // namespace cfb
