#pragma once

#include <Eigen/Dense>

#include "cfbench/gp.hpp"
#include "cfbench/krr.hpp"
#include "cfbench/lstm.hpp"
#include "cfbench/rollout.hpp"

namespace cfb {

/// Single-step regression data: one row (v_follower, v_leader, s) per step
/// k < N-1 with the target at k (a) or k+1 (v, s).
struct Regression {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
};

Regression make_regression(const Trajectory& segment, TargetKind target);

Eigen::RowVectorXd feature_vector(const FeatureRow& row);

class GpPredictor final : public Predictor {
public:
  explicit GpPredictor(gp::Model model) : model_(std::move(model)) {}
  std::size_t window() const override { return 1; }
  double predict(std::span<const FeatureRow> rows) const override;
  const gp::Model& model() const noexcept { return model_; }

private:
  gp::Model model_;
};

class KrrPredictor final : public Predictor {
public:
  explicit KrrPredictor(krr::Model model) : model_(std::move(model)) {}
  std::size_t window() const override { return 1; }
  double predict(std::span<const FeatureRow> rows) const override;
  const krr::Model& model() const noexcept { return model_; }

private:
  krr::Model model_;
};

class LstmPredictor final : public Predictor {
public:
  explicit LstmPredictor(lstm::Model model) : model_(std::move(model)) {}
  std::size_t window() const override { return model_.config.window; }
  double predict(std::span<const FeatureRow> rows) const override;
  const lstm::Model& model() const noexcept { return model_; }

private:
  lstm::Model model_;
};

}  // namespace cfb
