#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "cfbench/classical_models.hpp"
#include "cfbench/trajectory.hpp"

namespace cfb {

/// Variable a model is fitted against and, for data-driven models, predicts.
enum class TargetKind { A, V, S };

inline constexpr TargetKind kAllTargets[] = {TargetKind::A, TargetKind::V, TargetKind::S};

std::string_view to_string(TargetKind t);
TargetKind parse_target(std::string_view name);

/// Simulated follower trajectory. a[k] is the acceleration applied between
/// steps k and k+1; the last entry repeats its predecessor, the same layout
/// derive_kinematics uses for recorded data.
///
/// A collision (s <= 0) or a blow-up truncates the series at the offending
/// step; diverged rollouts drop the non-finite step entirely.
struct RolloutResult {
  std::vector<double> x;
  std::vector<double> v;
  std::vector<double> a;
  std::vector<double> s;
  std::optional<std::size_t> collision_step;
  bool diverged = false;

  std::size_t size() const noexcept { return x.size(); }
};

/// Exports t, x, v, a, s plus collision/diverged flags on every row.
void save_rollout_csv(const RolloutResult& r, double t0, double dt,
                      const std::filesystem::path& path);

struct BallisticStep {
  double v_next;
  double dx;
};

/// Euler speed update and trapezoidal position update.
constexpr BallisticStep step_ballistic(double v, double a, double dt) {
  const double v_next = v + a * dt;
  return {v_next, (v_next + v) / 2.0 * dt};
}

/// Any magnitude above this (or a non-finite value) ends a rollout.
inline constexpr double kDivergenceLimit = 1e9;

using AccelFn = std::function<double(const CfState&)>;

/// Free simulation of a classical model against the recorded leader. The
/// follower starts from the segment's first recorded state; speed is clamped
/// at zero and a[k] stores the model output before that clamp.
RolloutResult rollout_classical(const AccelFn& accel, const Trajectory& segment);

RolloutResult rollout_classical(const ClassicalModel& model, const Trajectory& segment);

struct KinematicState {
  double x = 0.0;
  double v = 0.0;
  double a = 0.0;
  double s = 0.0;
};

/// Turns one prediction into the next follower state.
///   a: Euler/trapezoid from the predicted acceleration.
///   v: predicted speed, a = dv/dt, trapezoid for x.
///   s: x from the leader position, v = dx/dt, a = dv/dt.
/// The returned `a` is the acceleration over the step; s is always
/// recomputed from positions.
KinematicState transform_prediction(TargetKind target, double y_pred, const KinematicState& prev,
                                    double x_leader_next, double v_leader_next, double dt,
                                    double leader_length);

/// Model inputs at one time step.
struct FeatureRow {
  double v_follower;
  double v_leader;
  double s;
};

/// A fitted data-driven model usable in closed loop. Implementations must be
/// safe to call concurrently.
class Predictor {
public:
  virtual ~Predictor() = default;
  virtual std::size_t window() const = 0;
  /// `rows` holds the last window() steps, oldest first, in physical units.
  virtual double predict(std::span<const FeatureRow> rows) const = 0;
};

/// Closed-loop rollout: the first window() steps come from the record, then
/// every prediction feeds back into the follower features. Leader speed is
/// always taken from the record.
RolloutResult rollout_predictor(const Predictor& predictor, TargetKind target,
                                const Trajectory& segment);

}  // namespace cfb
