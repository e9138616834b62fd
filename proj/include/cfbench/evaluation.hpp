#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "cfbench/rollout.hpp"
#include "cfbench/trajectory.hpp"

namespace cfb {

/// Root mean squared difference. Throws LengthMismatch / EmptySeries.
double rmse(std::span<const double> pred, std::span<const double> truth);

struct RolloutScores {
  double rmse_a = 0.0;
  double rmse_v = 0.0;
  double rmse_s = 0.0;
  std::size_t steps = 0;  // overlap length used
  bool diverged = false;
  bool collision = false;

  double get(TargetKind variable) const;
};

/// RMSEs of a, v and s over the horizon both series cover. A truncated
/// rollout is scored on its own length and keeps its flags.
RolloutScores evaluate_rollout(const RolloutResult& sim, const Trajectory& truth);

/// Follower position error after N steps when two trajectories start at the
/// same position and integrate speeds with the trapezoid rule:
///   dt * sum_{k=1..N} (e_k + e_{k-1}) / 2,  e_0 = 0.
/// v_errors holds e_1..e_N (simulated minus recorded speed). The spacing
/// error is the negative of the returned value.
double cumulative_error_identity(std::span<const double> v_errors, double dt);

struct ResultsRow {
  double rmse = 0.0;
  TargetKind variable = TargetKind::A;  // predicted variable the RMSE refers to
  std::string dataset;
  std::string model;
  TargetKind target = TargetKind::A;
  bool diverged = false;
  bool collision = false;
};

/// (dataset, model, target) results with three rows per cell.
class ResultsTable {
public:
  /// Adds the three rows of one cell; DuplicateCell if the cell exists.
  void add_cell(const std::string& dataset, const std::string& model, TargetKind target,
                const RolloutScores& scores);

  /// Adds a single row; DuplicateCell on a repeated key.
  void add_row(const ResultsRow& row);

  /// Rows ordered by (dataset, model, target, variable).
  std::vector<ResultsRow> rows() const;
  std::size_t size() const noexcept { return rows_.size(); }

  /// Columns: RMSE, variable, Dataset, Model, Target, diverged, collision.
  std::string to_csv() const;
  void save_csv(const std::filesystem::path& path) const;
  static ResultsTable load_csv(const std::filesystem::path& path);

private:
  using Key = std::tuple<std::string, std::string, int, int>;
  std::map<Key, ResultsRow> rows_;
};

}  // namespace cfb
