#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cfbench/evaluation.hpp"
#include "cfbench/ga_calibration.hpp"
#include "cfbench/krr.hpp"
#include "cfbench/lstm.hpp"
#include "cfbench/synthesis.hpp"

namespace cfb::experiment {

enum class ModelName { Idm, Gipps, FvdmCth, FvdmSigmoid, Gp, Krr, Lstm };

inline constexpr ModelName kAllModels[] = {ModelName::Idm, ModelName::Gipps, ModelName::FvdmCth,
                                           ModelName::FvdmSigmoid, ModelName::Gp, ModelName::Krr,
                                           ModelName::Lstm};

std::string_view to_string(ModelName m);
/// Case-insensitive; '_' may replace '-'. Throws UnknownModelKind.
ModelName parse_model_name(std::string_view name);
bool is_classical(ModelName m);
ClassicalKind classical_kind(ModelName m);

/// Either a synthetic scenario or a recorded CSV.
struct DatasetSpec {
  std::string name;
  std::optional<SynthesisSpec> synthetic;
  std::filesystem::path csv_path;
  ColumnMap columns;
  double leader_length = 5.0;
  double dt = 0.0;  // <= 0 infers from the timestamps

  Trajectory load() const;
};

/// How the GP kernel is chosen among the candidates: "mean-rank" ranks each
/// kernel per variable by free-simulation RMSE on the training segment and
/// keeps the lowest mean rank (ties to the earlier kernel in the list).
struct GpSettings {
  std::vector<KernelKind> kernels{std::begin(kAllKernels), std::end(kAllKernels)};
  std::size_t restarts = 3;
  std::size_t max_iterations = 100;
  bool ard = true;
  bool standardize = true;
  std::size_t max_train_points = 0;  // 0 keeps every training row
  std::string selection = "mean-rank";
};

struct KrrSettings {
  krr::GridSpec grid = krr::GridSpec::defaults();
  bool standardize = true;
  std::size_t max_train_points = 0;
};

struct ExperimentConfig {
  std::vector<DatasetSpec> datasets;
  std::vector<ModelName> models;
  std::vector<TargetKind> targets;
  GaConfig ga;
  GpSettings gp;
  KrrSettings krr;
  lstm::Config lstm;
  SplitSpec split;
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;

  /// Throws InvalidConfig naming the offending key.
  void validate() const;

  static ExperimentConfig from_json_text(const std::string& text);
  static ExperimentConfig from_file(const std::filesystem::path& path);
  std::string to_json_text() const;

  /// The three synthetic datasets (IDM, Gipps and FVDM-CTH followers), all
  /// seven models and all three targets.
  static ExperimentConfig default_grid(std::uint64_t master_seed);

  /// default_grid with budgets that finish in minutes on one core: one GP
  /// restart on at most 150 rows, KRR on at most 200 rows, 60 LSTM epochs.
  static ExperimentConfig desk_scale(std::uint64_t master_seed);
};

struct ConfigKey {
  std::string key;
  std::string unit;
  std::string description;
};

/// Every key accepted in a config file.
const std::vector<ConfigKey>& config_keys();

struct CellKey {
  std::string dataset;
  ModelName model = ModelName::Idm;
  TargetKind target = TargetKind::A;

  /// "<dataset>_<model>_<target>"
  std::string label() const;
};

/// FNV-1a over the master seed and the cell key; stable across platforms.
std::uint64_t cell_seed(std::uint64_t master_seed, const CellKey& key);
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 14695981039346656037ULL);

struct PreparedDataset {
  std::string name;
  Trajectory full;
  std::size_t split = 0;
  Trajectory train;
  Trajectory test;
};

PreparedDataset prepare(const DatasetSpec& spec, const SplitSpec& split);

/// A fitted model of any family, ready for free simulation.
struct FittedModel {
  ModelName model = ModelName::Idm;
  TargetKind target = TargetKind::A;
  std::optional<ClassicalModel> classical;
  std::shared_ptr<const Predictor> predictor;
  std::string kernel_choice;  // GP/KRR only
};

/// Free simulation over the test segment. Sequence models are seeded with
/// the last training steps so the rollout starts exactly at the split.
RolloutResult rollout_test(const FittedModel& fitted, const PreparedDataset& data);

/// Writes `artifact.json` (and `lstm.bin` for LSTM) into `dir`.
void save_fitted(const FittedModel& fitted, const std::filesystem::path& dir);
FittedModel load_fitted(const std::filesystem::path& dir);

struct CellOutcome {
  CellKey key;
  std::uint64_t seed = 0;
  std::filesystem::path artifact_dir;  // empty when artifacts were not requested
  RolloutScores scores;
  std::vector<ResultsRow> rows;
  double wall_seconds = 0.0;
  std::string error;  // set when the cell failed; rows are then NaN and flagged diverged
};

/// Fits on the training segment, rolls out on the test segment and scores.
/// With a non-empty `artifacts_root` the fitted model, rollout and scores
/// land in a content-addressed subdirectory. Errors carry the cell label.
CellOutcome run_cell(const ExperimentConfig& config, const PreparedDataset& data, const CellKey& key,
                     const std::filesystem::path& artifacts_root = {});

CellOutcome run_cell(const ExperimentConfig& config, const CellKey& key,
                     const std::filesystem::path& artifacts_root = {});

struct GridOutcome {
  ResultsTable table;
  std::vector<CellOutcome> cells;
};

/// Runs every cell once on up to config.workers threads. Failed cells become
/// flagged rows. With a non-empty `out_dir` writes results.csv,
/// manifest.json and cells/<label>-<hash>/.
GridOutcome run_grid(const ExperimentConfig& config, const std::filesystem::path& out_dir = {});

/// Removes the first `count` steps; the collision index shifts with them.
RolloutResult drop_front(const RolloutResult& r, std::size_t count);

inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace cfb::experiment
