// cfbench: car-following benchmark command line.
//
// Exit codes: 0 success, 1 invalid input or configuration, 2 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "cfbench/anova.hpp"
#include "cfbench/error.hpp"
#include "cfbench/experiment.hpp"
#include "cfbench/report.hpp"
#include "cfbench/synthesis.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace cfb;
using experiment::ExperimentConfig;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << text;
}

std::string config_help() {
  std::ostringstream out;
  out << "\nConfig file keys (JSON):\n";
  for (const auto& k : experiment::config_keys()) {
    out << "  " << k.key << " [" << k.unit << "]  " << k.description << '\n';
  }
  out << "\nEnvironment: CF_BENCH_WORKERS sets the worker count when --workers is absent.\n"
         "Exit codes: 0 success, 1 invalid input, 2 runtime failure.\n";
  return out.str();
}

std::optional<std::size_t> env_workers() {
  const char* v = std::getenv("CF_BENCH_WORKERS");
  if (!v || !*v) return std::nullopt;
  try {
    const long n = std::stol(v);
    if (n < 1) throw UsageError("CF_BENCH_WORKERS must be >= 1");
    return static_cast<std::size_t>(n);
  } catch (const std::logic_error&) {
    throw UsageError("CF_BENCH_WORKERS must be a positive integer");
  }
}

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
};

ExperimentConfig load_config(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig::desk_scale(c.seed.value_or(0))
                                          : ExperimentConfig::from_file(c.config);
  if (c.seed && !c.config.empty()) cfg.master_seed = *c.seed;
  if (c.workers) {
    cfg.workers = *c.workers;
  } else if (auto w = env_workers()) {
    cfg.workers = *w;
  }
  cfg.validate();
  return cfg;
}

void print_scores(const experiment::CellOutcome& o) {
  std::cout << o.key.label() << " seed=" << o.seed << " rmse_a=" << o.scores.rmse_a
            << " rmse_v=" << o.scores.rmse_v << " rmse_s=" << o.scores.rmse_s << " steps=" << o.scores.steps
            << (o.scores.diverged ? " diverged" : "") << (o.scores.collision ? " collision" : "") << '\n';
  if (!o.artifact_dir.empty()) std::cout << "artifacts: " << o.artifact_dir.string() << '\n';
}

int run_single_cell(const Common& c, const std::string& dataset, const std::string& model,
                    const std::string& target, bool classical) {
  const ExperimentConfig cfg = load_config(c);
  experiment::CellKey key;
  key.dataset = dataset.empty() ? cfg.datasets.front().name : dataset;
  try {
    key.model = experiment::parse_model_name(model);
    key.target = parse_target(target);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (experiment::is_classical(key.model) != classical) {
    throw UsageError(std::string("--model ") + model + (classical ? " is not a classical model; use 'train'"
                                                                    : " is a classical model; use 'calibrate'"));
  }
  const fs::path out = c.out.empty() ? fs::path("cells") : fs::path(c.out);
  fs::create_directories(out);
  print_scores(experiment::run_cell(cfg, key, out));
  return 0;
}

anova::FactorPair parse_interaction(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError("--interaction expects two factors, e.g. model,target");
  try {
    return {anova::parse_factor(text.substr(0, comma)), anova::parse_factor(text.substr(comma + 1))};
  } catch (const Error& e) {
    throw UsageError(std::string("--interaction: ") + e.what());
  }
}

std::vector<TargetKind> parse_dependent(const std::string& text) {
  if (text == "all") return {std::begin(kAllTargets), std::end(kAllTargets)};
  std::string t = text;
  if (t.rfind("rmse_", 0) == 0) t = t.substr(5);
  try {
    return {parse_target(t)};
  } catch (const Error&) {
    throw UsageError("--dependent must be rmse_a, rmse_v, rmse_s or all");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Car-following model benchmark: synthesize, calibrate, train, evaluate, grid, anova, report"};
  app.require_subcommand(1, 1);
  app.footer(config_help());

  Common common;
  std::string dataset, model = "IDM", target = "s", preset = "paper-example", results, artifact;
  std::string dependent = "all", interaction, factors = "dataset,model,target";
  bool log_rmse = false, exclude_diverged = false;
  double noise = 0.0;

  auto add_common = [&](CLI::App* sub, bool with_config) {
    if (with_config) sub->add_option("--config", common.config, "experiment config JSON (default: built-in desk-scale 3-dataset grid)");
    sub->add_option("--out", common.out, "output file or directory");
    sub->add_option("--seed", common.seed, "master seed (overrides the config)");
    sub->add_option("--workers", common.workers, "concurrent cells (fallback: CF_BENCH_WORKERS)")->check(CLI::PositiveNumber);
  };

  auto* synth = app.add_subcommand("synth", "write a synthetic leader/follower trajectory CSV");
  synth->add_option("--model", model, "follower model: IDM, GIPPS, FVDM-CTH, FVDM-SIGMOID");
  synth->add_option("--preset", preset, "paper-example, stop-and-go or sinusoid");
  synth->add_option("--noise", noise, "follower speed noise std [m/s per step]");
  add_common(synth, false);

  auto* calibrate = app.add_subcommand("calibrate", "GA-calibrate one classical model cell");
  auto* train = app.add_subcommand("train", "fit one data-driven (GP, KRR, LSTM) cell");
  for (auto* sub : {calibrate, train}) {
    add_common(sub, true);
    sub->add_option("--dataset", dataset, "dataset name from the config (default: first)");
    sub->add_option("--model", model, "model name")->required();
    sub->add_option("--target", target, "target variable: a, v or s");
  }

  auto* evaluate = app.add_subcommand("evaluate", "roll out a saved cell artifact on its test segment");
  add_common(evaluate, true);
  evaluate->add_option("--artifact", artifact, "cell artifact directory")->required();
  evaluate->add_option("--dataset", dataset, "dataset name from the config (default: the artifact's)");

  auto* grid = app.add_subcommand("grid", "run the full dataset x model x target grid");
  add_common(grid, true);

  auto* anova_cmd = app.add_subcommand("anova", "ANOVA tables and p-value plot from a results CSV");
  anova_cmd->add_option("--results", results, "results.csv from grid")->required();
  anova_cmd->add_option("--dependent", dependent, "rmse_a, rmse_v, rmse_s or all");
  anova_cmd->add_option("--interaction", interaction, "one factor pair, e.g. model,target");
  anova_cmd->add_option("--factors", factors, "main-effect factors, comma separated");
  anova_cmd->add_flag("--log", log_rmse, "analyze log(RMSE)");
  anova_cmd->add_flag("--exclude-diverged", exclude_diverged, "drop diverged or collided cells");
  anova_cmd->add_option("--out", common.out, "output directory");

  auto* report = app.add_subcommand("report", "results table with log10 RMSE plus bar charts");
  report->add_option("--results", results, "results.csv from grid")->required();
  report->add_option("--out", common.out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth->parsed()) {
      ClassicalKind kind;
      try {
        kind = parse_classical_kind(model);
      } catch (const Error& e) {
        throw UsageError(std::string("--model: ") + e.what());
      }
      SynthesisSpec spec;
      try {
        spec = synthesis_preset(kind, preset, common.seed.value_or(0));
      } catch (const Error& e) {
        throw UsageError(std::string("--preset: ") + e.what());
      }
      if (noise < 0) throw UsageError("--noise must be >= 0");
      spec.speed_noise_std = noise;
      const fs::path out = common.out.empty() ? fs::path("trajectory.csv") : fs::path(common.out);
      if (out.has_parent_path()) fs::create_directories(out.parent_path());
      save_csv(synthesize(spec), out);
      std::cout << "wrote " << out.string() << '\n';
      return 0;
    }
    if (calibrate->parsed()) return run_single_cell(common, dataset, model, target, true);
    if (train->parsed()) return run_single_cell(common, dataset, model, target, false);
    if (evaluate->parsed()) {
      const ExperimentConfig cfg = load_config(common);
      const experiment::FittedModel fitted = experiment::load_fitted(artifact);
      std::string name = dataset;
      if (name.empty()) {
        std::ifstream in(fs::path(artifact) / "scores.json");
        if (in) name = nlohmann::json::parse(in).value("dataset", "");
      }
      if (name.empty()) name = cfg.datasets.front().name;
      const experiment::DatasetSpec* spec = nullptr;
      for (const auto& d : cfg.datasets) {
        if (d.name == name) spec = &d;
      }
      if (!spec) throw UsageError("--dataset: no dataset named '" + name + "' in the config");
      const auto data = experiment::prepare(*spec, cfg.split);
      const RolloutResult sim = experiment::rollout_test(fitted, data);
      const RolloutScores s = evaluate_rollout(sim, data.test);
      std::cout << name << ' ' << experiment::to_string(fitted.model) << ' ' << to_string(fitted.target)
                << " rmse_a=" << s.rmse_a << " rmse_v=" << s.rmse_v << " rmse_s=" << s.rmse_s
                << " steps=" << s.steps << (s.diverged ? " diverged" : "") << (s.collision ? " collision" : "")
                << '\n';
      if (!common.out.empty()) {
        save_rollout_csv(sim, data.test.t0(), data.test.dt(), common.out);
        std::cout << "wrote " << common.out << '\n';
      }
      return 0;
    }
    if (grid->parsed()) {
      const ExperimentConfig cfg = load_config(common);
      const fs::path out = common.out.empty() ? fs::path("runs/latest") : fs::path(common.out);
      fs::create_directories(out);
      const auto g = experiment::run_grid(cfg, out);
      std::size_t failed = 0;
      for (const auto& c : g.cells) {
        if (!c.error.empty()) {
          ++failed;
          std::cerr << "cell failed: " << c.error << '\n';
        }
      }
      std::cout << "wrote " << (out / "results.csv").string() << " (" << g.table.size() << " rows, "
                << g.cells.size() << " cells, " << failed << " failed)\n";
      return 0;
    }
    if (anova_cmd->parsed()) {
      const ResultsTable table = ResultsTable::load_csv(results);
      anova::AnovaSpec spec;
      spec.factors.clear();
      std::stringstream fs_list(factors);
      for (std::string f; std::getline(fs_list, f, ',');) {
        if (f.empty()) continue;
        try {
          spec.factors.push_back(anova::parse_factor(f));
        } catch (const Error& e) {
          throw UsageError(std::string("--factors: ") + e.what());
        }
      }
      if (!interaction.empty()) spec.interaction = parse_interaction(interaction);
      spec.log_rmse = log_rmse;
      spec.exclude_diverged = exclude_diverged;
      const fs::path out = common.out.empty() ? fs::path("anova") : fs::path(common.out);
      fs::create_directories(out);
      for (TargetKind dep : parse_dependent(dependent)) {
        const anova::AnovaTable t = anova::run_anova(table, dep, spec);
        const std::string stem = "anova_rmse_" + std::string(to_string(dep));
        write_file(out / (stem + ".csv"), anova::to_csv(t));
        write_file(out / (stem + ".svg"), anova::to_svg(t));
        std::cout << t.formula << ": n=" << t.n << " R^2=" << t.r_squared << '\n';
        for (const auto& term : t.terms) {
          std::cout << "  " << term.label << "  coef=" << term.coefficient << "  p=" << term.p
                    << (term.significant ? "  *" : "") << '\n';
        }
      }
      std::cout << "wrote " << out.string() << '\n';
      return 0;
    }
    if (report->parsed()) {
      const ResultsTable table = ResultsTable::load_csv(results);
      const fs::path out = common.out.empty() ? fs::path("report") : fs::path(common.out);
      fs::create_directories(out);
      write_file(out / "appendix_b.csv", report::appendix_csv(table));
      for (const auto& [name, svg] : report::log_rmse_charts(table)) write_file(out / name, svg);
      std::cout << "wrote " << out.string() << '\n';
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.code()) {
      case Errc::InvalidConfig:
      case Errc::UnknownModelKind:
      case Errc::Parse:
      case Errc::MissingColumn:
        return 1;
      default:
        return 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
