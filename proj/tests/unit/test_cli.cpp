#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
};

fs::path scratch() {
  static const fs::path dir = [] {
    auto p = fs::temp_directory_path() / "cfbench_test_cli";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Run cli(const std::string& args, const std::string& env = "") {
  const fs::path log = scratch() / "last.log";
  const std::string cmd = env + " \"" CFBENCH_EXE "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(log)};
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kConfig = R"({
  "master_seed": 9,
  "datasets": [{"name": "CLI", "synthetic": {"follower": "GIPPS", "preset": "stop-and-go", "duration": 14.0}}],
  "models": ["IDM", "KRR"],
  "targets": ["a", "s"],
  "ga": {"population_size": 10, "generations": 4},
  "krr": {"kernels": ["RBF"], "lambdas": [0.01], "lengthscales": [1.0], "k_folds": 2}
})";

}  // namespace

TEST_CASE("synth is deterministic") {
  const auto a = scratch() / "a.csv", b = scratch() / "b.csv";
  CHECK(cli("synth --model idm --preset paper-example --seed 7 --out " + a.string()).code == 0);
  CHECK(cli("synth --model idm --preset paper-example --seed 7 --out " + b.string()).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a).rfind("t,x_leader,v_leader,x_follower,v_follower", 0) == 0);
  CHECK(cli("synth --model idm --preset paper-example --seed 7 --noise 0.1 --out " + b.string()).code == 0);
  CHECK(slurp(a) != slurp(b));
}

TEST_CASE("help lists every config key with units") {
  const Run r = cli("--help");
  CHECK(r.code == 0);
  for (const char* key : {"master_seed", "ga.population_size", "gp.max_train_points", "krr.lambdas",
                          "lstm.learning_rate", "datasets[].synthetic.duration", "split.train_fraction"})
    CHECK(r.out.find(key) != std::string::npos);
  CHECK(r.out.find("m/s") != std::string::npos);
}

TEST_CASE("exit codes") {
  CHECK(cli("").code == 1);
  CHECK(cli("frobnicate").code == 1);
  CHECK(cli("synth --model tesla").code == 1);
  const auto bad = scratch() / "bad.json";
  write(bad, R"({"models": ["IDM"], "genrations": 3})");
  const Run r = cli("grid --config " + bad.string() + " --out " + (scratch() / "never").string());
  CHECK(r.code == 1);
  CHECK(r.out.find("genrations") != std::string::npos);
  CHECK(cli("anova --results " + (scratch() / "missing.csv").string()).code == 2);
  CHECK(cli("grid --workers 0").code == 1);
  CHECK(cli("grid --config " + bad.string(), "CF_BENCH_WORKERS=abc").code == 1);
}

TEST_CASE("grid, evaluate, anova and report plumbing") {
  const auto cfg = scratch() / "cfg.json";
  write(cfg, kConfig);
  const auto run = scratch() / "run";
  const Run g = cli("grid --config " + cfg.string() + " --out " + run.string(), "CF_BENCH_WORKERS=2");
  REQUIRE(g.code == 0);
  CHECK(fs::exists(run / "manifest.json"));
  CHECK(slurp(run / "manifest.json").find("\"workers\": 2") != std::string::npos);
  const std::string results = slurp(run / "results.csv");
  CHECK(std::count(results.begin(), results.end(), '\n') == 1 + 12);

  const auto run2 = scratch() / "run2";
  REQUIRE(cli("grid --config " + cfg.string() + " --workers 1 --out " + run2.string()).code == 0);
  CHECK(slurp(run2 / "results.csv") == results);

  fs::path krr_dir;
  for (const auto& e : fs::directory_iterator(run / "cells"))
    if (e.path().filename().string().rfind("CLI_KRR_s-", 0) == 0) krr_dir = e.path();
  REQUIRE(!krr_dir.empty());
  const auto rollout = scratch() / "eval_rollout.csv";
  const Run ev = cli("evaluate --config " + cfg.string() + " --artifact " + krr_dir.string() + " --out " +
                     rollout.string());
  CHECK(ev.code == 0);
  CHECK(ev.out.find("rmse_s=") != std::string::npos);
  CHECK(fs::exists(rollout));

  const Run one = cli("calibrate --config " + cfg.string() + " --model IDM --target s --out " +
                      (scratch() / "cal").string());
  CHECK(one.code == 0);
  CHECK(one.out.find("CLI_IDM_s") != std::string::npos);

  const auto an = scratch() / "anova";
  const Run a = cli("anova --results " + (run / "results.csv").string() +
                    " --dependent rmse_s --factors model,target --out " + an.string());
  CHECK(a.code == 0);
  CHECK(fs::exists(an / "anova_rmse_s.csv"));
  CHECK(slurp(an / "anova_rmse_s.svg").find("<svg") != std::string::npos);
  CHECK(cli("anova --results " + (run / "results.csv").string() + " --interaction model").code == 1);

  const auto rep = scratch() / "report";
  CHECK(cli("report --results " + (run / "results.csv").string() + " --out " + rep.string()).code == 0);
  CHECK(slurp(rep / "appendix_b.csv").rfind("RMSE,log10_RMSE,variable,Dataset,Model,Target", 0) == 0);
  CHECK(fs::exists(rep / "log_rmse_CLI_s.svg"));
}
