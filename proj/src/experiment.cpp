#include "cfbench/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "cfbench/error.hpp"
#include "cfbench/gp.hpp"
#include "cfbench/predictors.hpp"
#include "cfbench/simd.hpp"
#include "csv_util.hpp"
#include "json.hpp"

namespace cfb::experiment {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------- names

std::string_view to_string(ModelName m) {
  switch (m) {
    case ModelName::Idm: return "IDM";
    case ModelName::Gipps: return "GIPPS";
    case ModelName::FvdmCth: return "FVDM-CTH";
    case ModelName::FvdmSigmoid: return "FVDM-SIGMOID";
    case ModelName::Gp: return "GP";
    case ModelName::Krr: return "KRR";
    case ModelName::Lstm: return "LSTM";
  }
  return "?";
}

ModelName parse_model_name(std::string_view name) {
  std::string key(name);
  for (char& c : key) c = c == '_' ? '-' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (ModelName m : kAllModels) {
    if (key == to_string(m)) return m;
  }
  throw Error(Errc::UnknownModelKind,
              "unknown model '" + std::string(name) + "' (IDM, GIPPS, FVDM-CTH, FVDM-SIGMOID, GP, KRR, LSTM)");
}

bool is_classical(ModelName m) {
  return m == ModelName::Idm || m == ModelName::Gipps || m == ModelName::FvdmCth ||
         m == ModelName::FvdmSigmoid;
}

ClassicalKind classical_kind(ModelName m) {
  switch (m) {
    case ModelName::Idm: return ClassicalKind::Idm;
    case ModelName::Gipps: return ClassicalKind::Gipps;
    case ModelName::FvdmCth: return ClassicalKind::FvdmCth;
    case ModelName::FvdmSigmoid: return ClassicalKind::FvdmSigmoid;
    default: break;
  }
  throw Error(Errc::UnknownModelKind, std::string(to_string(m)) + " is not a classical model");
}

std::string CellKey::label() const {
  return dataset + "_" + std::string(to_string(model)) + "_" + std::string(to_string(target));
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t cell_seed(std::uint64_t master_seed, const CellKey& key) {
  std::string buf;
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((master_seed >> (8 * i)) & 0xFF));
  buf += key.dataset;
  buf.push_back('\0');
  buf += to_string(key.model);
  buf.push_back('\0');
  buf += to_string(key.target);
  return fnv1a(buf);
}

namespace {

std::string hex(std::uint64_t v, int digits) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf + 16 - digits);
}

// ---------------------------------------------------------------- JSON reading

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw Error(Errc::InvalidConfig, "config key '" + key + "': " + why);
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) bad(where, "expected an object");
  for (const auto& [k, _] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }) == allowed.end()) {
      bad(where.empty() ? k : where + "." + k, "unknown key");
    }
  }
}

std::string join(const std::string& where, const char* key) { return where.empty() ? key : where + "." + key; }

double get_number(const json& obj, const std::string& where, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number()) bad(join(where, key), "expected a number");
  return v.get<double>();
}

std::size_t get_count(const json& obj, const std::string& where, const char* key, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) bad(join(where, key), "expected a non-negative integer");
  return v.get<std::size_t>();
}

std::uint64_t get_seed(const json& obj, const std::string& where, const char* key, std::uint64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) bad(join(where, key), "expected an integer");
  return v.is_number_unsigned() ? v.get<std::uint64_t>() : static_cast<std::uint64_t>(v.get<long long>());
}

bool get_bool(const json& obj, const std::string& where, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_boolean()) bad(join(where, key), "expected true or false");
  return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& where, const char* key, const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_string()) bad(join(where, key), "expected a string");
  return v.get<std::string>();
}

std::vector<double> get_numbers(const json& obj, const std::string& where, const char* key,
                                std::vector<double> fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array()) bad(join(where, key), "expected an array of numbers");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) bad(join(where, key), "expected an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

template <class T, class Parse>
std::vector<T> get_names(const json& obj, const std::string& where, const char* key, std::vector<T> fallback,
                         Parse parse) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_array()) bad(join(where, key), "expected an array of names");
  std::vector<T> out;
  for (const auto& e : v) {
    if (!e.is_string()) bad(join(where, key), "expected an array of names");
    try {
      out.push_back(parse(e.get<std::string>()));
    } catch (const Error& err) {
      // Keep the code (UnknownModelKind etc.) but name the key.
      throw Error(err.code(), "config key '" + join(where, key) + "': " + err.what());
    }
  }
  return out;
}

LeaderProfile parse_leader(const json& j, const std::string& where, LeaderProfile base) {
  only_keys(j, where, {"kind", "initial_speed", "ramps", "mean", "amplitude", "omega"});
  const std::string kind = get_string(j, where, "kind",
                                      base.kind == LeaderProfile::Kind::Sinusoid ? "sinusoid" : "piecewise");
  if (kind == "sinusoid") {
    base.kind = LeaderProfile::Kind::Sinusoid;
  } else if (kind == "piecewise") {
    base.kind = LeaderProfile::Kind::Piecewise;
  } else {
    bad(where + ".kind", "expected 'piecewise' or 'sinusoid'");
  }
  base.initial_speed = get_number(j, where, "initial_speed", base.initial_speed);
  base.mean = get_number(j, where, "mean", base.mean);
  base.amplitude = get_number(j, where, "amplitude", base.amplitude);
  base.omega = get_number(j, where, "omega", base.omega);
  if (j.contains("ramps")) {
    base.ramps.clear();
    for (const auto& r : j.at("ramps")) {
      if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number() || !(r[0].get<double>() > 0)) {
        bad(where + ".ramps", "expected [duration_s, end_speed] pairs with positive durations");
      }
      base.ramps.push_back({r[0].get<double>(), r[1].get<double>()});
    }
  }
  return base;
}

SynthesisSpec parse_synthetic(const json& j, const std::string& where, std::uint64_t default_seed) {
  only_keys(j, where, {"follower", "preset", "params", "leader", "initial_gap", "duration", "dt",
                       "leader_length", "speed_noise_std", "seed"});
  ClassicalKind kind;
  try {
    kind = parse_classical_kind(get_string(j, where, "follower", "IDM"));
  } catch (const Error& e) {
    bad(where + ".follower", e.what());
  }
  SynthesisSpec s;
  try {
    s = synthesis_preset(kind, get_string(j, where, "preset", "paper-example"), default_seed);
  } catch (const Error& e) {
    bad(where + ".preset", e.what());
  }
  s.follower.params = get_numbers(j, where, "params", s.follower.params);
  if (s.follower.params.size() != param_count(kind)) {
    bad(where + ".params", "expected " + std::to_string(param_count(kind)) + " values");
  }
  if (j.contains("leader")) s.leader = parse_leader(j.at("leader"), where + ".leader", s.leader);
  s.initial_gap = get_number(j, where, "initial_gap", s.initial_gap);
  s.duration = get_number(j, where, "duration", s.duration);
  s.dt = get_number(j, where, "dt", s.dt);
  s.leader_length = get_number(j, where, "leader_length", s.leader_length);
  s.speed_noise_std = get_number(j, where, "speed_noise_std", s.speed_noise_std);
  s.seed = get_seed(j, where, "seed", s.seed);
  if (!(s.dt > 0)) bad(where + ".dt", "must be positive");
  if (!(s.duration > 0)) bad(where + ".duration", "must be positive");
  if (!(s.initial_gap > 0)) bad(where + ".initial_gap", "must be positive");
  if (!(s.speed_noise_std >= 0)) bad(where + ".speed_noise_std", "must be >= 0");
  return s;
}

DatasetSpec parse_dataset(const json& j, const std::string& where, std::uint64_t master_seed) {
  only_keys(j, where, {"name", "synthetic", "csv"});
  DatasetSpec d;
  d.name = get_string(j, where, "name", "");
  if (d.name.empty()) bad(where + ".name", "required");
  if (d.name.find_first_of("/\\_,\"") != std::string::npos) {
    bad(where + ".name", "must not contain '/', '\\', '_', ',' or quotes");
  }
  if (j.contains("synthetic") == j.contains("csv")) bad(where, "needs exactly one of 'synthetic' or 'csv'");
  if (j.contains("synthetic")) {
    d.synthetic = parse_synthetic(j.at("synthetic"), where + ".synthetic", fnv1a(d.name, master_seed));
    return d;
  }
  const json& c = j.at("csv");
  const std::string cw = where + ".csv";
  only_keys(c, cw, {"path", "leader_length", "dt", "columns"});
  d.csv_path = get_string(c, cw, "path", "");
  if (d.csv_path.empty()) bad(cw + ".path", "required");
  d.leader_length = get_number(c, cw, "leader_length", d.leader_length);
  d.dt = get_number(c, cw, "dt", d.dt);
  if (c.contains("columns")) {
    const json& m = c.at("columns");
    const std::string mw = cw + ".columns";
    only_keys(m, mw, {"t", "x_leader", "v_leader", "x_follower", "v_follower", "a_follower"});
    d.columns.t = get_string(m, mw, "t", d.columns.t);
    d.columns.x_leader = get_string(m, mw, "x_leader", d.columns.x_leader);
    d.columns.v_leader = get_string(m, mw, "v_leader", d.columns.v_leader);
    d.columns.x_follower = get_string(m, mw, "x_follower", d.columns.x_follower);
    d.columns.v_follower = get_string(m, mw, "v_follower", d.columns.v_follower);
    if (m.contains("a_follower")) d.columns.a_follower = get_string(m, mw, "a_follower", "");
  }
  return d;
}

KernelKind kernel_of(const std::string& s) { return parse_kernel_kind(s); }

// ---------------------------------------------------------------- JSON writing

json leader_json(const LeaderProfile& l) {
  json j;
  if (l.kind == LeaderProfile::Kind::Sinusoid) {
    j = {{"kind", "sinusoid"}, {"mean", l.mean}, {"amplitude", l.amplitude}, {"omega", l.omega}};
  } else {
    json ramps = json::array();
    for (const auto& r : l.ramps) ramps.push_back({r.duration, r.end_speed});
    j = {{"kind", "piecewise"}, {"initial_speed", l.initial_speed}, {"ramps", ramps}};
  }
  return j;
}

json dataset_json(const DatasetSpec& d) {
  json j{{"name", d.name}};
  if (d.synthetic) {
    const auto& s = *d.synthetic;
    j["synthetic"] = {{"follower", std::string(to_string(s.follower.kind))},
                      {"params", s.follower.params},
                      {"leader", leader_json(s.leader)},
                      {"initial_gap", s.initial_gap},
                      {"duration", s.duration},
                      {"dt", s.dt},
                      {"leader_length", s.leader_length},
                      {"speed_noise_std", s.speed_noise_std},
                      {"seed", s.seed}};
  } else {
    json cols{{"t", d.columns.t},
              {"x_leader", d.columns.x_leader},
              {"v_leader", d.columns.v_leader},
              {"x_follower", d.columns.x_follower},
              {"v_follower", d.columns.v_follower}};
    if (d.columns.a_follower) cols["a_follower"] = *d.columns.a_follower;
    j["csv"] = {{"path", d.csv_path.string()}, {"leader_length", d.leader_length}, {"dt", d.dt}, {"columns", cols}};
  }
  return j;
}

template <class T>
json names_json(const std::vector<T>& v) {
  json out = json::array();
  for (const auto& e : v) out.push_back(std::string(to_string(e)));
  return out;
}

json ga_json(const GaConfig& g) {
  return {{"population_size", g.population_size}, {"generations", g.generations},
          {"crossover_rate", g.crossover_rate},   {"mutation_rate", g.mutation_rate},
          {"elitism", g.elitism},                 {"stall_generations", g.stall_generations}};
}

json gp_json(const GpSettings& g) {
  return {{"kernels", names_json(g.kernels)}, {"restarts", g.restarts},
          {"max_iterations", g.max_iterations}, {"ard", g.ard},
          {"standardize", g.standardize},     {"max_train_points", g.max_train_points},
          {"selection", g.selection}};
}

json krr_json(const KrrSettings& k) {
  return {{"kernels", names_json(k.grid.kinds)}, {"lambdas", k.grid.lambdas},
          {"lengthscales", k.grid.lengthscales}, {"k_folds", k.grid.k_folds},
          {"standardize", k.standardize},        {"max_train_points", k.max_train_points}};
}

json lstm_json(const lstm::Config& c) {
  return {{"layers", c.layers},       {"hidden", c.hidden},
          {"window", c.window},       {"epochs", c.epochs},
          {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
          {"clip_norm", c.clip_norm}};
}

json config_json(const ExperimentConfig& c) {
  json ds = json::array();
  for (const auto& d : c.datasets) ds.push_back(dataset_json(d));
  return {{"master_seed", c.master_seed},
          {"workers", c.workers},
          {"split", {{"train_fraction", c.split.train_fraction}}},
          {"datasets", ds},
          {"models", names_json(c.models)},
          {"targets", names_json(c.targets)},
          {"ga", ga_json(c.ga)},
          {"gp", gp_json(c.gp)},
          {"krr", krr_json(c.krr)},
          {"lstm", lstm_json(c.lstm)}};
}

json kernel_json(const KernelConfig& k) {
  return {{"kind", std::string(to_string(k.kind))}, {"variance", k.variance}, {"lengthscales", k.lengthscales},
          {"alpha", k.alpha}, {"sigma_w2", k.sigma_w2}, {"sigma_b2", k.sigma_b2}};
}

KernelConfig kernel_from(const json& j) {
  KernelConfig k;
  k.kind = parse_kernel_kind(j.at("kind").get<std::string>());
  k.variance = j.at("variance").get<double>();
  k.lengthscales = j.at("lengthscales").get<std::vector<double>>();
  k.alpha = j.at("alpha").get<double>();
  k.sigma_w2 = j.at("sigma_w2").get<double>();
  k.sigma_b2 = j.at("sigma_b2").get<double>();
  return k;
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }
json rowvec_json(const Eigen::RowVectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json mat_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(rowvec_json(m.row(i)));
  return rows;
}

Eigen::VectorXd vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Eigen::RowVectorXd rowvec_from(const json& j) { return vec_from(j).transpose(); }

Eigen::MatrixXd mat_from(const json& j) {
  if (j.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
  for (std::size_t i = 0; i < j.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rowvec_from(j[i]);
  return m;
}

json standardizer_json(const Standardizer& s) {
  return {{"feature_mean", rowvec_json(s.feature_mean)}, {"feature_std", rowvec_json(s.feature_std)},
          {"target_mean", s.target_mean}, {"target_std", s.target_std}};
}

Standardizer standardizer_from(const json& j) {
  Standardizer s;
  s.feature_mean = rowvec_from(j.at("feature_mean"));
  s.feature_std = rowvec_from(j.at("feature_std"));
  s.target_mean = j.at("target_mean").get<double>();
  s.target_std = j.at("target_std").get<double>();
  return s;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

// ---------------------------------------------------------------- config

void ExperimentConfig::validate() const {
  if (datasets.empty()) bad("datasets", "must not be empty");
  if (models.empty()) bad("models", "must not be empty");
  if (targets.empty()) bad("targets", "must not be empty");
  std::set<std::string> names;
  for (const auto& d : datasets) {
    if (!names.insert(d.name).second) bad("datasets", "duplicate dataset name '" + d.name + "'");
    if (!d.synthetic && d.csv_path.empty()) bad("datasets." + d.name, "needs a synthetic spec or a csv path");
  }
  if (std::set<ModelName>(models.begin(), models.end()).size() != models.size()) bad("models", "duplicate entry");
  if (std::set<TargetKind>(targets.begin(), targets.end()).size() != targets.size()) bad("targets", "duplicate entry");
  if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0)) bad("split.train_fraction", "must be in (0, 1)");
  if (workers < 1) bad("workers", "must be >= 1");
  try {
    ga.validate();
  } catch (const Error& e) {
    bad("ga", e.what());
  }
  try {
    lstm.validate();
  } catch (const Error& e) {
    bad("lstm", e.what());
  }
  if (lstm.input_dim != 3) bad("lstm.input_dim", "must be 3 (v_follower, v_leader, s)");
  if (gp.kernels.empty()) bad("gp.kernels", "must not be empty");
  if (gp.restarts < 1) bad("gp.restarts", "must be >= 1");
  if (gp.selection != "mean-rank") bad("gp.selection", "only 'mean-rank' is supported");
  if (krr.grid.kinds.empty()) bad("krr.kernels", "must not be empty");
  if (krr.grid.lambdas.empty()) bad("krr.lambdas", "must not be empty");
  for (double l : krr.grid.lambdas) {
    if (!(l > 0)) bad("krr.lambdas", "values must be positive");
  }
  if (krr.grid.lengthscales.empty()) bad("krr.lengthscales", "must not be empty");
  for (double l : krr.grid.lengthscales) {
    if (!(l > 0)) bad("krr.lengthscales", "values must be positive");
  }
  if (krr.grid.k_folds < 2) bad("krr.k_folds", "must be >= 2");
  if (gp.max_train_points == 1) bad("gp.max_train_points", "must be 0 (all) or >= 2");
  if (krr.max_train_points != 0 && krr.max_train_points < krr.grid.k_folds) {
    bad("krr.max_train_points", "must be 0 (all) or at least krr.k_folds");
  }
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(Errc::Parse, std::string("config is not valid JSON: ") + e.what());
  }
  only_keys(j, "", {"master_seed", "workers", "split", "datasets", "models", "targets", "ga", "gp", "krr", "lstm"});
  ExperimentConfig c;
  c.master_seed = get_seed(j, "", "master_seed", 0);
  c.workers = get_count(j, "", "workers", 1);
  if (j.contains("split")) {
    only_keys(j.at("split"), "split", {"train_fraction"});
    c.split.train_fraction = get_number(j.at("split"), "split", "train_fraction", c.split.train_fraction);
  }
  if (!j.contains("datasets") || !j.at("datasets").is_array()) bad("datasets", "required array");
  for (std::size_t i = 0; i < j.at("datasets").size(); ++i) {
    c.datasets.push_back(parse_dataset(j.at("datasets")[i], "datasets[" + std::to_string(i) + "]", c.master_seed));
  }
  c.models = get_names<ModelName>(j, "", "models", {std::begin(kAllModels), std::end(kAllModels)},
                                  [](const std::string& s) { return parse_model_name(s); });
  c.targets = get_names<TargetKind>(j, "", "targets", {std::begin(kAllTargets), std::end(kAllTargets)},
                                    [](const std::string& s) { return parse_target(s); });
  if (j.contains("ga")) {
    const json& g = j.at("ga");
    only_keys(g, "ga", {"population_size", "generations", "crossover_rate", "mutation_rate", "elitism",
                        "stall_generations"});
    c.ga.population_size = get_count(g, "ga", "population_size", c.ga.population_size);
    c.ga.generations = get_count(g, "ga", "generations", c.ga.generations);
    c.ga.crossover_rate = get_number(g, "ga", "crossover_rate", c.ga.crossover_rate);
    c.ga.mutation_rate = get_number(g, "ga", "mutation_rate", c.ga.mutation_rate);
    c.ga.elitism = get_count(g, "ga", "elitism", c.ga.elitism);
    c.ga.stall_generations = get_count(g, "ga", "stall_generations", c.ga.stall_generations);
  }
  if (j.contains("gp")) {
    const json& g = j.at("gp");
    only_keys(g, "gp", {"kernels", "restarts", "max_iterations", "ard", "standardize", "max_train_points",
                        "selection"});
    c.gp.kernels = get_names<KernelKind>(g, "gp", "kernels", c.gp.kernels, kernel_of);
    c.gp.restarts = get_count(g, "gp", "restarts", c.gp.restarts);
    c.gp.max_iterations = get_count(g, "gp", "max_iterations", c.gp.max_iterations);
    c.gp.ard = get_bool(g, "gp", "ard", c.gp.ard);
    c.gp.standardize = get_bool(g, "gp", "standardize", c.gp.standardize);
    c.gp.max_train_points = get_count(g, "gp", "max_train_points", c.gp.max_train_points);
    c.gp.selection = get_string(g, "gp", "selection", c.gp.selection);
  }
  if (j.contains("krr")) {
    const json& k = j.at("krr");
    only_keys(k, "krr", {"kernels", "lambdas", "lengthscales", "k_folds", "standardize", "max_train_points"});
    c.krr.grid.kinds = get_names<KernelKind>(k, "krr", "kernels", c.krr.grid.kinds, kernel_of);
    c.krr.grid.lambdas = get_numbers(k, "krr", "lambdas", c.krr.grid.lambdas);
    c.krr.grid.lengthscales = get_numbers(k, "krr", "lengthscales", c.krr.grid.lengthscales);
    c.krr.grid.k_folds = get_count(k, "krr", "k_folds", c.krr.grid.k_folds);
    c.krr.standardize = get_bool(k, "krr", "standardize", c.krr.standardize);
    c.krr.max_train_points = get_count(k, "krr", "max_train_points", c.krr.max_train_points);
  }
  if (j.contains("lstm")) {
    const json& l = j.at("lstm");
    only_keys(l, "lstm", {"layers", "hidden", "window", "epochs", "batch_size", "learning_rate", "clip_norm"});
    c.lstm.layers = get_count(l, "lstm", "layers", c.lstm.layers);
    c.lstm.hidden = get_count(l, "lstm", "hidden", c.lstm.hidden);
    c.lstm.window = get_count(l, "lstm", "window", c.lstm.window);
    c.lstm.epochs = get_count(l, "lstm", "epochs", c.lstm.epochs);
    c.lstm.batch_size = get_count(l, "lstm", "batch_size", c.lstm.batch_size);
    c.lstm.learning_rate = get_number(l, "lstm", "learning_rate", c.lstm.learning_rate);
    c.lstm.clip_norm = get_number(l, "lstm", "clip_norm", c.lstm.clip_norm);
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const fs::path& path) { return from_json_text(read_text(path)); }

std::string ExperimentConfig::to_json_text() const { return config_json(*this).dump(2) + "\n"; }

ExperimentConfig ExperimentConfig::default_grid(std::uint64_t master_seed) {
  ExperimentConfig c;
  c.master_seed = master_seed;
  const std::pair<const char*, std::pair<ClassicalKind, const char*>> sets[] = {
      {"SYN-IDM", {ClassicalKind::Idm, "sinusoid"}},
      {"SYN-GIPPS", {ClassicalKind::Gipps, "paper-example"}},
      {"SYN-FVDM", {ClassicalKind::FvdmCth, "stop-and-go"}},
  };
  for (const auto& [name, def] : sets) {
    DatasetSpec d;
    d.name = name;
    d.synthetic = synthesis_preset(def.first, def.second, fnv1a(name, master_seed));
    c.datasets.push_back(std::move(d));
  }
  c.models.assign(std::begin(kAllModels), std::end(kAllModels));
  c.targets.assign(std::begin(kAllTargets), std::end(kAllTargets));
  return c;
}

ExperimentConfig ExperimentConfig::desk_scale(std::uint64_t master_seed) {
  ExperimentConfig c = default_grid(master_seed);
  c.gp.restarts = 1;
  c.gp.max_iterations = 60;
  c.gp.max_train_points = 150;
  c.krr.max_train_points = 200;
  c.lstm.epochs = 60;
  return c;
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = {
      {"master_seed", "integer", "seed every cell seed is derived from"},
      {"workers", "count", "cells run concurrently (CF_BENCH_WORKERS / --workers override)"},
      {"split.train_fraction", "fraction", "leading share of each trajectory used for fitting (default 0.8)"},
      {"datasets[].name", "text", "dataset label in results (no '_', ',' or path separators)"},
      {"datasets[].synthetic.follower", "model name", "IDM, GIPPS, FVDM-CTH or FVDM-SIGMOID"},
      {"datasets[].synthetic.preset", "name", "paper-example, stop-and-go or sinusoid"},
      {"datasets[].synthetic.params", "model units", "follower parameters in calibration order"},
      {"datasets[].synthetic.leader.kind", "name", "piecewise or sinusoid"},
      {"datasets[].synthetic.leader.initial_speed", "m/s", "piecewise starting speed"},
      {"datasets[].synthetic.leader.ramps", "[s, m/s]", "linear ramps as [duration, end_speed] pairs"},
      {"datasets[].synthetic.leader.mean", "m/s", "sinusoid mean speed"},
      {"datasets[].synthetic.leader.amplitude", "m/s", "sinusoid amplitude"},
      {"datasets[].synthetic.leader.omega", "rad/s", "sinusoid angular frequency"},
      {"datasets[].synthetic.initial_gap", "m", "net spacing at t = 0"},
      {"datasets[].synthetic.duration", "s", "trajectory length"},
      {"datasets[].synthetic.dt", "s", "time step"},
      {"datasets[].synthetic.leader_length", "m", "leader vehicle length"},
      {"datasets[].synthetic.speed_noise_std", "m/s", "per-step follower speed noise"},
      {"datasets[].synthetic.seed", "integer", "noise seed (default derived from master_seed and name)"},
      {"datasets[].csv.path", "path", "trajectory CSV"},
      {"datasets[].csv.leader_length", "m", "leader vehicle length"},
      {"datasets[].csv.dt", "s", "time step; <= 0 infers it from the timestamps"},
      {"datasets[].csv.columns.{t,x_leader,v_leader,x_follower,v_follower,a_follower}", "header",
       "CSV column names (s, m, m/s, m, m/s, m/s^2)"},
      {"models", "names", "subset of IDM, GIPPS, FVDM-CTH, FVDM-SIGMOID, GP, KRR, LSTM"},
      {"targets", "names", "subset of a, v, s"},
      {"ga.population_size", "count", "GA individuals per generation (100)"},
      {"ga.generations", "count", "maximum generations (200)"},
      {"ga.crossover_rate", "probability", "BLX-0.5 crossover probability (0.8)"},
      {"ga.mutation_rate", "probability", "per-gene Gaussian mutation probability (0.1)"},
      {"ga.elitism", "count", "best individuals copied unchanged (2)"},
      {"ga.stall_generations", "count", "stop after this many generations without improvement (30)"},
      {"gp.kernels", "names", "candidate kernels: RBF, Exponential, RQ, MLP, Matern32, Matern52"},
      {"gp.restarts", "count", "optimizer restarts per kernel (3)"},
      {"gp.max_iterations", "count", "L-BFGS iterations per restart (100)"},
      {"gp.ard", "bool", "one lengthscale per feature (true)"},
      {"gp.standardize", "bool", "standardize features and targets (true)"},
      {"gp.max_train_points", "count", "evenly thinned training rows, 0 = all"},
      {"gp.selection", "name", "kernel selection rule: mean-rank"},
      {"krr.kernels", "names", "kernels searched by CV"},
      {"krr.lambdas", "target units^2", "ridge penalties searched (1e-6 .. 1e2)"},
      {"krr.lengthscales", "standardized units", "lengthscales searched (0.1 .. 100)"},
      {"krr.k_folds", "count", "contiguous CV folds (5)"},
      {"krr.standardize", "bool", "standardize features and targets (true)"},
      {"krr.max_train_points", "count", "evenly thinned training rows, 0 = all"},
      {"lstm.layers", "count", "stacked LSTM layers (3)"},
      {"lstm.hidden", "count", "hidden units per layer (25)"},
      {"lstm.window", "steps", "input window length (5)"},
      {"lstm.epochs", "count", "training epochs (100)"},
      {"lstm.batch_size", "count", "minibatch size (32)"},
      {"lstm.learning_rate", "1", "SGD step size on standardized data (0.01)"},
      {"lstm.clip_norm", "1", "global gradient-norm clip (5)"},
  };
  return keys;
}

// ---------------------------------------------------------------- data

Trajectory DatasetSpec::load() const {
  if (synthetic) return synthesize(*synthetic);
  return load_csv(csv_path, columns, leader_length, dt);
}

PreparedDataset prepare(const DatasetSpec& spec, const SplitSpec& split_spec) {
  Trajectory full = spec.load();
  const std::size_t k = split_index(full.size(), split_spec);
  auto [train, test] = split(full, split_spec);
  return PreparedDataset{spec.name, std::move(full), k, std::move(train), std::move(test)};
}

RolloutResult drop_front(const RolloutResult& r, std::size_t count) {
  if (count == 0) return r;
  RolloutResult out;
  const std::size_t n = std::min(count, r.size());
  auto cut = [n](const std::vector<double>& v) { return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(n), v.end()); };
  out.x = cut(r.x);
  out.v = cut(r.v);
  out.a = cut(r.a);
  out.s = cut(r.s);
  out.diverged = r.diverged;
  if (r.collision_step) out.collision_step = *r.collision_step >= n ? *r.collision_step - n : 0;
  return out;
}

RolloutResult rollout_test(const FittedModel& fitted, const PreparedDataset& data) {
  if (fitted.classical) return rollout_classical(*fitted.classical, data.test);
  if (!fitted.predictor) throw Error(Errc::InvalidConfig, "fitted model has neither parameters nor a predictor");
  const std::size_t w = fitted.predictor->window();
  if (w <= 1) return rollout_predictor(*fitted.predictor, fitted.target, data.test);
  if (data.split < w - 1) throw Error(Errc::TooShort, "training segment shorter than the window");
  const Trajectory seg = data.full.slice(data.split - (w - 1), data.full.size());
  return drop_front(rollout_predictor(*fitted.predictor, fitted.target, seg), w - 1);
}

namespace {

Regression thin(Regression r, std::size_t max_points) {
  const auto n = static_cast<std::size_t>(r.X.rows());
  if (max_points == 0 || n <= max_points) return r;
  Regression out;
  out.X.resize(static_cast<Eigen::Index>(max_points), r.X.cols());
  out.y.resize(static_cast<Eigen::Index>(max_points));
  for (std::size_t i = 0; i < max_points; ++i) {
    const auto src = static_cast<Eigen::Index>(i * (n - 1) / (max_points - 1));
    out.X.row(static_cast<Eigen::Index>(i)) = r.X.row(src);
    out.y[static_cast<Eigen::Index>(i)] = r.y[src];
  }
  return out;
}

struct Extras {
  std::string ga_history_csv;
  std::string cv_table_csv;
  std::string kernel_sweep_csv;
};

FittedModel fit_gp(const ExperimentConfig& cfg, const PreparedDataset& data, TargetKind target,
                   std::uint64_t seed, Extras& extras) {
  const Regression reg = thin(make_regression(data.train, target), cfg.gp.max_train_points);
  struct Candidate {
    KernelKind kind;
    std::shared_ptr<const GpPredictor> predictor;
    RolloutScores scores;
    bool ok = false;
  };
  std::vector<Candidate> cands;
  for (std::size_t i = 0; i < cfg.gp.kernels.size(); ++i) {
    Candidate c;
    c.kind = cfg.gp.kernels[i];
    gp::OptimizeOptions opt;
    opt.restarts = cfg.gp.restarts;
    opt.max_iterations = cfg.gp.max_iterations;
    opt.ard = cfg.gp.ard;
    opt.standardize = cfg.gp.standardize;
    opt.seed = fnv1a(to_string(c.kind), seed);
    try {
      c.predictor = std::make_shared<GpPredictor>(gp::optimize_hyperparams(reg.X, reg.y, c.kind, opt));
      c.scores = evaluate_rollout(rollout_predictor(*c.predictor, target, data.train), data.train);
      c.ok = true;
    } catch (const Error&) {
      c.ok = false;
    }
    cands.push_back(std::move(c));
  }

  // Rank per variable (collisions and divergence sort last), then mean rank.
  std::vector<double> mean_rank(cands.size(), 0.0);
  for (TargetKind var : kAllTargets) {
    auto score = [&](const Candidate& c) {
      if (!c.ok) return std::numeric_limits<double>::infinity();
      const double base = c.scores.get(var);
      const double short_by = static_cast<double>(data.train.size() - c.scores.steps);
      return c.scores.diverged || c.scores.collision ? 1e12 + short_by : base;
    };
    for (std::size_t i = 0; i < cands.size(); ++i) {
      double rank = 1.0;
      for (std::size_t j = 0; j < cands.size(); ++j) {
        if (j != i && score(cands[j]) < score(cands[i])) rank += 1.0;
      }
      mean_rank[i] += rank / 3.0;
    }
  }
  std::ostringstream sweep;
  sweep << "kernel,ok,rmse_a,rmse_v,rmse_s,diverged,collision,mean_rank\n";
  std::size_t best = cands.size();
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const auto& c = cands[i];
    sweep << to_string(c.kind) << ',' << (c.ok ? 1 : 0) << ',' << detail::format_double(c.scores.rmse_a) << ','
          << detail::format_double(c.scores.rmse_v) << ',' << detail::format_double(c.scores.rmse_s) << ','
          << (c.scores.diverged ? 1 : 0) << ',' << (c.scores.collision ? 1 : 0) << ','
          << detail::format_double(mean_rank[i]) << '\n';
    if (c.ok && (best == cands.size() || mean_rank[i] < mean_rank[best])) best = i;
  }
  extras.kernel_sweep_csv = sweep.str();
  if (best == cands.size()) throw Error(Errc::AllRestartsFailed, "no GP kernel could be fitted");
  FittedModel f;
  f.model = ModelName::Gp;
  f.target = target;
  f.predictor = cands[best].predictor;
  f.kernel_choice = std::string(to_string(cands[best].kind));
  return f;
}

FittedModel fit_model(const ExperimentConfig& cfg, const PreparedDataset& data, const CellKey& key,
                      std::uint64_t seed, Extras& extras) {
  FittedModel f;
  f.model = key.model;
  f.target = key.target;
  if (is_classical(key.model)) {
    const ClassicalKind kind = classical_kind(key.model);
    GaConfig ga = cfg.ga;
    ga.seed = seed;
    ga.workers = 1;
    const auto bounds = param_bounds(kind);
    const CalibrationResult res = calibrate(kind, data.train, key.target, bounds, ga);
    f.classical = ClassicalModel{kind, res.params};
    std::ostringstream h;
    h << "generation,best_fitness\n";
    for (std::size_t g = 0; g < res.history.size(); ++g) h << g << ',' << detail::format_double(res.history[g]) << '\n';
    extras.ga_history_csv = h.str();
    return f;
  }
  switch (key.model) {
    case ModelName::Gp: return fit_gp(cfg, data, key.target, seed, extras);
    case ModelName::Krr: {
      const Regression reg = thin(make_regression(data.train, key.target), cfg.krr.max_train_points);
      krr::GridSpec grid = cfg.krr.grid;
      grid.seed = seed;
      krr::GridResult gr = krr::grid_search_cv(reg.X, reg.y, grid, krr::FitOptions{cfg.krr.standardize});
      extras.cv_table_csv = krr::cv_table_csv(gr.table);
      f.kernel_choice = std::string(to_string(gr.best.kernel.kind));
      f.predictor = std::make_shared<KrrPredictor>(std::move(gr.best));
      return f;
    }
    case ModelName::Lstm: {
      lstm::Config lc = cfg.lstm;
      lc.seed = seed;
      f.predictor = std::make_shared<LstmPredictor>(lstm::fit(data.train, key.target, lc));
      return f;
    }
    default: break;
  }
  throw Error(Errc::UnknownModelKind, "unhandled model");
}

json scores_json(const RolloutScores& s) {
  return {{"rmse_a", s.rmse_a}, {"rmse_v", s.rmse_v}, {"rmse_s", s.rmse_s},
          {"steps", s.steps},   {"diverged", s.diverged}, {"collision", s.collision}};
}

}  // namespace

// ---------------------------------------------------------------- artifacts

void save_fitted(const FittedModel& f, const fs::path& dir) {
  fs::create_directories(dir);
  json j{{"model", std::string(to_string(f.model))}, {"target", std::string(to_string(f.target))}};
  if (f.classical) {
    const auto bounds = param_bounds(f.classical->kind);
    json named = json::object();
    for (std::size_t i = 0; i < bounds.size(); ++i) named[bounds[i].name] = f.classical->params[i];
    j["family"] = "classical";
    j["params"] = f.classical->params;
    j["named_params"] = named;
  } else if (const auto* g = dynamic_cast<const GpPredictor*>(f.predictor.get())) {
    const auto& m = g->model();
    j["family"] = "gp";
    j["kernel"] = kernel_json(m.kernel);
    j["noise"] = m.noise;
    j["jitter"] = m.jitter;
    j["standardizer"] = standardizer_json(m.standardizer);
    j["X_train"] = mat_json(m.X_train);
    j["y_train"] = vec_json(m.y_train);
    j["alpha"] = vec_json(m.alpha);
  } else if (const auto* k = dynamic_cast<const KrrPredictor*>(f.predictor.get())) {
    const auto& m = k->model();
    j["family"] = "krr";
    j["kernel"] = kernel_json(m.kernel);
    j["lambda"] = m.lambda;
    j["standardizer"] = standardizer_json(m.standardizer);
    j["X_train"] = mat_json(m.X_train);
    j["weights"] = vec_json(m.weights);
  } else if (const auto* l = dynamic_cast<const LstmPredictor*>(f.predictor.get())) {
    j["family"] = "lstm";
    j["weights_file"] = "lstm.bin";
    j["config"] = lstm_json(l->model().config);
    lstm::save(l->model(), dir / "lstm.bin");
  } else {
    throw Error(Errc::InvalidConfig, "cannot serialize this fitted model");
  }
  write_text(dir / "artifact.json", j.dump(2) + "\n");
}

FittedModel load_fitted(const fs::path& dir) {
  json j;
  try {
    j = json::parse(read_text(dir / "artifact.json"));
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, "bad artifact in " + dir.string() + ": " + e.what());
  }
  try {
    FittedModel f;
    f.model = parse_model_name(j.at("model").get<std::string>());
    f.target = parse_target(j.at("target").get<std::string>());
    const std::string family = j.at("family").get<std::string>();
    if (family == "classical") {
      f.classical = ClassicalModel{classical_kind(f.model), j.at("params").get<std::vector<double>>()};
    } else if (family == "gp") {
      gp::Model m;
      m.kernel = kernel_from(j.at("kernel"));
      m.noise = j.at("noise").get<double>();
      m.jitter = j.at("jitter").get<double>();
      m.standardizer = standardizer_from(j.at("standardizer"));
      m.X_train = mat_from(j.at("X_train"));
      m.y_train = vec_from(j.at("y_train"));
      m.alpha = vec_from(j.at("alpha"));
      Eigen::MatrixXd K = gram(m.kernel, m.X_train);
      K.diagonal().array() += m.noise + m.jitter;
      m.chol = Eigen::LLT<Eigen::MatrixXd>(K).matrixL();
      f.kernel_choice = std::string(to_string(m.kernel.kind));
      f.predictor = std::make_shared<GpPredictor>(std::move(m));
    } else if (family == "krr") {
      krr::Model m;
      m.kernel = kernel_from(j.at("kernel"));
      m.lambda = j.at("lambda").get<double>();
      m.standardizer = standardizer_from(j.at("standardizer"));
      m.X_train = mat_from(j.at("X_train"));
      m.weights = vec_from(j.at("weights"));
      f.kernel_choice = std::string(to_string(m.kernel.kind));
      f.predictor = std::make_shared<KrrPredictor>(std::move(m));
    } else if (family == "lstm") {
      f.predictor = std::make_shared<LstmPredictor>(lstm::load(dir / j.at("weights_file").get<std::string>()));
    } else {
      throw Error(Errc::Parse, "unknown model family '" + family + "'");
    }
    return f;
  } catch (const json::exception& e) {
    throw Error(Errc::Parse, "bad artifact in " + dir.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------- cells

namespace {

std::string cell_fingerprint(const ExperimentConfig& cfg, const CellKey& key, std::uint64_t seed) {
  json j{{"cell", key.label()}, {"seed", seed}, {"split", cfg.split.train_fraction}, {"version", kVersion}};
  for (const auto& d : cfg.datasets) {
    if (d.name == key.dataset) j["dataset"] = dataset_json(d);
  }
  switch (key.model) {
    case ModelName::Gp: j["settings"] = gp_json(cfg.gp); break;
    case ModelName::Krr: j["settings"] = krr_json(cfg.krr); break;
    case ModelName::Lstm: j["settings"] = lstm_json(cfg.lstm); break;
    default: j["settings"] = ga_json(cfg.ga); break;
  }
  return j.dump();
}

void fill_rows(CellOutcome& out) {
  out.rows.clear();
  for (TargetKind var : kAllTargets) {
    ResultsRow r;
    r.rmse = out.error.empty() ? out.scores.get(var) : std::numeric_limits<double>::quiet_NaN();
    r.variable = var;
    r.dataset = out.key.dataset;
    r.model = std::string(to_string(out.key.model));
    r.target = out.key.target;
    r.diverged = out.error.empty() ? out.scores.diverged : true;
    r.collision = out.scores.collision;
    out.rows.push_back(r);
  }
}

}  // namespace

CellOutcome run_cell(const ExperimentConfig& config, const PreparedDataset& data, const CellKey& key,
                     const fs::path& artifacts_root) {
  const auto start = std::chrono::steady_clock::now();
  CellOutcome out;
  out.key = key;
  out.seed = cell_seed(config.master_seed, key);
  try {
    Extras extras;
    const FittedModel fitted = fit_model(config, data, key, out.seed, extras);
    const RolloutResult sim = rollout_test(fitted, data);
    out.scores = evaluate_rollout(sim, data.test);
    if (!artifacts_root.empty()) {
      const std::string name =
          key.label() + "-" + hex(fnv1a(cell_fingerprint(config, key, out.seed)), 8);
      const fs::path final_dir = artifacts_root / name;
      const fs::path tmp = artifacts_root / (".tmp-" + name);
      fs::remove_all(tmp);
      fs::create_directories(tmp);
      save_fitted(fitted, tmp);
      save_rollout_csv(sim, data.test.t0(), data.test.dt(), tmp / "rollout.csv");
      json meta{{"cell", key.label()},   {"dataset", key.dataset},
                {"model", std::string(to_string(key.model))},
                {"target", std::string(to_string(key.target))},
                {"seed", out.seed},      {"scores", scores_json(out.scores)}};
      if (!fitted.kernel_choice.empty()) meta["kernel"] = fitted.kernel_choice;
      write_text(tmp / "scores.json", meta.dump(2) + "\n");
      if (!extras.ga_history_csv.empty()) write_text(tmp / "ga_history.csv", extras.ga_history_csv);
      if (!extras.cv_table_csv.empty()) write_text(tmp / "cv_table.csv", extras.cv_table_csv);
      if (!extras.kernel_sweep_csv.empty()) write_text(tmp / "kernel_sweep.csv", extras.kernel_sweep_csv);
      fs::remove_all(final_dir);
      fs::rename(tmp, final_dir);
      out.artifact_dir = final_dir;
    }
  } catch (const Error& e) {
    throw Error(e.code(), key.label() + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(Errc::Io, key.label() + ": " + e.what());
  }
  fill_rows(out);
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

CellOutcome run_cell(const ExperimentConfig& config, const CellKey& key, const fs::path& artifacts_root) {
  config.validate();
  for (const auto& d : config.datasets) {
    if (d.name == key.dataset) return run_cell(config, prepare(d, config.split), key, artifacts_root);
  }
  throw Error(Errc::InvalidConfig, "config key 'datasets': no dataset named '" + key.dataset + "'");
}

GridOutcome run_grid(const ExperimentConfig& config, const fs::path& out_dir) {
  config.validate();
  std::vector<PreparedDataset> data;
  for (const auto& d : config.datasets) data.push_back(prepare(d, config.split));

  std::vector<std::pair<std::size_t, CellKey>> cells;
  for (std::size_t di = 0; di < config.datasets.size(); ++di) {
    for (ModelName m : config.models) {
      for (TargetKind t : config.targets) cells.push_back({di, CellKey{config.datasets[di].name, m, t}});
    }
  }

  const fs::path cells_dir = out_dir.empty() ? fs::path{} : out_dir / "cells";
  if (!cells_dir.empty()) fs::create_directories(cells_dir);

  std::vector<CellOutcome> outcomes(cells.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      const auto& [di, key] = cells[i];
      try {
        outcomes[i] = run_cell(config, data[di], key, cells_dir);
      } catch (const std::exception& e) {
        CellOutcome failed;
        failed.key = key;
        failed.seed = cell_seed(config.master_seed, key);
        failed.error = e.what();
        fill_rows(failed);
        outcomes[i] = std::move(failed);
      }
    }
  };
  const std::size_t n_threads = std::min(config.workers, std::max<std::size_t>(cells.size(), 1));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  }

  GridOutcome grid;
  for (const auto& o : outcomes) {
    for (const auto& r : o.rows) grid.table.add_row(r);
  }
  grid.cells = std::move(outcomes);

  if (!out_dir.empty()) {
    grid.table.save_csv(out_dir / "results.csv");
    json cells_json = json::array();
    for (const auto& o : grid.cells) {
      json c{{"cell", o.key.label()}, {"seed", o.seed}, {"wall_seconds", o.wall_seconds}};
      c["artifact_dir"] = o.artifact_dir.empty() ? "" : fs::relative(o.artifact_dir, out_dir).generic_string();
      if (!o.error.empty()) c["error"] = o.error;
      cells_json.push_back(c);
    }
    json manifest{{"tool", "cfbench"},
                  {"version", kVersion},
                  {"simd", std::string(simd::isa_name(simd::active().isa))},
                  {"master_seed", config.master_seed},
                  {"workers", config.workers},
                  {"results", "results.csv"},
                  {"rows", grid.table.size()},
                  {"config", config_json(config)},
                  {"cells", cells_json}};
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  }
  return grid;
}

}  // namespace cfb::experiment
