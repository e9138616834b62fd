#include "cfbench/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cfbench/error.hpp"
#include "csv_util.hpp"

namespace cfb {

double rmse(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) {
    throw Error(Errc::LengthMismatch, "rmse of series with lengths " + std::to_string(pred.size()) +
                                          " and " + std::to_string(truth.size()));
  }
  if (pred.empty()) throw Error(Errc::EmptySeries, "rmse of an empty series");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - truth[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(pred.size()));
}

double RolloutScores::get(TargetKind variable) const {
  switch (variable) {
    case TargetKind::A: return rmse_a;
    case TargetKind::V: return rmse_v;
    case TargetKind::S: return rmse_s;
  }
  return 0.0;
}

RolloutScores evaluate_rollout(const RolloutResult& sim, const Trajectory& truth) {
  const std::size_t n = std::min(sim.size(), truth.size());
  if (n == 0) throw Error(Errc::EmptyOverlap, "rollout and record do not overlap");
  const auto derived = derive_kinematics(truth);
  auto head = [n](std::span<const double> s) { return s.first(n); };
  RolloutScores out;
  out.rmse_a = rmse(head(sim.a), head(derived.a_follower));
  out.rmse_v = rmse(head(sim.v), head(truth.v_follower()));
  out.rmse_s = rmse(head(sim.s), head(derived.s));
  out.steps = n;
  out.diverged = sim.diverged;
  out.collision = sim.collision_step.has_value();
  return out;
}

double cumulative_error_identity(std::span<const double> v_errors, double dt) {
  double acc = 0.0;
  double prev = 0.0;
  for (double e : v_errors) {
    acc += (e + prev) / 2.0;
    prev = e;
  }
  return dt * acc;
}

void ResultsTable::add_cell(const std::string& dataset, const std::string& model,
                            TargetKind target, const RolloutScores& scores) {
  for (TargetKind var : kAllTargets) {
    const Key key{dataset, model, static_cast<int>(target), static_cast<int>(var)};
    if (rows_.contains(key)) {
      throw Error(Errc::DuplicateCell, dataset + "/" + model + "/" + std::string(to_string(target)));
    }
  }
  for (TargetKind var : kAllTargets) {
    add_row({scores.get(var), var, dataset, model, target, scores.diverged, scores.collision});
  }
}

void ResultsTable::add_row(const ResultsRow& row) {
  const Key key{row.dataset, row.model, static_cast<int>(row.target), static_cast<int>(row.variable)};
  if (!rows_.emplace(key, row).second) {
    throw Error(Errc::DuplicateCell, row.dataset + "/" + row.model + "/" +
                                         std::string(to_string(row.target)) + " RMSE(" +
                                         std::string(to_string(row.variable)) + ")");
  }
}

std::vector<ResultsRow> ResultsTable::rows() const {
  std::vector<ResultsRow> out;
  out.reserve(rows_.size());
  for (const auto& [key, row] : rows_) out.push_back(row);
  return out;
}

std::string ResultsTable::to_csv() const {
  std::ostringstream out;
  out << "RMSE,variable,Dataset,Model,Target,diverged,collision\n";
  for (const auto& [key, r] : rows_) {
    out << detail::format_double(r.rmse) << ',' << to_string(r.variable) << ',' << r.dataset << ','
        << r.model << ',' << to_string(r.target) << ',' << (r.diverged ? 1 : 0) << ','
        << (r.collision ? 1 : 0) << '\n';
  }
  return out.str();
}

void ResultsTable::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << to_csv();
}

ResultsTable ResultsTable::load_csv(const std::filesystem::path& path) {
  const auto table = detail::read_csv(path);
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < table.header.size(); ++i) {
      if (table.header[i] == name) return i;
    }
    throw Error(Errc::MissingColumn, "column '" + name + "' not found in " + path.string());
  };
  const std::size_t c_rmse = col("RMSE"), c_var = col("variable"), c_data = col("Dataset"),
                    c_model = col("Model"), c_target = col("Target"), c_div = col("diverged"),
                    c_col = col("collision");
  ResultsTable out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    if (row.size() < table.header.size()) {
      throw Error(Errc::Parse, "line " + std::to_string(r + 2) + " has too few cells");
    }
    ResultsRow rr;
    rr.rmse = detail::parse_double(row, c_rmse, r + 2);
    rr.variable = parse_target(row[c_var]);
    rr.dataset = row[c_data];
    rr.model = row[c_model];
    rr.target = parse_target(row[c_target]);
    rr.diverged = row[c_div] == "1";
    rr.collision = row[c_col] == "1";
    out.add_row(rr);
  }
  return out;
}

}  // namespace cfb
