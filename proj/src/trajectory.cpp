#include "cfbench/trajectory.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "cfbench/error.hpp"
#include "csv_util.hpp"

namespace cfb {

Trajectory::Trajectory(double dt, double t0, std::vector<double> x_leader,
                       std::vector<double> v_leader, std::vector<double> x_follower,
                       std::vector<double> v_follower, double leader_length)
    : dt_(dt),
      t0_(t0),
      x_leader_(std::move(x_leader)),
      v_leader_(std::move(v_leader)),
      x_follower_(std::move(x_follower)),
      v_follower_(std::move(v_follower)),
      leader_length_(leader_length) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
    throw Error(Errc::InvalidConfig, "dt must be positive and finite");
  }
  const std::size_t n = x_leader_.size();
  if (v_leader_.size() != n || x_follower_.size() != n || v_follower_.size() != n) {
    throw Error(Errc::LengthMismatch, "trajectory series differ in length");
  }
  if (n < 2) throw Error(Errc::TooShort, "trajectory needs at least 2 samples");
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(x_leader_[k]) || !std::isfinite(v_leader_[k]) ||
        !std::isfinite(x_follower_[k]) || !std::isfinite(v_follower_[k])) {
      throw Error(Errc::Parse, "non-finite sample at index " + std::to_string(k));
    }
    const double s = spacing(k);
    if (!(s > 0.0)) {
      std::ostringstream msg;
      msg << "spacing " << s << " m at index " << k;
      throw Error(Errc::CollisionInData, msg.str());
    }
  }
}

Trajectory Trajectory::slice(std::size_t begin, std::size_t end) const {
  if (end > size() || begin >= end || end - begin < 2) {
    throw Error(Errc::SegmentTooShort, "slice [" + std::to_string(begin) + ", " +
                                           std::to_string(end) + ") has fewer than 2 samples");
  }
  auto cut = [&](const std::vector<double>& v) {
    return std::vector<double>(v.begin() + static_cast<std::ptrdiff_t>(begin),
                               v.begin() + static_cast<std::ptrdiff_t>(end));
  };
  return Trajectory(dt_, time(begin), cut(x_leader_), cut(v_leader_), cut(x_follower_),
                    cut(v_follower_), leader_length_);
}

DerivedSeries derive_kinematics(const Trajectory& traj) {
  const std::size_t n = traj.size();
  DerivedSeries out;
  out.s.resize(n);
  out.dv.resize(n);
  out.a_follower.resize(n);
  const auto vf = traj.v_follower();
  const auto vl = traj.v_leader();
  for (std::size_t k = 0; k < n; ++k) {
    out.s[k] = traj.spacing(k);
    out.dv[k] = vf[k] - vl[k];
  }
  for (std::size_t k = 0; k + 1 < n; ++k) out.a_follower[k] = (vf[k + 1] - vf[k]) / traj.dt();
  out.a_follower[n - 1] = out.a_follower[n - 2];
  return out;
}

std::size_t split_index(std::size_t n, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0)) {
    throw Error(Errc::InvalidConfig, "train_fraction must lie in (0, 1)");
  }
  const auto idx =
      static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n)));
  if (idx < 2 || n - idx < 2) {
    throw Error(Errc::SegmentTooShort, "split of " + std::to_string(n) + " samples at " +
                                           std::to_string(idx) + " leaves a segment below 2");
  }
  return idx;
}

std::pair<Trajectory, Trajectory> split(const Trajectory& traj, const SplitSpec& spec) {
  const std::size_t idx = split_index(traj.size(), spec);
  return {traj.slice(0, idx), traj.slice(idx, traj.size())};
}

Trajectory load_csv(const std::filesystem::path& path, const ColumnMap& columns,
                    double leader_length, double dt) {
  const detail::CsvTable table = detail::read_csv(path);
  auto column = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < table.header.size(); ++i) {
      if (table.header[i] == name) return i;
    }
    throw Error(Errc::MissingColumn, "column '" + name + "' not found in " + path.string());
  };
  const std::size_t ct = column(columns.t);
  const std::size_t cxl = column(columns.x_leader);
  const std::size_t cvl = column(columns.v_leader);
  const std::size_t cxf = column(columns.x_follower);
  const std::size_t cvf = column(columns.v_follower);
  if (columns.a_follower) column(*columns.a_follower);

  const std::size_t n = table.rows.size();
  if (n < 2) throw Error(Errc::TooShort, path.string() + " has fewer than 2 data rows");

  std::vector<double> t(n), xl(n), vl(n), xf(n), vf(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = table.rows[r];
    const std::size_t line = r + 2;
    t[r] = detail::parse_double(row, ct, line);
    xl[r] = detail::parse_double(row, cxl, line);
    vl[r] = detail::parse_double(row, cvl, line);
    xf[r] = detail::parse_double(row, cxf, line);
    vf[r] = detail::parse_double(row, cvf, line);
  }

  const double step = dt > 0.0 ? dt : t[1] - t[0];
  if (!(step > 0.0)) throw Error(Errc::NonUniformTimestep, "timestamps are not increasing");
  constexpr double kTimeTol = 1e-6;
  for (std::size_t k = 0; k < n; ++k) {
    const double expected = t[0] + static_cast<double>(k) * step;
    if (std::abs(t[k] - expected) > kTimeTol) {
      std::ostringstream msg;
      msg << "row " << k + 2 << ": t = " << t[k] << " s, expected " << expected << " s";
      throw Error(Errc::NonUniformTimestep, msg.str());
    }
  }
  return Trajectory(step, t[0], std::move(xl), std::move(vl), std::move(xf), std::move(vf),
                    leader_length);
}

void save_csv(const Trajectory& traj, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << "t,x_leader,v_leader,x_follower,v_follower\n";
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << detail::format_double(traj.time(k)) << ',' << detail::format_double(traj.x_leader()[k])
        << ',' << detail::format_double(traj.v_leader()[k]) << ','
        << detail::format_double(traj.x_follower()[k]) << ','
        << detail::format_double(traj.v_follower()[k]) << '\n';
  }
  if (!out) throw Error(Errc::Io, "write failed for " + path.string());
}

}  // namespace cfb
