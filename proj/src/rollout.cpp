#include "cfbench/rollout.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

#include "cfbench/error.hpp"
#include "csv_util.hpp"

namespace cfb {

std::string_view to_string(TargetKind t) {
  switch (t) {
    case TargetKind::A: return "a";
    case TargetKind::V: return "v";
    case TargetKind::S: return "s";
  }
  return "?";
}

TargetKind parse_target(std::string_view name) {
  if (name.size() == 1) {
    switch (std::tolower(static_cast<unsigned char>(name[0]))) {
      case 'a': return TargetKind::A;
      case 'v': return TargetKind::V;
      case 's': return TargetKind::S;
      default: break;
    }
  }
  throw Error(Errc::InvalidConfig, "target must be one of a, v, s (got '" + std::string(name) + "')");
}

namespace {

bool blown_up(double x) { return !std::isfinite(x) || std::abs(x) > kDivergenceLimit; }

bool blown_up(const KinematicState& st) {
  return blown_up(st.x) || blown_up(st.v) || blown_up(st.a) || blown_up(st.s);
}

void push(RolloutResult& r, const KinematicState& st) {
  r.x.push_back(st.x);
  r.v.push_back(st.v);
  r.a.push_back(st.a);
  r.s.push_back(st.s);
}

// Close the acceleration series: a[last] repeats a[last-1].
void finish(RolloutResult& r) {
  if (r.a.size() >= 2) r.a.back() = r.a[r.a.size() - 2];
}

}  // namespace

void save_rollout_csv(const RolloutResult& r, double t0, double dt,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::Io, "cannot write " + path.string());
  out << "t,x,v,a,s,collision,diverged\n";
  for (std::size_t k = 0; k < r.size(); ++k) {
    const bool collided = r.collision_step && *r.collision_step == k;
    const bool diverged = r.diverged && k + 1 == r.size();
    out << detail::format_double(t0 + static_cast<double>(k) * dt) << ','
        << detail::format_double(r.x[k]) << ',' << detail::format_double(r.v[k]) << ','
        << detail::format_double(r.a[k]) << ',' << detail::format_double(r.s[k]) << ','
        << (collided ? 1 : 0) << ',' << (diverged ? 1 : 0) << '\n';
  }
}

RolloutResult rollout_classical(const AccelFn& accel, const Trajectory& segment) {
  const std::size_t n = segment.size();
  const double dt = segment.dt();
  const double len = segment.leader_length();
  const auto xl = segment.x_leader();
  const auto vl = segment.v_leader();

  RolloutResult out;
  out.x.reserve(n);
  out.v.reserve(n);
  out.a.reserve(n);
  out.s.reserve(n);

  KinematicState cur{segment.x_follower()[0], segment.v_follower()[0], 0.0, segment.spacing(0)};
  push(out, cur);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double a = accel(CfState{cur.v, cur.s, cur.v - vl[k], vl[k]});
    out.a[k] = a;
    const double v_next = std::max(0.0, cur.v + a * dt);
    KinematicState next;
    next.x = cur.x + (v_next + cur.v) / 2.0 * dt;
    next.v = v_next;
    next.s = xl[k + 1] - next.x - len;
    next.a = a;
    if (blown_up(next)) {
      out.diverged = true;
      break;
    }
    push(out, next);
    cur = next;
    if (next.s <= 0.0) {
      out.collision_step = k + 1;
      break;
    }
  }
  finish(out);
  return out;
}

RolloutResult rollout_classical(const ClassicalModel& model, const Trajectory& segment) {
  return rollout_classical([&model](const CfState& st) { return model.accel(st); }, segment);
}

KinematicState transform_prediction(TargetKind target, double y_pred, const KinematicState& prev,
                                    double x_leader_next, double v_leader_next, double dt,
                                    double leader_length) {
  (void)v_leader_next;
  KinematicState next;
  switch (target) {
    case TargetKind::A: {
      const auto step = step_ballistic(prev.v, y_pred, dt);
      next.v = step.v_next;
      next.x = prev.x + step.dx;
      next.a = y_pred;
      break;
    }
    case TargetKind::V: {
      next.v = y_pred;
      next.a = (y_pred - prev.v) / dt;
      next.x = prev.x + (next.v + prev.v) / 2.0 * dt;
      break;
    }
    case TargetKind::S: {
      next.x = x_leader_next - leader_length - y_pred;
      next.v = (next.x - prev.x) / dt;
      next.a = (next.v - prev.v) / dt;
      break;
    }
  }
  next.s = x_leader_next - next.x - leader_length;
  return next;
}

RolloutResult rollout_predictor(const Predictor& predictor, TargetKind target,
                                const Trajectory& segment) {
  const std::size_t w = predictor.window();
  const std::size_t n = segment.size();
  if (w < 1) throw Error(Errc::InvalidConfig, "predictor window must be >= 1");
  if (n <= w) {
    throw Error(Errc::TooShort, "segment of " + std::to_string(n) +
                                    " samples is not longer than the window " + std::to_string(w));
  }
  const double dt = segment.dt();
  const double len = segment.leader_length();
  const auto xl = segment.x_leader();
  const auto vl = segment.v_leader();
  const auto recorded = derive_kinematics(segment);

  RolloutResult out;
  std::vector<FeatureRow> rows;
  rows.reserve(n);
  for (std::size_t k = 0; k < w; ++k) {
    push(out, KinematicState{segment.x_follower()[k], segment.v_follower()[k],
                             recorded.a_follower[k], recorded.s[k]});
    rows.push_back({segment.v_follower()[k], vl[k], recorded.s[k]});
  }

  for (std::size_t k = w - 1; k + 1 < n; ++k) {
    const std::span<const FeatureRow> window(rows.data() + (k + 1 - w), w);
    const double y = predictor.predict(window);
    const KinematicState prev{out.x[k], out.v[k], out.a[k], out.s[k]};
    const KinematicState next = transform_prediction(target, y, prev, xl[k + 1], vl[k + 1], dt, len);
    if (blown_up(next)) {
      out.diverged = true;
      break;
    }
    out.a[k] = next.a;
    push(out, next);
    rows.push_back({next.v, vl[k + 1], next.s});
    if (next.s <= 0.0) {
      out.collision_step = k + 1;
      break;
    }
  }
  finish(out);
  return out;
}

}  // namespace cfb
