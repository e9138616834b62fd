#include "cfbench/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "cfbench/error.hpp"

namespace cfb {

double LeaderProfile::speed_at(double t) const {
  if (kind == Kind::Sinusoid) return mean + amplitude * std::sin(omega * t);
  double start = 0.0;
  double v = initial_speed;
  for (const Ramp& r : ramps) {
    if (t < start + r.duration) return v + (r.end_speed - v) * (t - start) / r.duration;
    start += r.duration;
    v = r.end_speed;
  }
  return v;
}

LeaderProfile LeaderProfile::constant(double speed) {
  LeaderProfile p;
  p.kind = Kind::Piecewise;
  p.initial_speed = speed;
  return p;
}

LeaderProfile LeaderProfile::sinusoid(double mean, double amplitude, double omega) {
  LeaderProfile p;
  p.kind = Kind::Sinusoid;
  p.mean = mean;
  p.amplitude = amplitude;
  p.omega = omega;
  return p;
}

Trajectory synthesize(const SynthesisSpec& spec) {
  if (!(spec.dt > 0.0)) throw Error(Errc::InvalidConfig, "dt must be positive");
  const double steps = std::floor(spec.duration / spec.dt + 1e-9);
  if (!(steps >= 1.0)) throw Error(Errc::TooShort, "duration shorter than one time step");
  const auto n = static_cast<std::size_t>(steps) + 1;
  if (!(spec.initial_gap > 0.0)) {
    throw Error(Errc::InvalidConfig, "initial_gap must be positive");
  }
  for (const auto& r : spec.leader.ramps) {
    if (!(r.duration > 0.0)) throw Error(Errc::InvalidConfig, "ramp durations must be positive");
  }

  std::vector<double> xl(n), vl(n), xf(n), vf(n);
  for (std::size_t k = 0; k < n; ++k) vl[k] = spec.leader.speed_at(static_cast<double>(k) * spec.dt);
  xl[0] = spec.initial_gap + spec.leader_length;
  for (std::size_t k = 0; k + 1 < n; ++k) xl[k + 1] = xl[k] + (vl[k + 1] + vl[k]) / 2.0 * spec.dt;

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const bool noisy = spec.speed_noise_std > 0.0;

  xf[0] = 0.0;
  vf[0] = vl[0];
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double s = xl[k] - xf[k] - spec.leader_length;
    const double a = spec.follower.accel(CfState{vf[k], s, vf[k] - vl[k], vl[k]});
    double v_next = vf[k] + a * spec.dt;
    if (noisy) v_next += spec.speed_noise_std * noise(rng);
    v_next = std::max(0.0, v_next);
    vf[k + 1] = v_next;
    xf[k + 1] = xf[k] + (v_next + vf[k]) / 2.0 * spec.dt;
    const double s_next = xl[k + 1] - xf[k + 1] - spec.leader_length;
    if (!(s_next > 0.0)) {
      std::ostringstream msg;
      msg << "follower reached s = " << s_next << " m at t = " << static_cast<double>(k + 1) * spec.dt
          << " s";
      throw Error(Errc::CollisionDuringSynthesis, msg.str());
    }
  }
  return Trajectory(spec.dt, 0.0, std::move(xl), std::move(vl), std::move(xf), std::move(vf),
                    spec.leader_length);
}

std::vector<double> default_params(ClassicalKind kind) {
  switch (kind) {
    case ClassicalKind::Idm: return {1.2, 25.0, 4.0, 2.0, 1.2, 1.8};
    case ClassicalKind::Gipps: return {1.5, 25.0, 0.7, 0.35, 3.0, 3.5, 2.5};
    case ClassicalKind::FvdmCth:
    case ClassicalKind::FvdmSigmoid: return {0.6, 0.5, 25.0, 2.0, 1.5};
  }
  throw Error(Errc::UnknownModelKind, "unhandled classical kind");
}

SynthesisSpec synthesis_preset(ClassicalKind follower, std::string_view preset, std::uint64_t seed) {
  SynthesisSpec spec;
  spec.follower = ClassicalModel{follower, default_params(follower)};
  spec.seed = seed;
  if (preset == "paper-example") {
    spec.leader.initial_speed = 15.0;
    spec.leader.ramps = {{10.0, 15.0}, {8.0, 8.0}, {12.0, 8.0}, {12.0, 16.0}};
    spec.initial_gap = 22.0;
  } else if (preset == "stop-and-go") {
    spec.leader.initial_speed = 12.0;
    spec.leader.ramps = {{5.0, 12.0}, {10.0, 2.0}, {5.0, 2.0}, {10.0, 12.0},
                         {5.0, 12.0}, {10.0, 2.0}, {10.0, 10.0}};
    spec.initial_gap = 18.0;
  } else if (preset == "sinusoid") {
    spec.leader = LeaderProfile::sinusoid(12.0, 4.0, 0.3);
    spec.initial_gap = 18.0;
  } else {
    throw Error(Errc::InvalidConfig, "unknown synthesis preset '" + std::string(preset) +
                                         "' (paper-example, stop-and-go, sinusoid)");
  }
  return spec;
}

}  // namespace cfb
