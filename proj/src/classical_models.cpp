#include "cfbench/classical_models.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "cfbench/error.hpp"

namespace cfb {

double idm_accel(const CfState& state, const IdmParams& p) {
  if (!(state.s > 0.0)) throw Error(Errc::NonPositiveSpacing, "IDM queried at s <= 0");
  const double s_star =
      p.s0 + p.T * state.v + state.v * state.dv / (2.0 * std::sqrt(p.a_max * p.b));
  const double free_term = std::pow(std::abs(state.v) / p.v_max, p.delta);
  const double gap_ratio = s_star / state.s;
  return p.a_max * (1.0 - free_term - gap_ratio * gap_ratio);
}

double gipps_accel(const CfState& state, const GippsParams& p) {
  if (!(state.s > 0.0)) throw Error(Errc::NonPositiveSpacing, "Gipps queried at s <= 0");
  const double v = state.v;
  const double rel = v / p.v_max;
  const double accel_branch =
      v + 2.5 * p.a_max * p.tau * (1.0 - rel) * std::sqrt(std::max(0.0, 0.025 + rel));
  const double lag = p.tau / 2.0 + p.theta;
  const double radicand =
      p.b * p.b * lag * lag +
      p.b * (2.0 * (state.s - p.s0) - p.tau * v + state.v_leader * state.v_leader / p.b_hat);
  const double brake_branch = -p.b * lag + std::sqrt(std::max(0.0, radicand));
  return (std::min(accel_branch, brake_branch) - v) / p.tau;
}

double fvdm_desired_speed(double s, const FvdmParams& p) {
  if (s <= p.s0) return 0.0;
  const double span = p.T * p.v_max;
  if (s > p.s0 + span) return p.v_max;
  const double frac = (s - p.s0) / span;
  if (p.variant == FvdmVariant::Cth) return (s - p.s0) / p.T;
  return 0.5 * p.v_max * (1.0 - std::cos(std::numbers::pi * frac));
}

double fvdm_accel(const CfState& state, const FvdmParams& p) {
  return p.K1 * (fvdm_desired_speed(state.s, p) - state.v) - p.K2 * state.dv;
}

std::string_view to_string(ClassicalKind kind) {
  switch (kind) {
    case ClassicalKind::Idm: return "IDM";
    case ClassicalKind::Gipps: return "GIPPS";
    case ClassicalKind::FvdmCth: return "FVDM-CTH";
    case ClassicalKind::FvdmSigmoid: return "FVDM-SIGMOID";
  }
  return "?";
}

ClassicalKind parse_classical_kind(std::string_view name) {
  std::string key;
  for (char c : name) key.push_back(c == '_' ? '-' : static_cast<char>(std::toupper(c)));
  for (auto kind : {ClassicalKind::Idm, ClassicalKind::Gipps, ClassicalKind::FvdmCth,
                    ClassicalKind::FvdmSigmoid}) {
    if (key == to_string(kind)) return kind;
  }
  throw Error(Errc::UnknownModelKind, "not a classical model: '" + std::string(name) + "'");
}

std::vector<ParamBound> param_bounds(ClassicalKind kind) {
  switch (kind) {
    case ClassicalKind::Idm:
      return {{"a_max", 0.1, 5.0, "m/s^2"}, {"V_max", 1.0, 45.0, "m/s"},
              {"delta", 1.0, 10.0, "-"},    {"s0", 0.1, 10.0, "m"},
              {"T", 0.1, 5.0, "s"},         {"b", 0.1, 5.0, "m/s^2"}};
    case ClassicalKind::Gipps:
      return {{"a_max", 0.1, 5.0, "m/s^2"}, {"V_max", 1.0, 45.0, "m/s"},
              {"tau", 0.1, 3.0, "s"},       {"theta", 0.01, 2.0, "s"},
              {"b", 0.5, 8.0, "m/s^2"},     {"b_hat", 0.5, 8.0, "m/s^2"},
              {"s0", 0.1, 10.0, "m"}};
    case ClassicalKind::FvdmCth:
    case ClassicalKind::FvdmSigmoid:
      return {{"K1", 0.01, 2.0, "1/s"},
              {"K2", 0.01, 2.0, "1/s"},
              {"V_max", 1.0, 45.0, "m/s"},
              {"s0", 0.1, 10.0, "m"},
              {"T", 0.1, 5.0, "s"}};
  }
  throw Error(Errc::UnknownModelKind, "unhandled classical kind");
}

std::size_t param_count(ClassicalKind kind) { return param_bounds(kind).size(); }

namespace {

void expect_size(std::span<const double> v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw Error(Errc::DimensionMismatch, std::string(what) + " expects " + std::to_string(n) +
                                             " parameters, got " + std::to_string(v.size()));
  }
}

}  // namespace

IdmParams idm_from(std::span<const double> v) {
  expect_size(v, 6, "IDM");
  return {v[0], v[1], v[2], v[3], v[4], v[5]};
}

GippsParams gipps_from(std::span<const double> v) {
  expect_size(v, 7, "Gipps");
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

FvdmParams fvdm_from(std::span<const double> v, FvdmVariant variant) {
  expect_size(v, 5, "FVDM");
  return {v[0], v[1], v[2], v[3], v[4], variant};
}

std::vector<double> to_vector(const IdmParams& p) {
  return {p.a_max, p.v_max, p.delta, p.s0, p.T, p.b};
}

std::vector<double> to_vector(const GippsParams& p) {
  return {p.a_max, p.v_max, p.tau, p.theta, p.b, p.b_hat, p.s0};
}

std::vector<double> to_vector(const FvdmParams& p) { return {p.K1, p.K2, p.v_max, p.s0, p.T}; }

double ClassicalModel::accel(const CfState& state) const {
  switch (kind) {
    case ClassicalKind::Idm: return idm_accel(state, idm_from(params));
    case ClassicalKind::Gipps: return gipps_accel(state, gipps_from(params));
    case ClassicalKind::FvdmCth: return fvdm_accel(state, fvdm_from(params, FvdmVariant::Cth));
    case ClassicalKind::FvdmSigmoid:
      return fvdm_accel(state, fvdm_from(params, FvdmVariant::Sigmoid));
  }
  throw Error(Errc::UnknownModelKind, "unhandled classical kind");
}

}  // namespace cfb
