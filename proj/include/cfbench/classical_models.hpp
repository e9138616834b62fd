#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cfb {

/// Follower state seen by a car-following model.
/// dv = v_follower - v_leader, positive while the follower closes in.
struct CfState {
  double v = 0.0;
  double s = 0.0;
  double dv = 0.0;
  double v_leader = 0.0;
};

struct IdmParams {
  double a_max;
  double v_max;
  double delta;
  double s0;
  double T;
  double b;
};

struct GippsParams {
  double a_max;
  double v_max;
  double tau;
  double theta;
  double b;      // own deceleration magnitude
  double b_hat;  // leader deceleration estimate, magnitude
  double s0;
};

enum class FvdmVariant { Cth, Sigmoid };

struct FvdmParams {
  double K1;
  double K2;
  double v_max;
  double s0;
  double T;
  FvdmVariant variant = FvdmVariant::Cth;
};

/// Intelligent driver model. The desired gap s* grows with dv, so approaching
/// a slower leader brakes harder. Throws NonPositiveSpacing for s <= 0.
double idm_accel(const CfState& state, const IdmParams& p);

/// Gipps speed update expressed as an acceleration over one reaction time.
/// A negative braking radicand is clamped to zero (emergency braking floor).
double gipps_accel(const CfState& state, const GippsParams& p);

/// Optimal-velocity function: constant time headway (CTH) ramp or cosine
/// (SIGMOID) ramp between s0 and s0 + T*V_max, zero below, V_max above.
double fvdm_desired_speed(double s, const FvdmParams& p);

/// Full velocity difference model; a faster leader (dv < 0) adds acceleration.
double fvdm_accel(const CfState& state, const FvdmParams& p);

enum class ClassicalKind { Idm, Gipps, FvdmCth, FvdmSigmoid };

std::string_view to_string(ClassicalKind kind);

/// Accepts the report labels ("IDM", "GIPPS", "FVDM-CTH", "FVDM-SIGMOID"),
/// case-insensitively and with '_' in place of '-'. Throws UnknownModelKind.
ClassicalKind parse_classical_kind(std::string_view name);

struct ParamBound {
  std::string name;
  double low;
  double high;
  std::string unit;
};

/// Default GA search box, in parameter-vector order.
std::vector<ParamBound> param_bounds(ClassicalKind kind);

std::size_t param_count(ClassicalKind kind);

IdmParams idm_from(std::span<const double> v);
GippsParams gipps_from(std::span<const double> v);
FvdmParams fvdm_from(std::span<const double> v, FvdmVariant variant);

std::vector<double> to_vector(const IdmParams& p);
std::vector<double> to_vector(const GippsParams& p);
std::vector<double> to_vector(const FvdmParams& p);

/// A classical model with its parameters packed as a flat vector (the layout
/// of param_bounds).
struct ClassicalModel {
  ClassicalKind kind = ClassicalKind::Idm;
  std::vector<double> params;

  double accel(const CfState& state) const;
};

}  // namespace cfb
