#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "cfbench/classical_models.hpp"
#include "cfbench/trajectory.hpp"

namespace cfb {

/// Leader speed over time. Piecewise profiles start at `initial_speed` and
/// ramp linearly through each (duration, end_speed) segment, holding the last
/// speed afterwards. Sinusoids are mean + amplitude * sin(omega * t).
struct LeaderProfile {
  enum class Kind { Piecewise, Sinusoid };

  struct Ramp {
    double duration;
    double end_speed;
  };

  Kind kind = Kind::Piecewise;
  double initial_speed = 10.0;
  std::vector<Ramp> ramps;
  double mean = 10.0;
  double amplitude = 0.0;
  double omega = 0.1;

  double speed_at(double t) const;

  static LeaderProfile constant(double speed);
  static LeaderProfile sinusoid(double mean, double amplitude, double omega);
};

struct SynthesisSpec {
  LeaderProfile leader;
  ClassicalModel follower;
  double initial_gap = 20.0;  // m, net spacing at t = 0
  double duration = 60.0;     // s
  double dt = 0.1;            // s
  double leader_length = 5.0; // m
  double speed_noise_std = 0.0;  // m/s per step, zero-mean Gaussian
  std::uint64_t seed = 0;
};

/// Leader integrated from its speed profile with the trapezoid rule; follower
/// produced by the same ballistic stepping the classical rollout uses (speed
/// clamped at zero), plus optional per-step speed noise.
///
/// Throws TooShort for a duration below one step and CollisionDuringSynthesis
/// if the follower reaches s <= 0.
Trajectory synthesize(const SynthesisSpec& spec);

/// Plausible parameters for generating data with each classical model.
std::vector<double> default_params(ClassicalKind kind);

/// Named scenarios, 60 s at dt = 0.1 with a 5 m leader:
///   paper-example  cruise at 15 m/s, brake to 8, recover to 16
///   stop-and-go    12 m/s down to 2 and back, twice
///   sinusoid       12 +- 4 m/s oscillation
/// Throws InvalidConfig for an unknown name.
SynthesisSpec synthesis_preset(ClassicalKind follower, std::string_view preset, std::uint64_t seed);

inline constexpr std::string_view kPresetNames[] = {"paper-example", "stop-and-go", "sinusoid"};

}  // namespace cfb
