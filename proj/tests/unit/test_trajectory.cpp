#include <cmath>
#include <fstream>

#include "cfbench/error.hpp"
#include "cfbench/synthesis.hpp"
#include "cfbench/trajectory.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cfb;

namespace {

std::filesystem::path write(const std::string& name, const std::string& body) {
  const auto dir = oracle::temp_dir("trajectory");
  const auto p = dir / name;
  std::ofstream(p) << body;
  return p;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::Io;
}

Trajectory ramp(std::size_t n) {
  std::vector<double> xl, vl, xf, vf;
  for (std::size_t k = 0; k < n; ++k) {
    xl.push_back(30.0 + k);
    vl.push_back(10.0);
    xf.push_back(0.5 * k);
    vf.push_back(10.0 + 0.01 * k);
  }
  return Trajectory(0.1, 0.0, xl, vl, xf, vf, 5.0);
}

}  // namespace

TEST_CASE("load_csv accepts a well-formed three-row file") {
  const auto p = write("ok.csv",
                       "t,x_leader,v_leader,x_follower,v_follower\n"
                       "0.0,25,10,10,10\n0.1,25,10,11,10\n0.2,25,10,12,10\n");
  const Trajectory t = load_csv(p, {}, 5.0, 0.0);
  CHECK(t.size() == 3);
  CHECK(t.spacing(0) == doctest::Approx(10));
  CHECK(t.spacing(1) == doctest::Approx(9));
  CHECK(t.spacing(2) == doctest::Approx(8));
  CHECK(t.dt() == doctest::Approx(0.1));
}

TEST_CASE("load_csv rejects collisions, ragged timestamps, missing columns, short files") {
  const auto collide = write("c.csv",
                             "t,x_leader,v_leader,x_follower,v_follower\n"
                             "0.0,25,10,10,10\n0.1,25,10,20.5,10\n");
  CHECK(code_of([&] { load_csv(collide, {}, 5.0, 0.0); }) == Errc::CollisionInData);

  const auto ragged = write("r.csv",
                            "t,x_leader,v_leader,x_follower,v_follower\n"
                            "0.0,25,10,10,10\n0.1,26,10,11,10\n0.25,27,10,12,10\n");
  CHECK(code_of([&] { load_csv(ragged, {}, 5.0, 0.0); }) == Errc::NonUniformTimestep);

  const auto missing = write("m.csv", "t,x_leader,v_leader,x_follower\n0,25,10,10\n0.1,25,10,10\n");
  CHECK(code_of([&] { load_csv(missing, {}, 5.0, 0.0); }) == Errc::MissingColumn);

  const auto single = write("s.csv", "t,x_leader,v_leader,x_follower,v_follower\n0,25,10,10,10\n");
  CHECK(code_of([&] { load_csv(single, {}, 5.0, 0.0); }) == Errc::TooShort);
}

TEST_CASE("column map lets renamed headers load") {
  const auto p = write("renamed.csv",
                       "time,xl,vl,xf,vf\n0,25,10,10,10\n0.1,26,10,11,10\n");
  ColumnMap m;
  m.t = "time";
  m.x_leader = "xl";
  m.v_leader = "vl";
  m.x_follower = "xf";
  m.v_follower = "vf";
  CHECK(load_csv(p, m, 5.0, 0.0).size() == 2);
}

TEST_CASE("derive_kinematics hand examples") {
  const Trajectory t(0.1, 0.0, {20, 21}, {10, 10}, {10, 10.5}, {10, 10.2}, 5.0);
  const auto d = derive_kinematics(t);
  CHECK(d.s[0] == doctest::Approx(5.0));
  CHECK(d.s[1] == doctest::Approx(5.5));
  CHECK(d.a_follower[0] == doctest::Approx(2.0));
  CHECK(d.a_follower[1] == d.a_follower[0]);
  CHECK(d.dv[1] == doctest::Approx(0.2));

  const Trajectory flat(0.1, 0.0, {20, 21}, {10, 10}, {10, 11}, {10, 10}, 5.0);
  const auto f = derive_kinematics(flat);
  CHECK(f.a_follower[0] == 0.0);
  CHECK(f.a_follower[1] == 0.0);
}

TEST_CASE("integrating derived acceleration reconstructs the follower speed") {
  const Trajectory t = synthesize(synthesis_preset(ClassicalKind::Idm, "sinusoid", 3));
  const auto d = derive_kinematics(t);
  double v = t.v_follower()[0];
  for (std::size_t k = 0; k + 1 < t.size(); ++k) {
    v += d.a_follower[k] * t.dt();
    CHECK(std::abs(v - t.v_follower()[k + 1]) <= 1e-9);
  }
}

TEST_CASE("split lengths and concatenation") {
  auto [a, b] = split(ramp(10), {0.8});
  CHECK(a.size() == 8);
  CHECK(b.size() == 2);
  auto [c, d] = split(ramp(100), {0.8});
  CHECK(c.size() == 80);
  CHECK(d.size() == 20);
  CHECK(d.t0() == doctest::Approx(8.0));
  CHECK(code_of([] { split(ramp(3), {0.8}); }) == Errc::SegmentTooShort);

  const Trajectory full = ramp(100);
  for (std::size_t k = 0; k < 80; ++k) CHECK(c.x_follower()[k] == full.x_follower()[k]);
  for (std::size_t k = 0; k < 20; ++k) CHECK(d.x_follower()[k] == full.x_follower()[80 + k]);
}

TEST_CASE("save_csv then load_csv is bit-exact") {
  const Trajectory t = synthesize(synthesis_preset(ClassicalKind::Gipps, "stop-and-go", 11));
  const auto dir = oracle::temp_dir("roundtrip");
  save_csv(t, dir / "t.csv");
  const Trajectory back = load_csv(dir / "t.csv", {}, t.leader_length(), t.dt());
  CHECK(back == t);
}

TEST_CASE("synthesize: constant leader converges to equilibrium") {
  SynthesisSpec spec;
  spec.leader = LeaderProfile::constant(10.0);
  spec.follower = {ClassicalKind::Idm, {1.0, 20.0, 4.0, 2.0, 1.0, 1.0}};
  spec.duration = 400.0;
  const Trajectory t = synthesize(spec);
  const std::size_t n = t.size();
  CHECK(t.v_follower()[n - 1] <= 10.0 + 1e-9);
  CHECK(std::abs(t.spacing(n - 1) - t.spacing(n - 11)) < 1e-6);
}

TEST_CASE("synthesize rejects zero duration") {
  SynthesisSpec spec;
  spec.follower = {ClassicalKind::Idm, default_params(ClassicalKind::Idm)};
  spec.duration = 0.0;
  CHECK(code_of([&] { synthesize(spec); }) == Errc::TooShort);
}

TEST_CASE("synthesize matches a scripted IDM integration on a sinusoidal leader") {
  const std::vector<double> p{1.0, 10.0, 4.0, 2.0, 1.0, 1.0};
  SynthesisSpec spec;
  spec.leader = LeaderProfile::sinusoid(10.0, 2.0, 0.1);
  spec.follower = {ClassicalKind::Idm, p};
  spec.initial_gap = 25.0;
  spec.duration = 60.0;
  const Trajectory t = synthesize(spec);

  // Leader: trapezoid over the analytic speed profile.
  std::vector<double> xl{spec.initial_gap + spec.leader_length}, vl{10.0};
  for (std::size_t k = 1; k < t.size(); ++k) {
    const double v = 10.0 + 2.0 * std::sin(0.1 * (k * 0.1));
    xl.push_back(xl.back() + 0.5 * (vl.back() + v) * 0.1);
    vl.push_back(v);
  }
  const auto ref = oracle::integrate_follower(
      xl, vl, 0.0, 10.0, 0.1, 5.0, [&](double v, double s, double v_l) { return oracle::idm(v, s, v_l, p); });
  REQUIRE(ref.xf.size() == t.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    worst = std::max({worst, std::abs(ref.xf[k] - t.x_follower()[k]), std::abs(ref.vf[k] - t.v_follower()[k]),
                      std::abs(xl[k] - t.x_leader()[k])});
  }
  CHECK(worst <= 1e-9);
  double lo = 1e9, hi = -1e9;
  for (std::size_t k = 0; k < t.size(); ++k) {
    lo = std::min(lo, t.spacing(k));
    hi = std::max(hi, t.spacing(k));
  }
  CHECK(hi - lo > 0.5);
}

TEST_CASE("synthesis noise is seeded") {
  auto spec = synthesis_preset(ClassicalKind::Idm, "paper-example", 5);
  spec.speed_noise_std = 0.05;
  CHECK(synthesize(spec) == synthesize(spec));
  auto other = spec;
  other.seed = 6;
  CHECK_FALSE(synthesize(spec) == synthesize(other));
}
