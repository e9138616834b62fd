#include <cmath>
#include <random>

#include "cfbench/classical_models.hpp"
#include "cfbench/error.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace cfb;

namespace {
const IdmParams kIdm{1.0, 10.0, 4.0, 2.0, 1.0, 1.0};
const GippsParams kGipps{2.0, 10.0, 1.0, 0.5, 3.0, 3.0, 2.0};
}  // namespace

TEST_CASE("IDM hand values") {
  CHECK(idm_accel({0.0, 2.0, 0.0, 0.0}, kIdm) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(std::abs(idm_accel({10.0, 1e9, 0.0, 10.0}, kIdm)) < 1e-12);
  CHECK(idm_accel({5.0, 20.0, 0.0, 5.0}, kIdm) == doctest::Approx(0.815).epsilon(1e-12));
}

TEST_CASE("IDM brakes harder while closing in") {
  const double approach = idm_accel({5.0, 20.0, 2.0, 3.0}, kIdm);
  const double opening = idm_accel({5.0, 20.0, -2.0, 7.0}, kIdm);
  CHECK(approach < idm_accel({5.0, 20.0, 0.0, 5.0}, kIdm));
  CHECK(opening > idm_accel({5.0, 20.0, 0.0, 5.0}, kIdm));
}

TEST_CASE("IDM rejects non-positive spacing") {
  CHECK_THROWS_AS(idm_accel({5.0, 0.0, 0.0, 5.0}, kIdm), Error);
  CHECK_THROWS_AS(gipps_accel({5.0, -1.0, 0.0, 5.0}, kGipps), Error);
}

TEST_CASE("IDM acceleration is non-decreasing in spacing") {
  for (double v : {0.0, 3.0, 8.0, 12.0})
    for (double dv : {-3.0, 0.0, 3.0}) {
      double prev = -1e300;
      for (double s = 0.5; s < 200; s *= 1.2) {
        const double a = idm_accel({v, s, dv, v - dv}, kIdm);
        CHECK(a >= prev - 1e-12);
        prev = a;
      }
    }
}

TEST_CASE("IDM matches the scripted formula") {
  const std::vector<double> p{1.3, 22.0, 4.0, 2.5, 1.4, 2.1};
  const IdmParams ip = idm_from(p);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double v = 25 * u(rng), s = 0.5 + 60 * u(rng), vl = 25 * u(rng);
    CHECK(idm_accel({v, s, v - vl, vl}, ip) == doctest::Approx(oracle::idm(v, s, vl, p)).epsilon(1e-12));
  }
}

TEST_CASE("Gipps hand values") {
  const CfState st{5.0, 20.0, -1.0, 6.0};
  const double expr_accel = 5.0 + 2.5 * std::sqrt(0.525);
  const double expr_brake = -3.0 + std::sqrt(138.0);
  CHECK(expr_accel == doctest::Approx(6.8114).epsilon(1e-4));
  CHECK(expr_brake == doctest::Approx(8.7473).epsilon(1e-4));
  CHECK(gipps_accel(st, kGipps) == doctest::Approx(1.8114).epsilon(1e-4));
  CHECK(gipps_accel(st, kGipps) == doctest::Approx(expr_accel - 5.0).epsilon(1e-12));
}

TEST_CASE("Gipps saturates at V_max and clamps the braking radicand") {
  CHECK(std::abs(gipps_accel({10.0, 1e6, 0.0, 10.0}, kGipps)) < 1e-12);
  // Tiny spacing and a fast follower push the radicand below zero.
  const double a = gipps_accel({20.0, 0.01, 20.0, 0.0}, kGipps);
  CHECK(std::isfinite(a));
  const double floor_speed = -kGipps.b * (kGipps.tau / 2 + kGipps.theta);
  CHECK(a == doctest::Approx((floor_speed - 20.0) / kGipps.tau));
}

TEST_CASE("FVDM desired speed") {
  const FvdmParams cth{0.5, 0.3, 10.0, 2.0, 1.0, FvdmVariant::Cth};
  FvdmParams sig = cth;
  sig.variant = FvdmVariant::Sigmoid;
  for (const auto& p : {cth, sig}) {
    CHECK(fvdm_desired_speed(2.0, p) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(fvdm_desired_speed(12.0, p) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(std::abs(fvdm_desired_speed(2.0 + 1e-12, p)) < 1e-9);
    CHECK(std::abs(fvdm_desired_speed(12.0 - 1e-12, p) - 10.0) < 1e-9);
    double prev = -1.0;
    for (double s = 0.0; s < 20; s += 0.05) {
      const double V = fvdm_desired_speed(s, p);
      CHECK(V >= prev - 1e-12);
      CHECK(V >= 0.0);
      CHECK(V <= 10.0);
      prev = V;
    }
  }
  CHECK(fvdm_desired_speed(7.0, cth) == doctest::Approx(5.0));
}

TEST_CASE("FVDM acceleration hand values") {
  const FvdmParams p{0.5, 0.3, 10.0, 2.0, 1.0, FvdmVariant::Cth};
  CHECK(fvdm_accel({5.0, 7.0, 0.0, 5.0}, p) == doctest::Approx(0.0).epsilon(1e-12));
  // Leader 2 m/s faster: dv = v - v_leader = -2.
  CHECK(fvdm_accel({5.0, 7.0, -2.0, 7.0}, p) == doctest::Approx(0.6).epsilon(1e-12));
}

TEST_CASE("parameter boxes") {
  CHECK(param_bounds(ClassicalKind::Idm).size() == 6);
  CHECK(param_bounds(ClassicalKind::Gipps).size() == 7);
  CHECK(param_bounds(ClassicalKind::FvdmCth).size() == 5);
  CHECK(param_bounds(ClassicalKind::FvdmSigmoid).size() == 5);
  for (auto k : {ClassicalKind::Idm, ClassicalKind::Gipps, ClassicalKind::FvdmCth}) {
    for (const auto& b : param_bounds(k)) {
      CHECK(b.low > 0);
      CHECK(b.high > b.low);
      CHECK(std::isfinite(b.high));
    }
  }
  CHECK_THROWS_AS(parse_classical_kind("OVM"), Error);
  CHECK(parse_classical_kind("fvdm_cth") == ClassicalKind::FvdmCth);
}

TEST_CASE("every model is finite over its parameter box") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto k : {ClassicalKind::Idm, ClassicalKind::Gipps, ClassicalKind::FvdmCth, ClassicalKind::FvdmSigmoid}) {
    const auto box = param_bounds(k);
    for (int i = 0; i < 2000; ++i) {
      ClassicalModel m{k, {}};
      for (const auto& b : box) m.params.push_back(b.low + (b.high - b.low) * u(rng));
      const double v = 45 * u(rng), vl = 45 * u(rng), s = 0.01 + 200 * u(rng);
      CHECK(std::isfinite(m.accel({v, s, v - vl, vl})));
    }
  }
}
