#include <doctest.h>

#include <array>
#include <cmath>
#include <random>

#include "argos/quintic.hpp"
#include "oracles.hpp"

using namespace argos;

namespace {

double poly(const std::array<double, 6>& a, double t) {
  double s = 0.0;
  for (int k = 5; k >= 0; --k) s = s * t + a[k];
  return s;
}

}  // namespace

TEST_CASE("stationary fit") {
  const auto a = fit_quintic_axis(2.5, 0.0, 0.0, 2.5, 0.0, 0.0, 1.0);
  CHECK(a[0] == 2.5);
  for (int k = 1; k < 6; ++k) CHECK(a[k] == doctest::Approx(0.0));
}

TEST_CASE("constant-speed fit is linear") {
  const auto a = fit_quintic_axis(0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0);
  CHECK(a[0] == doctest::Approx(0.0));
  CHECK(a[1] == doctest::Approx(1.0));
  for (int k = 2; k < 6; ++k) CHECK(std::abs(a[k]) < 1e-12);
}

TEST_CASE("non-positive duration is rejected") {
  CHECK_THROWS_AS(fit_quintic_axis(0, 0, 0, 1, 0, 0, 0.0), ParameterError);
  CHECK_THROWS_AS(fit_quintic({}, {}, -1.0), ParameterError);
}

TEST_CASE("random fits reproduce boundaries and match the 6x6 oracle") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0), dur(0.2, 3.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const BoundaryState s{{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}};
    const BoundaryState e{{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}};
    const double T = dur(rng);
    const QuinticSegment seg = fit_quintic(s, e, T);
    const BoundaryState at0 = eval_quintic(seg, 0.0);
    const BoundaryState atT = eval_quintic(seg, T);
    CHECK(std::abs(at0.pos.x - s.pos.x) < 1e-9);
    CHECK(std::abs(at0.vel.y - s.vel.y) < 1e-9);
    CHECK(std::abs(at0.acc.x - s.acc.x) < 1e-9);
    CHECK(std::abs(atT.pos.x - e.pos.x) < 1e-9);
    CHECK(std::abs(atT.pos.y - e.pos.y) < 1e-9);
    CHECK(std::abs(atT.vel.x - e.vel.x) < 1e-9);
    CHECK(std::abs(atT.vel.y - e.vel.y) < 1e-9);
    CHECK(std::abs(atT.acc.x - e.acc.x) < 1e-9);
    CHECK(std::abs(atT.acc.y - e.acc.y) < 1e-9);

    const auto ox = oracle::quintic_axis(s.pos.x, s.vel.x, s.acc.x, e.pos.x, e.vel.x, e.acc.x, T);
    const auto oy = oracle::quintic_axis(s.pos.y, s.vel.y, s.acc.y, e.pos.y, e.vel.y, e.acc.y, T);
    for (int k = 0; k < 6; ++k) {
      CHECK(std::abs(seg.cx[k] - ox[k]) < 1e-8);
      CHECK(std::abs(seg.cy[k] - oy[k]) < 1e-8);
    }
  }
}

TEST_CASE("derivatives agree with central differences") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double h = 1e-5;
  for (int trial = 0; trial < 50; ++trial) {
    const BoundaryState s{{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}};
    const BoundaryState e{{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}};
    const QuinticSegment seg = fit_quintic(s, e, 1.5);
    for (double t : {0.2, 0.75, 1.3}) {
      const BoundaryState b = eval_quintic(seg, t);
      const double fd_v = (poly(seg.cx, t + h) - poly(seg.cx, t - h)) / (2.0 * h);
      const double fd_a = (eval_quintic(seg, t + h).vel.y - eval_quintic(seg, t - h).vel.y) / (2.0 * h);
      CHECK(std::abs(b.vel.x - fd_v) < 1e-6);
      CHECK(std::abs(b.acc.y - fd_a) < 1e-6);
      CHECK(b.pos.x == doctest::Approx(poly(seg.cx, t)).epsilon(1e-12));
    }
  }
}
