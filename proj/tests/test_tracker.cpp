#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "argos/tracker.hpp"
#include "oracles.hpp"

using namespace argos;

using oracle::straight_window;

TEST_CASE("solver is within 5 percent of an exhaustive grid search") {
  TrackerConfig cfg;
  cfg.horizon = 3;
  const VehicleParams p;
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> y(-3.0, 3.0), phi(-0.2, 0.2), v(10.0, 50.0), dv(-5.0, 5.0);
  for (int k = 0; k < 200; ++k) {
    const VehicleState x0{0.0, y(rng), phi(rng), v(rng)};
    const ReferenceWindow w = straight_window(cfg.horizon, cfg.dt, std::max(1.0, x0.v + dv(rng)), y(rng));
    const double grid = oracle::grid_best_cost(x0, w, cfg, p);
    const MpcSolution sol = solve(x0, w, cfg, p);
    CHECK(sol.cost <= 1.05 * grid);
    CHECK(sol.cost == doctest::Approx(mpc_cost(x0, sol.u, w, cfg, p)));
    for (const Command& c : sol.u) {
      CHECK(c.a >= p.a_min);
      CHECK(c.a <= p.a_max);
      CHECK(c.delta >= p.delta_min);
      CHECK(c.delta <= p.delta_max);
    }
  }
}

TEST_CASE("zero tracking error is a fixed point") {
  const TrackerConfig cfg;
  const VehicleParams p;
  const ReferenceWindow w = straight_window(cfg.horizon, cfg.dt, 30.0, 0.0);
  const MpcSolution sol = solve({0.0, 0.0, 0.0, 30.0}, w, cfg, p);
  CHECK(sol.cost < 1e-12);
  for (const Command& k : sol.u) {
    CHECK(std::abs(k.a) < 1e-9);
    CHECK(std::abs(k.delta) < 1e-9);
  }
}

TEST_CASE("zero state weights give zero commands") {
  TrackerConfig cfg;
  cfg.Q = {0, 0, 0, 0};
  cfg.Q_f = {0, 0, 0, 0};
  const VehicleParams p;
  const ReferenceWindow w = straight_window(cfg.horizon, cfg.dt, 40.0, 5.0);
  const MpcSolution sol = solve({0.0, 0.0, 0.3, 20.0}, w, cfg, p);
  for (const Command& k : sol.u) {
    CHECK(std::abs(k.a) < 1e-9);
    CHECK(std::abs(k.delta) < 1e-9);
  }
}

TEST_CASE("cost decreases across accepted iterates") {
  const TrackerConfig cfg;
  const VehicleParams p;
  const ReferenceWindow w = straight_window(cfg.horizon, cfg.dt, 35.0, 2.0);
  const MpcSolution sol = solve({0.0, 0.0, 0.0, 30.0}, w, cfg, p);
  for (std::size_t i = 1; i < sol.iterate_costs.size(); ++i) CHECK(sol.iterate_costs[i] <= sol.iterate_costs[i - 1]);
  CHECK(sol.z.size() == static_cast<std::size_t>(cfg.horizon) + 1);
}

TEST_CASE("bad inputs are rejected") {
  const TrackerConfig cfg;
  const VehicleParams p;
  ReferenceWindow w = straight_window(cfg.horizon - 1, cfg.dt, 30.0, 0.0);
  CHECK_THROWS_AS(solve({}, w, cfg, p), TrackerError);
  w = straight_window(cfg.horizon, cfg.dt, 30.0, 0.0);
  CHECK_THROWS_AS(solve({NAN, 0.0, 0.0, 1.0}, w, cfg, p), TrackerError);
  CHECK_THROWS_AS(ReferencePath({}, false), TrackerError);
  TrackerConfig bad;
  bad.horizon = 1;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = {};
  bad.R[1] = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("reference window follows the path at the setpoint speed") {
  const std::vector<Waypoint> pts{{0.0, 0.0, 20.0}, {100.0, 0.0, 20.0}, {200.0, 0.0, 40.0}};
  const ReferencePath path(pts, false);
  CHECK(path.speed_at(150.0) == doctest::Approx(30.0));
  CHECK(path.speed_at(500.0) == 40.0);
  const TrackerConfig cfg;
  const ReferenceWindow w = extract_reference(path, {10.0, 3.0, 0.0, 0.0}, cfg);
  REQUIRE(w.z.size() == 11);
  CHECK(w.z[0].x == doctest::Approx(10.0));
  CHECK(w.z[0].y == 0.0);
  CHECK(w.z[1].x == doctest::Approx(12.0));
  CHECK(w.z[10].x == doctest::Approx(30.0));

  const ReferenceWindow capped = extract_reference(path, {150.0, 0.0, 0.0, 0.0}, cfg, 25.0);
  CHECK(capped.z[0].v == 25.0);
  CHECK(capped.z[1].x == doctest::Approx(152.5));

  const ReferenceWindow end = extract_reference(path, {199.0, 0.0, 0.0, 0.0}, cfg);
  CHECK(end.z.back().x == doctest::Approx(200.0));
}

TEST_CASE("closed-loop lap at 30 m/s tracks the raceline within 0.5 m RMS") {
  const Track track = build_oval_track(TrackConfig{});
  std::vector<Waypoint> pts(track.raceline.waypoints().begin(), track.raceline.waypoints().end());
  const ReferencePath path(pts, true);
  const TrackerConfig cfg;
  const VehicleParams p;
  PathTracker tracker(cfg, p);

  const auto [p0, h0] = track.raceline.pose_at(0.0);
  VehicleState s{p0.x, p0.y, h0, 30.0};
  const double dt = 0.02;
  const double lap_time = track.raceline.total_length() / 30.0;
  double sum_sq = 0.0;
  long n = 0;
  for (double t = 0.0; t < lap_time; t += dt) {
    const Command u = tracker.control(s, extract_reference(path, s, cfg, 30.0));
    s = step(s, u, dt, p);
    const double lat = track.raceline.project(s.position()).lateral;
    sum_sq += lat * lat;
    ++n;
  }
  const double rms = std::sqrt(sum_sq / static_cast<double>(n));
  MESSAGE("lateral rms " << rms);
  CHECK(rms <= 0.5);
  CHECK(std::abs(s.v - 30.0) < 1.0);
}
