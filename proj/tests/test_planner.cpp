#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "argos/planner.hpp"

using namespace argos;

namespace {

constexpr double kPi = std::numbers::pi;

const Track& track() {
  static const Track t = build_oval_track(TrackConfig{});
  return t;
}

// Pose on the raceline at station s with lateral offset l (left positive).
VehicleState on_line(double s, double l, double v) {
  const auto [p, h] = track().raceline.pose_at(s);
  const Vec2 q = project_along(p, h + kPi / 2.0, l);
  return {q.x, q.y, h, v};
}

}  // namespace

TEST_CASE("default lateral offset respects the safety distance") {
  CHECK(default_lateral_offset(track(), 7.5) == doctest::Approx(12.0));
  TrackConfig c;
  c.track_width = 16.0;
  CHECK(default_lateral_offset(build_oval_track(c), 7.5) == 7.5);
}

TEST_CASE("overtake guides on a straight") {
  const VehicleParams p;
  const double d = 12.0;
  const VehicleState opp = on_line(300.0, 0.0, 40.0);
  const VehicleState ego = on_line(270.0, 0.0, 45.0);
  const OvertakeGuides g = overtake_guides(ego, opp, track(), p, d);
  CHECK(distance(g.g1, opp.position()) == doctest::Approx(d));
  const Projection p1 = track().raceline.project(g.g1);
  CHECK(p1.arc_s == doctest::Approx(300.0).epsilon(1e-6));
  CHECK(std::abs(p1.lateral) == doctest::Approx(d));
  CHECK(distance(g.g0, ego.position()) <= 1.0);
  CHECK(track().raceline.project(g.g2).arc_s == doctest::Approx(300.0 + p.wheelbase).epsilon(1e-6));
  CHECK(track().raceline.project(g.g3).distance < 1e-9);
  CHECK(track().contains(g.g1));
  CHECK(track().contains(g.g2));
}

TEST_CASE("opponent hugging the left edge is passed on the right") {
  const VehicleParams p;
  const VehicleState opp = on_line(300.0, 15.0, 40.0);
  const VehicleState ego = on_line(270.0, 0.0, 45.0);
  const OvertakeGuides g = overtake_guides(ego, opp, track(), p, 12.0);
  CHECK_FALSE(g.pass_left);
  CHECK(track().raceline.project(g.g1).lateral == doctest::Approx(3.0).epsilon(1e-6));
  const VehicleState opp_r = on_line(300.0, -15.0, 40.0);
  const OvertakeGuides gr = overtake_guides(ego, opp_r, track(), p, 12.0);
  CHECK(gr.pass_left);
}

TEST_CASE("defense guides") {
  const VehicleParams p;
  const VehicleState opp = on_line(200.0, 0.0, 80.0);
  const VehicleState ego = on_line(230.0, 0.0, 50.0);
  const DefenseGuides d = defense_guides(ego, opp, track(), 0.5, 1.0, p, 0.0);
  CHECK(track().raceline.project(d.i1).arc_s == doctest::Approx(240.0).epsilon(1e-6));
  CHECK(distance(d.superprojection, d.i1) == doctest::Approx(p.car_length));
  CHECK(track().raceline.project(d.i0).distance < 1e-9);
  CHECK(track().raceline.project(d.i2).distance < 1e-9);
  CHECK_THROWS_AS(defense_guides(ego, opp, track(), 0.0, 1.0, p, 0.0), ParameterError);
  CHECK_THROWS_AS(defense_guides(ego, opp, track(), 0.5, 0.0, p, 0.0), ParameterError);
}

TEST_CASE("collinear guides give a straight plan") {
  const VehicleState a = on_line(100.0, 0.0, 40.0), b = on_line(200.0, 0.0, 40.0), c = on_line(300.0, 0.0, 40.0);
  const std::vector<Vec2> guides{a.position(), b.position(), c.position()};
  const std::vector<double> speeds{40.0};
  const PlannerOutput out = plan_trajectory(guides, speeds, 2.0, track());
  for (const Waypoint& w : out.points) {
    CHECK(std::abs(track().raceline.project({w.x, w.y}).lateral) < 1e-6);
    CHECK(w.v == doctest::Approx(40.0));
  }
  for (std::size_t i = 1; i < out.points.size(); ++i)
    CHECK(distance({out.points[i].x, out.points[i].y}, {out.points[i - 1].x, out.points[i - 1].y}) <= 4.0);
}

TEST_CASE("overtake plan reaches the lateral offset and progresses monotonically") {
  const VehicleParams p;
  const double d = 12.0;
  const VehicleState opp = on_line(300.0, 0.0, 40.0);
  const VehicleState ego = on_line(240.0, 0.0, 45.0);
  const OvertakeGuides g = overtake_guides(ego, opp, track(), p, d);
  const std::vector<Vec2> guides{ego.position(), g.g1, g.g2, on_line(360.0, 0.0, 0.0).position()};
  const std::vector<double> speeds{50.0};
  const PlannerOutput out = plan_trajectory(guides, speeds, 1.0, track());
  double max_lat = 0.0, prev_s = -1.0, min_gap = 1e9;
  for (const Waypoint& w : out.points) {
    const Projection pr = track().raceline.project({w.x, w.y});
    max_lat = std::max(max_lat, std::abs(pr.lateral));
    CHECK(pr.arc_s > prev_s);
    prev_s = pr.arc_s;
    CHECK(track().contains({w.x, w.y}));
    if (pr.arc_s >= 300.0 - 1e-6 && pr.arc_s <= 300.0 + p.wheelbase) min_gap = std::min(min_gap, distance({w.x, w.y}, opp.position()));
  }
  CHECK(std::abs(max_lat - d) / d < 0.05);
  CHECK(min_gap >= d - 0.1);
}

TEST_CASE("joints are C2") {
  const VehicleState a = on_line(100.0, 0.0, 0.0), b = on_line(160.0, 8.0, 0.0), c = on_line(220.0, 8.0, 0.0),
                     e = on_line(300.0, 0.0, 0.0);
  const std::vector<Vec2> guides{a.position(), b.position(), c.position(), e.position()};
  const std::vector<double> speeds{45.0, 50.0, 55.0, 50.0};
  const auto segs = fit_guide_segments(guides, speeds, track());
  REQUIRE(segs.size() == 3);
  for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
    const BoundaryState l = eval_quintic(segs[i], segs[i].T);
    const BoundaryState r = eval_quintic(segs[i + 1], 0.0);
    CHECK(distance(l.pos, r.pos) < 1e-6);
    CHECK(distance(l.vel, r.vel) < 1e-6);
    CHECK(distance(l.acc, r.acc) < 1e-6);
  }
}

TEST_CASE("plans that leave the track or double back are rejected") {
  const std::vector<double> speeds{40.0};
  const std::vector<Vec2> outside{on_line(100.0, 0.0, 0).position(), on_line(150.0, 25.0, 0).position(),
                                  on_line(200.0, 0.0, 0).position()};
  CHECK_THROWS_AS(plan_trajectory(outside, speeds, 2.0, track()), InfeasiblePlan);
  const std::vector<Vec2> back{on_line(200.0, 0.0, 0).position(), on_line(150.0, 0.0, 0).position()};
  CHECK_THROWS_AS(plan_trajectory(back, speeds, 2.0, track()), InfeasiblePlan);
  const std::vector<Vec2> one{on_line(200.0, 0.0, 0).position()};
  CHECK_THROWS_AS(plan_trajectory(one, speeds, 2.0, track()), ParameterError);
}

TEST_CASE("overtake submaneuver times") {
  OvertakeGeometry g;
  g.y_gap = 0.0;
  g.L = 5.0;
  g.D_sepF = 5.0;
  g.u_ego = 45.0;
  g.u_opp = 40.0;
  g.u_boost = 0.0;
  CHECK(overtake_times(g).t_A == 0.0);
  CHECK(overtake_times(g).t_B == doctest::Approx(1.0));

  g.y_gap = 3.0;
  g.theta1 = kPi / 6.0;
  const double expected = 3.0 / (5.0 * std::cos(kPi / 6.0));
  CHECK(overtake_times(g).t_A == doctest::Approx(expected).epsilon(1e-12));
  CHECK(overtake_times(g).t_A == doctest::Approx(0.6928).epsilon(1e-4));

  // Doubling the closing speed halves every phase.
  g.D_sepF = 12.0;
  g.theta2 = 0.3;
  const OvertakeTimes slow = overtake_times(g);
  g.u_ego = 50.0;
  const OvertakeTimes fast = overtake_times(g);
  CHECK(fast.t_A == doctest::Approx(slow.t_A / 2.0).epsilon(1e-14));
  CHECK(fast.t_B == doctest::Approx(slow.t_B / 2.0).epsilon(1e-14));
  CHECK(fast.t_C == doctest::Approx(slow.t_C / 2.0).epsilon(1e-14));

  g.u_ego = 40.0;
  CHECK_THROWS_AS(overtake_times(g), InfeasiblePlan);
}

TEST_CASE("overtake feasibility against the budget") {
  CHECK(feasible_overtake(5.0, 20.0, 6.0));
  CHECK_FALSE(feasible_overtake(1.0, 5.9, 6.0));
  CHECK_FALSE(feasible_overtake(25.0, 20.0, 6.0));
}
