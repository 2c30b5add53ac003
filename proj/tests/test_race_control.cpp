#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "argos/race_control.hpp"

using namespace argos;

namespace {

const Track& track() {
  static const Track t = build_oval_track(TrackConfig{});
  return t;
}

VehicleState on_line(double s, double l, double v) {
  const auto [p, h] = track().raceline.pose_at(s);
  const Vec2 q = project_along(p, h + std::numbers::pi / 2.0, l);
  return {q.x, q.y, h, v};
}

RaceProgress at(int laps, double s) {
  RaceProgress p;
  p.laps = laps;
  p.arc_s = s;
  return p;
}

Transition block_start() { return {Automaton::kaval, "Init", "Block", "ka2"}; }

}  // namespace

TEST_CASE("lap counting on the forward wrap") {
  const double L = 1000.0;
  RaceProgress p = at(0, 990.0);
  CHECK(p.advance(5.0, L));
  CHECK(p.laps == 1);
  CHECK(p.cumulative_distance == doctest::Approx(15.0));
  CHECK_FALSE(p.advance(20.0, L));
  CHECK(p.laps == 1);
  // Backing over the line undoes the lap.
  CHECK_FALSE(p.advance(995.0, L));
  CHECK(p.laps == 0);
  CHECK(p.cumulative_distance == doctest::Approx(30.0));
}

TEST_CASE("flags follow the passing zones and the finish") {
  const auto& zones = track().zones;
  const double in_zone = zones[0].s_start + 10.0;
  const double out_zone = zones[0].s_end + 10.0;
  auto f = update_flag({at(0, in_zone), at(0, out_zone)}, zones, 5);
  CHECK(f[0].color == FlagColor::blue);
  CHECK(f[1].color == FlagColor::green);
  f = update_flag({at(5, in_zone), at(4, out_zone)}, zones, 5);
  CHECK(f[0].color == FlagColor::black);
  CHECK(f[1].color == FlagColor::black);
  CHECK(update_flag({at(0, 0.0), at(0, 0.0)}, zones, 5, 30.0)[1].velocity_limit == 30.0);
}

TEST_CASE("leader by laps then station, ties keep the previous leader") {
  CHECK(leader_flag({at(2, 10.0), at(1, 900.0)}, 1) == 0);
  CHECK(leader_flag({at(1, 10.0), at(1, 900.0)}, 0) == 1);
  CHECK(leader_flag({at(1, 50.0), at(1, 50.0)}, 0) == 0);
  CHECK(leader_flag({at(1, 50.0), at(1, 50.0)}, 1) == 1);
}

TEST_CASE("footprint clearance") {
  const VehicleParams p;
  // Side by side, centres 5 m apart laterally.
  CHECK(footprint_clearance({0, 0, 0, 0}, {0, 5, 0, 0}, p, p) == doctest::Approx(5.0 - p.car_width));
  // Nose to tail.
  CHECK(footprint_clearance({0, 0, 0, 0}, {10, 0, 0, 0}, p, p) == doctest::Approx(10.0 - p.car_length));
  CHECK(footprint_clearance({0, 0, 0, 0}, {1, 0.5, 0.3, 0}, p, p) == 0.0);
  // Symmetric and never above the centre distance.
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-20.0, 20.0), th(-3.1, 3.1);
  for (int k = 0; k < 500; ++k) {
    const VehicleState a{u(rng), u(rng), th(rng), 0}, b{u(rng), u(rng), th(rng), 0};
    const double c = footprint_clearance(a, b, p, p);
    CHECK(c == doctest::Approx(footprint_clearance(b, a, p, p)));
    CHECK(c <= distance(a.position(), b.position()) + 1e-12);
    CHECK(c >= 0.0);
  }
}

TEST_CASE("estimator flags an offset, closing car behind as attempting") {
  OpponentEstimator est;
  OhvWord w;
  for (int k = 0; k <= 10; ++k) {
    const double t = 0.1 * k;
    w = est.update(t, on_line(300.0 + 40.0 * t, 0.0, 40.0), on_line(270.0 + 46.0 * t, 3.0, 46.0),
                   track().raceline, 150.0);
  }
  CHECK(w.value == OhvWord::kAttempting);

  // Converging back to the raceline while behind reads as an abandon.
  for (int k = 11; k <= 16; ++k) {
    const double t = 0.1 * k;
    w = est.update(t, on_line(300.0 + 40.0 * t, 0.0, 40.0), on_line(270.0 + 40.0 * t, 0.5, 40.0),
                   track().raceline, 150.0);
  }
  CHECK(w.value == OhvWord::kAbandoned);
}

TEST_CASE("estimator flags a leading car on the ego's side as blocking, then fallback") {
  OpponentEstimator est;
  OhvWord w;
  for (int k = 0; k <= 10; ++k) {
    const double t = 0.1 * k;
    w = est.update(t, on_line(270.0 + 45.0 * t, 4.0, 45.0), on_line(300.0 + 40.0 * t, 3.0, 40.0),
                   track().raceline, 100.0);
  }
  CHECK(w.value == OhvWord::kBlocking);
  for (int k = 11; k <= 14; ++k) {
    const double t = 0.1 * k;
    w = est.update(t, on_line(270.0 + 45.0 * t, 4.0, 45.0), on_line(300.0 + 40.0 * t, 0.0, 40.0),
                   track().raceline, 100.0);
  }
  CHECK(w.value == OhvWord::kFallback);
}

TEST_CASE("estimator is silent outside the observation radius and on a steady follow") {
  OpponentEstimator est;
  for (int k = 0; k <= 10; ++k) {
    const double t = 0.1 * k;
    CHECK(est.update(t, on_line(300.0, 0.0, 40.0), on_line(100.0, 3.0, 46.0), track().raceline, 150.0).value ==
          0u);
  }
  for (int k = 0; k <= 20; ++k) {
    const double t = 0.1 * k;
    CHECK(est.update(t, on_line(300.0 + 40.0 * t, 0.0, 40.0), on_line(270.0 + 40.0 * t, 0.0, 40.0),
                     track().raceline, 150.0)
              .value == 0u);
  }
}

TEST_CASE("R2: blocks beyond the limit force a fallback until the episode ends") {
  RuleMonitor mon(RuleBook{});
  AutomatonStates defend;
  defend.argos = ArgosState::defend;
  defend.kaval = KavalState::block;
  std::vector<Violation> v;
  const Transition b[] = {block_start()};
  CHECK_FALSE(mon.observe(0.0, 1, defend, b, 1.0, true, v).forced_fallback);
  CHECK_FALSE(mon.observe(1.0, 1, defend, b, 1.0, true, v).forced_fallback);
  CHECK(mon.block_attempts(1) == 2);
  CHECK(v.empty());
  CHECK(mon.observe(2.0, 1, defend, b, 1.0, true, v).forced_fallback);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == Rule::R2);
  CHECK(v[0].car == 1);
  // Disengaging clears the count.
  mon.observe(3.0, 1, AutomatonStates{}, {}, 1.0, false, v);
  CHECK(mon.block_attempts(1) == 0);
  CHECK(mon.block_attempts(0) == 0);
}

TEST_CASE("R5: fatigue distance forces the maneuver to end") {
  RuleBook book;
  RuleMonitor mon(book);
  AutomatonStates att;
  att.argos = ArgosState::overtake;
  att.autopass = AutoPassState::pass;
  std::vector<Violation> v;
  double d = 0.0;
  ForcedEvents ev;
  while (d <= book.fatigue_distance_attacker + 50.0) {
    ev = mon.observe(d, 0, att, {}, 10.0, true, v);
    d += 10.0;
  }
  CHECK(ev.forced_abandon);
  CHECK_FALSE(ev.forced_fallback);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == Rule::R5);
  CHECK(v[0].measurement > book.fatigue_distance_attacker);
  // Leaving the maneuver resets the ledger.
  CHECK_FALSE(mon.observe(d, 0, AutomatonStates{}, {}, 10.0, true, v).forced_abandon);
  CHECK_FALSE(mon.observe(d, 0, att, {}, 10.0, true, v).forced_abandon);
}

TEST_CASE("R3: breaches are charged to the trailing car once per onset") {
  RuleMonitor mon(RuleBook{});
  const VehicleParams p;
  std::vector<Violation> v;
  const std::array<VehicleParams, 2> ps{p, p};
  CHECK(mon.check_clearance(0.0, {VehicleState{0, 0, 0, 0}, VehicleState{20, 0, 0, 0}}, ps, 1, v) ==
        doctest::Approx(20.0 - p.car_length));
  CHECK(v.empty());
  mon.check_clearance(0.1, {VehicleState{0, 0, 0, 0}, VehicleState{10, 0, 0, 0}}, ps, 1, v);
  mon.check_clearance(0.2, {VehicleState{0, 0, 0, 0}, VehicleState{9, 0, 0, 0}}, ps, 1, v);
  REQUIRE(v.size() == 1);
  CHECK(v[0].rule == Rule::R3);
  CHECK(v[0].car == 0);
  mon.check_clearance(0.3, {VehicleState{0, 0, 0, 0}, VehicleState{30, 0, 0, 0}}, ps, 1, v);
  mon.check_clearance(0.4, {VehicleState{0, 0, 0, 0}, VehicleState{0, 3, 0, 0}}, ps, 0, v);
  REQUIRE(v.size() == 2);
  CHECK(v[1].car == 1);
}

TEST_CASE("R4 and rulebook validation") {
  CHECK(RuleMonitor::boost_allowed(true));
  CHECK_FALSE(RuleMonitor::boost_allowed(false));
  RuleBook b;
  CHECK_NOTHROW(b.validate());
  b.observation_radius_defender = 200.0;
  CHECK_THROWS_AS(b.validate(), ConfigError);
  b = {};
  b.max_block_attempts = 0;
  CHECK_THROWS_AS(RuleMonitor{b}, ConfigError);
  CHECK(RuleMonitor(RuleBook{}).radius_for(true) == 100.0);
  CHECK(RuleMonitor(RuleBook{}).radius_for(false) == 150.0);
}
