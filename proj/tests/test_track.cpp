#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "argos/track.hpp"

using namespace argos;

namespace {

constexpr double kPi = std::numbers::pi;

TrackConfig narrow_config() {
  TrackConfig c;
  c.straight_length = 600.0;
  c.turn_radius = 200.0;
  c.track_width = 15.0;
  c.waypoint_spacing = 1.0;
  return c;
}

// Nearest point found by sampling every segment at 1 cm.
double sampled_distance(const Polyline& line, Vec2 q) {
  double best = 1e300;
  const auto& pts = line.points();
  for (std::size_t i = 0; i < line.segment_count(); ++i) {
    const Vec2 a = pts[i];
    const Vec2 b = pts[(i + 1) % pts.size()];
    const int n = std::max(1, static_cast<int>(std::ceil(distance(a, b) / 0.01)));
    for (int k = 0; k <= n; ++k) best = std::min(best, distance(q, a + (static_cast<double>(k) / n) * (b - a)));
  }
  return best;
}

}  // namespace

TEST_CASE("oval perimeter matches the stadium formula") {
  const Track t = build_oval_track(narrow_config());
  const double analytic = 2.0 * 600.0 + 2.0 * kPi * 200.0;
  CHECK(std::abs(t.raceline.total_length() - analytic) / analytic < 0.005);
}

TEST_CASE("bad geometry is rejected") {
  TrackConfig c = narrow_config();
  c.straight_length = 0.0;
  CHECK_THROWS_AS(build_oval_track(c), ConfigError);
  c = narrow_config();
  c.turn_radius = -5.0;
  CHECK_THROWS_AS(build_oval_track(c), ConfigError);
  c = narrow_config();
  c.waypoint_spacing = 0.0;
  CHECK_THROWS_AS(build_oval_track(c), ConfigError);
}

TEST_CASE("waypoint spacing stays within ten percent") {
  const Track t = build_oval_track(narrow_config());
  const auto& cum = t.raceline.cum_s();
  REQUIRE(cum.front() == 0.0);
  for (std::size_t i = 1; i < cum.size(); ++i) {
    const double ds = cum[i] - cum[i - 1];
    CHECK(ds >= 0.9);
    CHECK(ds <= 1.1);
  }
  // Closing segment back to waypoint 0.
  const double closing = t.raceline.total_length() - cum.back();
  CHECK(closing >= 0.9);
  CHECK(closing <= 1.1);
}

TEST_CASE("raceline points project onto themselves") {
  const Track t = build_oval_track(narrow_config());
  const auto& wps = t.raceline.waypoints();
  for (std::size_t i = 0; i < wps.size(); i += 37) {
    const Projection p = closest_on(t.raceline.path(), {wps[i].x, wps[i].y});
    CHECK(p.distance < 1e-9);
    CHECK(p.point.x == doctest::Approx(wps[i].x));
  }
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> s(0.0, t.raceline.total_length());
  for (int k = 0; k < 200; ++k) {
    const Vec2 on = t.raceline.pose_at(s(rng)).first;
    CHECK(t.raceline.project(on).distance < 1e-9);
  }
}

TEST_CASE("projection on a straight is the perpendicular foot") {
  const Track t = build_oval_track(narrow_config());
  const auto [mid, heading] = t.raceline.pose_at(300.0);
  const Vec2 q = project_along(mid, heading + kPi / 2.0, 4.0);
  const Projection p = t.raceline.project(q);
  CHECK(p.arc_s == doctest::Approx(300.0).epsilon(1e-9));
  CHECK(p.distance == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(p.lateral == doctest::Approx(4.0).epsilon(1e-9));
}

TEST_CASE("grid projection agrees with 1 cm sampling") {
  TrackConfig c = narrow_config();
  c.waypoint_spacing = 5.0;  // keeps the sampling oracle cheap
  const Track t = build_oval_track(c);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> s(0.0, t.raceline.total_length());
  std::uniform_real_distribution<double> lat(-30.0, 30.0);
  for (int k = 0; k < 40; ++k) {
    const auto [p, h] = t.raceline.pose_at(s(rng));
    const Vec2 q = project_along(p, h + kPi / 2.0, lat(rng));
    CHECK(std::abs(t.raceline.project(q).distance - sampled_distance(t.raceline.path(), q)) < 0.02);
  }
}

TEST_CASE("grid projection matches the full scan everywhere") {
  const Track t = build_oval_track(narrow_config());
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> x(-500.0, 1100.0), y(-400.0, 800.0);
  for (int k = 0; k < 2000; ++k) {
    const Vec2 q{x(rng), y(rng)};
    const Projection fast = t.raceline.project(q);
    const Projection slow = closest_on(t.raceline.path(), q);
    CHECK(fast.distance == doctest::Approx(slow.distance).epsilon(1e-12));
    CHECK(fast.arc_s == slow.arc_s);
  }
}

TEST_CASE("equidistant query takes the lower arc length") {
  // Two parallel open segments, query midway between them.
  const Polyline line({{0.0, 0.0}, {10.0, 0.0}, {10.0, 2.0}, {0.0, 2.0}}, false);
  const Projection p = line.project({5.0, 1.0});
  CHECK(p.distance == doctest::Approx(1.0));
  CHECK(p.arc_s == doctest::Approx(5.0));
  CHECK(closest_on(line, {5.0, 1.0}).arc_s == doctest::Approx(5.0));
}

TEST_CASE("offset_toward") {
  const Vec2 p{3.0, -2.0};
  CHECK(offset_toward(p, {8.0, 8.0}, 0.0) == p);
  const Vec2 r = offset_toward({0.0, 0.0}, {10.0, 0.0}, 3.0);
  CHECK(r.x == doctest::Approx(3.0));
  CHECK(r.y == doctest::Approx(0.0));
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-100.0, 100.0), d(0.0, 50.0);
  for (int k = 0; k < 500; ++k) {
    const Vec2 from{u(rng), u(rng)}, to{u(rng), u(rng)};
    const double dd = d(rng);
    CHECK(std::abs(distance(offset_toward(from, to, dd), from) - dd) < 1e-9);
  }
}

TEST_CASE("farther_of") {
  CHECK(farther_of({0, 0}, {1, 0}, {5, 0}) == Vec2{5, 0});
  CHECK(farther_of({0, 0}, {5, 0}, {1, 0}) == Vec2{5, 0});
  CHECK(farther_of({0, 0}, {3, 0}, {0, 3}) == Vec2{0, 3});
}

TEST_CASE("project_along") {
  const Vec2 a = project_along({0, 0}, 0.0, 5.0);
  CHECK(a.x == doctest::Approx(5.0));
  CHECK(a.y == doctest::Approx(0.0));
  CHECK(project_along({2, 7}, 1.3, 0.0) == Vec2{2, 7});
  const Vec2 b = project_along({1, 1}, kPi / 2.0, 2.0);
  CHECK(b.x == doctest::Approx(1.0));
  CHECK(b.y == doctest::Approx(3.0));
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-100.0, 100.0), th(-kPi, kPi), d(0.0, 50.0);
  for (int k = 0; k < 500; ++k) {
    const Vec2 from{u(rng), u(rng)};
    const double dd = d(rng);
    CHECK(std::abs(distance(project_along(from, th(rng), dd), from) - dd) < 1e-9);
  }
}

TEST_CASE("arc separation") {
  const Track t = build_oval_track(narrow_config());
  const Raceline& rl = t.raceline;
  const Vec2 a = rl.pose_at(200.0).first;
  CHECK(arc_separation(rl, a, a) == 0.0);
  CHECK(std::abs(arc_separation(rl, a, rl.pose_at(230.0).first) - 30.0) <= 1.0);

  const double L = rl.total_length();
  const Vec2 before = rl.pose_at(L - 3.0).first;
  const Vec2 after = rl.pose_at(4.0).first;
  const double sep = arc_separation(rl, before, after);
  CHECK(sep == doctest::Approx(7.0).epsilon(1e-6));

  std::mt19937 rng(9);
  std::uniform_real_distribution<double> s(0.0, L);
  for (int k = 0; k < 200; ++k) {
    const Vec2 e = rl.pose_at(s(rng)).first, o = rl.pose_at(s(rng)).first;
    const double fwd = arc_separation(rl, e, o), back = arc_separation(rl, o, e);
    if (std::abs(std::abs(fwd) - L / 2.0) < 1.0) continue;  // the half-length seam flips sign
    CHECK(std::abs(fwd + back) <= 1.0);
  }
}

TEST_CASE("passing zones cover the straights with half-open ends") {
  const TrackConfig c = narrow_config();
  const Track t = build_oval_track(c);
  REQUIRE(t.zones.size() == 2);
  const PassingZone z = t.zones[0];
  CHECK(in_passing_zone(t.zones, z.s_start));
  CHECK_FALSE(in_passing_zone(t.zones, z.s_end));
  CHECK_FALSE(in_passing_zone(t.zones, c.straight_length + kPi * c.turn_radius / 2.0));
  double covered = 0.0;
  for (const PassingZone& pz : t.zones) {
    CHECK(pz.s_start >= 0.0);
    CHECK(pz.s_start < pz.s_end);
    CHECK(pz.s_end <= t.raceline.total_length());
    covered += pz.s_end - pz.s_start;
  }
  CHECK(std::abs(covered - 2.0 * c.straight_length) <= 2.0 * c.waypoint_spacing);
}

TEST_CASE("bounds enclose the raceline and never cross") {
  const Track t = build_oval_track(narrow_config());
  const auto& wps = t.raceline.waypoints();
  for (std::size_t i = 0; i < wps.size(); i += 11) CHECK(t.contains({wps[i].x, wps[i].y}, 5.0));
  const auto& left = t.bounds.left.points();
  for (std::size_t i = 0; i < left.size(); i += 13)
    CHECK(t.bounds.right.project(left[i]).distance == doctest::Approx(15.0).epsilon(1e-3));
}

TEST_CASE("raceline csv export") {
  const Track t = build_oval_track(narrow_config());
  const std::string csv = raceline_csv(t.raceline);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "s,x,y,v");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == t.raceline.waypoints().size());
}
