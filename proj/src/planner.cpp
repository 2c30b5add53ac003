#include "argos/planner.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace argos {

double default_lateral_offset(const Track& track, double trig8) {
  return std::max(trig8, 0.6 * track.config.track_width / 2.0);
}

const Polyline& roomier_boundary(const Track& track, Vec2 p, bool* is_left) {
  const Vec2 cl = track.bounds.left.project(p).point;
  const Vec2 cr = track.bounds.right.project(p).point;
  const bool left = farther_of(p, cl, cr) == cl && !(cl == cr);
  if (is_left) *is_left = left;
  return left ? track.bounds.left : track.bounds.right;
}

OvertakeGuides overtake_guides(const VehicleState& ego, const VehicleState& opp, const Track& track,
                               const VehicleParams& params, double offset) {
  const Vec2 r_opp = opp.position();
  OvertakeGuides g;
  const Polyline& side = roomier_boundary(track, r_opp, &g.pass_left);

  g.g0 = track.raceline.project(ego.position()).point;
  g.g1 = offset_toward(r_opp, side.project(r_opp).point, offset);
  const Vec2 ahead = project_along(r_opp, opp.phi, params.wheelbase);
  g.g2 = offset_toward(ahead, side.project(ahead).point, offset);
  g.g3 = track.raceline.project(project_along(r_opp, opp.phi, params.wheelbase + params.car_length)).point;

  if (!track.contains(g.g1) || !track.contains(g.g2)) throw InfeasiblePlan("overtake guide outside track bounds");
  return g;
}

DefenseGuides defense_guides(const VehicleState& ego, const VehicleState& opp, const Track& track,
                             double T_p, double k_mult, const VehicleParams& params, double offset) {
  if (!(T_p > 0.0)) throw ParameterError("defense_guides: projection horizon must be positive");
  if (!(k_mult > 0.0)) throw ParameterError("defense_guides: superprojection multiple must be positive");
  const Vec2 r_opp = opp.position();
  const Polyline& side = roomier_boundary(track, r_opp);
  const double reach = opp.v * T_p;

  DefenseGuides d;
  d.i0 = track.raceline.project(ego.position()).point;
  const Vec2 projected = project_along(r_opp, opp.phi, reach);
  d.i1 = offset == 0.0 ? projected : offset_toward(projected, side.project(projected).point, offset);
  d.superprojection = project_along(d.i1, opp.phi, k_mult * params.car_length);
  d.i2 = track.raceline.project(project_along(r_opp, opp.phi, reach + k_mult * params.car_length)).point;

  if (!track.contains(d.i1)) throw InfeasiblePlan("defense projection outside track bounds");
  return d;
}

std::vector<QuinticSegment> fit_guide_segments(std::span<const Vec2> guides, std::span<const double> speeds,
                                               const Track& track) {
  const std::size_t n = guides.size();
  if (n < 2) throw ParameterError("plan_trajectory: need at least two guide points");
  if (speeds.size() != 1 && speeds.size() != n) throw ParameterError("plan_trajectory: speed plan size mismatch");
  auto speed_of = [&](std::size_t i) { return speeds.size() == 1 ? speeds[0] : speeds[i]; };

  // Knot tangents follow the raceline heading so the lateral profile between
  // knots is monotone; accelerations are zero at every knot (C2 joints).
  const double total = track.raceline.total_length();
  std::vector<BoundaryState> knots(n);
  double s_prev = track.raceline.project(guides[0]).arc_s;
  for (std::size_t i = 0; i < n; ++i) {
    const auto proj = track.raceline.project(guides[i]);
    if (i > 0) {
      const double ds = unwrap_separation(proj.arc_s - s_prev, total);
      if (!(ds > 0.0)) throw InfeasiblePlan("guide points double back along the raceline");
      s_prev = proj.arc_s;
    }
    const double heading = track.raceline.pose_at(proj.arc_s).second;
    const double v = std::max(speed_of(i), 0.1);
    knots[i] = {guides[i], {v * std::cos(heading), v * std::sin(heading)}, {0.0, 0.0}};
  }

  std::vector<QuinticSegment> segs;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double chord = distance(guides[i], guides[i + 1]);
    const double v_mean = std::max(0.5 * (speed_of(i) + speed_of(i + 1)), 0.1);
    segs.push_back(fit_quintic(knots[i], knots[i + 1], std::max(chord / v_mean, 1e-3)));
  }
  return segs;
}

PlannerOutput plan_trajectory(std::span<const Vec2> guides, std::span<const double> speeds,
                              double sample_step, const Track& track, PlanSource source) {
  if (!(sample_step > 0.0)) throw ParameterError("plan_trajectory: sample step must be positive");
  const std::vector<QuinticSegment> segs = fit_guide_segments(guides, speeds, track);
  const std::size_t n = guides.size();
  auto speed_of = [&](std::size_t i) { return speeds.size() == 1 ? speeds[0] : speeds[i]; };

  PlannerOutput out;
  out.source = source;
  out.points.push_back({guides[0].x, guides[0].y, speed_of(0)});
  double travelled = 0.0;
  double next_sample = sample_step;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const QuinticSegment& seg = segs[i];
    const double T = seg.T;
    const double chord = distance(guides[i], guides[i + 1]);
    const int steps = std::max(20, static_cast<int>(std::ceil(8.0 * chord / sample_step)));
    Vec2 prev = guides[i];
    for (int k = 1; k <= steps; ++k) {
      const double t = T * static_cast<double>(k) / steps;
      const Vec2 p = eval_quintic(seg, std::min(t, T)).pos;
      travelled += distance(prev, p);
      prev = p;
      const bool last = (i + 2 == n) && k == steps;
      if (travelled >= next_sample || last) {
        const double frac = t / T;
        const double v = speed_of(i) + frac * (speed_of(i + 1) - speed_of(i));
        if (!track.contains(p)) throw InfeasiblePlan("planned trajectory leaves the track");
        if (last && distance(p, {out.points.back().x, out.points.back().y}) < 1e-9) break;
        out.points.push_back({p.x, p.y, v});
        while (next_sample <= travelled) next_sample += sample_step;
      }
    }
  }
  return out;
}

OvertakeTimes overtake_times(const OvertakeGeometry& g) {
  const double du = g.u_ego - g.u_opp + g.boost_fraction * g.u_boost;
  if (!(du > 0.0)) throw InfeasiblePlan("overtake_times: ego cannot close on the opponent");
  if (g.D_sepF < g.L) throw ParameterError("overtake_times: front separation shorter than car length");
  if (g.y_gap < 0.0 || g.L < 0.0) throw ParameterError("overtake_times: negative geometry");
  constexpr double kHalfPi = std::numbers::pi / 2.0;
  if (!(g.theta1 >= 0.0 && g.theta1 < kHalfPi) || !(g.theta2 >= 0.0 && g.theta2 < kHalfPi))
    throw ParameterError("overtake_times: angles must lie in [0, pi/2)");
  OvertakeTimes t;
  t.t_A = g.y_gap / (du * std::cos(g.theta1));
  t.t_B = g.L / du;
  t.t_C = (g.D_sepF - g.L) / (du * std::cos(g.theta2));
  return t;
}

bool feasible_overtake(double total_time, double ip4, double trig6) {
  return ip4 > trig6 && total_time <= ip4;
}

}  // namespace argos
