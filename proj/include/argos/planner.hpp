#pragma once

#include <span>
#include <vector>

#include "argos/quintic.hpp"
#include "argos/track.hpp"
#include "argos/vehicle.hpp"

namespace argos {

/// Envelope for an overtake: leave the raceline, pass abeam the opponent on
/// its roomier side, and rejoin the raceline ahead of it.
struct OvertakeGuides {
  Vec2 g0, g1, g2, g3;
  bool pass_left{false};
};

/// Interception envelope for a position defense. `superprojection` is the
/// pose the defender wants to occupy before the attacker reaches it.
struct DefenseGuides {
  Vec2 i0, i1, i2;
  Vec2 superprojection;
};

struct OvertakeGeometry {
  double y_gap{};     // lateral gap to clear
  double theta1{};    // diverge angle
  double theta2{};    // merge angle
  double L{};         // opponent car length
  double D_sepF{};    // front separation at merge
  double u_ego{};
  double u_opp{};
  double u_boost{};
  double boost_fraction{1.0};
};

struct OvertakeTimes {
  double t_A{}, t_B{}, t_C{};
  double total() const { return t_A + t_B + t_C; }
};

enum class PlanSource { overtake, defense, merge };

struct PlannerOutput {
  std::vector<Waypoint> points;
  PlanSource source{PlanSource::overtake};
};

/// Default h(.) offset: keeps at least trig8 of lateral separation.
double default_lateral_offset(const Track& track, double trig8);

/// The boundary farther from `p` (j applied to the closest points of B_L, B_R).
const Polyline& roomier_boundary(const Track& track, Vec2 p, bool* is_left = nullptr);

OvertakeGuides overtake_guides(const VehicleState& ego, const VehicleState& opp, const Track& track,
                               const VehicleParams& params, double offset);

DefenseGuides defense_guides(const VehicleState& ego, const VehicleState& opp, const Track& track,
                             double T_p, double k_mult, const VehicleParams& params, double offset);

/// One quintic per pair of consecutive guides; knots share position,
/// raceline-tangent velocity and zero acceleration.
std::vector<QuinticSegment> fit_guide_segments(std::span<const Vec2> guides, std::span<const double> speeds,
                                               const Track& track);

/// Piecewise quintic through the guides, C2 at the joints, sampled every
/// `sample_step` meters. `speeds` holds one speed per guide (or a single
/// constant). Throws InfeasiblePlan when a sample leaves the track or the
/// guides double back along the raceline.
PlannerOutput plan_trajectory(std::span<const Vec2> guides, std::span<const double> speeds,
                              double sample_step, const Track& track,
                              PlanSource source = PlanSource::overtake);

OvertakeTimes overtake_times(const OvertakeGeometry& geom);

bool feasible_overtake(double total_time, double ip4, double trig6);

}  // namespace argos
