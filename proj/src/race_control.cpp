#include "argos/race_control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace argos {

bool RaceProgress::advance(double new_arc_s, double total_length) {
  const double ds = unwrap_separation(new_arc_s - arc_s, total_length);
  bool lap = false;
  // A forward step that crosses the start line.
  if (ds > 0.0 && new_arc_s < arc_s) {
    ++laps;
    lap = true;
  } else if (ds < 0.0 && new_arc_s > arc_s) {
    --laps;
  }
  arc_s = new_arc_s;
  cumulative_distance += std::max(ds, 0.0);
  return lap;
}

void RuleBook::validate() const {
  if (!(observation_radius_attacker > 0.0) || !(observation_radius_defender > 0.0))
    throw ConfigError("observation radii must be positive");
  if (!(observation_radius_attacker > observation_radius_defender))
    throw ConfigError("attacker observation radius must exceed the defender's");
  if (max_block_attempts < 1) throw ConfigError("max_block_attempts must be positive");
  if (!(safety_distance > 0.0)) throw ConfigError("safety_distance must be positive");
  if (!(boost_grant > 0.0)) throw ConfigError("boost_grant must be positive");
  if (!(fatigue_distance_attacker > 0.0) || !(fatigue_distance_defender > 0.0))
    throw ConfigError("fatigue distances must be positive");
}

std::string_view to_string(Rule r) {
  switch (r) {
    case Rule::R1: return "R1";
    case Rule::R2: return "R2";
    case Rule::R3: return "R3";
    case Rule::R4: return "R4";
    case Rule::R5: return "R5";
  }
  return "?";
}

std::array<RaceFlag, 2> update_flag(const std::array<RaceProgress, 2>& progress,
                                    std::span<const PassingZone> zones, int laps_total, double velocity_limit) {
  std::array<RaceFlag, 2> flags{};
  const bool finished = progress[0].laps >= laps_total || progress[1].laps >= laps_total;
  for (int i = 0; i < 2; ++i) {
    flags[i].velocity_limit = velocity_limit;
    if (finished) flags[i].color = FlagColor::black;
    else flags[i].color = in_passing_zone(zones, progress[i].arc_s) ? FlagColor::blue : FlagColor::green;
  }
  return flags;
}

int leader_flag(const std::array<RaceProgress, 2>& progress, int previous) {
  const auto& a = progress[0];
  const auto& b = progress[1];
  if (a.laps != b.laps) return a.laps > b.laps ? 0 : 1;
  if (a.arc_s != b.arc_s) return a.arc_s > b.arc_s ? 0 : 1;
  return previous;
}

namespace {

std::array<Vec2, 4> corners(const VehicleState& s, const VehicleParams& p) {
  const Vec2 c = s.position();
  const Vec2 f{std::cos(s.phi), std::sin(s.phi)};
  const Vec2 l{-f.y, f.x};
  const double hl = p.car_length / 2.0;
  const double hw = p.car_width / 2.0;
  return {c + f * hl + l * hw, c - f * hl + l * hw, c - f * hl - l * hw, c + f * hl - l * hw};
}

bool separated_on_axis(const std::array<Vec2, 4>& a, const std::array<Vec2, 4>& b, Vec2 axis) {
  double amin = std::numeric_limits<double>::infinity(), amax = -amin;
  double bmin = amin, bmax = -amin;
  for (const Vec2& p : a) {
    amin = std::min(amin, dot(p, axis));
    amax = std::max(amax, dot(p, axis));
  }
  for (const Vec2& p : b) {
    bmin = std::min(bmin, dot(p, axis));
    bmax = std::max(bmax, dot(p, axis));
  }
  return amax < bmin || bmax < amin;
}

double point_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double t = std::clamp(dot(p - a, ab) / dot(ab, ab), 0.0, 1.0);
  return distance(p, a + ab * t);
}

}  // namespace

double footprint_clearance(const VehicleState& a, const VehicleState& b, const VehicleParams& pa,
                           const VehicleParams& pb) {
  const auto ca = corners(a, pa);
  const auto cb = corners(b, pb);
  const Vec2 axes[] = {ca[0] - ca[1], ca[1] - ca[2], cb[0] - cb[1], cb[1] - cb[2]};
  bool separated = false;
  for (const Vec2& ax : axes) separated = separated || separated_on_axis(ca, cb, ax);
  if (!separated) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      best = std::min(best, point_segment(ca[i], cb[j], cb[(j + 1) % 4]));
      best = std::min(best, point_segment(cb[i], ca[j], ca[(j + 1) % 4]));
    }
  }
  return best;
}

void OpponentEstimator::reset() {
  history_.clear();
  attempting_ = blocking_ = false;
  abandoned_until_ = fallback_until_ = -1.0;
}

OhvWord OpponentEstimator::update(double t, const VehicleState& ego, const VehicleState& opp,
                                  const Raceline& raceline, double radius) {
  if (distance(ego.position(), opp.position()) > radius) {
    reset();
    return {};
  }
  const Projection pe = raceline.project(ego.position());
  const Projection po = raceline.project(opp.position());
  const double sep = unwrap_separation(po.arc_s - pe.arc_s, raceline.total_length());
  history_.push_back({t, sep, po.lateral, pe.lateral, opp.v});
  while (history_.size() > 2 && t - history_[1].t >= cfg_.window) history_.pop_front();
  if (history_.size() < 2) return {};

  const Sample& old = history_.front();
  const Sample& now = history_.back();
  const double span = now.t - old.t;
  if (!(span > 0.0)) return {};
  const double closing = (std::abs(old.sep) - std::abs(now.sep)) / span;
  const double converge = (std::abs(old.opp_lat) - std::abs(now.opp_lat)) / span;
  const double gap_shrink = (std::abs(old.opp_lat - old.ego_lat) - std::abs(now.opp_lat - now.ego_lat)) / span;
  const double decel = -(now.opp_v - old.opp_v) / span;
  const bool behind = now.sep < 0.0;
  const bool leads = now.sep > 0.0;
  const bool offset = std::abs(now.opp_lat) > cfg_.offset_threshold;

  if (attempting_) {
    if (behind && (!offset || converge > cfg_.closing_threshold || closing < -cfg_.closing_threshold)) {
      attempting_ = false;
      abandoned_until_ = t + cfg_.window;
    } else if (!offset) {
      attempting_ = false;  // completed the pass and rejoined the raceline
    }
  } else if (behind && offset && closing > cfg_.closing_threshold) {
    attempting_ = true;
    abandoned_until_ = -1.0;
  }

  if (blocking_) {
    if (!leads || !offset || converge > cfg_.closing_threshold || decel > cfg_.decel_threshold) {
      blocking_ = false;
      fallback_until_ = t + cfg_.window;
    }
  } else if (leads && offset) {
    const bool same_side = std::abs(now.ego_lat) > cfg_.offset_threshold && now.opp_lat * now.ego_lat > 0.0;
    if (same_side || gap_shrink > cfg_.closing_threshold) {
      blocking_ = true;
      fallback_until_ = -1.0;
    }
  }

  if (t < fallback_until_) return {OhvWord::kFallback};
  if (t < abandoned_until_) return {OhvWord::kAbandoned};
  if (attempting_) return {OhvWord::kAttempting};
  if (blocking_) return {OhvWord::kBlocking};
  return {};
}

ForcedEvents RuleMonitor::observe(double t, int car, const AutomatonStates& states,
                                  std::span<const Transition> transitions, double distance_step, bool engaged,
                                  std::vector<Violation>& out) {
  CarLedger& c = cars_.at(static_cast<std::size_t>(car));
  if (!engaged) c.block_attempts = 0;

  for (const Transition& tr : transitions) {
    if (tr.automaton == Automaton::kaval && tr.guard == "ka2") {
      ++c.block_attempts;
      if (c.block_attempts > book_.max_block_attempts) {
        c.block_limit_latched = true;
        out.push_back({t, car, Rule::R2, static_cast<double>(c.block_attempts), "block attempts exceed limit"});
      }
    }
  }

  const bool maneuver = states.argos == ArgosState::overtake || states.argos == ArgosState::defend;
  if (maneuver && !c.in_maneuver) c.maneuver_distance = 0.0;
  if (!maneuver) {
    c.fatigue_latched = false;
    c.block_limit_latched = false;
  }
  c.in_maneuver = maneuver;

  ForcedEvents ev;
  if (maneuver) {
    c.maneuver_distance += distance_step;
    const bool attacking = states.argos == ArgosState::overtake;
    const double limit = attacking ? book_.fatigue_distance_attacker : book_.fatigue_distance_defender;
    if (c.maneuver_distance > limit && !c.fatigue_latched) {
      c.fatigue_latched = true;
      out.push_back({t, car, Rule::R5, c.maneuver_distance, "maneuver fatigue distance exceeded"});
    }
    ev.forced_abandon = attacking && c.fatigue_latched;
    ev.forced_fallback = !attacking && (c.fatigue_latched || c.block_limit_latched);
  }
  return ev;
}

double RuleMonitor::check_clearance(double t, const std::array<VehicleState, 2>& cars,
                                    const std::array<VehicleParams, 2>& params, int leader,
                                    std::vector<Violation>& out) {
  const double clearance = footprint_clearance(cars[0], cars[1], params[0], params[1]);
  const bool breach = clearance < book_.safety_distance;
  if (breach && !r3_active_) out.push_back({t, 1 - leader, Rule::R3, clearance, "footprint clearance below limit"});
  r3_active_ = breach;
  return clearance;
}

}  // namespace argos
