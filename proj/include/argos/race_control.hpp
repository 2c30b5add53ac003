#pragma once

#include <array>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "argos/automata.hpp"
#include "argos/track.hpp"
#include "argos/vehicle.hpp"

namespace argos {

struct RaceProgress {
  int laps{0};
  double arc_s{0.0};
  double cumulative_distance{0.0};

  /// Advances with a new raceline station; counts a lap on the forward wrap.
  /// Returns true when a lap was completed.
  bool advance(double new_arc_s, double total_length);
};

struct RuleBook {
  double observation_radius_attacker{150.0};  // R1
  double observation_radius_defender{100.0};
  int max_block_attempts{2};                  // R2
  double safety_distance{7.5};                // R3
  double boost_grant{20.0};                   // R4, s per lap
  double fatigue_distance_attacker{1200.0};   // R5
  double fatigue_distance_defender{400.0};

  void validate() const;
};

enum class Rule { R1, R2, R3, R4, R5 };
std::string_view to_string(Rule r);

struct Violation {
  double t{};
  int car{};
  Rule rule{};
  double measurement{};
  std::string detail;
};

/// Blue inside a passing zone, Green elsewhere, Black for both cars once
/// either car has completed `laps_total`.
std::array<RaceFlag, 2> update_flag(const std::array<RaceProgress, 2>& progress,
                                    std::span<const PassingZone> zones, int laps_total, double velocity_limit = 1e9);

/// Index of the leader by (laps, arc_s); an exact tie keeps `previous`.
int leader_flag(const std::array<RaceProgress, 2>& progress, int previous);

/// Axis-separation distance between two oriented rectangular footprints.
double footprint_clearance(const VehicleState& a, const VehicleState& b, const VehicleParams& pa,
                           const VehicleParams& pb);

struct EstimatorConfig {
  double offset_threshold{1.5};   // m, lateral raceline offset
  double closing_threshold{0.5};  // m/s
  double window{1.0};             // s, history and latch length
  double decel_threshold{0.5};    // m/s^2
};

/// Classifies the opponent's intent from its recent motion relative to the
/// ego car. At most one bit is set.
class OpponentEstimator {
 public:
  explicit OpponentEstimator(EstimatorConfig cfg = {}) : cfg_(cfg) {}

  /// `radius` is the ego's R1 observation radius for its current role.
  OhvWord update(double t, const VehicleState& ego, const VehicleState& opp, const Raceline& raceline,
                 double radius);
  void reset();

 private:
  struct Sample {
    double t;
    double sep;      // opponent station minus ego station
    double opp_lat;  // opponent lateral offset from the raceline
    double ego_lat;
    double opp_v;
  };

  EstimatorConfig cfg_;
  std::deque<Sample> history_;
  bool attempting_{false};
  bool blocking_{false};
  double abandoned_until_{-1.0};
  double fallback_until_{-1.0};
};

struct ForcedEvents {
  bool forced_abandon{false};
  bool forced_fallback{false};
};

/// Per-car rule bookkeeping for R2 and R5 plus the R3 clearance check.
class RuleMonitor {
 public:
  explicit RuleMonitor(RuleBook book) : book_(book) { book_.validate(); }

  /// Feed one car's automaton transitions and distance travelled this tick.
  /// Returns the forced events for that car's next tick.
  /// `engaged` is false once the opponent leaves the observation radius,
  /// which closes the block-attempt episode.
  ForcedEvents observe(double t, int car, const AutomatonStates& states, std::span<const Transition> transitions,
                       double distance_step, bool engaged, std::vector<Violation>& out);

  /// R3 between the two cars; charged to the car that is not leading. Logs
  /// the onset of each breach. Returns the clearance.
  double check_clearance(double t, const std::array<VehicleState, 2>& cars,
                         const std::array<VehicleParams, 2>& params, int leader, std::vector<Violation>& out);

  /// R4: boost is only granted inside a passing zone.
  static bool boost_allowed(bool in_zone) { return in_zone; }
  /// The harness's boost gate: a request, inside a zone, with budget left.
  static bool boost_granted(bool requested, bool in_zone, double budget) {
    return requested && boost_allowed(in_zone) && budget > 0.0;
  }

  double radius_for(bool is_leader) const {
    return is_leader ? book_.observation_radius_defender : book_.observation_radius_attacker;
  }
  const RuleBook& book() const { return book_; }

  /// Blocks started in the current engagement episode.
  int block_attempts(int car) const { return cars_.at(static_cast<std::size_t>(car)).block_attempts; }

 private:
  struct CarLedger {
    int block_attempts{0};
    double maneuver_distance{0.0};
    bool in_maneuver{false};
    bool fatigue_latched{false};
    bool block_limit_latched{false};
  };
  RuleBook book_;
  std::array<CarLedger, 2> cars_{};
  bool r3_active_{false};
};

}  // namespace argos
