#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "argos/automata.hpp"
#include "argos/race_control.hpp"
#include "argos/track.hpp"
#include "argos/tracker.hpp"
#include "argos/vehicle.hpp"

namespace argos {

enum class Policy { argos, mule };

/// Knobs for the maneuver payloads the harness feeds to the automata.
struct PlannerConfig {
  double lateral_offset{0.0};     // m; 0 selects the default from track width and trig8
  double merge_separation{25.0};  // m ahead of the opponent where a pass rejoins the raceline
  double sample_step{2.0};        // m
  double replan_period{0.1};      // s
  double defense_horizon{1.5};    // s, T_p
  double defense_k{1.0};          // superprojection car-length multiple
  double defense_offset{2.0};     // m
  double boost_fraction{1.0};
  double follow_gap{27.5};        // m, Wait and Abandon follow target
  double follow_gain{0.5};        // 1/s
  double retreat_decrement{3.0};  // m/s below the opponent while retreating
  double race_boost_reserve{6.0}; // s kept above trig6 when boosting to close a gap
  double retry_holdoff{3.0};      // s after an abandon before another pass is armed

  void validate() const;
};

struct CarConfig {
  Policy policy{Policy::argos};
  VehicleParams vehicle;
  TrackerConfig tracker;
  TriggerSet triggers;
  PlannerConfig planner;
};

struct ScenarioConfig {
  TrackConfig track;
  int laps{5};
  double sim_dt{0.02};
  std::uint64_t seed{1};
  Ip5Mode ip5_mode{Ip5Mode::remapped};
  Ka5Mode ka5_mode{Ka5Mode::reinterpreted};
  double initial_gap{40.0};     // m of raceline between the cars at the start
  double gap_jitter{0.0};       // m, uniform half-width applied with the seed
  double lateral_jitter{0.0};   // m, uniform half-width on the trailing car
  double start_station{150.0};  // m, raceline station of the leading car
  int starting_leader{0};
  double velocity_limit{1e9};   // flag velocity limit, m/s
  int odometry_stride{5};       // ticks between odometry rows
  RuleBook rules;
  EstimatorConfig estimator;
  std::array<CarConfig, 2> cars{};

  /// Throws ConfigError.
  void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment. `car.` keys apply to
/// both cars and are applied before any `car0.` / `car1.` key.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::string& path);

/// Applies one dotted key. Throws ConfigError on an unknown key or bad value.
void apply_setting(ScenarioConfig& cfg, std::string_view key, std::string_view value);

/// All keys `apply_setting` accepts, with car keys under `car.`.
std::vector<std::string> known_keys();

std::string_view to_string(Policy p);
std::string_view to_string(Ip5Mode m);
std::string_view to_string(Ka5Mode m);

}  // namespace argos
