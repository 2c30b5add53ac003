#include "argos/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace argos {

std::string_view to_string(Policy p) { return p == Policy::argos ? "argos" : "mule"; }
std::string_view to_string(Ip5Mode m) { return m == Ip5Mode::literal ? "literal" : "remapped"; }
std::string_view to_string(Ka5Mode m) { return m == Ka5Mode::printed ? "printed" : "reinterpreted"; }

void PlannerConfig::validate() const {
  if (lateral_offset < 0.0) throw ConfigError("planner.lateral_offset must be non-negative");
  if (!(merge_separation > 0.0)) throw ConfigError("planner.merge_separation must be positive");
  if (!(sample_step > 0.0)) throw ConfigError("planner.sample_step must be positive");
  if (!(replan_period > 0.0)) throw ConfigError("planner.replan_period must be positive");
  if (!(defense_horizon > 0.0)) throw ConfigError("planner.defense_horizon must be positive");
  if (!(defense_k > 0.0)) throw ConfigError("planner.defense_k must be positive");
  if (defense_offset < 0.0) throw ConfigError("planner.defense_offset must be non-negative");
  if (!(boost_fraction >= 0.0 && boost_fraction <= 1.0)) throw ConfigError("planner.boost_fraction must be in [0, 1]");
  if (!(follow_gap > 0.0) || !(follow_gain > 0.0)) throw ConfigError("planner follow gap and gain must be positive");
  if (retreat_decrement < 0.0) throw ConfigError("planner.retreat_decrement must be non-negative");
  if (race_boost_reserve < 0.0) throw ConfigError("planner.race_boost_reserve must be non-negative");
  if (retry_holdoff < 0.0) throw ConfigError("planner.retry_holdoff must be non-negative");
}

void ScenarioConfig::validate() const {
  const auto& t = track;
  if (!(t.straight_length > 0.0) || !(t.turn_radius > 0.0) || !(t.track_width > 0.0) ||
      !(t.waypoint_spacing > 0.0) || !(t.straight_speed > 0.0) || !(t.corner_speed > 0.0))
    throw ConfigError("track geometry and speeds must be positive");
  if (laps < 1) throw ConfigError("race.laps must be at least 1");
  if (!(sim_dt > 0.0)) throw ConfigError("race.sim_dt must be positive");
  if (!(initial_gap > 0.0)) throw ConfigError("race.initial_gap must be positive");
  if (gap_jitter < 0.0 || lateral_jitter < 0.0) throw ConfigError("jitter must be non-negative");
  if (initial_gap - gap_jitter <= 0.0) throw ConfigError("race.gap_jitter must be smaller than race.initial_gap");
  if (starting_leader != 0 && starting_leader != 1) throw ConfigError("race.starting_leader must be 0 or 1");
  if (odometry_stride < 1) throw ConfigError("race.odometry_stride must be positive");
  if (!(velocity_limit > 0.0)) throw ConfigError("race.velocity_limit must be positive");
  rules.validate();
  for (const CarConfig& c : cars) {
    c.vehicle.validate();
    c.tracker.validate();
    c.triggers.validate();
    c.planner.validate();
  }
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(std::string_view key, std::string_view v) {
  double out{};
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || p != end) throw ConfigError("bad number for " + std::string(key) + ": " + std::string(v));
  return out;
}

long long to_int(std::string_view key, std::string_view v) {
  long long out{};
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc{} || p != end) throw ConfigError("bad integer for " + std::string(key) + ": " + std::string(v));
  return out;
}

template <std::size_t N>
std::array<double, N> to_vec(std::string_view key, std::string_view v) {
  std::array<double, N> out{};
  std::size_t i = 0;
  while (true) {
    const auto comma = v.find(',');
    if (i >= N) throw ConfigError("too many values for " + std::string(key));
    out[i++] = to_double(key, trim(v.substr(0, comma)));
    if (comma == std::string_view::npos) break;
    v = v.substr(comma + 1);
  }
  if (i != N) throw ConfigError("expected " + std::to_string(N) + " values for " + std::string(key));
  return out;
}

using Setter = std::function<void(ScenarioConfig&, std::string_view, std::string_view)>;
using CarSetter = std::function<void(CarConfig&, std::string_view, std::string_view)>;

#define NUM(field) [](auto& c, std::string_view k, std::string_view v) { c.field = to_double(k, v); }
#define INT(field) \
  [](auto& c, std::string_view k, std::string_view v) { c.field = static_cast<decltype(c.field)>(to_int(k, v)); }

const std::map<std::string, Setter, std::less<>>& scenario_setters() {
  static const std::map<std::string, Setter, std::less<>> m{
      {"track.straight_length", NUM(track.straight_length)},
      {"track.turn_radius", NUM(track.turn_radius)},
      {"track.track_width", NUM(track.track_width)},
      {"track.waypoint_spacing", NUM(track.waypoint_spacing)},
      {"track.straight_speed", NUM(track.straight_speed)},
      {"track.corner_speed", NUM(track.corner_speed)},
      {"track.raceline_offset", NUM(track.raceline_offset)},
      {"track.speed_ramp_accel", NUM(track.speed_ramp_accel)},
      {"race.laps", INT(laps)},
      {"race.sim_dt", NUM(sim_dt)},
      {"race.seed", INT(seed)},
      {"race.initial_gap", NUM(initial_gap)},
      {"race.gap_jitter", NUM(gap_jitter)},
      {"race.lateral_jitter", NUM(lateral_jitter)},
      {"race.start_station", NUM(start_station)},
      {"race.starting_leader", INT(starting_leader)},
      {"race.velocity_limit", NUM(velocity_limit)},
      {"race.odometry_stride", INT(odometry_stride)},
      {"race.ip5_bit_mode",
       [](ScenarioConfig& c, std::string_view k, std::string_view v) {
         if (v == "literal") c.ip5_mode = Ip5Mode::literal;
         else if (v == "remapped") c.ip5_mode = Ip5Mode::remapped;
         else throw ConfigError(std::string(k) + " must be literal or remapped");
       }},
      {"race.ka5_mode",
       [](ScenarioConfig& c, std::string_view k, std::string_view v) {
         if (v == "printed") c.ka5_mode = Ka5Mode::printed;
         else if (v == "reinterpreted") c.ka5_mode = Ka5Mode::reinterpreted;
         else throw ConfigError(std::string(k) + " must be printed or reinterpreted");
       }},
      {"rules.observation_radius_attacker", NUM(rules.observation_radius_attacker)},
      {"rules.observation_radius_defender", NUM(rules.observation_radius_defender)},
      {"rules.max_block_attempts", INT(rules.max_block_attempts)},
      {"rules.safety_distance", NUM(rules.safety_distance)},
      {"rules.boost_grant", NUM(rules.boost_grant)},
      {"rules.fatigue_distance_attacker", NUM(rules.fatigue_distance_attacker)},
      {"rules.fatigue_distance_defender", NUM(rules.fatigue_distance_defender)},
      {"estimator.offset_threshold", NUM(estimator.offset_threshold)},
      {"estimator.closing_threshold", NUM(estimator.closing_threshold)},
      {"estimator.window", NUM(estimator.window)},
      {"estimator.decel_threshold", NUM(estimator.decel_threshold)},
  };
  return m;
}

const std::map<std::string, CarSetter, std::less<>>& car_setters() {
  static const std::map<std::string, CarSetter, std::less<>> m{
      {"policy",
       [](CarConfig& c, std::string_view k, std::string_view v) {
         if (v == "argos") c.policy = Policy::argos;
         else if (v == "mule") c.policy = Policy::mule;
         else throw ConfigError(std::string(k) + " must be argos or mule");
       }},
      {"vehicle.wheelbase", NUM(vehicle.wheelbase)},
      {"vehicle.car_length", NUM(vehicle.car_length)},
      {"vehicle.car_width", NUM(vehicle.car_width)},
      {"vehicle.a_min", NUM(vehicle.a_min)},
      {"vehicle.a_max", NUM(vehicle.a_max)},
      {"vehicle.delta_min", NUM(vehicle.delta_min)},
      {"vehicle.delta_max", NUM(vehicle.delta_max)},
      {"vehicle.v_max", NUM(vehicle.v_max)},
      {"vehicle.u_boost", NUM(vehicle.u_boost)},
      {"tracker.horizon", INT(tracker.horizon)},
      {"tracker.dt", NUM(tracker.dt)},
      {"tracker.max_iterations", INT(tracker.max_iterations)},
      {"tracker.q", [](CarConfig& c, std::string_view k, std::string_view v) { c.tracker.Q = to_vec<4>(k, v); }},
      {"tracker.q_f", [](CarConfig& c, std::string_view k, std::string_view v) { c.tracker.Q_f = to_vec<4>(k, v); }},
      {"tracker.r", [](CarConfig& c, std::string_view k, std::string_view v) { c.tracker.R = to_vec<2>(k, v); }},
      {"tracker.r_d", [](CarConfig& c, std::string_view k, std::string_view v) { c.tracker.R_d = to_vec<2>(k, v); }},
      {"triggers.trig0", NUM(triggers.trig0)},
      {"triggers.trig1", NUM(triggers.trig1)},
      {"triggers.trig2", NUM(triggers.trig2)},
      {"triggers.trig3", NUM(triggers.trig3)},
      {"triggers.trig4", NUM(triggers.trig4)},
      {"triggers.trig5", NUM(triggers.trig5)},
      {"triggers.trig6", NUM(triggers.trig6)},
      {"triggers.trig7", NUM(triggers.trig7)},
      {"triggers.trig8", NUM(triggers.trig8)},
      {"planner.lateral_offset", NUM(planner.lateral_offset)},
      {"planner.merge_separation", NUM(planner.merge_separation)},
      {"planner.sample_step", NUM(planner.sample_step)},
      {"planner.replan_period", NUM(planner.replan_period)},
      {"planner.defense_horizon", NUM(planner.defense_horizon)},
      {"planner.defense_k", NUM(planner.defense_k)},
      {"planner.defense_offset", NUM(planner.defense_offset)},
      {"planner.boost_fraction", NUM(planner.boost_fraction)},
      {"planner.follow_gap", NUM(planner.follow_gap)},
      {"planner.follow_gain", NUM(planner.follow_gain)},
      {"planner.retreat_decrement", NUM(planner.retreat_decrement)},
      {"planner.race_boost_reserve", NUM(planner.race_boost_reserve)},
      {"planner.retry_holdoff", NUM(planner.retry_holdoff)},
  };
  return m;
}

#undef NUM
#undef INT

}  // namespace

void apply_setting(ScenarioConfig& cfg, std::string_view key, std::string_view value) {
  value = trim(value);
  if (auto it = scenario_setters().find(key); it != scenario_setters().end()) {
    it->second(cfg, key, value);
    return;
  }
  const auto dot = key.find('.');
  if (dot != std::string_view::npos) {
    const std::string_view scope = key.substr(0, dot);
    const std::string_view rest = key.substr(dot + 1);
    if (auto it = car_setters().find(rest); it != car_setters().end()) {
      if (scope == "car") {
        for (CarConfig& c : cfg.cars) it->second(c, key, value);
        return;
      }
      if (scope == "car0" || scope == "car1") {
        it->second(cfg.cars[scope == "car0" ? 0 : 1], key, value);
        return;
      }
    }
  }
  throw ConfigError("unknown config key: " + std::string(key));
}

std::vector<std::string> known_keys() {
  std::vector<std::string> out;
  for (const auto& [k, _] : scenario_setters()) out.push_back(k);
  for (const auto& [k, _] : car_setters()) out.push_back("car." + k);
  return out;
}

ScenarioConfig parse_config(std::string_view text) {
  struct Entry {
    std::string key, value;
    int line;
  };
  std::vector<Entry> shared, specific;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    Entry e{std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))), line_no};
    (e.key.starts_with("car0.") || e.key.starts_with("car1.") ? specific : shared).push_back(std::move(e));
  }
  ScenarioConfig cfg;
  for (const auto* group : {&shared, &specific}) {
    for (const Entry& e : *group) {
      try {
        apply_setting(cfg, e.key, e.value);
      } catch (const ConfigError& err) {
        throw ConfigError("line " + std::to_string(e.line) + ": " + err.what());
      }
    }
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace argos
