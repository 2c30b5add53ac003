#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "argos/config.hpp"
#include "argos/race_control.hpp"
#include "argos/verification.hpp"

namespace argos {

struct RunOptions {
  std::string out_dir;       // empty: keep artifacts in memory only
  bool keep_odometry{true};
};

struct CarSummary {
  Policy policy{Policy::argos};
  int laps{0};
  std::vector<double> lap_times;
  double boost_used{0.0};    // s of reservoir drained
  int boost_denials{0};      // ticks a boost request was refused outside a zone
  int boost_off_zone{0};     // ticks the reservoir drained outside a zone
  double min_budget{0.0};
  int forced_events{0};      // onsets of R2/R5 forced abandons or fallbacks
  int forced_events_legal{0};
  double lateral_rms{0.0};   // raceline lateral offset while in Race
};

struct RaceResult {
  std::string event_log;
  std::string odometry_csv;
  std::string summary_json;
  SessionResult session;
  std::vector<Violation> violations;
  std::array<CarSummary, 2> cars{};
  double min_clearance{0.0};
  double sim_time{0.0};
  long long ticks{0};
  long long fsc_ticks_checked{0};  // per-car network ticks whose tag was checked live
  std::string event_log_path, odometry_path, summary_path;
};

/// Runs one head-to-head session. Throws ConfigError for an invalid config
/// and InvariantViolation on an internal breach.
RaceResult run_race(const ScenarioConfig& cfg, const RunOptions& opts = {});

struct VerifyOutput {
  SessionResult result;
  std::string verdict_json;
};

/// Verifies a JSONL event log. Throws LogError when it cannot be parsed.
VerifyOutput verify_log_text(std::string_view text);
VerifyOutput verify_log(const std::string& path);

struct SweepConfig {
  ScenarioConfig base;
  std::string axis;
  std::vector<double> values;
  int seeds_per_value{30};
  std::uint64_t first_seed{1};
  int threads{0};  // 0: hardware concurrency
};

struct SweepPoint {
  double value{};
  double p_overtake{};  // share of seeds where the trailing car completes a pass
  double p_defense{};   // share of seeds where the leading car completes a defense
  int n{};
};

std::vector<SweepPoint> run_sweep(const SweepConfig& sweep);
std::string sweep_csv(const std::vector<SweepPoint>& points);

/// Kendall tau-b rank correlation.
double kendall_tau(const std::vector<double>& x, const std::vector<double>& y);

/// Human-readable report for a run directory. Throws LogError when the
/// directory lacks the run artifacts.
std::string report(const std::string& dir);

}  // namespace argos
