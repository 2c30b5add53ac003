#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "argos/automata.hpp"
#include "argos/config.hpp"
#include "argos/race_control.hpp"
#include "argos/verification.hpp"

namespace argos {

struct LogError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Append-only JSONL log: one {t, car, kind, payload} object per line.
class EventLogWriter {
 public:
  void session(int laps, std::uint64_t seed, const std::array<Policy, 2>& policies, std::string_view ip5_mode);
  void transition(double t, int car, const Transition& tr, FscTag fsc, bool blue, bool leader);
  void override_change(double t, int car, OhvWord op0, const Payload& trajectory);
  void violation(const Violation& v);
  void lap(double t, int car, int lap, double lap_time, double budget);
  void flag(double t, int car, FlagColor color);

  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

/// Rebuilds the per-car FSC streams and opportunity counts from a log.
/// Throws LogError on malformed input.
SessionStreams parse_event_log(std::string_view text);

}  // namespace argos
