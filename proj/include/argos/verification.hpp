#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "argos/automata.hpp"

namespace argos {

struct TraceEvent {
  double t{};
  int car{};
  FscTag fsc{FscTag::invalid};
};

enum class ManeuverKind { overtake, defense };
enum class Outcome { success, failed, dnf, counterexample };
enum class Pattern { e0, e1, e2, e3, counterexample };

std::string_view to_string(ManeuverKind k);
std::string_view to_string(Outcome o);
std::string_view to_string(Pattern p);

struct ManeuverTrace {
  ManeuverKind kind{ManeuverKind::overtake};
  std::vector<FscTag> sequence;  // consecutive duplicates removed
  Outcome outcome{Outcome::dnf};
  double t_start{};
  double t_end{};
  // First entry into and last exit from the maneuver states; equal to
  // t_start when the maneuver was never reached.
  double t_maneuver_start{};
  double t_maneuver_end{};

  bool reached_maneuver() const;
};

struct CounterSet {
  int N_ot1{0}, N_ot2{0}, N_ot3{0}, N_ot45{0}, N_ot_dnf{0};
  int N_df1{0}, N_df2{0}, N_df3{0}, N_df45{0}, N_df_dnf{0};

  bool conserved() const {
    return N_ot2 == N_ot3 + N_ot45 + N_ot_dnf && N_df2 == N_df3 + N_df45 + N_df_dnf;
  }
  friend bool operator==(const CounterSet&, const CounterSet&) = default;
};

/// Index of the first event whose tag is not a valid combination.
std::optional<std::size_t> validate_fsc_stream(std::span<const TraceEvent> events);

/// Splits one car's stream into maneuver traces. A completed excursion from
/// fsc10 becomes a trace only if it reached a maneuver state; an excursion
/// cut short by fsc00 or the end of the stream is a dnf trace.
std::vector<ManeuverTrace> segment_maneuvers(std::span<const TraceEvent> events);

/// Matches a completed trace against e0..e3. Throws ParameterError for dnf.
Pattern classify(const ManeuverTrace& trace);

CounterSet tally(std::span<const ManeuverTrace> traces, int overtake_opportunities, int defense_opportunities);

/// Own traces that overlap in time with an opponent trace of the opposite
/// kind that reached its maneuver state.
std::vector<ManeuverTrace> engaged_traces(std::span<const ManeuverTrace> own,
                                          std::span<const ManeuverTrace> opponent);

/// Drops defense traces whose maneuver interval contains a forced event:
/// those fell back because of a rule, not because they were passed.
std::vector<ManeuverTrace> unforced_traces(std::span<const ManeuverTrace> traces, std::span<const double> forced);

/// Each side's successes equal the other side's failed defenses.
bool cross_check(const CounterSet& a, const CounterSet& b);

struct Verdict {
  bool fsc_valid{true};
  std::optional<TraceEvent> first_invalid;
  bool sequences_ok{true};
  std::vector<ManeuverTrace> counterexamples;
  bool conservation_ok{true};
  bool cross_check_ok{true};
  bool cross_check_applied{false};

  bool pass() const { return fsc_valid && sequences_ok && conservation_ok && cross_check_ok; }
};

struct SessionStreams {
  std::vector<TraceEvent> events[2];
  int overtake_opportunities[2]{0, 0};
  int defense_opportunities[2]{0, 0};
  bool full_framework[2]{true, true};  // false for a mule
  std::vector<double> forced[2];       // times of R2/R5 breaches that force a maneuver to end
};

struct SessionResult {
  Verdict verdict;
  CounterSet counters[2];
  CounterSet engaged[2];
  std::vector<ManeuverTrace> traces[2];
};

SessionResult verify_session(const SessionStreams& streams);

}  // namespace argos
