#include "argos/verification.hpp"

#include <algorithm>

#include "argos/geometry.hpp"

namespace argos {

std::string_view to_string(ManeuverKind k) { return k == ManeuverKind::overtake ? "overtake" : "defense"; }

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::success: return "success";
    case Outcome::failed: return "failed";
    case Outcome::dnf: return "dnf";
    case Outcome::counterexample: return "counterexample";
  }
  return "?";
}

std::string_view to_string(Pattern p) {
  switch (p) {
    case Pattern::e0: return "e0";
    case Pattern::e1: return "e1";
    case Pattern::e2: return "e2";
    case Pattern::e3: return "e3";
    case Pattern::counterexample: return "counterexample";
  }
  return "?";
}

namespace {

bool maneuver_tag(FscTag t) {
  return t == FscTag::fsc30 || t == FscTag::fsc31 || t == FscTag::fsc40 || t == FscTag::fsc41;
}

using F = FscTag;
const std::vector<FscTag> kE0{F::fsc10, F::fsc20, F::fsc30, F::fsc20, F::fsc10};
const std::vector<FscTag> kE1{F::fsc10, F::fsc20, F::fsc30, F::fsc31, F::fsc20, F::fsc10};
const std::vector<FscTag> kE2{F::fsc10, F::fsc21, F::fsc40, F::fsc21, F::fsc10};
const std::vector<FscTag> kE3{F::fsc10, F::fsc21, F::fsc40, F::fsc41, F::fsc21, F::fsc10};

Pattern match_pattern(const std::vector<FscTag>& s) {
  if (s == kE0) return Pattern::e0;
  if (s == kE1) return Pattern::e1;
  if (s == kE2) return Pattern::e2;
  if (s == kE3) return Pattern::e3;
  return Pattern::counterexample;
}

}  // namespace

bool ManeuverTrace::reached_maneuver() const { return std::any_of(sequence.begin(), sequence.end(), maneuver_tag); }

std::optional<std::size_t> validate_fsc_stream(std::span<const TraceEvent> events) {
  for (std::size_t i = 0; i < events.size(); ++i)
    if (events[i].fsc == FscTag::invalid) return i;
  return std::nullopt;
}

std::vector<ManeuverTrace> segment_maneuvers(std::span<const TraceEvent> events) {
  std::vector<ManeuverTrace> out;
  std::optional<ManeuverTrace> open;
  FscTag prev = FscTag::invalid;
  bool in_maneuver = false;

  auto close = [&](double t, bool truncated) {
    open->t_end = t;
    if (in_maneuver) open->t_maneuver_end = t;
    in_maneuver = false;
    if (truncated) {
      open->outcome = Outcome::dnf;
      out.push_back(std::move(*open));
    } else if (open->reached_maneuver()) {
      const Pattern p = match_pattern(open->sequence);
      open->outcome = p == Pattern::counterexample ? Outcome::counterexample
                      : (p == Pattern::e0 || p == Pattern::e2) ? Outcome::success
                                                               : Outcome::failed;
      out.push_back(std::move(*open));
    }
    open.reset();
  };

  for (const TraceEvent& e : events) {
    if (e.fsc == prev) continue;
    if (open) {
      const bool m = maneuver_tag(e.fsc);
      if (m && !open->reached_maneuver()) open->t_maneuver_start = e.t;
      if (in_maneuver && !m) open->t_maneuver_end = e.t;
      in_maneuver = m;
      open->sequence.push_back(e.fsc);
      if (e.fsc == FscTag::fsc10) close(e.t, false);
      else if (e.fsc == FscTag::fsc00) {
        open->sequence.pop_back();
        close(e.t, true);
      }
    } else if (prev == FscTag::fsc10 && e.fsc != FscTag::fsc00) {
      ManeuverTrace tr;
      tr.kind = e.fsc == FscTag::fsc21 || e.fsc == FscTag::fsc40 || e.fsc == FscTag::fsc41 ? ManeuverKind::defense
                                                                                           : ManeuverKind::overtake;
      tr.sequence = {FscTag::fsc10, e.fsc};
      tr.t_start = e.t;
      tr.t_maneuver_start = tr.t_maneuver_end = e.t;
      in_maneuver = maneuver_tag(e.fsc);
      open = std::move(tr);
    }
    prev = e.fsc;
  }
  if (open) close(events.empty() ? 0.0 : events.back().t, true);
  return out;
}

Pattern classify(const ManeuverTrace& trace) {
  if (trace.outcome == Outcome::dnf) throw ParameterError("classify: dnf trace is not classifiable");
  return match_pattern(trace.sequence);
}

CounterSet tally(std::span<const ManeuverTrace> traces, int overtake_opportunities, int defense_opportunities) {
  CounterSet c;
  c.N_ot1 = overtake_opportunities;
  c.N_df1 = defense_opportunities;
  for (const ManeuverTrace& tr : traces) {
    const bool ot = tr.kind == ManeuverKind::overtake;
    (ot ? c.N_ot2 : c.N_df2) += 1;
    switch (tr.outcome) {
      case Outcome::success: (ot ? c.N_ot3 : c.N_df3) += 1; break;
      case Outcome::failed: (ot ? c.N_ot45 : c.N_df45) += 1; break;
      case Outcome::dnf: (ot ? c.N_ot_dnf : c.N_df_dnf) += 1; break;
      case Outcome::counterexample: break;  // breaks conservation on purpose
    }
  }
  return c;
}

std::vector<ManeuverTrace> engaged_traces(std::span<const ManeuverTrace> own,
                                          std::span<const ManeuverTrace> opponent) {
  std::vector<ManeuverTrace> out;
  for (const ManeuverTrace& a : own) {
    if (!a.reached_maneuver()) continue;
    const bool hit = std::any_of(opponent.begin(), opponent.end(), [&](const ManeuverTrace& b) {
      return b.kind != a.kind && b.reached_maneuver() && b.t_maneuver_start <= a.t_maneuver_end &&
             a.t_maneuver_start <= b.t_maneuver_end;
    });
    if (hit) out.push_back(a);
  }
  return out;
}

std::vector<ManeuverTrace> unforced_traces(std::span<const ManeuverTrace> traces, std::span<const double> forced) {
  std::vector<ManeuverTrace> out;
  for (const ManeuverTrace& tr : traces) {
    const bool hit = tr.kind == ManeuverKind::defense && std::any_of(forced.begin(), forced.end(), [&](double t) {
                       return t >= tr.t_maneuver_start && t <= tr.t_maneuver_end;
                     });
    if (!hit) out.push_back(tr);
  }
  return out;
}

bool cross_check(const CounterSet& a, const CounterSet& b) {
  return a.N_ot3 == b.N_df2 - b.N_df3 - b.N_df_dnf && b.N_ot3 == a.N_df2 - a.N_df3 - a.N_df_dnf;
}

SessionResult verify_session(const SessionStreams& streams) {
  SessionResult r;
  Verdict& v = r.verdict;
  for (int car = 0; car < 2; ++car) {
    const auto& ev = streams.events[car];
    if (auto bad = validate_fsc_stream(ev); bad && v.fsc_valid) {
      v.fsc_valid = false;
      v.first_invalid = ev[*bad];
    }
    r.traces[car] = segment_maneuvers(ev);
    for (const ManeuverTrace& tr : r.traces[car]) {
      if (tr.outcome == Outcome::counterexample) {
        v.sequences_ok = false;
        v.counterexamples.push_back(tr);
      }
    }
    r.counters[car] = tally(r.traces[car], streams.overtake_opportunities[car], streams.defense_opportunities[car]);
    v.conservation_ok = v.conservation_ok && r.counters[car].conserved();
  }
  if (streams.full_framework[0] && streams.full_framework[1]) {
    v.cross_check_applied = true;
    for (int car = 0; car < 2; ++car) {
      const auto eng = unforced_traces(engaged_traces(r.traces[car], r.traces[1 - car]), streams.forced[car]);
      r.engaged[car] = tally(eng, 0, 0);
    }
    v.cross_check_ok = cross_check(r.engaged[0], r.engaged[1]);
  }
  return r;
}

}  // namespace argos
