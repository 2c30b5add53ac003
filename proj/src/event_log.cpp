#include "argos/event_log.hpp"

#include <optional>

#include <json.hpp>

namespace argos {

using nlohmann::json;

namespace {

void put(std::string& out, double t, int car, std::string_view kind, json payload) {
  json line{{"t", t}, {"car", car}, {"kind", kind}, {"payload", std::move(payload)}};
  out += line.dump();
  out += '\n';
}

}  // namespace

void EventLogWriter::session(int laps, std::uint64_t seed, const std::array<Policy, 2>& policies,
                             std::string_view ip5_mode) {
  put(text_, 0.0, -1, "session",
      {{"laps", laps},
       {"seed", seed},
       {"policies", {to_string(policies[0]), to_string(policies[1])}},
       {"ip5_bit_mode", ip5_mode}});
}

void EventLogWriter::transition(double t, int car, const Transition& tr, FscTag fsc, bool blue, bool leader) {
  put(text_, t, car, "transition",
      {{"automaton", to_string(tr.automaton)},
       {"from", tr.from},
       {"to", tr.to},
       {"guard_id", tr.guard},
       {"fsc", to_string(fsc)},
       {"blue", blue},
       {"leader", leader}});
}

void EventLogWriter::override_change(double t, int car, OhvWord op0, const Payload& trajectory) {
  json pts = json::array();
  if (op0.value != 0 && trajectory)
    for (const Waypoint& w : trajectory->points) pts.push_back({w.x, w.y, w.v});
  put(text_, t, car, "override", {{"op0", op0.value}, {"points", std::move(pts)}});
}

void EventLogWriter::violation(const Violation& v) {
  put(text_, v.t, v.car, "violation",
      {{"rule", to_string(v.rule)}, {"measurement", v.measurement}, {"detail", v.detail}});
}

void EventLogWriter::lap(double t, int car, int lap, double lap_time, double budget) {
  put(text_, t, car, "lap", {{"lap", lap}, {"lap_time", lap_time}, {"budget", budget}});
}

void EventLogWriter::flag(double t, int car, FlagColor color) {
  put(text_, t, car, "flag", {{"color", to_string(color)}});
}

namespace {

template <typename E>
std::optional<E> parse_state(std::string_view name, std::initializer_list<E> all) {
  for (E e : all)
    if (to_string(e) == name) return e;
  return std::nullopt;
}

/// Replays transitions for one car and emits one tag per tick.
struct CarReplay {
  AutomatonStates states;
  double tick_t{0.0};
  bool open{false};
  std::string logged;
  bool mismatch{false};

  void finish(std::vector<TraceEvent>& out, int car) {
    if (!open) return;
    FscTag tag = fsc_of(states);
    if (mismatch || to_string(tag) != logged) tag = FscTag::invalid;
    if (out.empty() || out.back().fsc != tag) out.push_back({tick_t, car, tag});
    open = false;
    mismatch = false;
    logged.clear();
  }

  void apply(const json& p, std::string_view where) {
    const std::string automaton = p.at("automaton").get<std::string>();
    const std::string from = p.at("from").get<std::string>();
    const std::string to = p.at("to").get<std::string>();
    // Every record of a tick carries the settled tag, so they must agree.
    const std::string fsc = p.at("fsc").get<std::string>();
    mismatch = mismatch || (!logged.empty() && fsc != logged);
    logged = fsc;
    auto bad = [&] { throw LogError(std::string(where) + ": unknown state in transition"); };
    if (automaton == "argos") {
      auto f = parse_state(from, {ArgosState::standby, ArgosState::race, ArgosState::wait, ArgosState::overtake,
                                  ArgosState::defend});
      auto t = parse_state(to, {ArgosState::standby, ArgosState::race, ArgosState::wait, ArgosState::overtake,
                                ArgosState::defend});
      if (!f || !t) bad();
      mismatch = mismatch || *f != states.argos;
      states.argos = *t;
    } else if (automaton == "autopass") {
      const std::initializer_list<AutoPassState> all{AutoPassState::disarm, AutoPassState::init, AutoPassState::pass,
                                                     AutoPassState::abandon, AutoPassState::exit};
      auto f = parse_state(from, all);
      auto t = parse_state(to, all);
      if (!f || !t) bad();
      mismatch = mismatch || *f != states.autopass;
      if (*t == AutoPassState::exit) states.autopass_exit_from = *f;
      states.autopass = *t;
    } else if (automaton == "kaval") {
      const std::initializer_list<KavalState> all{KavalState::disarm, KavalState::init, KavalState::block,
                                                  KavalState::fallback, KavalState::exit};
      auto f = parse_state(from, all);
      auto t = parse_state(to, all);
      if (!f || !t) bad();
      mismatch = mismatch || *f != states.kaval;
      if (*t == KavalState::exit) states.kaval_exit_from = *f;
      states.kaval = *t;
    } else {
      throw LogError(std::string(where) + ": unknown automaton " + automaton);
    }
  }
};

}  // namespace

SessionStreams parse_event_log(std::string_view text) {
  SessionStreams s;
  CarReplay replay[2];
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const std::string where = "line " + std::to_string(line_no);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("kind") || !j.contains("t") || !j.contains("car"))
      throw LogError(where + ": not a log record");
    try {
      const std::string kind = j.at("kind").get<std::string>();
      const int car = j.at("car").get<int>();
      const double t = j.at("t").get<double>();
      const json& p = j.at("payload");
      if (kind == "session") {
        const auto& pol = p.at("policies");
        for (int i = 0; i < 2; ++i) s.full_framework[i] = pol.at(i).get<std::string>() == "argos";
      } else if (kind == "violation") {
        if (car != 0 && car != 1) throw LogError(where + ": bad car id");
        const std::string rule = p.at("rule").get<std::string>();
        if (rule == "R2" || rule == "R5") s.forced[car].push_back(t);
      } else if (kind == "transition") {
        if (car != 0 && car != 1) throw LogError(where + ": bad car id");
        CarReplay& r = replay[car];
        if (r.open && r.tick_t != t) r.finish(s.events[car], car);
        if (!r.open) {
          r.open = true;
          r.tick_t = t;
        }
        r.apply(p, where);
        if (p.at("automaton") == "argos" && p.at("from") == "Race" && p.at("to") == "Wait" &&
            p.at("blue").get<bool>()) {
          if (p.at("leader").get<bool>()) ++s.defense_opportunities[car];
          else ++s.overtake_opportunities[car];
        }
      }
    } catch (const json::exception& e) {
      throw LogError(where + ": " + e.what());
    }
  }
  for (int car = 0; car < 2; ++car) replay[car].finish(s.events[car], car);
  return s;
}

}  // namespace argos
