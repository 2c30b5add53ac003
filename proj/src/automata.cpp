#include "argos/automata.hpp"

#include <cmath>

#include "argos/geometry.hpp"

namespace argos {

std::string_view to_string(ArgosState s) {
  switch (s) {
    case ArgosState::standby: return "Standby";
    case ArgosState::race: return "Race";
    case ArgosState::wait: return "Wait";
    case ArgosState::overtake: return "Overtake";
    case ArgosState::defend: return "Defend";
  }
  return "?";
}

std::string_view to_string(AutoPassState s) {
  switch (s) {
    case AutoPassState::disarm: return "Disarm";
    case AutoPassState::init: return "Init";
    case AutoPassState::pass: return "Pass";
    case AutoPassState::abandon: return "Abandon";
    case AutoPassState::exit: return "Exit";
  }
  return "?";
}

std::string_view to_string(KavalState s) {
  switch (s) {
    case KavalState::disarm: return "Disarm";
    case KavalState::init: return "Init";
    case KavalState::block: return "Block";
    case KavalState::fallback: return "Fallback";
    case KavalState::exit: return "Exit";
  }
  return "?";
}

std::string_view to_string(FlagColor c) {
  switch (c) {
    case FlagColor::green: return "green";
    case FlagColor::blue: return "blue";
    case FlagColor::black: return "black";
  }
  return "?";
}

std::string_view to_string(Automaton a) {
  switch (a) {
    case Automaton::argos: return "argos";
    case Automaton::autopass: return "autopass";
    case Automaton::kaval: return "kaval";
  }
  return "?";
}

std::string_view to_string(FscTag t) {
  switch (t) {
    case FscTag::fsc00: return "fsc00";
    case FscTag::fsc10: return "fsc10";
    case FscTag::fsc20: return "fsc20";
    case FscTag::fsc21: return "fsc21";
    case FscTag::fsc30: return "fsc30";
    case FscTag::fsc31: return "fsc31";
    case FscTag::fsc40: return "fsc40";
    case FscTag::fsc41: return "fsc41";
    case FscTag::invalid: return "invalid";
  }
  return "invalid";
}

std::optional<FscTag> parse_fsc(std::string_view s) {
  for (FscTag t : {FscTag::fsc00, FscTag::fsc10, FscTag::fsc20, FscTag::fsc21, FscTag::fsc30, FscTag::fsc31,
                   FscTag::fsc40, FscTag::fsc41, FscTag::invalid})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

void TriggerSet::validate() const {
  const double v[] = {trig0, trig1, trig2, trig3, trig4, trig5, trig6, trig7, trig8};
  for (double x : v)
    if (!std::isfinite(x) || x < 0.0) throw ConfigError("triggers must be finite and non-negative");
  if (!(trig1 < trig2)) throw ConfigError("trig1 must be below trig2");
  if (!(trig0 > trig2)) throw ConfigError("trig0 must exceed trig2");
  if (!(trig7 < trig6)) throw ConfigError("trig7 must be below trig6");
  if (!(trig4 > 0.0) || !(trig5 > 0.0)) throw ConfigError("trig4 and trig5 must be positive");
}

void SignalBus::check() const {
  if (sg01 && !sg00) throw InvariantViolation("sg01 raised without sg00");
  if (sg11 && !sg10) throw InvariantViolation("sg11 raised without sg10");
  if (sg00 && sg10) throw InvariantViolation("AutoPass and KAVAL armed together");
  if ((sg03 || sg04) && (sg13 || sg14)) throw InvariantViolation("both maneuver automata publish overrides");
}

namespace {

bool blue(const InputFrame& in) { return in.ip0.color == FlagColor::blue; }
bool black(const InputFrame& in) { return in.ip0.color == FlagColor::black; }

bool in_window(double x, double lo, double hi) { return x >= lo && x <= hi; }

bool maneuver_done(const InputFrame& in, const FrameworkConfig& cfg) { return in.ip2 <= -cfg.triggers.trig4; }

bool ap5_holds(const InputFrame& in, const FrameworkConfig& cfg) {
  return in_window(in.ip2, cfg.triggers.trig1, cfg.triggers.trig2) || !in.opponent_tracked;
}

bool ka5_holds(const InputFrame& in, const FrameworkConfig& cfg) {
  const auto& t = cfg.triggers;
  const double gap = std::abs(in.ip2);
  const bool window = cfg.ka5_mode == Ka5Mode::reinterpreted ? in_window(gap, t.trig1, t.trig0)
                                                             : in_window(gap, t.trig0, t.trig1);
  return window || !in.opponent_tracked;
}

bool ka4_holds(const InputFrame& in, const FrameworkConfig& cfg) {
  return !opponent_retreated(in, cfg) && (!in.ip3 || in.forced_fallback);
}

bool ar2_holds(const InputFrame& in, const FrameworkConfig& cfg) {
  return in.opponent_tracked && in_window(std::abs(in.ip2), cfg.triggers.trig1, cfg.triggers.trig2);
}

bool reset_pending(const SignalBus& sg) { return sg.sg02 || sg.sg12; }

bool ar4_holds(const InputFrame& in, const SignalBus& sg, const FrameworkConfig& cfg) {
  return !reset_pending(sg) && sg.sg00 && !in.ip3 && blue(in) && ap3_holds(in, cfg) && in.overtake_feasible;
}

bool ar6_holds(const InputFrame& in, const SignalBus& sg) {
  return !reset_pending(sg) && sg.sg10 && in.ip3 && blue(in) && in.ip5.has(OhvWord::kAttempting) &&
         in.defense_feasible;
}

bool ar3_holds(const InputFrame& in, const SignalBus& sg, const FrameworkConfig& cfg) {
  if (ar4_holds(in, sg, cfg) || ar6_holds(in, sg)) return false;
  const bool role_changed = (sg.sg00 && in.ip3) || (sg.sg10 && !in.ip3);
  return reset_pending(sg) || !in.opponent_tracked || std::abs(in.ip2) > cfg.triggers.trig2 || role_changed;
}

}  // namespace

bool ap3_holds(const InputFrame& in, const FrameworkConfig& cfg) {
  const bool budget = in.ip4 > cfg.triggers.trig6;
  if (cfg.ip5_mode == Ip5Mode::literal) return budget && in.ip5.has(OhvWord::kAbandoned);
  return budget && !in.ip5.has(OhvWord::kBlocking);
}

bool ap4_holds(const InputFrame& in, const FrameworkConfig& cfg) {
  if (in.forced_abandon) return true;
  const bool starved = in.ip4 < cfg.triggers.trig7;
  if (cfg.ip5_mode == Ip5Mode::literal) return starved || !in.ip5.has(OhvWord::kAbandoned);
  // A defender falling back never triggers an abandon.
  return !in.ip5.has(OhvWord::kFallback) && (starved || in.ip5.has(OhvWord::kBlocking));
}

bool opponent_retreated(const InputFrame& in, const FrameworkConfig& cfg) {
  return in.ip5.has(cfg.ip5_mode == Ip5Mode::literal ? OhvWord::kFallback : OhvWord::kAbandoned);
}

std::vector<std::string> argos_enabled(const AutomatonStates& s, const InputFrame& in, const SignalBus& sg,
                                       const FrameworkConfig& cfg) {
  std::vector<std::string> out;
  if (s.argos != ArgosState::standby && black(in)) {
    out.emplace_back("ar1");
    return out;
  }
  switch (s.argos) {
    case ArgosState::standby:
      if (!black(in) && in.ip1 == TrajectoryTag::raceline) out.emplace_back("ar0");
      break;
    case ArgosState::race:
      if (ar2_holds(in, cfg)) out.emplace_back("ar2");
      break;
    case ArgosState::wait:
      if (ar3_holds(in, sg, cfg)) out.emplace_back("ar3");
      if (ar4_holds(in, sg, cfg)) out.emplace_back("ar4");
      if (ar6_holds(in, sg)) out.emplace_back("ar6");
      break;
    case ArgosState::overtake:
      if (sg.sg02) out.emplace_back("ar5");
      break;
    case ArgosState::defend:
      if (sg.sg12) out.emplace_back("ar7");
      break;
  }
  return out;
}

std::vector<std::string> autopass_enabled(const AutomatonStates& s, const InputFrame& in, const SignalBus& sg,
                                          const FrameworkConfig& cfg) {
  std::vector<std::string> out;
  switch (s.autopass) {
    case AutoPassState::disarm:
      if (sg.sg00) out.emplace_back("ap0");
      break;
    case AutoPassState::init:
      if (!sg.sg00) out.emplace_back("ap1");
      else if (sg.sg01 && ap3_holds(in, cfg)) out.emplace_back("ap2");
      break;
    case AutoPassState::pass:
      if (!sg.sg00) out.emplace_back("ap1");
      else if (maneuver_done(in, cfg)) out.emplace_back("ap_done");
      else if (ap4_holds(in, cfg)) out.emplace_back("ap4");
      break;
    case AutoPassState::abandon:
      if (!sg.sg00) out.emplace_back("ap1");
      else if (ap5_holds(in, cfg)) out.emplace_back("ap5");
      break;
    case AutoPassState::exit:
      out.emplace_back("exit");
      break;
  }
  return out;
}

std::vector<std::string> kaval_enabled(const AutomatonStates& s, const InputFrame& in, const SignalBus& sg,
                                       const FrameworkConfig& cfg) {
  std::vector<std::string> out;
  switch (s.kaval) {
    case KavalState::disarm:
      if (sg.sg10) out.emplace_back("ka0");
      break;
    case KavalState::init:
      if (!sg.sg10) out.emplace_back("ka1");
      else if (sg.sg11) out.emplace_back("ka2");
      break;
    case KavalState::block:
      if (!sg.sg10) out.emplace_back("ka1");
      else if (opponent_retreated(in, cfg)) out.emplace_back("ka3");
      else if (ka4_holds(in, cfg)) out.emplace_back("ka4");
      break;
    case KavalState::fallback:
      if (!sg.sg10) out.emplace_back("ka1");
      else if (ka5_holds(in, cfg)) out.emplace_back("ka5");
      break;
    case KavalState::exit:
      out.emplace_back("exit");
      break;
  }
  return out;
}

namespace {

Transition make(Automaton a, std::string_view from, std::string_view to, std::string guard) {
  return {a, std::string(from), std::string(to), std::move(guard)};
}

void require_single(const std::vector<std::string>& g, std::string_view who) {
  if (g.size() > 1) throw InvariantViolation(std::string(who) + ": more than one guard enabled");
}

}  // namespace

std::vector<Transition> argos_step(AutomatonStates& s, const InputFrame& in, SignalBus& sg,
                                   const FrameworkConfig& cfg) {
  const auto guards = argos_enabled(s, in, sg, cfg);
  require_single(guards, "argos");
  if (guards.empty()) return {};
  const std::string& g = guards.front();
  const ArgosState from = s.argos;
  ArgosState to = from;

  if (g == "ar0") {
    to = ArgosState::race;
  } else if (g == "ar1") {
    to = ArgosState::standby;
    sg.sg00 = sg.sg01 = sg.sg02 = false;
    sg.sg10 = sg.sg11 = sg.sg12 = false;
  } else if (g == "ar2") {
    to = ArgosState::wait;
    sg.sg02 = sg.sg12 = false;
    if (in.ip3) sg.sg10 = true;
    else sg.sg00 = true;
  } else if (g == "ar3") {
    to = ArgosState::race;
    sg.sg00 = sg.sg01 = sg.sg02 = false;
    sg.sg10 = sg.sg11 = sg.sg12 = false;
  } else if (g == "ar4") {
    to = ArgosState::overtake;
    sg.sg01 = true;
  } else if (g == "ar6") {
    to = ArgosState::defend;
    sg.sg11 = true;
  } else if (g == "ar5") {
    to = ArgosState::wait;
    sg.sg01 = false;
  } else if (g == "ar7") {
    to = ArgosState::wait;
    sg.sg11 = false;
  }
  s.argos = to;
  return {make(Automaton::argos, to_string(from), to_string(to), g)};
}

std::vector<Transition> autopass_step(AutomatonStates& s, const InputFrame& in, SignalBus& sg,
                                      const FrameworkConfig& cfg) {
  std::vector<Transition> out;
  const auto guards = autopass_enabled(s, in, sg, cfg);
  require_single(guards, "autopass");
  if (guards.empty()) return out;
  const std::string& g = guards.front();
  const AutoPassState from = s.autopass;
  auto go = [&](AutoPassState to, const std::string& guard) {
    out.push_back(make(Automaton::autopass, to_string(s.autopass), to_string(to), guard));
    s.autopass = to;
  };

  if (g == "ap0") go(AutoPassState::init, g);
  else if (g == "ap1") go(AutoPassState::disarm, g);
  else if (g == "ap2") go(AutoPassState::pass, g);
  else if (g == "ap4") go(AutoPassState::abandon, g);
  else if (g == "ap_done" || g == "ap5") {
    s.autopass_exit_from = from;
    go(AutoPassState::exit, g);
    sg.sg02 = true;
    go(AutoPassState::disarm, "exit");
  } else if (g == "exit") {
    go(AutoPassState::disarm, g);
  }
  if (s.autopass == AutoPassState::disarm || s.autopass == AutoPassState::init) sg.sg03 = sg.sg04 = nullptr;
  return out;
}

std::vector<Transition> kaval_step(AutomatonStates& s, const InputFrame& in, SignalBus& sg,
                                   const FrameworkConfig& cfg) {
  std::vector<Transition> out;
  const auto guards = kaval_enabled(s, in, sg, cfg);
  require_single(guards, "kaval");
  if (guards.empty()) return out;
  const std::string& g = guards.front();
  const KavalState from = s.kaval;
  auto go = [&](KavalState to, const std::string& guard) {
    out.push_back(make(Automaton::kaval, to_string(s.kaval), to_string(to), guard));
    s.kaval = to;
  };

  if (g == "ka0") go(KavalState::init, g);
  else if (g == "ka1") go(KavalState::disarm, g);
  else if (g == "ka2") go(KavalState::block, g);
  else if (g == "ka4") go(KavalState::fallback, g);
  else if (g == "ka3" || g == "ka5") {
    s.kaval_exit_from = from;
    go(KavalState::exit, g);
    sg.sg12 = true;
    go(KavalState::disarm, "exit");
  } else if (g == "exit") {
    go(KavalState::disarm, g);
  }
  if (s.kaval == KavalState::disarm || s.kaval == KavalState::init) sg.sg13 = sg.sg14 = nullptr;
  return out;
}

OhvWord set_op0(const SignalBus& sg) {
  const unsigned v = (sg.sg04 ? 1u : 0u) | (sg.sg03 ? 2u : 0u) | (sg.sg14 ? 4u : 0u) | (sg.sg13 ? 8u : 0u);
  if ((v & 3u) && (v & 12u)) throw InvariantViolation("op0: AutoPass and KAVAL overrides both present");
  return OhvWord{v};
}

OutputFrame mux_outputs(OhvWord op0, const SignalBus& sg) {
  OutputFrame out;
  out.op0 = op0;
  switch (op0.value) {
    case 0: out.op1 = sg.sg90; out.op2 = sg.sg91; break;
    case 1: out.op1 = sg.sg90; out.op2 = sg.sg04; break;
    case 2: out.op1 = sg.sg03; out.op2 = sg.sg91; break;
    case 3: out.op1 = sg.sg03; out.op2 = sg.sg04; break;
    case 4: out.op1 = sg.sg90; out.op2 = sg.sg14; break;
    case 8: out.op1 = sg.sg13; out.op2 = sg.sg91; break;
    case 12: out.op1 = sg.sg13; out.op2 = sg.sg14; break;
    default: throw InvariantViolation("mux_outputs: illegal op0 value " + std::to_string(op0.value));
  }
  return out;
}

FscTag fsc_of(const AutomatonStates& s) {
  AutoPassState ap = s.autopass == AutoPassState::exit ? s.autopass_exit_from : s.autopass;
  KavalState ka = s.kaval == KavalState::exit ? s.kaval_exit_from : s.kaval;
  const bool ap_off = ap == AutoPassState::disarm;
  const bool ka_off = ka == KavalState::disarm;
  switch (s.argos) {
    case ArgosState::standby:
      return ap_off && ka_off ? FscTag::fsc00 : FscTag::invalid;
    case ArgosState::race:
      return ap_off && ka_off ? FscTag::fsc10 : FscTag::invalid;
    case ArgosState::wait:
      if (ap == AutoPassState::init && ka_off) return FscTag::fsc20;
      if (ap_off && ka == KavalState::init) return FscTag::fsc21;
      return FscTag::invalid;
    case ArgosState::overtake:
      if (!ka_off) return FscTag::invalid;
      if (ap == AutoPassState::pass) return FscTag::fsc30;
      if (ap == AutoPassState::abandon) return FscTag::fsc31;
      return FscTag::invalid;
    case ArgosState::defend:
      if (!ap_off) return FscTag::invalid;
      if (ka == KavalState::block) return FscTag::fsc40;
      if (ka == KavalState::fallback) return FscTag::fsc41;
      return FscTag::invalid;
  }
  return FscTag::invalid;
}

FrameworkNetwork::FrameworkNetwork(FrameworkConfig cfg, Payload global_velocity, Payload global_trajectory)
    : cfg_(cfg) {
  cfg_.triggers.validate();
  signals_.sg90 = std::move(global_velocity);
  signals_.sg91 = std::move(global_trajectory);
}

TickResult FrameworkNetwork::tick(const InputFrame& in, PayloadProvider& provider) {
  TickResult r;
  auto append = [&](std::vector<Transition>&& t) {
    for (auto& x : t) r.transitions.push_back(std::move(x));
  };

  const bool done_before = signals_.sg02 || signals_.sg12;
  append(argos_step(states_, in, signals_, cfg_));
  append(autopass_step(states_, in, signals_, cfg_));
  append(kaval_step(states_, in, signals_, cfg_));

  // A maneuver that completed this tick hands control back to Wait and
  // re-arms its automaton before the outputs are published.
  if (!done_before && (signals_.sg02 || signals_.sg12) &&
      (states_.argos == ArgosState::overtake || states_.argos == ArgosState::defend)) {
    append(argos_step(states_, in, signals_, cfg_));
    append(autopass_step(states_, in, signals_, cfg_));
    append(kaval_step(states_, in, signals_, cfg_));
  }

  if (states_.autopass == AutoPassState::pass || states_.autopass == AutoPassState::abandon) {
    auto p = provider.autopass_payload(states_.autopass);
    signals_.sg03 = std::move(p.velocity);
    signals_.sg04 = std::move(p.trajectory);
  } else {
    signals_.sg03 = signals_.sg04 = nullptr;
  }
  if (states_.kaval == KavalState::block || states_.kaval == KavalState::fallback) {
    auto p = provider.kaval_payload(states_.kaval);
    signals_.sg13 = std::move(p.velocity);
    signals_.sg14 = std::move(p.trajectory);
  } else {
    signals_.sg13 = signals_.sg14 = nullptr;
  }

  signals_.check();
  r.output = mux_outputs(set_op0(signals_), signals_);
  r.fsc = fsc_of(states_);
  if (r.fsc == FscTag::invalid) throw InvariantViolation("network settled into an invalid configuration");
  return r;
}

}  // namespace argos
