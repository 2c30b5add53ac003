#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "argos/planner.hpp"

namespace argos {

enum class ArgosState { standby, race, wait, overtake, defend };
enum class AutoPassState { disarm, init, pass, abandon, exit };
enum class KavalState { disarm, init, block, fallback, exit };
enum class FlagColor { green, blue, black };
enum class TrajectoryTag { raceline, override_path };

std::string_view to_string(ArgosState s);
std::string_view to_string(AutoPassState s);
std::string_view to_string(KavalState s);
std::string_view to_string(FlagColor c);

struct RaceFlag {
  FlagColor color{FlagColor::green};
  double velocity_limit{1e9};
};

/// Hard thresholds gating transitions. Distances in meters, budgets in seconds.
struct TriggerSet {
  double trig0{150.0};  // max opponent tracking distance
  double trig1{25.0};   // min follow distance
  double trig2{30.0};   // max follow distance
  double trig3{25.0};   // min distance to trigger a pass or block
  double trig4{20.0};   // min distance to trigger maneuver complete
  double trig5{20.0};   // min distance to recover from a failed maneuver
  double trig6{6.0};    // min pre-start maneuver budget
  double trig7{1.5};    // min post-start maneuver budget
  double trig8{7.5};    // min lateral separation between cars

  void validate() const;
};

/// Decimal value of a set of one-hot bits.
struct OhvWord {
  unsigned value{0};

  static constexpr unsigned kAttempting = 1;  // ip5: opponent attempting an overtake
  static constexpr unsigned kAbandoned = 2;   // ip5: opponent abandoned its overtake
  static constexpr unsigned kBlocking = 4;    // ip5: opponent blocking
  static constexpr unsigned kFallback = 8;    // ip5: opponent falling back

  bool has(unsigned bit) const { return (value & bit) != 0; }
  friend bool operator==(OhvWord, OhvWord) = default;
};

/// How guards read the opponent word. `literal` evaluates the printed bit
/// tests; `remapped` evaluates the prose meaning (AutoPass watches for a block
/// and a fallback, KAVAL watches for an abandon).
enum class Ip5Mode { literal, remapped };
/// `printed` keeps the Fallback exit window as [trig0, trig1] (empty for the
/// default triggers); `reinterpreted` uses [trig1, trig0].
enum class Ka5Mode { printed, reinterpreted };

struct FrameworkConfig {
  TriggerSet triggers;
  Ip5Mode ip5_mode{Ip5Mode::remapped};
  Ka5Mode ka5_mode{Ka5Mode::reinterpreted};
};

using Payload = std::shared_ptr<const PlannerOutput>;

struct SignalBus {
  bool sg00{false}, sg01{false}, sg02{false};
  bool sg10{false}, sg11{false}, sg12{false};
  Payload sg03, sg04;  // AutoPass velocity / trajectory overrides
  Payload sg13, sg14;  // KAVAL velocity / trajectory overrides
  Payload sg90, sg91;  // global velocity profile / trajectory

  /// Throws InvariantViolation when a wire invariant is broken.
  void check() const;
};

/// Framework inputs. Besides ip0..ip5 the frame carries the context the
/// guards need that the raw inputs do not expose: whether the opponent is
/// tracked, whether a viable maneuver plan exists, and rule-forced events.
struct InputFrame {
  RaceFlag ip0;
  TrajectoryTag ip1{TrajectoryTag::raceline};
  double ip2{0.0};  // signed arc separation, positive when the opponent is ahead
  bool ip3{false};  // ego leads the race
  double ip4{0.0};  // AEMS budget, s
  OhvWord ip5;

  bool opponent_tracked{false};
  bool overtake_feasible{false};
  bool defense_feasible{false};
  bool forced_abandon{false};   // R5 on the attacker
  bool forced_fallback{false};  // R2 or R5 on the defender
};

struct AutomatonStates {
  ArgosState argos{ArgosState::standby};
  AutoPassState autopass{AutoPassState::disarm};
  KavalState kaval{KavalState::disarm};
  // Origin of a transient Exit, used only to tag it.
  AutoPassState autopass_exit_from{AutoPassState::disarm};
  KavalState kaval_exit_from{KavalState::disarm};
};

struct OutputFrame {
  OhvWord op0;
  Payload op1;  // velocity profile reference
  Payload op2;  // trajectory reference
};

enum class FscTag { fsc00, fsc10, fsc20, fsc21, fsc30, fsc31, fsc40, fsc41, invalid };
std::string_view to_string(FscTag t);
std::optional<FscTag> parse_fsc(std::string_view s);

enum class Automaton { argos, autopass, kaval };
std::string_view to_string(Automaton a);

struct Transition {
  Automaton automaton{};
  std::string from;
  std::string to;
  std::string guard;
};

// Enabled out-guards per state. Guard ids follow the ar/ap/ka numbering,
// plus "ap_done" for the reconstructed Pass success guard. At most one
// guard is enabled for any state and input.
std::vector<std::string> argos_enabled(const AutomatonStates& s, const InputFrame& in, const SignalBus& sg,
                                       const FrameworkConfig& cfg);
std::vector<std::string> autopass_enabled(const AutomatonStates& s, const InputFrame& in, const SignalBus& sg,
                                          const FrameworkConfig& cfg);
std::vector<std::string> kaval_enabled(const AutomatonStates& s, const InputFrame& in, const SignalBus& sg,
                                       const FrameworkConfig& cfg);

/// ap3 and the ip5 predicates, exposed so the supervisor's gate and the
/// overtake automaton agree.
bool ap3_holds(const InputFrame& in, const FrameworkConfig& cfg);
bool ap4_holds(const InputFrame& in, const FrameworkConfig& cfg);
bool opponent_retreated(const InputFrame& in, const FrameworkConfig& cfg);

// Single-automaton steps. Each takes at most one guarded transition; Exit is
// a transient that settles to Disarm within the same call.
std::vector<Transition> argos_step(AutomatonStates& s, const InputFrame& in, SignalBus& sg,
                                   const FrameworkConfig& cfg);
std::vector<Transition> autopass_step(AutomatonStates& s, const InputFrame& in, SignalBus& sg,
                                      const FrameworkConfig& cfg);
std::vector<Transition> kaval_step(AutomatonStates& s, const InputFrame& in, SignalBus& sg,
                                   const FrameworkConfig& cfg);

OhvWord set_op0(const SignalBus& sg);
OutputFrame mux_outputs(OhvWord op0, const SignalBus& sg);
FscTag fsc_of(const AutomatonStates& s);

/// Supplies override payloads for the maneuver states.
class PayloadProvider {
 public:
  struct Payloads {
    Payload velocity;
    Payload trajectory;
  };
  virtual ~PayloadProvider() = default;
  virtual Payloads autopass_payload(AutoPassState state) = 0;
  virtual Payloads kaval_payload(KavalState state) = 0;
};

struct TickResult {
  std::vector<Transition> transitions;
  OutputFrame output;
  FscTag fsc{FscTag::invalid};
};

/// The three-automaton network for one car.
class FrameworkNetwork {
 public:
  explicit FrameworkNetwork(FrameworkConfig cfg, Payload global_velocity = nullptr,
                            Payload global_trajectory = nullptr);

  /// argos -> autopass -> kaval, then the completion handover, payload
  /// publication, set_op0 and mux_outputs.
  TickResult tick(const InputFrame& in, PayloadProvider& provider);

  const AutomatonStates& states() const { return states_; }
  const SignalBus& signals() const { return signals_; }
  const FrameworkConfig& config() const { return cfg_; }

 private:
  FrameworkConfig cfg_;
  AutomatonStates states_;
  SignalBus signals_;
};

}  // namespace argos
