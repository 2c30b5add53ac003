#include "argos/race.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "argos/event_log.hpp"
#include "argos/planner.hpp"
#include "argos/tracker.hpp"

namespace argos {

using nlohmann::json;

namespace {

struct Frenet {
  double s;
  double l;
};

Frenet to_frenet(const Raceline& rl, Vec2 p) {
  const Projection pr = rl.project(p);
  return {pr.arc_s, pr.lateral};
}

Vec2 from_frenet(const Raceline& rl, double s, double l) {
  const auto [pt, heading] = rl.pose_at(s);
  return pt + Vec2{-std::sin(heading), std::cos(heading)} * l;
}

Payload raceline_payload(const Track& track, double v_cap) {
  auto out = std::make_shared<PlannerOutput>();
  out->source = PlanSource::merge;
  for (const Waypoint& w : track.raceline.waypoints()) out->points.push_back({w.x, w.y, std::min(w.v, v_cap)});
  return out;
}

// Sideways shift into the passing lane: seconds of travel, with a floor in m.
constexpr double kShiftTime = 1.5;
constexpr double kShiftMin = 40.0;
constexpr double kGuideSpacing = 5.0;

// Deceleration assumed when tapering boosted speed before a zone ends.
constexpr double kBoostBrake = 4.0;

double zone_remaining(const std::vector<PassingZone>& zones, double s) {
  for (const PassingZone& z : zones)
    if (s >= z.s_start && s < z.s_end) return z.s_end - s;
  return 0.0;
}

/// Builds the override payloads for one car from the current snapshot.
class ManeuverPlanner final : public PayloadProvider {
 public:
  ManeuverPlanner(const Track& track, const CarConfig& car, const VehicleParams& opp_params)
      : track_(track), car_(car), opp_params_(opp_params) {
    offset_ = car.planner.lateral_offset > 0.0 ? car.planner.lateral_offset
                                               : default_lateral_offset(track, car.triggers.trig8);
  }

  void set_context(double t, const VehicleState& ego, const VehicleState& opp, const InputFrame& in,
                   double boosted_cap) {
    t_ = t;
    ego_ = ego;
    opp_ = opp;
    in_ = in;
    boosted_cap_ = boosted_cap;
  }

  Payloads autopass_payload(AutoPassState s) override {
    if (s == AutoPassState::pass) return refresh(Kind::pass, [&] { return plan_overtake(); });
    return refresh(Kind::abandon, [&] { return plan_retreat(false); });
  }

  Payloads kaval_payload(KavalState s) override {
    if (s == KavalState::block) return refresh(Kind::block, [&] { return plan_block(); });
    return refresh(Kind::fallback, [&] { return plan_retreat(true); });
  }

  bool overtake_feasible() {
    const auto& trig = car_.triggers;
    if (!in_.opponent_tracked || in_.ip3 || in_.ip2 <= 0.0 || !(in_.ip4 > trig.trig6)) return false;
    try {
      const OvertakeGuides g = overtake_guides(ego_, opp_, track_, car_.vehicle, offset_);
      (void)g;
      OvertakeGeometry geo;
      geo.y_gap = offset_;
      geo.theta1 = std::atan2(offset_, std::max(in_.ip2, 1.0));
      geo.theta2 = std::atan2(offset_, car_.planner.merge_separation);
      geo.L = opp_params_.car_length;
      geo.D_sepF = std::max(car_.planner.merge_separation, geo.L);
      geo.u_ego = ego_.v;
      geo.u_opp = opp_.v;
      geo.u_boost = car_.vehicle.u_boost;
      geo.boost_fraction = car_.planner.boost_fraction;
      const OvertakeTimes times = overtake_times(geo);
      if (!feasible_overtake(times.total(), in_.ip4, trig.trig6)) return false;
      // The pass has to fit in what is left of the passing zone.
      const double s = track_.raceline.project(ego_.position()).arc_s;
      const double remaining = zone_remaining(track_.zones, s);
      const double ground = times.total() * (opp_.v + geo.boost_fraction * geo.u_boost) + in_.ip2;
      if (ground > remaining) return false;
      side_.reset();
      plan_overtake();
      side_.reset();
      return true;
    } catch (const InfeasiblePlan&) {
      side_.reset();
      return false;
    }
  }

  bool defense_feasible() {
    if (!in_.opponent_tracked || !in_.ip3) return false;
    try {
      plan_block();
      return true;
    } catch (const InfeasiblePlan&) {
      return false;
    }
  }

  void reset() {
    kind_ = Kind::none;
    current_.reset();
    side_.reset();
  }

 private:
  enum class Kind { none, pass, abandon, block, fallback };

  template <typename F>
  Payloads refresh(Kind kind, F&& fn) {
    if (kind != kind_) {
      if (kind == Kind::pass) side_.reset();
      current_.reset();
    }
    if (!current_ || kind != kind_ || t_ - planned_at_ >= car_.planner.replan_period - 1e-9) {
      try {
        current_ = fn();
      } catch (const InfeasiblePlan&) {
        if (!current_) current_ = raceline_payload(track_, car_.vehicle.v_max);
      }
      planned_at_ = t_;
      kind_ = kind;
    }
    return {current_, current_};
  }

  double total() const { return track_.raceline.total_length(); }

  Payload finish(std::vector<Vec2>& guides, std::vector<double>& speeds, PlanSource src) const {
    if (guides.size() < 2) throw InfeasiblePlan("no guide ahead of the car");
    return std::make_shared<PlannerOutput>(plan_trajectory(guides, speeds, car_.planner.sample_step, track_, src));
  }

  // The sideways shift is latched in ground coordinates when the pass starts
  // so replanning cannot keep deferring it. The remaining guides are laid
  // out relative to the opponent and advanced along the raceline by the
  // opponent's travel until the ego car gets there.
  Payload plan_overtake() {
    const Raceline& rl = track_.raceline;
    const OvertakeGuides g = overtake_guides(ego_, opp_, track_, car_.vehicle, offset_);
    const Frenet fo = to_frenet(rl, opp_.position());
    const Frenet fe = to_frenet(rl, ego_.position());
    auto rel = [&](Vec2 p) {
      const Frenet f = to_frenet(rl, p);
      return Frenet{unwrap_separation(f.s - fo.s, total()), f.l};
    };
    const Frenet r1 = rel(g.g1);
    Frenet r2 = rel(g.g2);
    if (!side_) {
      side_ = r1.l >= fo.l ? 1.0 : -1.0;
      shift_end_ = fe.s + std::max(ego_.v * kShiftTime, kShiftMin);
    }
    const double lane = fo.l + *side_ * std::abs(r1.l - fo.l);
    r2.l = lane;
    const double merge = std::max(rel(g.g3).s, car_.planner.merge_separation);

    const double ego_rel = unwrap_separation(fe.s - fo.s, total());
    const double v_target = boosted_cap_;
    const double du = std::max(v_target - opp_.v, 2.0);
    std::vector<Vec2> guides{ego_.position()};
    std::vector<double> speeds{v_target};
    double last = unwrap_separation(shift_end_ - fe.s, total());
    if (last > kGuideSpacing) {
      guides.push_back(from_frenet(rl, shift_end_, lane));
      speeds.push_back(v_target);
    }
    last = std::max(last, 0.0);
    for (const Frenet& r : {r2, Frenet{merge, 0.0}, Frenet{merge + 40.0, 0.0}}) {
      const double ahead = (r.s - ego_rel) * (1.0 + opp_.v / du);
      if (ahead <= last + kGuideSpacing) continue;
      guides.push_back(from_frenet(rl, fe.s + ahead, r.l));
      speeds.push_back(v_target);
      last = ahead;
    }
    return finish(guides, speeds, PlanSource::overtake);
  }

  // Merge back to the raceline while dropping behind (attacker) or yielding
  // (defender).
  Payload plan_retreat(bool defender) {
    const Raceline& rl = track_.raceline;
    const auto& trig = car_.triggers;
    const auto& pl = car_.planner;
    const Frenet fe = to_frenet(rl, ego_.position());
    const double gap = in_.ip2;
    double v;
    if (std::abs(gap) < trig.trig5) v = opp_.v - pl.retreat_decrement;
    else if (gap > 0.0) v = opp_.v + pl.follow_gain * (gap - pl.follow_gap);
    else v = rl.speed_at(fe.s);
    if (defender && gap < 0.0 && std::abs(gap) >= trig.trig5) v = rl.speed_at(fe.s);
    v = std::clamp(v, 1.0, car_.vehicle.v_max);

    const bool alongside = std::abs(gap) < opp_params_.car_length + car_.triggers.trig8;
    const double l = alongside ? fe.l : 0.0;
    const double reach = std::max(ego_.v * 1.5, 25.0);
    std::vector<Vec2> guides{ego_.position(), from_frenet(rl, fe.s + reach, l),
                             from_frenet(rl, fe.s + reach + std::max(ego_.v * 3.0, 60.0), 0.0)};
    std::vector<double> speeds{v, v, v};
    return finish(guides, speeds, PlanSource::merge);
  }

  Payload plan_block() {
    const Raceline& rl = track_.raceline;
    const auto& pl = car_.planner;
    const DefenseGuides d =
        defense_guides(ego_, opp_, track_, pl.defense_horizon, pl.defense_k, car_.vehicle, pl.defense_offset);
    const Frenet fe = to_frenet(rl, ego_.position());
    auto ahead = [&](Vec2 p) { return unwrap_separation(to_frenet(rl, p).s - fe.s, total()); };
    const double v = std::min(rl.speed_at(fe.s), car_.vehicle.v_max);
    std::vector<Vec2> guides{ego_.position()};
    std::vector<double> speeds{v};
    double last = 0.0;
    for (Vec2 p : {d.i1, d.superprojection}) {
      const double a = ahead(p);
      if (a > last + 5.0) {
        guides.push_back(p);
        speeds.push_back(v);
        last = a;
      }
    }
    // Hold the blocking line, then rejoin the raceline well past i2 so the
    // lateral return stays trackable.
    const Frenet hold = to_frenet(rl, guides.back());
    const double rejoin = std::max(ahead(d.i2), last) + std::max(ego_.v * 2.0, 60.0);
    guides.push_back(from_frenet(rl, fe.s + rejoin, hold.l));
    speeds.push_back(v);
    guides.push_back(from_frenet(rl, fe.s + rejoin + 80.0, 0.0));
    speeds.push_back(v);
    return finish(guides, speeds, PlanSource::defense);
  }

  const Track& track_;
  const CarConfig& car_;
  VehicleParams opp_params_;
  double offset_{0.0};
  double t_{0.0};
  VehicleState ego_, opp_;
  InputFrame in_;
  double boosted_cap_{0.0};
  Kind kind_{Kind::none};
  Payload current_;
  double planned_at_{-1e9};
  std::optional<double> side_;
  double shift_end_{0.0};
};

/// Reference path cache keyed by payload identity.
struct RefCache {
  Payload key;
  std::shared_ptr<ReferencePath> path;

  const ReferencePath& get(const Payload& p, bool closed) {
    if (p != key || !path) {
      key = p;
      path = std::make_shared<ReferencePath>(std::span<const Waypoint>(p->points), closed);
    }
    return *path;
  }
};

struct CarRuntime {
  CarConfig cfg;
  VehicleState state;
  AemsReservoir aems;
  RaceProgress progress;
  std::unique_ptr<FrameworkNetwork> net;
  std::unique_ptr<PathTracker> tracker;
  std::unique_ptr<ManeuverPlanner> planner;
  OpponentEstimator estimator;
  Payload global;
  std::shared_ptr<ReferencePath> global_ref;
  RefCache traj_cache, vel_cache;
  OutputFrame output;
  ForcedEvents forced;
  bool forced_prev{false};
  bool check_forced_next{false};
  double last_abandon{-1e9};
  Command last_cmd;
  double lap_start{0.0};
  FlagColor flag{FlagColor::green};
  double lat_sq{0.0};
  long long lat_n{0};
  CarSummary summary;
};

json counters_json(const CounterSet& c) {
  return {{"N_ot1", c.N_ot1},   {"N_ot2", c.N_ot2}, {"N_ot3", c.N_ot3}, {"N_ot45", c.N_ot45},
          {"N_ot_dnf", c.N_ot_dnf}, {"N_df1", c.N_df1}, {"N_df2", c.N_df2}, {"N_df3", c.N_df3},
          {"N_df45", c.N_df45}, {"N_df_dnf", c.N_df_dnf}};
}

json trace_json(const ManeuverTrace& tr) {
  json seq = json::array();
  for (FscTag f : tr.sequence) seq.push_back(to_string(f));
  return {{"kind", to_string(tr.kind)}, {"outcome", to_string(tr.outcome)}, {"t_start", tr.t_start},
          {"t_end", tr.t_end}, {"sequence", std::move(seq)}};
}

json verdict_json(const SessionResult& r) {
  const Verdict& v = r.verdict;
  json j{{"pass", v.pass()},
         {"fsc_valid", v.fsc_valid},
         {"sequences_ok", v.sequences_ok},
         {"conservation_ok", v.conservation_ok},
         {"cross_check_ok", v.cross_check_ok},
         {"cross_check_applied", v.cross_check_applied}};
  if (v.first_invalid)
    j["first_invalid"] = {{"t", v.first_invalid->t}, {"car", v.first_invalid->car}};
  json ce = json::array();
  for (const auto& tr : v.counterexamples) ce.push_back(trace_json(tr));
  j["counterexamples"] = std::move(ce);
  json cars = json::array();
  for (int i = 0; i < 2; ++i) {
    json traces = json::array();
    for (const auto& tr : r.traces[i]) traces.push_back(trace_json(tr));
    cars.push_back({{"counters", counters_json(r.counters[i])},
                    {"engaged", counters_json(r.engaged[i])},
                    {"traces", std::move(traces)}});
  }
  j["cars"] = std::move(cars);
  return j;
}

void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw LogError("cannot write " + p.string());
  out << text;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw LogError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

RaceResult run_race(const ScenarioConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  const Track track = build_oval_track(cfg.track);
  const Raceline& rl = track.raceline;
  const double L = rl.total_length();
  const double dt = cfg.sim_dt;
  const std::array<VehicleParams, 2> params{cfg.cars[0].vehicle, cfg.cars[1].vehicle};

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  const double gap = cfg.initial_gap + cfg.gap_jitter * unit(rng);
  const double lat = cfg.lateral_jitter * unit(rng);

  RuleMonitor monitor(cfg.rules);
  EventLogWriter log;
  std::array<CarRuntime, 2> cars;
  const int lead = cfg.starting_leader;
  for (int i = 0; i < 2; ++i) {
    CarRuntime& c = cars[i];
    c.cfg = cfg.cars[i];
    c.summary.policy = c.cfg.policy;
    const double station = i == lead ? cfg.start_station : cfg.start_station - gap;
    const double s = std::fmod(std::fmod(station, L) + L, L);
    const auto [pt, heading] = rl.pose_at(s);
    const double l = i == lead ? 0.0 : lat;
    const Vec2 p = pt + Vec2{-std::sin(heading), std::cos(heading)} * l;
    c.state = {p.x, p.y, heading, std::min(rl.speed_at(s), c.cfg.vehicle.v_max)};
    c.progress.arc_s = rl.project(p).arc_s;
    c.progress.laps = (i != lead && station < 0.0) ? -1 : 0;
    c.aems.per_lap_grant = cfg.rules.boost_grant;
    c.aems.budget = cfg.rules.boost_grant;
    c.summary.min_budget = c.aems.budget;
    c.global = raceline_payload(track, c.cfg.vehicle.v_max);
    c.global_ref = std::make_shared<ReferencePath>(std::span<const Waypoint>(c.global->points), true);
    c.tracker = std::make_unique<PathTracker>(c.cfg.tracker, c.cfg.vehicle);
    c.estimator = OpponentEstimator(cfg.estimator);
    c.output = {OhvWord{0}, c.global, c.global};
    if (c.cfg.policy == Policy::argos) {
      FrameworkConfig fc{c.cfg.triggers, cfg.ip5_mode, cfg.ka5_mode};
      c.net = std::make_unique<FrameworkNetwork>(fc, c.global, c.global);
      c.planner = std::make_unique<ManeuverPlanner>(track, c.cfg, params[1 - i]);
    }
  }
  log.session(cfg.laps, cfg.seed, {cars[0].cfg.policy, cars[1].cfg.policy}, to_string(cfg.ip5_mode));

  RaceResult res;
  std::ostringstream odo;
  odo.precision(10);
  if (opts.keep_odometry) odo << "t,car_id,x,y,phi,v,a,delta,budget\n";
  res.min_clearance = footprint_clearance(cars[0].state, cars[1].state, params[0], params[1]);

  int leader = leader_flag({cars[0].progress, cars[1].progress}, lead);
  const double max_time = cfg.laps * L / 5.0 + 60.0;
  long long tick = 0;
  bool finished = false;
  while (!finished) {
    const double t = static_cast<double>(tick) * dt;
    if (t > max_time) throw InvariantViolation("race did not finish within the time limit");
    const std::array<RaceProgress, 2> prog{cars[0].progress, cars[1].progress};
    const auto flags = update_flag(prog, track.zones, cfg.laps, cfg.velocity_limit);
    leader = leader_flag(prog, leader);
    finished = flags[0].color == FlagColor::black;
    const std::array<VehicleState, 2> snap{cars[0].state, cars[1].state};
    std::array<double, 2> caps{};
    std::array<std::vector<Transition>, 2> transitions;

    for (int i = 0; i < 2; ++i) {
      CarRuntime& c = cars[i];
      const VehicleState& ego = snap[i];
      const VehicleState& opp = snap[1 - i];
      if (flags[i].color != c.flag || tick == 0) {
        c.flag = flags[i].color;
        log.flag(t, i, c.flag);
      }
      const bool is_leader = leader == i;
      const double ego_s = c.progress.arc_s;
      const bool in_zone = in_passing_zone(track.zones, ego_s);

      InputFrame in;
      in.ip0 = flags[i];
      in.ip1 = c.output.op2 == c.global ? TrajectoryTag::raceline : TrajectoryTag::override_path;
      in.ip2 = arc_separation(rl, ego.position(), opp.position());
      in.ip3 = is_leader;
      in.ip4 = c.aems.budget;
      in.opponent_tracked = distance(ego.position(), opp.position()) <= c.cfg.triggers.trig0;
      in.ip5 = c.estimator.update(t, ego, opp, rl, monitor.radius_for(is_leader));
      in.forced_abandon = c.forced.forced_abandon;
      in.forced_fallback = c.forced.forced_fallback;

      const VehicleParams& vp = c.cfg.vehicle;
      const double plain_cap = std::min(flags[i].velocity_limit, vp.v_max);
      const double boosted_cap = std::min(flags[i].velocity_limit, vp.v_max + vp.u_boost);
      bool pass_active = false;
      if (c.net) {
        const AutomatonStates& st = c.net->states();
        const FrameworkConfig& fc = c.net->config();
        const bool boost_ok = in_zone && c.aems.budget > 0.0;
        c.planner->set_context(t, ego, opp, in, boost_ok ? boosted_cap : plain_cap);
        if (st.argos == ArgosState::wait && in.ip0.color == FlagColor::blue) {
          const bool rested = t - c.last_abandon >= c.cfg.planner.retry_holdoff;
          if (!in.ip3 && rested && ap3_holds(in, fc)) in.overtake_feasible = c.planner->overtake_feasible();
          // Never arm a block that R2 would immediately force out.
          if (in.ip3 && in.ip5.has(OhvWord::kAttempting) &&
              monitor.block_attempts(i) < monitor.book().max_block_attempts)
            in.defense_feasible = c.planner->defense_feasible();
        }
        const OhvWord prev_op0 = c.output.op0;
        TickResult r = c.net->tick(in, *c.planner);
        ++res.fsc_ticks_checked;
        if (c.check_forced_next) {
          ++c.summary.forced_events_legal;  // tick() throws on an invalid combination
          c.check_forced_next = false;
        }
        for (const Transition& tr : r.transitions) {
          log.transition(t, i, tr, r.fsc, in_zone, is_leader);
          if (tr.automaton == Automaton::autopass && tr.to == "Abandon") c.last_abandon = t;
        }
        transitions[i] = std::move(r.transitions);
        c.output = r.output;
        if (c.output.op0.value != prev_op0.value) log.override_change(t, i, c.output.op0, c.output.op2);
        if (c.net->states().autopass != AutoPassState::pass && c.net->states().kaval == KavalState::disarm &&
            c.net->states().autopass == AutoPassState::disarm)
          c.planner->reset();
        pass_active = c.net->states().autopass == AutoPassState::pass;

        const bool race_close = st.argos == ArgosState::race && in.opponent_tracked &&
                                in.ip2 > c.cfg.triggers.trig2 &&
                                c.aems.budget > c.cfg.triggers.trig6 + c.cfg.planner.race_boost_reserve;
        const bool request = pass_active || race_close;
        const bool granted = RuleMonitor::boost_granted(request, in_zone, c.aems.budget);
        if (request && !in_zone) ++c.summary.boost_denials;
        c.aems.drain_active = granted;
      }

      double cap = speed_limit(vp, c.aems, flags[i].velocity_limit);
      caps[i] = cap;
      double ref_cap = cap;
      if (c.net && !pass_active && in.ip2 > 0.0 && in.opponent_tracked) {
        const auto& pl = c.cfg.planner;
        ref_cap = std::min(ref_cap, std::max(0.0, opp.v + pl.follow_gain * (in.ip2 - pl.follow_gap)));
      }

      const bool global_traj = c.output.op2 == c.global;
      const ReferencePath& path = global_traj ? *c.global_ref : c.traj_cache.get(c.output.op2, false);
      ReferenceWindow win = extract_reference(path, ego, c.cfg.tracker, ref_cap);
      if (c.output.op1 != c.output.op2) {
        const ReferencePath& vel =
            c.output.op1 == c.global ? *c.global_ref : c.vel_cache.get(c.output.op1, false);
        for (auto& z : win.z) z.v = std::min(vel.speed_at(vel.path.project(z.position()).arc_s), ref_cap);
      }
      if (c.aems.drain_active && global_traj) {
        const double rem = zone_remaining(track.zones, ego_s);
        const double add = vp.u_boost * c.cfg.planner.boost_fraction;
        for (auto& z : win.z) {
          const double left = rem - distance(z.position(), ego.position());
          const double reach = std::sqrt(z.v * z.v + 2.0 * kBoostBrake * std::max(0.0, left)) - z.v;
          z.v = std::min(z.v + std::min(add, reach), ref_cap);
        }
      }
      c.last_cmd = clamp_command(c.tracker->control(ego, win), vp);

      if (!c.net || c.net->states().argos == ArgosState::race) {
        const double l = rl.project(ego.position()).lateral;
        c.lat_sq += l * l;
        ++c.lat_n;
      }
    }
    if (finished) break;

    for (int i = 0; i < 2; ++i) {
      CarRuntime& c = cars[i];
      if (opts.keep_odometry && tick % cfg.odometry_stride == 0) {
        odo << t << ',' << i << ',' << c.state.x << ',' << c.state.y << ',' << c.state.phi << ',' << c.state.v << ','
            << c.last_cmd.a << ',' << c.last_cmd.delta << ',' << c.aems.budget << '\n';
      }
      c.state = step(c.state, c.last_cmd, dt, c.cfg.vehicle, caps[i]);
      if (c.aems.drain_active) {
        if (!in_passing_zone(track.zones, c.progress.arc_s)) ++c.summary.boost_off_zone;
        const double before = c.aems.budget;
        c.aems = aems_drain(c.aems, dt);
        c.summary.boost_used += before - c.aems.budget;
      }
      c.summary.min_budget = std::min(c.summary.min_budget, c.aems.budget);
      const double s_before = c.progress.cumulative_distance;
      if (c.progress.advance(rl.project(c.state.position()).arc_s, L)) {
        const double t_now = static_cast<double>(tick + 1) * dt;
        if (c.progress.laps >= 1) {
          c.summary.lap_times.push_back(t_now - c.lap_start);
          c.lap_start = t_now;
          log.lap(t_now, i, c.progress.laps, c.summary.lap_times.back(), c.aems.budget);
        }
        c.aems = aems_lap_reset(c.aems);
      }
      const double ds = c.progress.cumulative_distance - s_before;
      if (c.net) {
        const bool engaged =
            distance(c.state.position(), cars[1 - i].state.position()) <= monitor.radius_for(leader == i);
        const std::size_t before = res.violations.size();
        c.forced = monitor.observe(t, i, c.net->states(), transitions[i], ds, engaged, res.violations);
        for (std::size_t k = before; k < res.violations.size(); ++k) log.violation(res.violations[k]);
        const bool forced = c.forced.forced_abandon || c.forced.forced_fallback;
        if (forced && !c.forced_prev) {
          ++c.summary.forced_events;
          c.check_forced_next = true;
        }
        c.forced_prev = forced;
      }
    }
    const std::size_t before = res.violations.size();
    const double clr = monitor.check_clearance(static_cast<double>(tick + 1) * dt, {cars[0].state, cars[1].state},
                                               params, leader, res.violations);
    for (std::size_t k = before; k < res.violations.size(); ++k) log.violation(res.violations[k]);
    res.min_clearance = std::min(res.min_clearance, clr);
    ++tick;
  }

  res.ticks = tick;
  res.sim_time = static_cast<double>(tick) * dt;
  res.event_log = log.text();
  res.odometry_csv = odo.str();
  for (int i = 0; i < 2; ++i) {
    CarRuntime& c = cars[i];
    c.summary.laps = c.progress.laps;
    c.summary.lateral_rms = c.lat_n ? std::sqrt(c.lat_sq / static_cast<double>(c.lat_n)) : 0.0;
    res.cars[i] = c.summary;
  }
  res.session = verify_log_text(res.event_log).result;

  json summary{{"seed", cfg.seed},
               {"laps", cfg.laps},
               {"ticks", res.ticks},
               {"sim_time", res.sim_time},
               {"min_clearance", res.min_clearance},
               {"verdict", verdict_json(res.session)}};
  json cars_j = json::array();
  for (int i = 0; i < 2; ++i) {
    const CarSummary& s = res.cars[i];
    std::map<std::string, int> by_rule;
    for (const Violation& v : res.violations)
      if (v.car == i) ++by_rule[std::string(to_string(v.rule))];
    cars_j.push_back({{"policy", to_string(s.policy)},
                      {"laps", s.laps},
                      {"lap_times", s.lap_times},
                      {"boost_used", s.boost_used},
                      {"boost_denials", s.boost_denials},
                      {"boost_off_zone", s.boost_off_zone},
                      {"min_budget", s.min_budget},
                      {"forced_events", s.forced_events},
                      {"forced_events_legal", s.forced_events_legal},
                      {"lateral_rms", s.lateral_rms},
                      {"violations", by_rule}});
  }
  summary["cars"] = std::move(cars_j);
  res.summary_json = summary.dump(2) + "\n";

  if (!opts.out_dir.empty()) {
    const std::filesystem::path dir(opts.out_dir);
    std::filesystem::create_directories(dir);
    res.event_log_path = (dir / "events.jsonl").string();
    res.odometry_path = (dir / "odometry.csv").string();
    res.summary_path = (dir / "summary.json").string();
    write_file(res.event_log_path, res.event_log);
    write_file(res.odometry_path, res.odometry_csv);
    write_file(res.summary_path, res.summary_json);
  }
  return res;
}

VerifyOutput verify_log_text(std::string_view text) {
  VerifyOutput out;
  out.result = verify_session(parse_event_log(text));
  out.verdict_json = verdict_json(out.result).dump(2) + "\n";
  return out;
}

VerifyOutput verify_log(const std::string& path) { return verify_log_text(read_file(path)); }

std::vector<SweepPoint> run_sweep(const SweepConfig& sweep) {
  if (sweep.values.empty()) throw ConfigError("sweep needs at least one value");
  if (sweep.seeds_per_value < 1) throw ConfigError("sweep needs at least one seed per value");
  struct Job {
    std::size_t value_idx;
    ScenarioConfig cfg;
  };
  std::vector<Job> jobs;
  for (std::size_t v = 0; v < sweep.values.size(); ++v) {
    for (int k = 0; k < sweep.seeds_per_value; ++k) {
      ScenarioConfig c = sweep.base;
      std::ostringstream val;
      val.precision(17);
      val << sweep.values[v];
      apply_setting(c, sweep.axis, val.str());
      c.seed = sweep.first_seed + static_cast<std::uint64_t>(k);
      c.validate();
      jobs.push_back({v, std::move(c)});
    }
  }

  // Each race owns its state; results land in per-job slots.
  std::vector<std::pair<bool, bool>> outcome(jobs.size());
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = sweep.threads > 0 ? static_cast<unsigned>(sweep.threads) : hw;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      RunOptions o;
      o.keep_odometry = false;
      const RaceResult r = run_race(jobs[j].cfg, o);
      const int trailing = 1 - jobs[j].cfg.starting_leader;
      const int leading = jobs[j].cfg.starting_leader;
      outcome[j] = {r.session.counters[trailing].N_ot3 > 0, r.session.counters[leading].N_df3 > 0};
    }
  };
  std::vector<std::future<void>> futs;
  for (unsigned w = 0; w < workers; ++w) futs.push_back(std::async(std::launch::async, worker));
  for (auto& f : futs) f.get();

  std::vector<SweepPoint> points;
  for (std::size_t v = 0; v < sweep.values.size(); ++v) {
    SweepPoint p;
    p.value = sweep.values[v];
    int ot = 0, df = 0;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].value_idx != v) continue;
      ++p.n;
      ot += outcome[j].first;
      df += outcome[j].second;
    }
    p.p_overtake = static_cast<double>(ot) / p.n;
    p.p_defense = static_cast<double>(df) / p.n;
    points.push_back(p);
  }
  return points;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
  std::ostringstream out;
  out.precision(10);
  out << "value,p_overtake,p_defense,n\n";
  for (const SweepPoint& p : points) out << p.value << ',' << p.p_overtake << ',' << p.p_defense << ',' << p.n << '\n';
  return out.str();
}

double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw ParameterError("kendall_tau: size mismatch");
  long long concordant = 0, discordant = 0, tx = 0, ty = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0 && dy == 0.0) continue;
      if (dx == 0.0) ++tx;
      else if (dy == 0.0) ++ty;
      else if ((dx > 0.0) == (dy > 0.0)) ++concordant;
      else ++discordant;
    }
  }
  const double n1 = static_cast<double>(concordant + discordant + tx);
  const double n2 = static_cast<double>(concordant + discordant + ty);
  if (n1 == 0.0 || n2 == 0.0) return 0.0;
  return static_cast<double>(concordant - discordant) / std::sqrt(n1 * n2);
}

std::string report(const std::string& dir) {
  const std::filesystem::path d(dir);
  const json summary = json::parse(read_file(d / "summary.json"), nullptr, false);
  if (summary.is_discarded()) throw LogError("summary.json is not valid JSON");
  const VerifyOutput v = verify_log((d / "events.jsonl").string());
  std::ostringstream out;
  out << "run: seed " << summary.value("seed", 0) << ", " << summary.value("laps", 0) << " laps, "
      << summary.value("sim_time", 0.0) << " s simulated\n";
  out << "verdict: " << (v.result.verdict.pass() ? "PASS" : "FAIL") << "\n\n";
  out << "car  policy  opp  att  succ  aband  dnf | dopp  def  succ  fail  dnf | boost_s  laps\n";
  for (int i = 0; i < 2; ++i) {
    const CounterSet& c = v.result.counters[i];
    const json& cj = summary.at("cars").at(i);
    char line[256];
    std::snprintf(line, sizeof line, "%-4d %-7s %4d %4d %5d %6d %4d | %4d %4d %5d %5d %4d | %7.2f %5d\n", i,
                  cj.value("policy", std::string("?")).c_str(), c.N_ot1, c.N_ot2, c.N_ot3, c.N_ot45, c.N_ot_dnf,
                  c.N_df1, c.N_df2, c.N_df3, c.N_df45, c.N_df_dnf, cj.value("boost_used", 0.0),
                  cj.value("laps", 0));
    out << line;
  }
  out << "\nconservation: " << (v.result.verdict.conservation_ok ? "ok" : "BROKEN") << '\n';
  if (v.result.verdict.cross_check_applied)
    out << "cross_check: " << (v.result.verdict.cross_check_ok ? "ok" : "MISMATCH") << '\n';
  else
    out << "cross_check: skipped (mule opponent)\n";
  out << "min footprint clearance: " << summary.value("min_clearance", 0.0) << " m\n";
  for (int i = 0; i < 2; ++i) {
    const json& cj = summary.at("cars").at(i);
    out << "car " << i << " lap times:";
    for (const auto& lt : cj.at("lap_times")) out << ' ' << lt.get<double>();
    out << "\ncar " << i << " violations: " << cj.at("violations").dump() << '\n';
  }
  if (!v.result.verdict.counterexamples.empty()) {
    out << "\ncounterexamples:\n";
    for (const auto& tr : v.result.verdict.counterexamples) out << "  " << trace_json(tr).dump() << '\n';
  }
  return out.str();
}

}  // namespace argos
