// Acceptance runner: one PASS/FAIL line per criterion, exit 0 iff all pass.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>
#include <sys/wait.h>

#include <CLI11.hpp>

#include "argos/quintic.hpp"
#include "argos/race.hpp"
#include "argos/tracker.hpp"
#include "oracles.hpp"

using namespace argos;

namespace {

struct Line {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Aggregates over the ARGOS-vs-ARGOS corpus; filled race by race.
struct Corpus {
  int races{0};
  long long ticks_checked{0};
  int fsc_invalid_sessions{0};
  int completed_traces{0};
  int counterexamples{0};
  int conservation_failures{0};
  int cross_check_failures{0};
  int cross_check_skipped{0};
  int engaged_successes{0};
  int engaged_episodes{0};
  int reverify_failures{0};
  int forced_events{0};
  int forced_legal{0};
  double min_budget{1e9};
  int boost_off_zone{0};
  double seconds{0.0};
};

void absorb(Corpus& c, const RaceResult& r) {
  ++c.races;
  const Verdict& v = r.session.verdict;
  c.ticks_checked += r.fsc_ticks_checked;
  c.fsc_invalid_sessions += !v.fsc_valid;
  c.counterexamples += static_cast<int>(v.counterexamples.size());
  for (int car = 0; car < 2; ++car) {
    for (const ManeuverTrace& t : r.session.traces[car]) c.completed_traces += t.outcome != Outcome::dnf;
    c.conservation_failures += !r.session.counters[car].conserved();
    c.engaged_successes += r.session.engaged[car].N_ot3;
    c.engaged_episodes += r.session.engaged[car].N_ot2 + r.session.engaged[car].N_df2;
    c.forced_events += r.cars[car].forced_events;
    c.forced_legal += r.cars[car].forced_events_legal;
    c.min_budget = std::min(c.min_budget, r.cars[car].min_budget);
    c.boost_off_zone += r.cars[car].boost_off_zone;
  }
  c.cross_check_skipped += !v.cross_check_applied;
  c.cross_check_failures += v.cross_check_applied && !v.cross_check_ok;
  c.reverify_failures += !verify_log_text(r.event_log).result.verdict.pass();
}

Corpus run_corpus(const ScenarioConfig& base, int races, int threads) {
  Corpus total;
  const auto t0 = std::chrono::steady_clock::now();
  std::atomic<int> next{0};
  const int workers = std::max(1, std::min(threads, races));
  std::vector<std::future<Corpus>> futs;
  for (int w = 0; w < workers; ++w) {
    futs.push_back(std::async(std::launch::async, [&] {
      Corpus part;
      for (int k = next++; k < races; k = next++) {
        ScenarioConfig cfg = base;
        cfg.seed = static_cast<std::uint64_t>(k + 1);
        RunOptions opts;
        opts.keep_odometry = false;
        absorb(part, run_race(cfg, opts));
      }
      return part;
    }));
  }
  for (auto& f : futs) {
    const Corpus p = f.get();
    total.races += p.races;
    total.ticks_checked += p.ticks_checked;
    total.fsc_invalid_sessions += p.fsc_invalid_sessions;
    total.completed_traces += p.completed_traces;
    total.counterexamples += p.counterexamples;
    total.conservation_failures += p.conservation_failures;
    total.cross_check_failures += p.cross_check_failures;
    total.cross_check_skipped += p.cross_check_skipped;
    total.engaged_successes += p.engaged_successes;
    total.engaged_episodes += p.engaged_episodes;
    total.reverify_failures += p.reverify_failures;
    total.forced_events += p.forced_events;
    total.forced_legal += p.forced_legal;
    total.min_budget = std::min(total.min_budget, p.min_budget);
    total.boost_off_zone += p.boost_off_zone;
  }
  total.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return total;
}

Line quintic_check() {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0), dur(0.2, 3.0);
  double worst_end = 0.0, worst_coef = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const BoundaryState s{{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}};
    const BoundaryState e{{u(rng), u(rng)}, {u(rng), u(rng)}, {u(rng), u(rng)}};
    const double T = dur(rng);
    const QuinticSegment seg = fit_quintic(s, e, T);
    for (const auto& [got, want] : {std::pair{eval_quintic(seg, 0.0), s}, std::pair{eval_quintic(seg, T), e}}) {
      for (double d : {got.pos.x - want.pos.x, got.pos.y - want.pos.y, got.vel.x - want.vel.x,
                       got.vel.y - want.vel.y, got.acc.x - want.acc.x, got.acc.y - want.acc.y})
        worst_end = std::max(worst_end, std::abs(d));
    }
    const auto ox = oracle::quintic_axis(s.pos.x, s.vel.x, s.acc.x, e.pos.x, e.vel.x, e.acc.x, T);
    const auto oy = oracle::quintic_axis(s.pos.y, s.vel.y, s.acc.y, e.pos.y, e.vel.y, e.acc.y, T);
    for (int i = 0; i < 6; ++i)
      worst_coef = std::max({worst_coef, std::abs(seg.cx[i] - ox[i]), std::abs(seg.cy[i] - oy[i])});
  }
  return {5, "quintic fits", worst_end < 1e-9 && worst_coef < 1e-8,
          fmt("1000 fits, max endpoint error %.2e, max coefficient error %.2e", worst_end, worst_coef)};
}

Line mpc_check() {
  TrackerConfig cfg;
  cfg.horizon = 3;
  const VehicleParams p;
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> y(-3.0, 3.0), phi(-0.2, 0.2), v(10.0, 50.0), dv(-5.0, 5.0);
  double worst_ratio = 0.0;
  for (int k = 0; k < 200; ++k) {
    const VehicleState x0{0.0, y(rng), phi(rng), v(rng)};
    const ReferenceWindow w = oracle::straight_window(cfg.horizon, cfg.dt, std::max(1.0, x0.v + dv(rng)), y(rng));
    const double grid = oracle::grid_best_cost(x0, w, cfg, p);
    const double got = solve(x0, w, cfg, p).cost;
    worst_ratio = std::max(worst_ratio, grid > 0.0 ? got / grid : (got > 0.0 ? 1e9 : 0.0));
  }
  const TrackerConfig dflt;
  double max_a = 0.0, max_d = 0.0;
  for (double speed : {10.0, 30.0, 50.0}) {
    const MpcSolution sol = solve({0.0, 0.0, 0.0, speed}, oracle::straight_window(dflt.horizon, dflt.dt, speed, 0.0),
                                  dflt, p);
    for (const Command& c : sol.u) {
      max_a = std::max(max_a, std::abs(c.a));
      max_d = std::max(max_d, std::abs(c.delta));
    }
  }
  return {6, "MPC optimality", worst_ratio <= 1.05 && max_a < 0.05 && max_d < 0.005,
          fmt("200 instances, worst cost / grid = %.4f; on-reference |a| %.1e, |delta| %.1e", worst_ratio, max_a,
              max_d)};
}

Line tracking_check(const ScenarioConfig& cfg) {
  const Track track = build_oval_track(cfg.track);
  const std::vector<Waypoint> pts(track.raceline.waypoints().begin(), track.raceline.waypoints().end());
  const ReferencePath path(pts, true);
  const CarConfig& car = cfg.cars[0];
  PathTracker tracker(car.tracker, car.vehicle);
  const auto [p0, h0] = track.raceline.pose_at(0.0);
  VehicleState s{p0.x, p0.y, h0, 30.0};
  const long steps = static_cast<long>(track.raceline.total_length() / 30.0 / cfg.sim_dt);
  double sum = 0.0;
  for (long k = 0; k < steps; ++k) {
    s = step(s, tracker.control(s, extract_reference(path, s, car.tracker, 30.0)), cfg.sim_dt, car.vehicle);
    const double l = track.raceline.project(s.position()).lateral;
    sum += l * l;
  }
  const double rms = std::sqrt(sum / static_cast<double>(steps));
  return {7, "tracking quality", rms <= 0.5, fmt("one lap at 30 m/s, lateral RMS %.3f m", rms)};
}

Line kinematics_check() {
  const VehicleParams p;
  double worst_radius = 0.0;
  for (double delta : {0.05, 0.1, 0.2, 0.3}) {
    const double analytic = p.wheelbase / std::tan(delta);
    const double v = 20.0, dt = 0.02;
    VehicleState s{0.0, 0.0, 0.0, v};
    const long n = static_cast<long>(std::ceil(2.0 * std::numbers::pi * analytic / v / dt)) + 1;
    double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
    for (long k = 0; k < n; ++k) {
      s = step(s, {0.0, delta}, dt, p);
      xmin = std::min(xmin, s.x);
      xmax = std::max(xmax, s.x);
      ymin = std::min(ymin, s.y);
      ymax = std::max(ymax, s.y);
    }
    const double r = 0.25 * ((xmax - xmin) + (ymax - ymin));
    worst_radius = std::max(worst_radius, std::abs(r - analytic) / analytic);
  }
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> acc(p.a_min, p.a_max);
  VehicleState s{0.0, 0.0, 0.4, 25.0};
  double integral = 0.0;
  for (int k = 0; k < 5000; ++k) {
    integral += s.v * 0.02;
    s = step(s, {acc(rng), 0.0}, 0.02, p, 60.0);
  }
  const double travelled = std::hypot(s.x, s.y);
  const double rel = std::abs(travelled - integral) / integral;
  return {8, "kinematics", worst_radius < 0.005 && rel < 1e-6,
          fmt("circle radius error %.3f%%, straight distance error %.1e relative", 100.0 * worst_radius, rel)};
}

int run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance runner"};
  int races = 100, laps = 5, sweep_seeds = 30;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string config_dir = ARGOS_CONFIG_DIR, cli = ARGOS_CLI;
  app.add_option("--races", races, "ARGOS-vs-ARGOS races in the corpus");
  app.add_option("--laps", laps, "laps per corpus race");
  app.add_option("--sweep-seeds", sweep_seeds, "seeds per sweep point");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--config-dir", config_dir, "directory holding the scenario files");
  app.add_option("--cli", cli, "path to the argos command-line tool");
  CLI11_PARSE(app, argc, argv);

  std::vector<Line> lines;
  try {
    ScenarioConfig avsa = load_config(config_dir + "/argos_vs_argos.cfg");
    avsa.laps = laps;
    const TriggerSet& tr = avsa.cars[0].triggers;
    const bool default_triggers = tr.trig0 == 150 && tr.trig1 == 25 && tr.trig2 == 30 && tr.trig3 == 25 &&
                                tr.trig4 == 20 && tr.trig5 == 20 && tr.trig6 == 6.0 && tr.trig7 == 1.5 &&
                                tr.trig8 == 7.5;

    const Corpus c = run_corpus(avsa, races, threads);
    std::fprintf(stderr, "corpus: %d races in %.1f s\n", c.races, c.seconds);
    lines.push_back({1, "FSC closure", default_triggers && c.fsc_invalid_sessions == 0 && c.seconds < 900.0,
                     fmt("%d races x %d laps, %lld ticks checked, %d sessions with invalid tags, %.0f s", c.races,
                         laps, c.ticks_checked, c.fsc_invalid_sessions, c.seconds)});
    lines.push_back({2, "sequence totality", c.counterexamples == 0,
                     fmt("%d completed traces, %d counterexamples", c.completed_traces, c.counterexamples)});

    CounterSet fig;
    fig.N_ot2 = 26, fig.N_ot3 = 3, fig.N_ot45 = 21, fig.N_ot_dnf = 2;
    fig.N_df2 = 9, fig.N_df3 = 5, fig.N_df45 = 3, fig.N_df_dnf = 1;
    lines.push_back({3, "conservation identities", c.conservation_failures == 0 && fig.conserved(),
                     fmt("%d car-sessions, %d failures; 26 = 3 + 21 + 2 and 9 = 5 + 3 + 1 %s", 2 * c.races,
                         c.conservation_failures, fig.conserved() ? "hold" : "fail")});
    lines.push_back({4, "cross-check symmetry", c.cross_check_failures == 0 && c.cross_check_skipped == 0,
                     fmt("%d sessions, %d mismatches, %d engaged traces, %d engaged passes", c.races,
                         c.cross_check_failures, c.engaged_episodes, c.engaged_successes)});

    lines.push_back(quintic_check());
    lines.push_back(mpc_check());
    lines.push_back(tracking_check(avsa));
    lines.push_back(kinematics_check());

    // Sweeps run before the AEMS and rules lines so those cover every race.
    SweepConfig gap;
    gap.base = load_config(config_dir + "/sweep_mule.cfg");
    gap.axis = "race.initial_gap";
    gap.values = {40, 80, 120, 160, 200};
    gap.seeds_per_value = sweep_seeds;
    gap.threads = threads;
    SweepConfig boost = gap;
    boost.axis = "rules.boost_grant";
    boost.values = {6, 10, 14, 18, 22};
    const auto t0 = std::chrono::steady_clock::now();
    const auto gp = run_sweep(gap);
    const auto bp = run_sweep(boost);
    std::fprintf(stderr, "sweeps: %.1f s\n", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

    const ScenarioConfig golden_cfg = load_config(config_dir + "/golden_mule.cfg");
    const RaceResult golden = run_race(golden_cfg);
    int r3 = 0;
    for (const Violation& v : golden.violations) r3 += v.rule == Rule::R3;

    const AemsReservoir reset = aems_lap_reset({0.0, avsa.rules.boost_grant, false});
    double min_budget = c.min_budget;
    int off_zone = c.boost_off_zone;
    for (const CarSummary& s : golden.cars) {
      min_budget = std::min(min_budget, s.min_budget);
      off_zone += s.boost_off_zone;
    }
    // Denial fixtures: a boost request with budget left at every metre of the lap.
    const Track track = build_oval_track(avsa.track);
    int fixtures = 0, denied = 0, wrongly_granted = 0;
    for (double s = 0.0; s < track.raceline.total_length(); s += 1.0) {
      const bool zone = in_passing_zone(track.zones, s);
      const bool granted = RuleMonitor::boost_granted(true, zone, avsa.rules.boost_grant);
      if (zone) continue;
      ++fixtures;
      denied += !granted;
    }
    wrongly_granted = fixtures - denied;
    lines.push_back({9, "AEMS budget",
                     min_budget >= 0.0 && reset.budget == 20.0 && off_zone == 0 && fixtures > 0 && wrongly_granted == 0,
                     fmt("min budget %.2f s over all races, lap reset %.1f s, %d/%d off-zone fixtures denied, "
                         "%d off-zone drain ticks in races",
                         min_budget, reset.budget, denied, fixtures, off_zone)});

    // Forced-event fixture: short fatigue distances and one block attempt.
    const Corpus forced = run_corpus(load_config(config_dir + "/forced_rules.cfg"), 10, threads);
    const int fe = c.forced_events + forced.forced_events, fl = c.forced_legal + forced.forced_legal;
    const bool forced_clean = forced.fsc_invalid_sessions == 0 && forced.counterexamples == 0 &&
                              forced.conservation_failures == 0 && forced.cross_check_failures == 0;
    lines.push_back({10, "rules", r3 == 0 && golden.min_clearance >= golden_cfg.rules.safety_distance &&
                                      forced.forced_events > 0 && fl == fe && forced_clean,
                     fmt("golden mule: %d R3, min clearance %.2f m; forced events %d, legal next tick %d", r3,
                         golden.min_clearance, fe, fl)});

    // Determinism: repeat a few corpus seeds with every artifact, then the CLI round trip.
    int identical = 0, repeats = 0;
    for (std::uint64_t seed : {1, 2, 3}) {
      ScenarioConfig cfg = avsa;
      cfg.seed = seed;
      const RaceResult a = run_race(cfg), b = run_race(cfg);
      ++repeats;
      identical += a.event_log == b.event_log && a.odometry_csv == b.odometry_csv && a.summary_json == b.summary_json;
    }
    const std::filesystem::path dir = std::filesystem::temp_directory_path() / "argos_acceptance";
    std::filesystem::remove_all(dir);
    RunOptions opts;
    opts.out_dir = dir.string();
    run_race(golden_cfg, opts);
    const int rc = run_cli(cli, "verify " + (dir / "events.jsonl").string());
    std::filesystem::remove_all(dir);
    lines.push_back({11, "determinism", identical == repeats && c.reverify_failures == 0 && rc == 0,
                     fmt("%d/%d repeated runs byte-identical, %d corpus logs failed re-verification, verify exit %d",
                         identical, repeats, c.reverify_failures, rc)});

    std::vector<double> gx, gy, bx, by;
    for (const auto& p : gp) gx.push_back(-p.value), gy.push_back(p.p_overtake);
    for (const auto& p : bp) bx.push_back(p.value), by.push_back(p.p_overtake);
    const double tau_gap = kendall_tau(gx, gy), tau_boost = kendall_tau(bx, by);
    std::ostringstream series;
    for (const auto& p : gp) series << p.p_overtake << ' ';
    series << "| boost ";
    for (const auto& p : bp) series << p.p_overtake << ' ';
    lines.push_back({12, "sweep trends", tau_gap >= 0.0 && tau_boost >= 0.0,
                     fmt("tau(-gap) %.3f, tau(boost) %.3f; p_overtake gap %s", tau_gap, tau_boost,
                         series.str().c_str())});
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance aborted: %s\n", e.what());
    return 3;
  }

  std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) { return a.id < b.id; });
  bool all = true;
  for (const Line& l : lines) {
    std::printf("[%s] %2d. %s: %s\n", l.pass ? "PASS" : "FAIL", l.id, l.name.c_str(), l.detail.c_str());
    all = all && l.pass;
  }
  std::printf("%s: %zu criteria\n", all ? "ALL PASS" : "FAILURES", lines.size());
  return all ? 0 : 1;
}
