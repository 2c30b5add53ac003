#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "argos/event_log.hpp"
#include "argos/race.hpp"

using namespace argos;
namespace fs = std::filesystem;

namespace {

const std::string kConfigDir = ARGOS_CONFIG_DIR;
const std::string kCli = ARGOS_CLI;

const RaceResult& golden() {
  static const RaceResult r = run_race(load_config(kConfigDir + "/golden_mule.cfg"));
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("argos_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("golden mule scenario: the attacker completes a clean pass") {
  const RaceResult& r = golden();
  int e0 = 0;
  for (const ManeuverTrace& t : r.session.traces[1]) e0 += t.outcome == Outcome::success && classify(t) == Pattern::e0;
  CHECK(e0 >= 1);
  int r3 = 0;
  for (const Violation& v : r.violations) r3 += v.rule == Rule::R3;
  CHECK(r3 == 0);
  CHECK(r.min_clearance >= 7.5);
  CHECK(r.session.verdict.pass());
  CHECK(r.cars[1].laps == 2);
  CHECK(r.fsc_ticks_checked > 0);
}

TEST_CASE("same seed gives byte-identical artifacts") {
  ScenarioConfig cfg = load_config(kConfigDir + "/argos_vs_argos.cfg");
  cfg.laps = 1;
  cfg.seed = 7;
  const RaceResult a = run_race(cfg), b = run_race(cfg);
  CHECK(a.event_log == b.event_log);
  CHECK(a.odometry_csv == b.odometry_csv);
  CHECK(a.summary_json == b.summary_json);
  cfg.seed = 8;
  CHECK(run_race(cfg).odometry_csv != a.odometry_csv);
}

TEST_CASE("logged session re-verifies to the live verdict") {
  const RaceResult& r = golden();
  const VerifyOutput v = verify_log_text(r.event_log);
  CHECK(v.result.verdict.pass());
  for (int car = 0; car < 2; ++car) CHECK(v.result.counters[car] == r.session.counters[car]);
}

TEST_CASE("a tampered log fails verification") {
  std::string log = golden().event_log;
  const auto pos = log.find("\"fsc\":\"fsc30\"");
  REQUIRE(pos != std::string::npos);
  log.replace(pos, 13, "\"fsc\":\"fsc41\"");
  const VerifyOutput v = verify_log_text(log);
  CHECK_FALSE(v.result.verdict.pass());
  CHECK_THROWS_AS(verify_log_text("{\"t\":0,\"car\":0,\"kind\":\"transition\"\nnot json\n"), LogError);
}

TEST_CASE("a log cut mid-maneuver yields a dnf trace") {
  const std::string& log = golden().event_log;
  // Cut after the whole tick that entered the pass.
  const auto pos = log.find("\"guard_id\":\"ap2\"");
  REQUIRE(pos != std::string::npos);
  const std::string cut = log.substr(0, log.find('\n', pos) + 1);
  const VerifyOutput v = verify_log_text(cut);
  CHECK(v.result.counters[1].N_ot_dnf == 1);
  CHECK(v.result.counters[1].conserved());
  CHECK(v.result.verdict.pass());
}

TEST_CASE("command line: exit codes, artifacts and report") {
  const fs::path dir = scratch("cli");
  write(dir / "zero.cfg", "race.laps = 0\n");
  CHECK(run_cli("race --config " + (dir / "zero.cfg").string() + " --out " + (dir / "zero").string()) == 2);
  CHECK(run_cli("race --config " + (dir / "nope.cfg").string()) == 2);

  const fs::path run = dir / "run";
  REQUIRE(run_cli("race --config " + kConfigDir + "/golden_mule.cfg --out " + run.string()) == 0);
  CHECK(fs::exists(run / "events.jsonl"));
  CHECK(fs::exists(run / "odometry.csv"));
  CHECK(fs::exists(run / "summary.json"));
  CHECK(run_cli("verify " + (run / "events.jsonl").string()) == 0);

  std::ifstream in(run / "events.jsonl");
  std::stringstream ss;
  ss << in.rdbuf();
  std::string log = ss.str();
  log.replace(log.find("\"fsc\":\"fsc30\""), 13, "\"fsc\":\"fsc41\"");
  write(dir / "bad.jsonl", log);
  CHECK(run_cli("verify " + (dir / "bad.jsonl").string()) == 1);
  write(dir / "garbage.jsonl", "{{{\n");
  CHECK(run_cli("verify " + (dir / "garbage.jsonl").string()) == 2);

  const std::string text = report(run.string());
  CHECK(text.find("cross_check") != std::string::npos);
  CHECK(text.find("verdict: PASS") != std::string::npos);
  CHECK_THROWS_AS(report((dir / "empty").string()), LogError);
  fs::remove_all(dir);
}

TEST_CASE("single-value sweep gives one row") {
  SweepConfig s;
  s.base = load_config(kConfigDir + "/golden_mule.cfg");
  s.base.laps = 1;
  s.axis = "race.initial_gap";
  s.values = {40.0};
  s.seeds_per_value = 2;
  s.threads = 1;
  const auto pts = run_sweep(s);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].n == 2);
  CHECK(pts[0].value == 40.0);
  const std::string csv = sweep_csv(pts);
  CHECK(csv.starts_with("value,p_overtake,p_defense,n\n"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  s.axis = "race.no_such_key";
  CHECK_THROWS_AS(run_sweep(s), ConfigError);
}

TEST_CASE("kendall tau") {
  CHECK(kendall_tau({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(kendall_tau({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(kendall_tau({1, 2, 3}, {5, 5, 6}) == doctest::Approx(2.0 / std::sqrt(6.0)));
}
