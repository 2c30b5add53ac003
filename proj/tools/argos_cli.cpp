// Command-line front end: race, sweep, verify, report.
//
// Exit codes: 0 pass, 1 verification failure, 2 usage/config/log error,
// 3 internal invariant breach.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "argos/event_log.hpp"
#include "argos/race.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;
constexpr int kBreach = 3;

std::string out_dir(const std::string& flag, const std::string& fallback) {
  if (const char* env = std::getenv("ARGOS_OUT_DIR"); env && *env) return env;
  return flag.empty() ? fallback : flag;
}

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
      throw argos::ConfigError("bad sweep value '" + item + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Head-to-head racing simulator with overtake/defense automata"};
  app.require_subcommand(1);

  std::string config_path, out_flag, axis, values, log_path, run_dir;
  std::uint64_t seed = 0;
  int seeds = 30, threads = 0;
  bool no_odometry = false;

  auto* race = app.add_subcommand("race", "Run one session and verify its log");
  race->add_option("--config", config_path, "Scenario config file")->required();
  race->add_option("--seed", seed, "Override the config seed");
  race->add_option("--out", out_flag, "Output directory (ARGOS_OUT_DIR overrides)");
  race->add_flag("--no-odometry", no_odometry, "Skip the odometry CSV");

  auto* sweep = app.add_subcommand("sweep", "Run a seed sweep over one config key");
  sweep->add_option("--config", config_path, "Base scenario config file")->required();
  sweep->add_option("--axis", axis, "Config key to vary, e.g. initial_gap")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("--seeds", seeds, "Seeds per value")->check(CLI::PositiveNumber);
  sweep->add_option("--threads", threads, "Worker threads (0: all cores)");
  sweep->add_option("--out", out_flag, "Directory for sweep.csv (ARGOS_OUT_DIR overrides)");

  auto* verify = app.add_subcommand("verify", "Verify a JSONL event log");
  verify->add_option("log", log_path, "Event log")->required();

  auto* rep = app.add_subcommand("report", "Summarize a run directory");
  rep->add_option("dir", run_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*race) {
      argos::ScenarioConfig cfg = argos::load_config(config_path);
      if (race->count("--seed")) cfg.seed = seed;
      argos::RunOptions opts;
      opts.out_dir = out_dir(out_flag, "runs/seed_" + std::to_string(cfg.seed));
      opts.keep_odometry = !no_odometry;
      const argos::RaceResult r = argos::run_race(cfg, opts);
      std::cout << r.summary_json;
      std::cerr << "artifacts in " << opts.out_dir << '\n';
      return r.session.verdict.pass() ? kPass : kFail;
    }
    if (*sweep) {
      argos::SweepConfig sc;
      sc.base = argos::load_config(config_path);
      sc.axis = axis;
      sc.values = parse_values(values);
      sc.seeds_per_value = seeds;
      sc.first_seed = sc.base.seed;
      sc.threads = threads;
      const std::string csv = argos::sweep_csv(argos::run_sweep(sc));
      std::cout << csv;
      const std::string dir = out_dir(out_flag, "");
      if (!dir.empty()) {
        std::filesystem::create_directories(dir);
        std::ofstream(std::filesystem::path(dir) / "sweep.csv") << csv;
      }
      return kPass;
    }
    if (*verify) {
      const argos::VerifyOutput v = argos::verify_log(log_path);
      std::cout << v.verdict_json;
      return v.result.verdict.pass() ? kPass : kFail;
    }
    if (*rep) {
      std::cout << argos::report(run_dir);
      return kPass;
    }
  } catch (const argos::InvariantViolation& e) {
    std::cerr << "invariant breach: " << e.what() << '\n';
    return kBreach;
  } catch (const argos::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const argos::LogError& e) {
    std::cerr << "log error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kBreach;
  }
  return kUsage;
}
