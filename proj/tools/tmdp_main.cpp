// Copyright 2026 The TMDP Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// tmdp: run experiments, hyperparameter sweeps and the oracle checks.
//
//   tmdp run --env ipd --agent-a fpq --agent-b q --steps 20000 --seeds 1-10 --out ipd.csv
//   tmdp sweep --config configs/grid_robustness.cfg
//   tmdp verify --suite all
//
// Exit codes: 0 success, 1 verification failure, 2 configuration error,
// 3 I/O or other runtime failure. TMDP_LOG sets the log level
// (trace, debug, info, warn, error, off).

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spdlog/sinks/stdout_color_sinks.h"
#include "spdlog/spdlog.h"
#include "tmdp/errors.hpp"
#include "tmdp/harness.hpp"
#include "tmdp/verify.hpp"

namespace {

constexpr int kVerifyFailed = 1;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

void SetupLogging() {
  auto logger = spdlog::stderr_color_mt("tmdp");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("TMDP_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept "off" when asked for.
    if (level != spdlog::level::off || std::string(env) == "off") {
      spdlog::set_level(level);
    } else {
      spdlog::warn("ignoring unknown TMDP_LOG level '{}'", env);
    }
  }
}

void LogSummary(const tmdp::ExperimentConfig& config, const tmdp::RunResult& result) {
  for (const auto& s : tmdp::Summarize(result, config.ResolvedTail())) {
    spdlog::info("{}: tail mean over last {} = {:.4f} (median {:.4f}, sd {:.4f}, {} seeds)",
                 s.player, config.ResolvedTail(), s.mean, s.median, s.stddev,
                 s.tail_means.size());
  }
}

}  // namespace

int main(int argc, char** argv) {
  SetupLogging();
  CLI::App app{"Threatened MDP learners and benchmark environments"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand("run", "Run seeded replications and write per-step records");
  std::string config_path;
  std::string env, agent_a, agent_b, seeds, out, reward_scaling;
  long steps = 0;
  int threads = -1;
  int window = 0;
  bool snapshots = false;
  bool print_summary = false;
  std::vector<std::string> overrides;
  run->add_option("--config", config_path, "Flat key = value config file");
  run->add_option("--env", env, "ipd, ish, ic, ipd-mem1, fof-stateless, fof-grid, blotto");
  run->add_option("--agent-a", agent_a, "Decision-maker spec, kind[:key=value,...]");
  run->add_option("--agent-b", agent_b, "Adversary spec, used for every adversary seat");
  run->add_option("--steps,--episodes", steps, "Steps (episodes for fof-grid)");
  run->add_option("--seeds", seeds, "Comma-separated seeds or ranges, e.g. 1-10");
  run->add_option("--out", out, "Output CSV path");
  run->add_option("--reward-scaling", reward_scaling, "minimax, pm1, 01 or none");
  run->add_option("--threads", threads, "Worker threads (0 = all cores)");
  run->add_option("--smoothing-window", window, "Moving-average window for summaries");
  run->add_option("--set", overrides, "Extra key=value settings (repeatable)");
  run->add_flag("--snapshots", snapshots, "Record mixture weights and belief snapshots");
  run->add_flag("--summary", print_summary, "Print a JSON summary to stdout");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run a Cartesian hyperparameter grid");
  std::string sweep_config, sweep_out;
  int sweep_threads = -1;
  sweep->add_option("--config", sweep_config, "Sweep config file")->required();
  sweep->add_option("--out", sweep_out, "Summary CSV path (overrides the file's out key)");
  sweep->add_option("--threads", sweep_threads, "Worker threads (0 = all cores)");

  // verify
  auto* verify = app.add_subcommand("verify", "Run the Bellman-operator oracle checks");
  std::string suite = "all";
  std::string verify_out;
  std::uint64_t verify_seed = 1;
  verify->add_option("--suite", suite, "contraction, oracle or all");
  verify->add_option("--seed", verify_seed, "Master seed");
  verify->add_option("--out", verify_out, "Also write the JSON report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) {
      tmdp::ExperimentConfig config;
      if (!config_path.empty()) config = tmdp::ExperimentConfig::FromFile(config_path);
      if (!env.empty()) config.Set("env", env);
      if (!agent_a.empty()) config.Set("agent_a", agent_a);
      if (!agent_b.empty()) config.Set("agent_b", agent_b);
      if (steps != 0) config.Set("steps", std::to_string(steps));
      if (!seeds.empty()) config.Set("seeds", seeds);
      if (!out.empty()) config.Set("out", out);
      if (!reward_scaling.empty()) config.Set("reward_scaling", reward_scaling);
      if (threads >= 0) config.threads = threads;
      if (window != 0) config.Set("smoothing_window", std::to_string(window));
      if (snapshots) config.snapshots = true;
      for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw tmdp::ConfigError("--set expects key=value, got '" + kv + "'");
        config.Set(kv.substr(0, eq), kv.substr(eq + 1));
      }
      config.Validate();
      spdlog::info("run env={} a={} b={} budget={} seeds={}", config.env,
                   config.agent_a.ToString(), config.agent_b.ToString(),
                   config.ResolvedBudget(), config.seeds.size());
      const auto t0 = std::chrono::steady_clock::now();
      const tmdp::RunResult result = tmdp::Run(config);
      spdlog::info("finished in {:.2f}s",
                   std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      tmdp::WriteOutputs(config, result);
      if (!config.out.empty()) spdlog::info("wrote {}", config.out);
      LogSummary(config, result);
      if (print_summary) std::cout << tmdp::SummaryJson(config, result).dump(2) << '\n';
      return 0;
    }
    if (*sweep) {
      tmdp::SweepConfig s = tmdp::SweepConfig::FromFile(sweep_config);
      if (!sweep_out.empty()) s.out = sweep_out;
      if (sweep_threads >= 0) s.base.threads = sweep_threads;
      const auto points = s.Points();
      spdlog::info("sweep over {} grid points", points.size());
      const std::vector<tmdp::SweepRow> rows = tmdp::RunSweep(s);
      if (s.out.empty()) {
        tmdp::WriteSweepCsv(std::cout, rows);
      } else {
        std::ofstream os(s.out, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open '" + s.out + "' for writing");
        tmdp::WriteSweepCsv(os, rows);
        spdlog::info("wrote {}", s.out);
      }
      return 0;
    }
    if (*verify) {
      const tmdp::SuiteReport report = tmdp::RunVerifySuite(suite, verify_seed);
      const std::string text = report.ToJson().dump(2);
      std::cout << text << '\n';
      if (!verify_out.empty()) {
        std::ofstream os(verify_out, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open '" + verify_out + "' for writing");
        os << text << '\n';
      }
      for (const auto& c : report.checks) {
        spdlog::info("{} {} observed={} threshold={}", c.passed ? "PASS" : "FAIL", c.name,
                     c.observed, c.threshold);
      }
      return report.passed() ? 0 : kVerifyFailed;
    }
  } catch (const tmdp::ConfigError& e) {
    spdlog::error("configuration error: {}", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return kRuntimeError;
  }
  return 0;
}
