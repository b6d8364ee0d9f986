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

// Experiment configuration, seeded replications, record collection and the
// CSV / JSON emitters used by the command-line tool.

#ifndef TMDP_HARNESS_HPP_
#define TMDP_HARNESS_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "nlohmann/json.hpp"
#include "tmdp/agents.hpp"
#include "tmdp/envs.hpp"

namespace tmdp {

// `kind[:key=value,...]`, e.g. "fpq", "level:k=2,alpha=0.1",
// "mixture:members=1+2". Recognized kinds: q, fpq, level, mixture, wolf, tft,
// smoother, multi-fpq.
struct AgentSpec {
  std::string kind;
  std::map<std::string, std::string> params;

  static AgentSpec Parse(const std::string& text);
  std::string ToString() const;

  bool Has(const std::string& key) const { return params.contains(key); }
  double GetDouble(const std::string& key, double fallback) const;
  long GetLong(const std::string& key, long fallback) const;
  std::string GetString(const std::string& key, const std::string& fallback) const;

  bool operator==(const AgentSpec&) const = default;
};

// Per-environment defaults for budgets, learning rates and exploration.
struct EnvPreset {
  AgentConfig agent;
  // Nested opponent models of level-k and mixture agents.
  AgentConfig inner;
  double forget_lambda = 1.0;
  double smoother_beta = 0.8;
  long budget = 1000;
  int smoothing_window = 200;
  // Summary window: the last `tail` records, or the last `tail_fraction` of
  // them when positive.
  long tail = 1000;
  double tail_fraction = 0.0;
};

EnvPreset PresetFor(const std::string& env_id);

struct ExperimentConfig {
  std::string env = "ipd";
  RewardScaling reward_scaling = RewardScaling::kMinimax;
  BlottoSpec blotto;
  // Layout name (see GridWorldSpec::Named) or ASCII rows joined by '/'.
  std::string grid_layout = "room";
  AgentSpec agent_a{"fpq", {}};
  // Used for every adversary seat.
  AgentSpec agent_b{"q", {}};
  // Steps for repeated games, episodes for the gridworld. 0 takes the preset.
  long budget = 0;
  std::vector<std::uint64_t> seeds{1};
  int smoothing_window = 0;
  long tail = 0;
  double tail_fraction = 0.0;
  std::string out;
  bool snapshots = false;
  long snapshot_every = 100;
  // 0 uses the hardware concurrency.
  int threads = 0;

  // Applies one `key = value` setting. `a.<param>` / `b.<param>` set agent
  // parameters. Throws ConfigError on unknown keys or malformed values.
  void Set(const std::string& key, const std::string& value);
  // Flat `key = value` lines; lines starting with '#' are comments.
  static ExperimentConfig FromText(const std::string& text);
  static ExperimentConfig FromFile(const std::string& path);

  EnvPreset Preset() const;
  long ResolvedBudget() const;
  int ResolvedSmoothingWindow() const;
  // Number of trailing records per seed and player used in summaries.
  long ResolvedTail() const;

  // Throws ConfigError. Also builds the environment and agents once so that
  // bad combinations fail before any stepping.
  void Validate() const;
};

// `key = value` pairs in file order; blank lines and comments dropped.
std::vector<std::pair<std::string, std::string>> ParseKeyValues(const std::string& text);
// Comma-separated seeds and inclusive ranges, e.g. "1,4-6". Throws ConfigError
// on malformed or empty lists.
std::vector<std::uint64_t> ParseSeeds(const std::string& text);

std::unique_ptr<Environment> MakeEnvironment(const ExperimentConfig& config);

// Builds the agent for `seat` (0 = decision maker, i >= 1 = adversary i).
std::unique_ptr<Agent> MakeAgent(const AgentSpec& spec, const ExperimentConfig& config,
                                 const Environment& env, int seat);

struct RunRecord {
  std::uint64_t seed = 0;
  long step = 0;
  std::string player;
  double reward = 0.0;
  double cum_reward = 0.0;
  double epsilon = 0.0;
  std::vector<double> weights;

  bool operator==(const RunRecord&) const = default;
};

struct ReplicationResult {
  std::uint64_t seed = 0;
  std::vector<std::string> players;
  // Per step, players in `players` order.
  std::vector<RunRecord> records;
  // Histogram of each player's (committed) actions over the run.
  std::vector<std::vector<long>> action_counts;
  std::vector<double> final_weights;
  std::vector<std::string> model_names;
  std::vector<nlohmann::json> snapshots;

  // Reward series of one player.
  std::vector<double> Rewards(const std::string& player) const;
  double TailMean(const std::string& player, long tail) const;
  double ActionFrequency(const std::string& player, ActionId action) const;
};

struct RunResult {
  std::vector<ReplicationResult> replications;

  // All records ordered by (seed position, step, player).
  std::vector<RunRecord> Records() const;
};

// Runs one seed with fresh environment and agents.
ReplicationResult RunReplication(const ExperimentConfig& config, std::uint64_t seed);
// Runs every seed, in parallel when threads != 1. Output order follows
// `config.seeds` regardless of scheduling.
RunResult Run(const ExperimentConfig& config);

struct PlayerSummary {
  std::string player;
  std::vector<double> tail_means;
  double mean = 0.0;
  double stddev = 0.0;
  double median = 0.0;
};

std::vector<PlayerSummary> Summarize(const RunResult& result, long tail);

double Median(std::vector<double> values);

// Centered simple moving average; windows are truncated at the edges.
std::vector<double> MovingAverage(const std::vector<double>& series, int window);

// Shortest round-trip decimal form, '.' separator, locale independent.
std::string FormatDouble(double value);

// Writes the header `seed,step,player,reward,cum_reward,epsilon` plus
// `w_model_<i>` columns when `weight_columns` > 0.
void WriteCsv(std::ostream& os, const std::vector<RunRecord>& records, int weight_columns);
void WriteCsv(const std::string& path, const std::vector<RunRecord>& records, int weight_columns);
std::vector<RunRecord> ReadCsv(std::istream& is);
std::vector<RunRecord> ReadCsv(const std::string& path);

// One JSON object per line.
void WriteSnapshots(const std::string& path, const RunResult& result);

// Writes the CSV (and snapshots when enabled) for a finished run.
void WriteOutputs(const ExperimentConfig& config, const RunResult& result);

nlohmann::json SummaryJson(const ExperimentConfig& config, const RunResult& result);

// ---------------------------------------------------------------------------
// Hyperparameter sweeps

// One sweep dimension. Keys listed together move in lockstep.
struct SweepAxis {
  std::vector<std::string> keys;
  std::vector<std::vector<std::string>> values;
};

// A base experiment plus `sweep.<key> = v1; v2; ...` axes, or linked axes
// `sweep.<k1>|<k2> = x1|y1; x2|y2`.
struct SweepConfig {
  ExperimentConfig base;
  std::vector<SweepAxis> axes;
  std::string out;

  static SweepConfig FromText(const std::string& text);
  static SweepConfig FromFile(const std::string& path);

  // Cartesian product of the axes, first axis slowest.
  std::vector<std::vector<std::pair<std::string, std::string>>> Points() const;
};

struct SweepRow {
  std::vector<std::pair<std::string, std::string>> point;
  PlayerSummary summary;
};

std::vector<SweepRow> RunSweep(const SweepConfig& sweep);
void WriteSweepCsv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace tmdp

#endif  // TMDP_HARNESS_HPP_
