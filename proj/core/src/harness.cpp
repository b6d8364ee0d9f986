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

#include "tmdp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "tmdp/errors.hpp"

namespace tmdp {

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> Split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, sep)) out.push_back(Trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double ParseDouble(const std::string& text, const std::string& what) {
  const std::string t = Trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("expected a number for " + what + ", got '" + text + "'");
  }
  return v;
}

long ParseLong(const std::string& text, const std::string& what) {
  const std::string t = Trim(text);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("expected an integer for " + what + ", got '" + text + "'");
  }
  return v;
}

bool ParseBool(const std::string& text, const std::string& what) {
  const std::string t = Trim(text);
  if (t == "1" || t == "true" || t == "on" || t == "yes") return true;
  if (t == "0" || t == "false" || t == "off" || t == "no") return false;
  throw ConfigError("expected a boolean for " + what + ", got '" + text + "'");
}

std::string ReadFile(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

// ---------------------------------------------------------------------------
// AgentSpec

AgentSpec AgentSpec::Parse(const std::string& text) {
  AgentSpec spec;
  const std::string t = Trim(text);
  const auto colon = t.find(':');
  spec.kind = Trim(t.substr(0, colon));
  if (spec.kind.empty()) throw ConfigError("empty agent spec");
  if (colon == std::string::npos) return spec;
  for (const std::string& item : Split(t.substr(colon + 1), ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("agent parameter '" + item + "' is not key=value");
    }
    spec.params[Trim(item.substr(0, eq))] = Trim(item.substr(eq + 1));
  }
  return spec;
}

std::string AgentSpec::ToString() const {
  std::string out = kind;
  char sep = ':';
  for (const auto& [k, v] : params) {
    out += sep + k + "=" + v;
    sep = ',';
  }
  return out;
}

double AgentSpec::GetDouble(const std::string& key, double fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : ParseDouble(it->second, kind + "." + key);
}

long AgentSpec::GetLong(const std::string& key, long fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : ParseLong(it->second, kind + "." + key);
}

std::string AgentSpec::GetString(const std::string& key, const std::string& fallback) const {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

// ---------------------------------------------------------------------------
// Presets

EnvPreset PresetFor(const std::string& env_id) {
  EnvPreset p;
  if (env_id == "ipd" || env_id == "ish" || env_id == "ic" || env_id == "ipd-mem1") {
    p.agent.gamma = 0.96;
    p.agent.alpha = env_id == "ipd-mem1" ? 0.05 : 0.3;
    p.agent.epsilon = 0.1;
    p.agent.epsilon_decay = 0.999;
    p.agent.decay_every = 10;
    p.budget = 20000;
    p.smoothing_window = 200;
    p.tail = 2000;
  } else if (env_id == "fof-stateless") {
    p.agent.gamma = 0.8;
    p.agent.alpha = 0.1;
    p.agent.epsilon = 0.1;
    p.forget_lambda = 0.8;
    p.budget = 5000;
    p.smoothing_window = 50;
    p.tail = 500;
  } else if (env_id == "fof-grid") {
    p.agent.gamma = 0.8;
    p.agent.alpha = 0.1;
    p.agent.epsilon = 0.99;
    p.agent.epsilon_decay = 0.995;
    p.agent.decay_every = 10;
    p.inner = p.agent;
    p.inner.alpha = 0.05;
    p.inner.epsilon_decay = 0.9;
    p.budget = 15000;
    p.smoothing_window = 50;
    p.tail_fraction = 0.1;
    return p;
  } else if (env_id == "blotto") {
    p.agent.gamma = 0.96;
    p.agent.alpha = 0.1;
    p.agent.epsilon = 0.1;
    p.budget = 20000;
    p.smoothing_window = 200;
    p.tail = 2000;
  } else {
    throw ConfigError("unknown environment '" + env_id + "'");
  }
  p.inner = p.agent;
  return p;
}

// ---------------------------------------------------------------------------
// ExperimentConfig

std::vector<std::pair<std::string, std::string>> ParseKeyValues(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    // Only whole-line comments: '#' also draws walls in grid layouts.
    line = Trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    out.emplace_back(Trim(line.substr(0, eq)), Trim(line.substr(eq + 1)));
  }
  return out;
}

std::vector<std::uint64_t> ParseSeeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const std::string& item : Split(text, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    if (dash != std::string::npos && dash > 0) {
      const long lo = ParseLong(item.substr(0, dash), "seed range");
      const long hi = ParseLong(item.substr(dash + 1), "seed range");
      if (lo < 0 || hi < lo) throw ConfigError("bad seed range '" + item + "'");
      for (long s = lo; s <= hi; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
    } else {
      const long s = ParseLong(item, "seed");
      if (s < 0) throw ConfigError("seeds must be nonnegative");
      seeds.push_back(static_cast<std::uint64_t>(s));
    }
  }
  if (seeds.empty()) throw ConfigError("no seeds in '" + text + "'");
  return seeds;
}

void ExperimentConfig::Set(const std::string& key, const std::string& value) {
  if (key == "env") {
    env = value;
  } else if (key == "agent_a" || key == "agent-a") {
    agent_a = AgentSpec::Parse(value);
  } else if (key == "agent_b" || key == "agent-b") {
    agent_b = AgentSpec::Parse(value);
  } else if (key == "steps" || key == "episodes" || key == "budget") {
    budget = ParseLong(value, key);
  } else if (key == "seeds") {
    seeds = ParseSeeds(value);
  } else if (key == "smoothing_window") {
    smoothing_window = static_cast<int>(ParseLong(value, key));
  } else if (key == "tail") {
    tail = ParseLong(value, key);
  } else if (key == "tail_fraction") {
    tail_fraction = ParseDouble(value, key);
  } else if (key == "out") {
    out = value;
  } else if (key == "snapshots") {
    snapshots = ParseBool(value, key);
  } else if (key == "snapshot_every") {
    snapshot_every = ParseLong(value, key);
  } else if (key == "threads") {
    threads = static_cast<int>(ParseLong(value, key));
  } else if (key == "reward_scaling") {
    reward_scaling = ParseRewardScaling(value);
  } else if (key == "blotto.positions") {
    blotto.positions = static_cast<int>(ParseLong(value, key));
  } else if (key == "blotto.resources") {
    blotto.dm_resources = static_cast<int>(ParseLong(value, key));
  } else if (key == "blotto.attackers") {
    blotto.attackers = static_cast<int>(ParseLong(value, key));
  } else if (key == "grid.layout") {
    grid_layout = value;
  } else if (key.starts_with("a.") && key.size() > 2) {
    agent_a.params[key.substr(2)] = value;
  } else if (key.starts_with("b.") && key.size() > 2) {
    agent_b.params[key.substr(2)] = value;
  } else {
    throw ConfigError("unknown configuration key '" + key + "'");
  }
}

ExperimentConfig ExperimentConfig::FromText(const std::string& text) {
  ExperimentConfig c;
  for (const auto& [k, v] : ParseKeyValues(text)) c.Set(k, v);
  return c;
}

ExperimentConfig ExperimentConfig::FromFile(const std::string& path) {
  return FromText(ReadFile(path));
}

EnvPreset ExperimentConfig::Preset() const { return PresetFor(env); }

long ExperimentConfig::ResolvedBudget() const { return budget > 0 ? budget : Preset().budget; }

int ExperimentConfig::ResolvedSmoothingWindow() const {
  return smoothing_window > 0 ? smoothing_window : Preset().smoothing_window;
}

long ExperimentConfig::ResolvedTail() const {
  const long n = ResolvedBudget();
  if (tail > 0) return std::min(tail, n);
  const EnvPreset p = Preset();
  const double fraction = tail_fraction > 0.0 ? tail_fraction : p.tail_fraction;
  if (fraction > 0.0) {
    return std::max<long>(1, static_cast<long>(std::llround(fraction * static_cast<double>(n))));
  }
  return std::min(p.tail, n);
}

void ExperimentConfig::Validate() const {
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (budget < 0) throw ConfigError("budget must be positive");
  if (ResolvedBudget() <= 0) throw ConfigError("budget must be positive");
  if (smoothing_window < 0) throw ConfigError("smoothing_window must be positive");
  if (tail < 0) throw ConfigError("tail must be positive");
  if (tail_fraction < 0.0 || tail_fraction > 1.0) {
    throw ConfigError("tail_fraction must lie in [0, 1]");
  }
  if (snapshot_every < 1) throw ConfigError("snapshot_every must be positive");
  if (threads < 0) throw ConfigError("threads must be nonnegative");
  const auto environment = MakeEnvironment(*this);
  const int seats = 1 + static_cast<int>(environment->opp_action_counts().size());
  for (int seat = 0; seat < seats; ++seat) {
    MakeAgent(seat == 0 ? agent_a : agent_b, *this, *environment, seat);
  }
}

std::unique_ptr<Environment> MakeEnvironment(const ExperimentConfig& config) {
  if (config.env == "blotto") return std::make_unique<Blotto>(config.blotto);
  if (config.env == "fof-grid") {
    const GridWorldSpec spec = config.grid_layout.find('/') != std::string::npos
                                   ? GridWorldSpec::FromAscii(Split(config.grid_layout, '/'))
                                   : GridWorldSpec::Named(config.grid_layout);
    return std::make_unique<GridFriendOrFoe>(spec, config.reward_scaling);
  }
  return MakeEnvironment(config.env, config.reward_scaling);
}

// ---------------------------------------------------------------------------
// Agent factory

namespace {

const std::vector<std::string>& KnownParams() {
  static const std::vector<std::string> kKeys = {
      "alpha", "gamma", "eps", "decay", "every", "policy", "temp",
      "belief", "prior", "lambda", "kappa",
      "inner_alpha", "inner_eps", "inner_decay", "inner_every", "inner_belief",
      "inner_lambda", "inner_policy",
      "q0", "k", "members", "dwin", "dlose", "beta"};
  return kKeys;
}

AgentConfig Configure(AgentConfig base, const AgentSpec& spec, const std::string& prefix) {
  base.alpha = spec.GetDouble(prefix + "alpha", base.alpha);
  base.epsilon = spec.GetDouble(prefix + "eps", base.epsilon);
  base.epsilon_decay = spec.GetDouble(prefix + "decay", base.epsilon_decay);
  base.decay_every = static_cast<int>(spec.GetLong(prefix + "every", base.decay_every));
  if (spec.Has(prefix + "policy")) base.policy_kind = ParsePolicyKind(spec.GetString(prefix + "policy", ""));
  base.softmax_temperature = spec.GetDouble("temp", base.softmax_temperature);
  base.initial_q = spec.GetDouble("q0", base.initial_q);
  base.Validate();
  return base;
}

FpqOptions BeliefOptions(const AgentSpec& spec, const EnvPreset& preset,
                         const std::string& env_id, const std::string& prefix) {
  FpqOptions o;
  const std::string fallback = env_id == "ipd-mem1" ? "state" : "dirichlet";
  o.belief = ParseBeliefKind(spec.GetString(prefix + "belief", fallback));
  o.prior_pseudo_count = spec.GetDouble("prior", o.prior_pseudo_count);
  o.forget_lambda = spec.GetDouble(prefix + "lambda", preset.forget_lambda);
  o.smoothing_kappa = spec.GetDouble("kappa", o.smoothing_kappa);
  if (!(o.forget_lambda > 0.0 && o.forget_lambda <= 1.0)) {
    throw ConfigError(prefix + "lambda must lie in (0, 1]");
  }
  if (!(o.prior_pseudo_count > 0.0)) throw ConfigError("prior must be positive");
  if (!(o.smoothing_kappa > 0.0)) throw ConfigError("kappa must be positive");
  return o;
}

void RequireOpponentReward(const Environment& env, const std::string& kind) {
  if (!env.emits_opponent_reward()) {
    throw ConfigError(kind + " agents model the opponent's reward, but environment '" + env.id() +
                      "' neither emits it nor has a reward scaling rule");
  }
}

}  // namespace

std::unique_ptr<Agent> MakeAgent(const AgentSpec& spec, const ExperimentConfig& config,
                                 const Environment& env, int seat) {
  for (const auto& [key, value] : spec.params) {
    const auto& known = KnownParams();
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown parameter '" + key + "' for agent '" + spec.kind + "'");
    }
  }
  const std::vector<int> adversaries = env.opp_action_counts();
  if (seat < 0 || seat > static_cast<int>(adversaries.size())) {
    throw ConfigError("seat " + std::to_string(seat) + " does not exist in " + env.id());
  }
  const int n = seat == 0 ? env.num_dm_actions() : adversaries[static_cast<std::size_t>(seat - 1)];
  const std::vector<int> opp = seat == 0 ? adversaries : std::vector<int>{env.num_dm_actions()};

  const EnvPreset preset = config.Preset();
  AgentConfig base = preset.agent;
  base.gamma = spec.GetDouble("gamma", base.gamma);
  const AgentConfig cfg = Configure(base, spec, "");
  AgentConfig inner_base = preset.inner;
  inner_base.gamma = cfg.gamma;
  inner_base.policy_kind = PolicyKind::kEpsilonGreedy;
  const AgentConfig inner = Configure(inner_base, spec, "inner_");

  const std::string& kind = spec.kind;
  if (kind == "q") return std::make_unique<IndependentQAgent>(n, cfg);
  if (kind == "fpq" || kind == "multi-fpq") {
    FpqOptions options = BeliefOptions(spec, preset, config.env, "");
    if (opp.size() == 1 && kind == "fpq") {
      return std::make_unique<FpqAgent>(n, opp[0], cfg, options);
    }
    if (options.belief != BeliefKind::kDirichlet) {
      throw ConfigError("multi-adversary FPQ supports only the dirichlet belief");
    }
    return std::make_unique<MultiFpqAgent>(n, opp, cfg, options);
  }
  if (kind == "level") {
    RequireOpponentReward(env, kind);
    if (opp.size() != 1) throw ConfigError("level-k agents face exactly one opponent");
    const long k = spec.GetLong("k", 2);
    if (k < 1 || k > 16) throw ConfigError("level k must lie in [1, 16]");
    LevelKOptions o;
    o.num_actions = n;
    o.num_opp_actions = opp[0];
    o.self = cfg;
    o.inner = inner;
    o.base = BeliefOptions(spec, preset, config.env, "inner_");
    if (k == 1) o.base = BeliefOptions(spec, preset, config.env, "");
    return MakeLevelK(static_cast<int>(k), o);
  }
  if (kind == "mixture") {
    RequireOpponentReward(env, kind);
    if (opp.size() != 1) throw ConfigError("mixture agents face exactly one opponent");
    std::vector<std::unique_ptr<ValueLearner>> members;
    std::vector<std::string> names;
    for (const std::string& item : Split(spec.GetString("members", "1+2"), '+')) {
      const long level = ParseLong(item, "mixture member level");
      if (level < 1 || level > 16) throw ConfigError("member levels must lie in [1, 16]");
      LevelKOptions o;
      o.num_actions = opp[0];
      o.num_opp_actions = n;
      o.self = inner;
      o.inner = inner;
      o.base = BeliefOptions(spec, preset, config.env, "inner_");
      members.push_back(MakeLevelK(static_cast<int>(level), o));
      names.push_back("L" + std::to_string(level));
    }
    return std::make_unique<MixtureAgent>(n, cfg, std::move(members), std::move(names));
  }
  if (kind == "wolf") {
    WolfParams w;
    w.delta_win = spec.GetDouble("dwin", w.delta_win);
    w.delta_lose = spec.GetDouble("dlose", 4.0 * w.delta_win);
    if (!(w.delta_win > 0.0 && w.delta_win < w.delta_lose)) {
      throw ConfigError("WoLF requires 0 < dwin < dlose");
    }
    return std::make_unique<WolfPhcAgent>(n, cfg, w);
  }
  if (kind == "tft") {
    if (n != 2 || opp.size() != 1 || opp[0] != 2) {
      throw ConfigError("tit-for-tat needs a two-action game against one opponent");
    }
    return std::make_unique<TftAgent>();
  }
  if (kind == "smoother") {
    if (seat == 0) throw ConfigError("the smoother is an adversary; use it for agent_b");
    std::vector<std::vector<double>> features = env.ChoiceFeatures();
    if (features.empty() || static_cast<int>(features.front().size()) != n) {
      throw ConfigError("smoother adversary does not fit environment '" + env.id() + "'");
    }
    const double beta = spec.GetDouble("beta", preset.smoother_beta);
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("smoother beta must lie in (0, 1)");
    return std::make_unique<SmootherAdversary>(SmootherState::UniformStart(n, beta),
                                               std::move(features));
  }
  throw ConfigError("unknown agent kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Running

std::vector<double> ReplicationResult::Rewards(const std::string& player) const {
  std::vector<double> out;
  for (const RunRecord& r : records) {
    if (r.player == player) out.push_back(r.reward);
  }
  return out;
}

double ReplicationResult::TailMean(const std::string& player, long tail) const {
  const std::vector<double> rewards = Rewards(player);
  if (rewards.empty()) throw ContractViolation("no records for player " + player);
  const std::size_t n = std::min<std::size_t>(rewards.size(), static_cast<std::size_t>(std::max(tail, 1L)));
  return std::accumulate(rewards.end() - static_cast<std::ptrdiff_t>(n), rewards.end(), 0.0) /
         static_cast<double>(n);
}

double ReplicationResult::ActionFrequency(const std::string& player, ActionId action) const {
  const auto it = std::find(players.begin(), players.end(), player);
  if (it == players.end()) throw ContractViolation("unknown player " + player);
  const auto& counts = action_counts[static_cast<std::size_t>(it - players.begin())];
  const long total = std::accumulate(counts.begin(), counts.end(), 0L);
  if (total == 0 || action < 0 || static_cast<std::size_t>(action) >= counts.size()) return 0.0;
  return static_cast<double>(counts[static_cast<std::size_t>(action)]) / static_cast<double>(total);
}

std::vector<RunRecord> RunResult::Records() const {
  std::vector<RunRecord> out;
  for (const ReplicationResult& r : replications) {
    out.insert(out.end(), r.records.begin(), r.records.end());
  }
  return out;
}

namespace {

std::vector<std::string> PlayerNames(std::size_t adversaries) {
  std::vector<std::string> names{"A"};
  if (adversaries == 1) {
    names.emplace_back("B");
  } else {
    for (std::size_t i = 0; i < adversaries; ++i) names.push_back("B" + std::to_string(i + 1));
  }
  return names;
}

}  // namespace

ReplicationResult RunReplication(const ExperimentConfig& config, std::uint64_t seed) {
  const std::unique_ptr<Environment> env = MakeEnvironment(config);
  const std::vector<int> opp_counts = env->opp_action_counts();
  const std::size_t m = opp_counts.size();
  std::vector<std::unique_ptr<Agent>> agents;
  std::vector<Rng> rngs;
  for (std::size_t seat = 0; seat <= m; ++seat) {
    agents.push_back(MakeAgent(seat == 0 ? config.agent_a : config.agent_b, config, *env,
                               static_cast<int>(seat)));
    rngs.emplace_back(DeriveSeed(seed, 1 + seat));
  }

  ReplicationResult out;
  out.seed = seed;
  out.players = PlayerNames(m);
  out.action_counts.emplace_back(static_cast<std::size_t>(env->num_dm_actions()), 0L);
  for (int c : opp_counts) out.action_counts.emplace_back(static_cast<std::size_t>(c), 0L);
  if (const auto* mix = dynamic_cast<const MixtureAgent*>(agents[0].get())) {
    out.model_names = mix->mixture().model_names();
  }

  const long budget = config.ResolvedBudget();
  out.records.reserve(static_cast<std::size_t>(budget) * (m + 1));
  std::vector<double> cumulative(m + 1, 0.0);
  std::vector<ActionId> opp_actions(m, 0);
  std::vector<double> episode_reward(m + 1, 0.0);
  std::vector<double> epsilons(m + 1, 0.0);

  auto record = [&](long step, StateId state) {
    for (std::size_t p = 0; p <= m; ++p) {
      cumulative[p] += episode_reward[p];
      RunRecord r;
      r.seed = seed;
      r.step = step;
      r.player = out.players[p];
      r.reward = episode_reward[p];
      r.cum_reward = cumulative[p];
      r.epsilon = epsilons[p];
      if (config.snapshots) r.weights = agents[p]->MixtureWeights();
      out.records.push_back(std::move(r));
    }
    if (config.snapshots && (step % config.snapshot_every == 0 || step + 1 == budget)) {
      nlohmann::json snap = {{"seed", seed}, {"step", step}, {"state", state}};
      for (std::size_t p = 0; p <= m; ++p) {
        nlohmann::json belief = agents[p]->Snapshot(state);
        const std::vector<double> w = agents[p]->MixtureWeights();
        if (belief.is_null() && w.empty()) continue;
        nlohmann::json entry = {{"belief", belief}};
        if (!w.empty()) entry["weights"] = w;
        snap["players"][out.players[p]] = std::move(entry);
      }
      out.snapshots.push_back(std::move(snap));
    }
    for (auto& agent : agents) agent->OnEpisodeEnd();
  };

  auto capture_epsilons = [&] {
    for (std::size_t p = 0; p <= m; ++p) epsilons[p] = agents[p]->epsilon();
  };

  if (!env->episodic()) {
    StateId state = env->Reset();
    for (long t = 0; t < budget; ++t) {
      capture_epsilons();
      const ActionId a = agents[0]->Act(state, rngs[0]);
      for (std::size_t i = 0; i < m; ++i) opp_actions[i] = agents[i + 1]->Act(state, rngs[i + 1]);
      const Experience e = env->Step(a, opp_actions);
      agents[0]->Observe(e);
      for (std::size_t i = 0; i < m; ++i) agents[i + 1]->Observe(RoleSwapped(e, i));
      ++out.action_counts[0][static_cast<std::size_t>(a)];
      for (std::size_t i = 0; i < m; ++i) ++out.action_counts[i + 1][static_cast<std::size_t>(opp_actions[i])];
      episode_reward[0] = e.reward_dm;
      for (std::size_t i = 0; i < m; ++i) episode_reward[i + 1] = e.reward_opp[i];
      record(t, state);
      state = e.terminal ? env->Reset() : e.next_state;
    }
  } else {
    const bool commit = env->opponents_commit_per_episode();
    for (long ep = 0; ep < budget; ++ep) {
      capture_epsilons();
      StateId state = env->Reset();
      const StateId start = state;
      std::fill(episode_reward.begin(), episode_reward.end(), 0.0);
      if (commit) {
        for (std::size_t i = 0; i < m; ++i) {
          opp_actions[i] = agents[i + 1]->Act(state, rngs[i + 1]);
          ++out.action_counts[i + 1][static_cast<std::size_t>(opp_actions[i])];
        }
      }
      while (true) {
        const ActionId a = agents[0]->Act(state, rngs[0]);
        if (!commit) {
          for (std::size_t i = 0; i < m; ++i) {
            opp_actions[i] = agents[i + 1]->Act(state, rngs[i + 1]);
            ++out.action_counts[i + 1][static_cast<std::size_t>(opp_actions[i])];
          }
        }
        const Experience e = env->Step(a, opp_actions);
        ++out.action_counts[0][static_cast<std::size_t>(a)];
        agents[0]->Observe(e);
        if (!commit) {
          for (std::size_t i = 0; i < m; ++i) agents[i + 1]->Observe(RoleSwapped(e, i));
        }
        episode_reward[0] += e.reward_dm;
        for (std::size_t i = 0; i < m; ++i) episode_reward[i + 1] += e.reward_opp[i];
        if (e.terminal) break;
        state = e.next_state;
      }
      if (commit) {
        // Adversaries learn once per episode from the decision maker's
        // episode-level choice; nothing is learned when no choice was made.
        if (const std::optional<ActionId> choice = env->EpisodeChoice()) {
          for (std::size_t i = 0; i < m; ++i) {
            Experience view;
            view.state = 0;
            view.next_state = 0;
            view.terminal = true;
            view.dm_action = opp_actions[i];
            view.reward_dm = episode_reward[i + 1];
            view.opp_actions = {*choice};
            view.reward_opp = {episode_reward[0]};
            agents[i + 1]->Observe(view);
          }
        }
      }
      record(ep, start);
    }
  }
  out.final_weights = agents[0]->MixtureWeights();
  return out;
}

RunResult Run(const ExperimentConfig& config) {
  config.Validate();
  RunResult result;
  const std::size_t n = config.seeds.size();
  result.replications.resize(n);
  std::size_t workers = config.threads > 0 ? static_cast<std::size_t>(config.threads)
                                           : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      result.replications[i] = RunReplication(config, config.seeds[i]);
    }
    return result;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(n);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n; i = next++) {
          try {
            result.replications[i] = RunReplication(config, config.seeds[i]);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return result;
}

double Median(std::vector<double> values) {
  if (values.empty()) return std::nan("");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

std::vector<PlayerSummary> Summarize(const RunResult& result, long tail) {
  std::vector<PlayerSummary> out;
  if (result.replications.empty()) return out;
  for (const std::string& player : result.replications.front().players) {
    PlayerSummary s;
    s.player = player;
    for (const ReplicationResult& r : result.replications) {
      s.tail_means.push_back(r.TailMean(player, tail));
    }
    const double n = static_cast<double>(s.tail_means.size());
    s.mean = std::accumulate(s.tail_means.begin(), s.tail_means.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : s.tail_means) ss += (v - s.mean) * (v - s.mean);
    s.stddev = s.tail_means.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    s.median = Median(s.tail_means);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<double> MovingAverage(const std::vector<double>& series, int window) {
  if (window < 1) throw ContractViolation("moving average window must be >= 1");
  const std::size_t n = series.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + series[i];
  const std::size_t before = static_cast<std::size_t>(window - 1) / 2;
  const std::size_t after = static_cast<std::size_t>(window) - 1 - before;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= before ? i - before : 0;
    const std::size_t hi = std::min(n, i + after + 1);
    out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

std::string FormatDouble(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw ContractViolation("cannot format number");
  return std::string(buf, ptr);
}

void WriteCsv(std::ostream& os, const std::vector<RunRecord>& records, int weight_columns) {
  os << "seed,step,player,reward,cum_reward,epsilon";
  for (int i = 0; i < weight_columns; ++i) os << ",w_model_" << i;
  os << '\n';
  for (const RunRecord& r : records) {
    os << r.seed << ',' << r.step << ',' << r.player << ',' << FormatDouble(r.reward) << ','
       << FormatDouble(r.cum_reward) << ',' << FormatDouble(r.epsilon);
    for (int i = 0; i < weight_columns; ++i) {
      os << ',';
      if (static_cast<std::size_t>(i) < r.weights.size()) {
        os << FormatDouble(r.weights[static_cast<std::size_t>(i)]);
      }
    }
    os << '\n';
  }
}

void WriteCsv(const std::string& path, const std::vector<RunRecord>& records, int weight_columns) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  WriteCsv(os, records, weight_columns);
  os.flush();
  if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

std::vector<RunRecord> ReadCsv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty CSV: missing header");
  const std::vector<std::string> header = Split(line, ',');
  const std::vector<std::string> fixed = {"seed", "step", "player", "reward", "cum_reward", "epsilon"};
  if (header.size() < fixed.size() || !std::equal(fixed.begin(), fixed.end(), header.begin())) {
    throw ConfigError("CSV header does not match seed,step,player,reward,cum_reward,epsilon");
  }
  std::vector<RunRecord> out;
  long lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const std::vector<std::string> cells = Split(line, ',');
    if (cells.size() != header.size()) {
      throw ConfigError("CSV line " + std::to_string(lineno) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(header.size()));
    }
    RunRecord r;
    r.seed = static_cast<std::uint64_t>(ParseLong(cells[0], "seed"));
    r.step = ParseLong(cells[1], "step");
    r.player = cells[2];
    r.reward = ParseDouble(cells[3], "reward");
    r.cum_reward = ParseDouble(cells[4], "cum_reward");
    r.epsilon = ParseDouble(cells[5], "epsilon");
    for (std::size_t i = fixed.size(); i < cells.size(); ++i) {
      if (!cells[i].empty()) r.weights.push_back(ParseDouble(cells[i], header[i]));
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RunRecord> ReadCsv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open '" + path + "'");
  return ReadCsv(is);
}

void WriteSnapshots(const std::string& path, const RunResult& result) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  for (const ReplicationResult& r : result.replications) {
    for (const nlohmann::json& s : r.snapshots) os << s.dump() << '\n';
  }
  if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

void WriteOutputs(const ExperimentConfig& config, const RunResult& result) {
  if (config.out.empty()) return;
  int columns = 0;
  if (config.snapshots) {
    for (const ReplicationResult& r : result.replications) {
      columns = std::max(columns, static_cast<int>(r.model_names.size()));
    }
  }
  WriteCsv(config.out, result.Records(), columns);
  if (config.snapshots) WriteSnapshots(config.out + ".snapshots.jsonl", result);
}

nlohmann::json SummaryJson(const ExperimentConfig& config, const RunResult& result) {
  const long tail = config.ResolvedTail();
  nlohmann::json j = {{"env", config.env},
                      {"agent_a", config.agent_a.ToString()},
                      {"agent_b", config.agent_b.ToString()},
                      {"budget", config.ResolvedBudget()},
                      {"seeds", config.seeds},
                      {"tail", tail}};
  for (const PlayerSummary& s : Summarize(result, tail)) {
    nlohmann::json p = {{"player", s.player},
                        {"tail_means", s.tail_means},
                        {"mean", s.mean},
                        {"median", s.median},
                        {"stddev", s.stddev}};
    nlohmann::json freqs = nlohmann::json::array();
    for (const ReplicationResult& r : result.replications) {
      const auto it = std::find(r.players.begin(), r.players.end(), s.player);
      const auto& counts = r.action_counts[static_cast<std::size_t>(it - r.players.begin())];
      std::vector<double> f;
      for (std::size_t a = 0; a < counts.size(); ++a) {
        f.push_back(r.ActionFrequency(s.player, static_cast<ActionId>(a)));
      }
      freqs.push_back(std::move(f));
    }
    p["action_frequencies"] = std::move(freqs);
    j["players"].push_back(std::move(p));
  }
  if (!result.replications.empty() && !result.replications.front().model_names.empty()) {
    j["models"] = result.replications.front().model_names;
    for (const ReplicationResult& r : result.replications) j["final_weights"].push_back(r.final_weights);
  }
  return j;
}

// ---------------------------------------------------------------------------
// Sweeps

SweepConfig SweepConfig::FromText(const std::string& text) {
  SweepConfig s;
  for (const auto& [key, value] : ParseKeyValues(text)) {
    if (key.starts_with("sweep.")) {
      SweepAxis axis;
      axis.keys = Split(key.substr(6), '|');
      for (const std::string& item : Split(value, ';')) {
        if (item.empty()) continue;
        std::vector<std::string> values = Split(item, '|');
        if (values.size() != axis.keys.size()) {
          throw ConfigError("sweep entry '" + item + "' does not match keys '" + key + "'");
        }
        axis.values.push_back(std::move(values));
      }
      if (axis.values.empty()) throw ConfigError("sweep axis '" + key + "' has no values");
      s.axes.push_back(std::move(axis));
    } else if (key == "out") {
      s.out = value;
    } else {
      s.base.Set(key, value);
    }
  }
  // Every grid point must form a valid experiment.
  for (const auto& point : s.Points()) {
    ExperimentConfig c = s.base;
    for (const auto& [k, v] : point) c.Set(k, v);
    c.Validate();
  }
  return s;
}

SweepConfig SweepConfig::FromFile(const std::string& path) { return FromText(ReadFile(path)); }

std::vector<std::vector<std::pair<std::string, std::string>>> SweepConfig::Points() const {
  std::vector<std::vector<std::pair<std::string, std::string>>> points{{}};
  for (const SweepAxis& axis : axes) {
    std::vector<std::vector<std::pair<std::string, std::string>>> next;
    for (const auto& prefix : points) {
      for (const auto& values : axis.values) {
        auto p = prefix;
        for (std::size_t i = 0; i < axis.keys.size(); ++i) p.emplace_back(axis.keys[i], values[i]);
        next.push_back(std::move(p));
      }
    }
    points = std::move(next);
  }
  return points;
}

std::vector<SweepRow> RunSweep(const SweepConfig& sweep) {
  std::vector<SweepRow> rows;
  for (const auto& point : sweep.Points()) {
    ExperimentConfig c = sweep.base;
    for (const auto& [k, v] : point) c.Set(k, v);
    c.out.clear();
    const RunResult result = Run(c);
    for (PlayerSummary& s : Summarize(result, c.ResolvedTail())) {
      rows.push_back({point, std::move(s)});
    }
  }
  return rows;
}

void WriteSweepCsv(std::ostream& os, const std::vector<SweepRow>& rows) {
  if (!rows.empty()) {
    for (const auto& [k, v] : rows.front().point) os << k << ',';
  }
  os << "player,seeds,mean,stddev,median\n";
  for (const SweepRow& row : rows) {
    for (const auto& [k, v] : row.point) os << v << ',';
    os << row.summary.player << ',' << row.summary.tail_means.size() << ','
       << FormatDouble(row.summary.mean) << ',' << FormatDouble(row.summary.stddev) << ','
       << FormatDouble(row.summary.median) << '\n';
  }
}

}  // namespace tmdp
