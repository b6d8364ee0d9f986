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

// Learners and scripted players. Every agent sees the world from its own
// seat: Experience::dm_action is its own action and opp_actions[0] is the
// player it models (RoleSwapped builds that view for adversaries).

#ifndef TMDP_AGENTS_HPP_
#define TMDP_AGENTS_HPP_

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "nlohmann/json.hpp"
#include "tmdp/beliefs.hpp"
#include "tmdp/core.hpp"

namespace tmdp {

class Agent {
 public:
  virtual ~Agent() = default;

  virtual ActionId Act(StateId s, Rng& rng) = 0;
  virtual void Observe(const Experience& e) = 0;
  // Applies the exploration decay schedule.
  virtual void OnEpisodeEnd() {}

  virtual double epsilon() const { return 0.0; }
  virtual std::string name() const = 0;

  // Posterior over opponent models; empty unless the agent keeps one.
  virtual std::vector<double> MixtureWeights() const { return {}; }
  // Belief state at `s` for snapshot dumps.
  virtual nlohmann::json Snapshot(StateId /*s*/) const { return nullptr; }
};

// An agent whose per-action values can be inspected, which is what lets
// another agent model it.
class ValueLearner : public Agent {
 public:
  virtual std::vector<double> ActionValues(StateId s) const = 0;
  virtual int num_actions() const = 0;
  // 1 for FPQ, k for level-k; 0 for opponent-unaware learners.
  virtual int level() const = 0;

  // Epsilon-greedy estimate of this learner's policy at `s`.
  PolicyDistribution PredictedPolicy(StateId s) const;
  // Point prediction (lowest-index greedy action).
  ActionId PredictedAction(StateId s) const;
};

// Epsilon with the "multiply by decay every N episodes" schedule.
class Exploration {
 public:
  explicit Exploration(AgentConfig cfg);

  const AgentConfig& cfg() const { return cfg_; }
  void EndEpisode();
  long episodes() const { return episodes_; }

 private:
  AgentConfig cfg_;
  long episodes_ = 0;
};

// Opponent-unaware Q-learning on Q(s, a).
class IndependentQAgent : public ValueLearner {
 public:
  IndependentQAgent(int num_actions, AgentConfig cfg);

  ActionId Act(StateId s, Rng& rng) override;
  void Observe(const Experience& e) override;
  void OnEpisodeEnd() override { explore_.EndEpisode(); }
  double epsilon() const override { return explore_.cfg().epsilon; }
  std::string name() const override { return "q"; }

  std::vector<double> ActionValues(StateId s) const override;
  int num_actions() const override { return q_.num_dm_actions(); }
  int level() const override { return 0; }

  const QTensor& q() const { return q_; }

 private:
  QTensor q_;
  Exploration explore_;
};

enum class BeliefKind { kDirichlet, kStateConditioned };

std::string ToString(BeliefKind kind);
BeliefKind ParseBeliefKind(const std::string& name);

struct FpqOptions {
  BeliefKind belief = BeliefKind::kDirichlet;
  double prior_pseudo_count = 1.0;
  double forget_lambda = 1.0;
  double smoothing_kappa = 1.0;
};

// Level-1 learner: threatened Q-learning with a fictitious-play style
// Dirichlet belief over the opponent's actions, flat or state-conditioned.
class FpqAgent : public ValueLearner {
 public:
  FpqAgent(int num_actions, int num_opp_actions, AgentConfig cfg,
           FpqOptions options = {});

  ActionId Act(StateId s, Rng& rng) override;
  // Belief first, then the Q update bootstrapped with the post-update belief.
  void Observe(const Experience& e) override;
  void OnEpisodeEnd() override { explore_.EndEpisode(); }
  double epsilon() const override { return explore_.cfg().epsilon; }
  std::string name() const override { return "fpq"; }
  nlohmann::json Snapshot(StateId s) const override;

  std::vector<double> ActionValues(StateId s) const override;
  int num_actions() const override { return q_.num_dm_actions(); }
  int level() const override { return 1; }

  PolicyDistribution BeliefAt(StateId s) const;
  const QTensor& q() const { return q_; }
  const FpqOptions& options() const { return options_; }

 private:
  QTensor q_;
  Exploration explore_;
  FpqOptions options_;
  std::variant<DirichletCounts, StateConditionedBelief> belief_;
};

// Level-k learner. Keeps its own Q_k(s, a, b) plus an inner model of the
// opponent as a level-(k-1) learner sitting in the opponent's seat. The
// inner model is trained on the role-swapped view of the same stream and its
// epsilon-greedy policy is the belief p(b | s).
class LevelKAgent : public ValueLearner {
 public:
  LevelKAgent(int level, int num_actions, AgentConfig cfg,
              std::unique_ptr<ValueLearner> inner);

  ActionId Act(StateId s, Rng& rng) override;
  void Observe(const Experience& e) override;
  void OnEpisodeEnd() override;
  double epsilon() const override { return explore_.cfg().epsilon; }
  std::string name() const override { return "level" + std::to_string(level_); }
  nlohmann::json Snapshot(StateId s) const override;

  std::vector<double> ActionValues(StateId s) const override;
  int num_actions() const override { return q_.num_dm_actions(); }
  int level() const override { return level_; }

  PolicyDistribution OpponentBelief(StateId s) const;
  const ValueLearner& inner() const { return *inner_; }
  const QTensor& q() const { return q_; }

 private:
  int level_;
  QTensor q_;
  Exploration explore_;
  std::unique_ptr<ValueLearner> inner_;
};

struct LevelKOptions {
  int num_actions = 2;
  int num_opp_actions = 2;
  AgentConfig self;
  // Shared by every nested model.
  AgentConfig inner;
  // Belief of the level-1 model at the bottom of the chain.
  FpqOptions base;
};

// Builds the chain level k -> k-1 -> ... -> 1 with alternating seats.
// level == 1 returns a plain FpqAgent.
std::unique_ptr<ValueLearner> MakeLevelK(int level, const LevelKOptions& options);

// Decision maker that keeps several opponent models (each a learner in the
// opponent's seat) and weighs them by how often each predicted the observed
// action.
class MixtureAgent : public ValueLearner {
 public:
  MixtureAgent(int num_actions, AgentConfig cfg,
               std::vector<std::unique_ptr<ValueLearner>> members,
               std::vector<std::string> member_names);

  ActionId Act(StateId s, Rng& rng) override;
  void Observe(const Experience& e) override;
  void OnEpisodeEnd() override;
  double epsilon() const override { return explore_.cfg().epsilon; }
  std::string name() const override { return "mixture"; }
  std::vector<double> MixtureWeights() const override { return mixture_.Weights(); }
  nlohmann::json Snapshot(StateId s) const override;

  std::vector<double> ActionValues(StateId s) const override;
  int num_actions() const override { return q_.num_dm_actions(); }
  int level() const override;

  PolicyDistribution OpponentBelief(StateId s) const;
  const ModelMixture& mixture() const { return mixture_; }

 private:
  QTensor q_;
  Exploration explore_;
  std::vector<std::unique_ptr<ValueLearner>> members_;
  ModelMixture mixture_;
};

struct WolfParams {
  double delta_win = 0.0025;
  double delta_lose = 0.01;
};

// WoLF policy hill-climbing: Q(s, a) learning plus a mixed policy that moves
// toward the greedy action by delta_win when the current policy beats the
// running average policy and by delta_lose otherwise.
class WolfPhcAgent : public ValueLearner {
 public:
  WolfPhcAgent(int num_actions, AgentConfig cfg, WolfParams params = {});

  ActionId Act(StateId s, Rng& rng) override;
  void Observe(const Experience& e) override;
  void OnEpisodeEnd() override { explore_.EndEpisode(); }
  double epsilon() const override { return explore_.cfg().epsilon; }
  std::string name() const override { return "wolf"; }

  std::vector<double> ActionValues(StateId s) const override;
  int num_actions() const override { return num_actions_; }
  int level() const override { return 0; }

  PolicyDistribution Policy(StateId s) const;
  PolicyDistribution AveragePolicy(StateId s) const;

 private:
  std::vector<double>& PolicyRow(StateId s);
  std::vector<double>& AverageRow(StateId s);

  int num_actions_;
  QTensor q_;
  Exploration explore_;
  WolfParams params_;
  std::unordered_map<StateId, std::vector<double>> policy_;
  std::unordered_map<StateId, std::vector<double>> average_;
  std::unordered_map<StateId, long> visits_;
};

// Cooperates (action 0) first, then repeats the opponent's previous action.
class TftAgent : public Agent {
 public:
  static constexpr ActionId kCooperate = 0;

  ActionId Act(StateId s, Rng& rng) override;
  void Observe(const Experience& e) override;
  std::string name() const override { return "tft"; }

 private:
  std::optional<ActionId> last_opponent_action_;
};

// Scripted adversary: tracks the opponent's choices with an exponential
// smoother and plays the least likely one. `choice_features[x]` is the
// distribution fed to the smoother when the opponent plays x (one-hot for
// target choices, normalized allocations in Blotto).
class SmootherAdversary : public Agent {
 public:
  SmootherAdversary(SmootherState initial,
                    std::vector<std::vector<double>> choice_features);

  ActionId Act(StateId s, Rng& rng) override;
  void Observe(const Experience& e) override;
  std::string name() const override { return "smoother"; }
  nlohmann::json Snapshot(StateId) const override { return ToJson(state_); }

  const SmootherState& state() const { return state_; }

 private:
  SmootherState state_;
  std::vector<std::vector<double>> features_;
};

// FPQ against several conditionally independent adversaries: Q over
// (s, a, joint adversary action) averaged under the product of per-adversary
// Dirichlet beliefs.
class MultiFpqAgent : public ValueLearner {
 public:
  MultiFpqAgent(int num_actions, std::vector<int> opp_action_counts,
                AgentConfig cfg, FpqOptions options = {});

  ActionId Act(StateId s, Rng& rng) override;
  void Observe(const Experience& e) override;
  void OnEpisodeEnd() override { explore_.EndEpisode(); }
  double epsilon() const override { return explore_.cfg().epsilon; }
  std::string name() const override { return "multi-fpq"; }

  std::vector<double> ActionValues(StateId s) const override;
  int num_actions() const override { return q_.num_dm_actions(); }
  int level() const override { return 1; }

  PolicyDistribution JointBelief() const;
  const QTensor& q() const { return q_; }

 private:
  std::vector<int> sizes_;
  QTensor q_;
  Exploration explore_;
  std::vector<DirichletCounts> beliefs_;
};

// Mixed-radix index of a joint action (first adversary varies fastest).
ActionId JointIndex(std::span<const ActionId> actions, std::span<const int> sizes);

// Joint distribution of independent marginals in JointIndex order.
PolicyDistribution ProductDistribution(std::span<const PolicyDistribution> marginals);

}  // namespace tmdp

#endif  // TMDP_AGENTS_HPP_
