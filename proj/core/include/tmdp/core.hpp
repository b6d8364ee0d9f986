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

// Q-value storage, the threatened Q-learning update and action selection.

#ifndef TMDP_CORE_HPP_
#define TMDP_CORE_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "tmdp/rng.hpp"

namespace tmdp {

using StateId = std::int64_t;
using ActionId = int;

enum class PolicyKind { kEpsilonGreedy, kSoftmax };

std::string ToString(PolicyKind kind);
PolicyKind ParsePolicyKind(const std::string& name);

struct AgentConfig {
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon = 0.1;
  // Multiplicative decay applied to epsilon every `decay_every` episodes.
  double epsilon_decay = 1.0;
  int decay_every = 1;
  PolicyKind policy_kind = PolicyKind::kEpsilonGreedy;
  double softmax_temperature = 1.0;
  // Value of every Q entry before its first update.
  double initial_q = 0.0;

  // Throws ConfigError naming the first field out of range.
  void Validate() const;
};

// Probability vector indexed by action id.
struct PolicyDistribution {
  std::vector<double> probabilities;

  PolicyDistribution() = default;
  explicit PolicyDistribution(std::vector<double> p) : probabilities(std::move(p)) {}

  static PolicyDistribution Uniform(std::size_t n);
  static PolicyDistribution Degenerate(std::size_t n, ActionId action);

  std::size_t size() const { return probabilities.size(); }
  double operator[](std::size_t i) const { return probabilities[i]; }

  // Nonnegative entries summing to one within `tol`.
  bool IsValid(double tol = 1e-9) const;
};

// One joint transition. Adversary-indexed vectors have one entry per
// adversary.
struct Experience {
  StateId state = 0;
  ActionId dm_action = 0;
  std::vector<ActionId> opp_actions;
  double reward_dm = 0.0;
  std::vector<double> reward_opp;
  StateId next_state = 0;
  bool terminal = false;

  bool IsWellFormed() const {
    return !opp_actions.empty() && opp_actions.size() == reward_opp.size();
  }
};

// The same transition seen from adversary `index`: its action becomes the
// decision-maker action and the original decision maker becomes opponent 0.
// Other adversaries follow in their original order.
Experience RoleSwapped(const Experience& e, std::size_t index = 0);

// Sparse table Q(s, a, b). Unwritten keys read as `default_value`.
class QTensor {
 public:
  QTensor(int num_dm_actions, int num_opp_actions, double default_value = 0.0);

  double Get(StateId s, ActionId a, ActionId b) const;
  void Set(StateId s, ActionId a, ActionId b, double value);

  int num_dm_actions() const { return num_dm_actions_; }
  int num_opp_actions() const { return num_opp_actions_; }
  double default_value() const { return default_value_; }
  std::size_t size() const { return values_.size(); }

  // max over a' of E_{belief}[Q(s, a', b')]. Expectation inside the max.
  double MaxExpected(StateId s, const PolicyDistribution& belief) const;

  template <typename Fn>
  void ForEach(Fn&& fn) const {
    for (const auto& [key, value] : values_) fn(key.state, key.dm, key.opp, value);
  }

 private:
  struct Key {
    StateId state;
    ActionId dm;
    ActionId opp;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };

  void CheckAction(ActionId a, ActionId b) const;

  int num_dm_actions_;
  int num_opp_actions_;
  double default_value_;
  std::unordered_map<Key, double, KeyHash> values_;
};

// Threatened Q-learning step on the entry (s, a, b) of one transition, with
// an explicit learning rate. A terminal transition bootstraps with 0.
// Returns the new Q(s, a, b).
double Q3Update(QTensor& q, StateId s, ActionId a, ActionId b, double reward,
                StateId next_state, bool terminal,
                const PolicyDistribution& belief_next, double alpha,
                double gamma);

// Same step driven by an Experience, using its first opponent action.
double Q3Update(QTensor& q, const Experience& e,
                const PolicyDistribution& belief_next, const AgentConfig& cfg);

// Sum_j belief[j] * Q(s, a, b_j).
double QMarginal(const QTensor& q, StateId s, ActionId a,
                 const PolicyDistribution& belief);

// QMarginal for every own action.
std::vector<double> QMarginals(const QTensor& q, StateId s,
                               const PolicyDistribution& belief);

// Epsilon-greedy (ties split uniformly at random) or softmax sampling,
// depending on cfg.policy_kind. cfg.epsilon is the current exploration rate.
ActionId SelectAction(std::span<const double> values, const AgentConfig& cfg,
                      Rng& rng);

// Explicit epsilon-greedy distribution: (1 - epsilon) split equally over the
// maximizers plus epsilon / n everywhere.
PolicyDistribution PolicyFromValues(std::span<const double> values,
                                    double epsilon);

// exp(value / temperature), normalized.
PolicyDistribution SoftmaxDistribution(std::span<const double> values,
                                       double temperature);

// Lowest-index argmax.
ActionId GreedyAction(std::span<const double> values);

}  // namespace tmdp

#endif  // TMDP_CORE_HPP_
