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

#include "tmdp/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tmdp/errors.hpp"

namespace tmdp {

std::uint64_t DeriveSeed(std::uint64_t master, std::uint64_t component) {
  // splitmix64 finalizer over (master, component).
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (component + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string ToString(PolicyKind kind) {
  return kind == PolicyKind::kSoftmax ? "softmax" : "egreedy";
}

PolicyKind ParsePolicyKind(const std::string& name) {
  if (name == "softmax") return PolicyKind::kSoftmax;
  if (name == "egreedy" || name == "epsilon_greedy") {
    return PolicyKind::kEpsilonGreedy;
  }
  throw ConfigError("unknown policy kind '" + name + "'");
}

void AgentConfig::Validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ConfigError("alpha must lie in (0, 1], got " + std::to_string(alpha));
  }
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw ConfigError("gamma must lie in (0, 1), got " + std::to_string(gamma));
  }
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ConfigError("epsilon must lie in [0, 1], got " +
                      std::to_string(epsilon));
  }
  if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0)) {
    throw ConfigError("epsilon_decay must lie in (0, 1], got " +
                      std::to_string(epsilon_decay));
  }
  if (decay_every < 1) throw ConfigError("decay_every must be positive");
  if (!(softmax_temperature > 0.0)) {
    throw ConfigError("softmax_temperature must be positive");
  }
  if (!std::isfinite(initial_q)) throw ConfigError("initial_q must be finite");
}

PolicyDistribution PolicyDistribution::Uniform(std::size_t n) {
  Require(n > 0, "uniform distribution over zero actions");
  return PolicyDistribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

PolicyDistribution PolicyDistribution::Degenerate(std::size_t n, ActionId action) {
  Require(action >= 0 && static_cast<std::size_t>(action) < n,
          "degenerate distribution action out of range");
  std::vector<double> p(n, 0.0);
  p[static_cast<std::size_t>(action)] = 1.0;
  return PolicyDistribution(std::move(p));
}

bool PolicyDistribution::IsValid(double tol) const {
  if (probabilities.empty()) return false;
  double total = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) return false;
    total += p;
  }
  return std::abs(total - 1.0) <= tol;
}

Experience RoleSwapped(const Experience& e, std::size_t index) {
  Require(index < e.opp_actions.size() && index < e.reward_opp.size(),
          "role swap index out of range");
  Experience out;
  out.state = e.state;
  out.next_state = e.next_state;
  out.terminal = e.terminal;
  out.dm_action = e.opp_actions[index];
  out.reward_dm = e.reward_opp[index];
  out.opp_actions.push_back(e.dm_action);
  out.reward_opp.push_back(e.reward_dm);
  for (std::size_t i = 0; i < e.opp_actions.size(); ++i) {
    if (i == index) continue;
    out.opp_actions.push_back(e.opp_actions[i]);
    out.reward_opp.push_back(e.reward_opp[i]);
  }
  return out;
}

std::size_t QTensor::KeyHash::operator()(const Key& k) const noexcept {
  std::uint64_t h = static_cast<std::uint64_t>(k.state) * 0x9E3779B97F4A7C15ULL;
  h ^= (static_cast<std::uint64_t>(k.dm) + 0x632BE59BD9B4E019ULL) + (h << 6) + (h >> 2);
  h ^= (static_cast<std::uint64_t>(k.opp) + 0x8CB92BA72F3D8DD7ULL) + (h << 6) + (h >> 2);
  return static_cast<std::size_t>(h);
}

QTensor::QTensor(int num_dm_actions, int num_opp_actions, double default_value)
    : num_dm_actions_(num_dm_actions),
      num_opp_actions_(num_opp_actions),
      default_value_(default_value) {
  Require(num_dm_actions > 0 && num_opp_actions > 0,
          "QTensor needs at least one action per player");
}

void QTensor::CheckAction(ActionId a, ActionId b) const {
  Require(a >= 0 && a < num_dm_actions_, "QTensor: own action out of range");
  Require(b >= 0 && b < num_opp_actions_, "QTensor: opponent action out of range");
}

double QTensor::Get(StateId s, ActionId a, ActionId b) const {
  CheckAction(a, b);
  auto it = values_.find(Key{s, a, b});
  return it == values_.end() ? default_value_ : it->second;
}

void QTensor::Set(StateId s, ActionId a, ActionId b, double value) {
  CheckAction(a, b);
  values_[Key{s, a, b}] = value;
}

double QTensor::MaxExpected(StateId s, const PolicyDistribution& belief) const {
  Require(belief.size() == static_cast<std::size_t>(num_opp_actions_),
          "belief dimension does not match the opponent action set");
  double best = -std::numeric_limits<double>::infinity();
  for (ActionId a = 0; a < num_dm_actions_; ++a) {
    best = std::max(best, QMarginal(*this, s, a, belief));
  }
  return best;
}

double Q3Update(QTensor& q, StateId s, ActionId a, ActionId b, double reward,
                StateId next_state, bool terminal,
                const PolicyDistribution& belief_next, double alpha,
                double gamma) {
  Require(belief_next.size() == static_cast<std::size_t>(q.num_opp_actions()),
          "belief dimension does not match the opponent action set");
  const double bootstrap = terminal ? 0.0 : q.MaxExpected(next_state, belief_next);
  const double updated =
      (1.0 - alpha) * q.Get(s, a, b) + alpha * (reward + gamma * bootstrap);
  q.Set(s, a, b, updated);
  return updated;
}

double Q3Update(QTensor& q, const Experience& e,
                const PolicyDistribution& belief_next, const AgentConfig& cfg) {
  Require(e.IsWellFormed(), "malformed experience");
  return Q3Update(q, e.state, e.dm_action, e.opp_actions[0], e.reward_dm,
                  e.next_state, e.terminal, belief_next, cfg.alpha, cfg.gamma);
}

double QMarginal(const QTensor& q, StateId s, ActionId a,
                 const PolicyDistribution& belief) {
  Require(belief.size() == static_cast<std::size_t>(q.num_opp_actions()),
          "belief dimension does not match the opponent action set");
  double total = 0.0;
  for (ActionId b = 0; b < q.num_opp_actions(); ++b) {
    const double w = belief[static_cast<std::size_t>(b)];
    if (w != 0.0) total += w * q.Get(s, a, b);
  }
  return total;
}

std::vector<double> QMarginals(const QTensor& q, StateId s,
                               const PolicyDistribution& belief) {
  std::vector<double> out(static_cast<std::size_t>(q.num_dm_actions()));
  for (ActionId a = 0; a < q.num_dm_actions(); ++a) {
    out[static_cast<std::size_t>(a)] = QMarginal(q, s, a, belief);
  }
  return out;
}

namespace {

std::vector<std::size_t> Maximizers(std::span<const double> values) {
  const double best = *std::max_element(values.begin(), values.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == best) out.push_back(i);
  }
  return out;
}

}  // namespace

ActionId SelectAction(std::span<const double> values, const AgentConfig& cfg,
                      Rng& rng) {
  Require(!values.empty(), "SelectAction: empty value vector");
  if (cfg.policy_kind == PolicyKind::kSoftmax) {
    const PolicyDistribution p = SoftmaxDistribution(values, cfg.softmax_temperature);
    const double u = rng.Uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      acc += p[i];
      if (u < acc) return static_cast<ActionId>(i);
    }
    return static_cast<ActionId>(p.size() - 1);
  }
  if (cfg.epsilon > 0.0 && rng.Uniform() < cfg.epsilon) {
    return static_cast<ActionId>(rng.Index(values.size()));
  }
  const auto best = Maximizers(values);
  if (best.size() == 1) return static_cast<ActionId>(best.front());
  return static_cast<ActionId>(best[rng.Index(best.size())]);
}

PolicyDistribution PolicyFromValues(std::span<const double> values,
                                    double epsilon) {
  Require(!values.empty(), "PolicyFromValues: empty value vector");
  Require(epsilon >= 0.0 && epsilon <= 1.0, "PolicyFromValues: epsilon outside [0, 1]");
  const auto n = static_cast<double>(values.size());
  std::vector<double> p(values.size(), epsilon / n);
  const auto best = Maximizers(values);
  const double share = (1.0 - epsilon) / static_cast<double>(best.size());
  for (std::size_t i : best) p[i] += share;
  return PolicyDistribution(std::move(p));
}

PolicyDistribution SoftmaxDistribution(std::span<const double> values,
                                       double temperature) {
  Require(!values.empty(), "SoftmaxDistribution: empty value vector");
  Require(temperature > 0.0, "SoftmaxDistribution: temperature must be positive");
  const double top = *std::max_element(values.begin(), values.end());
  std::vector<double> p(values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    p[i] = std::exp((values[i] - top) / temperature);
    total += p[i];
  }
  for (double& x : p) x /= total;
  return PolicyDistribution(std::move(p));
}

ActionId GreedyAction(std::span<const double> values) {
  Require(!values.empty(), "GreedyAction: empty value vector");
  return static_cast<ActionId>(
      std::max_element(values.begin(), values.end()) - values.begin());
}

}  // namespace tmdp
