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

#include "tmdp/agents.hpp"

#include <algorithm>
#include <numeric>

#include "tmdp/errors.hpp"

namespace tmdp {

PolicyDistribution ValueLearner::PredictedPolicy(StateId s) const {
  return PolicyFromValues(ActionValues(s), epsilon());
}

ActionId ValueLearner::PredictedAction(StateId s) const {
  return GreedyAction(ActionValues(s));
}

Exploration::Exploration(AgentConfig cfg) : cfg_(cfg) { cfg_.Validate(); }

void Exploration::EndEpisode() {
  ++episodes_;
  if (episodes_ % cfg_.decay_every == 0) cfg_.epsilon *= cfg_.epsilon_decay;
}

// ---------------------------------------------------------------------------
// IndependentQAgent

IndependentQAgent::IndependentQAgent(int num_actions, AgentConfig cfg)
    : q_(num_actions, 1, cfg.initial_q), explore_(cfg) {}

std::vector<double> IndependentQAgent::ActionValues(StateId s) const {
  std::vector<double> v(static_cast<std::size_t>(q_.num_dm_actions()));
  for (ActionId a = 0; a < q_.num_dm_actions(); ++a) {
    v[static_cast<std::size_t>(a)] = q_.Get(s, a, 0);
  }
  return v;
}

ActionId IndependentQAgent::Act(StateId s, Rng& rng) {
  return SelectAction(ActionValues(s), explore_.cfg(), rng);
}

void IndependentQAgent::Observe(const Experience& e) {
  // Plain Q-learning is the threatened update with a single dummy opponent
  // action; opponent actions in `e` are ignored.
  static const PolicyDistribution kDummy = PolicyDistribution::Degenerate(1, 0);
  Q3Update(q_, e.state, e.dm_action, 0, e.reward_dm, e.next_state, e.terminal,
           kDummy, explore_.cfg().alpha, explore_.cfg().gamma);
}

// ---------------------------------------------------------------------------
// FpqAgent

std::string ToString(BeliefKind kind) {
  return kind == BeliefKind::kStateConditioned ? "state" : "dirichlet";
}

BeliefKind ParseBeliefKind(const std::string& name) {
  if (name == "dirichlet" || name == "stateless") return BeliefKind::kDirichlet;
  if (name == "state" || name == "stateful") return BeliefKind::kStateConditioned;
  throw ConfigError("unknown belief kind '" + name + "'");
}

namespace {

std::variant<DirichletCounts, StateConditionedBelief> MakeBelief(
    int num_opp_actions, const FpqOptions& o) {
  DirichletCounts prior =
      DirichletCounts::Symmetric(num_opp_actions, o.prior_pseudo_count, o.forget_lambda);
  if (o.belief == BeliefKind::kStateConditioned) {
    return StateConditionedBelief(std::move(prior), o.smoothing_kappa);
  }
  return prior;
}

}  // namespace

FpqAgent::FpqAgent(int num_actions, int num_opp_actions, AgentConfig cfg,
                   FpqOptions options)
    : q_(num_actions, num_opp_actions, cfg.initial_q),
      explore_(cfg),
      options_(options),
      belief_(MakeBelief(num_opp_actions, options)) {}

PolicyDistribution FpqAgent::BeliefAt(StateId s) const {
  if (const auto* d = std::get_if<DirichletCounts>(&belief_)) return d->PosteriorMean();
  return std::get<StateConditionedBelief>(belief_).ConditionedBelief(s);
}

std::vector<double> FpqAgent::ActionValues(StateId s) const {
  return QMarginals(q_, s, BeliefAt(s));
}

ActionId FpqAgent::Act(StateId s, Rng& rng) {
  return SelectAction(ActionValues(s), explore_.cfg(), rng);
}

void FpqAgent::Observe(const Experience& e) {
  Require(e.IsWellFormed(), "FpqAgent: malformed experience");
  if (auto* d = std::get_if<DirichletCounts>(&belief_)) {
    d->Observe(e.opp_actions[0]);
  } else {
    std::get<StateConditionedBelief>(belief_).Observe(e.state, e.opp_actions[0]);
  }
  Q3Update(q_, e, BeliefAt(e.next_state), explore_.cfg());
}

nlohmann::json FpqAgent::Snapshot(StateId s) const {
  return {{"agent", name()}, {"belief", ToJson(BeliefAt(s))}};
}

// ---------------------------------------------------------------------------
// LevelKAgent

LevelKAgent::LevelKAgent(int level, int num_actions, AgentConfig cfg,
                         std::unique_ptr<ValueLearner> inner)
    : level_(level), q_(num_actions, inner ? inner->num_actions() : 1, cfg.initial_q),
      explore_(cfg), inner_(std::move(inner)) {
  if (level_ < 2) throw ConfigError("LevelKAgent needs level >= 2");
  if (!inner_) throw ConfigError("LevelKAgent needs an inner opponent model");
  if (inner_->level() != level_ - 1) {
    throw ConfigError("inner model of a level-" + std::to_string(level_) +
                      " agent must be level-" + std::to_string(level_ - 1));
  }
}

PolicyDistribution LevelKAgent::OpponentBelief(StateId s) const {
  return inner_->PredictedPolicy(s);
}

std::vector<double> LevelKAgent::ActionValues(StateId s) const {
  return QMarginals(q_, s, OpponentBelief(s));
}

ActionId LevelKAgent::Act(StateId s, Rng& rng) {
  return SelectAction(ActionValues(s), explore_.cfg(), rng);
}

void LevelKAgent::Observe(const Experience& e) {
  Require(e.IsWellFormed(), "LevelKAgent: malformed experience");
  inner_->Observe(RoleSwapped(e));
  Q3Update(q_, e, OpponentBelief(e.next_state), explore_.cfg());
}

void LevelKAgent::OnEpisodeEnd() {
  explore_.EndEpisode();
  inner_->OnEpisodeEnd();
}

nlohmann::json LevelKAgent::Snapshot(StateId s) const {
  return {{"agent", name()}, {"belief", ToJson(OpponentBelief(s))}};
}

std::unique_ptr<ValueLearner> MakeLevelK(int level, const LevelKOptions& o) {
  if (level < 1) throw ConfigError("level must be >= 1");
  // Build bottom-up. The level-1 model sits in the top agent's seat when the
  // level is odd and in the opponent's seat when it is even.
  const bool base_in_own_seat = level % 2 == 1;
  const int base_actions = base_in_own_seat ? o.num_actions : o.num_opp_actions;
  const int base_opp = base_in_own_seat ? o.num_opp_actions : o.num_actions;
  const AgentConfig& base_cfg = level == 1 ? o.self : o.inner;
  std::unique_ptr<ValueLearner> model =
      std::make_unique<FpqAgent>(base_actions, base_opp, base_cfg, o.base);
  for (int k = 2; k <= level; ++k) {
    const bool own_seat = (level - k) % 2 == 0;
    const int actions = own_seat ? o.num_actions : o.num_opp_actions;
    const AgentConfig& cfg = k == level ? o.self : o.inner;
    model = std::make_unique<LevelKAgent>(k, actions, cfg, std::move(model));
  }
  return model;
}

// ---------------------------------------------------------------------------
// MixtureAgent

MixtureAgent::MixtureAgent(int num_actions, AgentConfig cfg,
                           std::vector<std::unique_ptr<ValueLearner>> members,
                           std::vector<std::string> member_names)
    : q_(num_actions,
         members.empty() || !members.front() ? 1 : members.front()->num_actions(),
         cfg.initial_q),
      explore_(cfg),
      members_(std::move(members)),
      mixture_(std::move(member_names)) {
  if (members_.empty()) throw ConfigError("MixtureAgent needs at least one member");
  if (members_.size() != mixture_.size()) {
    throw ConfigError("MixtureAgent: one name per member required");
  }
  for (const auto& m : members_) {
    if (!m || m->num_actions() != q_.num_opp_actions()) {
      throw ConfigError("MixtureAgent members must model the same opponent action set");
    }
  }
}

int MixtureAgent::level() const {
  int top = 0;
  for (const auto& m : members_) top = std::max(top, m->level());
  return top + 1;
}

PolicyDistribution MixtureAgent::OpponentBelief(StateId s) const {
  std::vector<PolicyDistribution> beliefs;
  beliefs.reserve(members_.size());
  for (const auto& m : members_) beliefs.push_back(m->PredictedPolicy(s));
  return mixture_.Belief(beliefs);
}

std::vector<double> MixtureAgent::ActionValues(StateId s) const {
  return QMarginals(q_, s, OpponentBelief(s));
}

ActionId MixtureAgent::Act(StateId s, Rng& rng) {
  return SelectAction(ActionValues(s), explore_.cfg(), rng);
}

void MixtureAgent::Observe(const Experience& e) {
  Require(e.IsWellFormed(), "MixtureAgent: malformed experience");
  // Score the predictions the members made for this step before they learn
  // from it.
  std::vector<ActionId> predictions;
  predictions.reserve(members_.size());
  for (const auto& m : members_) predictions.push_back(m->PredictedAction(e.state));
  mixture_.Observe(predictions, e.opp_actions[0]);

  const Experience swapped = RoleSwapped(e);
  for (auto& m : members_) m->Observe(swapped);
  Q3Update(q_, e, OpponentBelief(e.next_state), explore_.cfg());
}

void MixtureAgent::OnEpisodeEnd() {
  explore_.EndEpisode();
  for (auto& m : members_) m->OnEpisodeEnd();
}

nlohmann::json MixtureAgent::Snapshot(StateId s) const {
  return {{"agent", name()},
          {"belief", ToJson(OpponentBelief(s))},
          {"mixture", ToJson(mixture_)}};
}

// ---------------------------------------------------------------------------
// WolfPhcAgent

WolfPhcAgent::WolfPhcAgent(int num_actions, AgentConfig cfg, WolfParams params)
    : num_actions_(num_actions), q_(num_actions, 1, cfg.initial_q), explore_(cfg), params_(params) {
  if (!(params_.delta_win > 0.0 && params_.delta_lose > 0.0)) {
    throw ConfigError("WoLF step sizes must be positive");
  }
  if (params_.delta_win > params_.delta_lose) {
    throw ConfigError("WoLF requires delta_win <= delta_lose");
  }
}

std::vector<double>& WolfPhcAgent::PolicyRow(StateId s) {
  auto [it, inserted] = policy_.try_emplace(s);
  if (inserted) it->second.assign(static_cast<std::size_t>(num_actions_), 1.0 / num_actions_);
  return it->second;
}

std::vector<double>& WolfPhcAgent::AverageRow(StateId s) {
  auto [it, inserted] = average_.try_emplace(s);
  if (inserted) it->second.assign(static_cast<std::size_t>(num_actions_), 1.0 / num_actions_);
  return it->second;
}

PolicyDistribution WolfPhcAgent::Policy(StateId s) const {
  auto it = policy_.find(s);
  if (it == policy_.end()) return PolicyDistribution::Uniform(static_cast<std::size_t>(num_actions_));
  return PolicyDistribution(it->second);
}

PolicyDistribution WolfPhcAgent::AveragePolicy(StateId s) const {
  auto it = average_.find(s);
  if (it == average_.end()) return PolicyDistribution::Uniform(static_cast<std::size_t>(num_actions_));
  return PolicyDistribution(it->second);
}

std::vector<double> WolfPhcAgent::ActionValues(StateId s) const {
  std::vector<double> v(static_cast<std::size_t>(num_actions_));
  for (ActionId a = 0; a < num_actions_; ++a) v[static_cast<std::size_t>(a)] = q_.Get(s, a, 0);
  return v;
}

ActionId WolfPhcAgent::Act(StateId s, Rng& rng) {
  const double eps = explore_.cfg().epsilon;
  if (eps > 0.0 && rng.Uniform() < eps) {
    return static_cast<ActionId>(rng.Index(static_cast<std::size_t>(num_actions_)));
  }
  const std::vector<double>& pi = PolicyRow(s);
  const double u = rng.Uniform();
  double acc = 0.0;
  for (std::size_t a = 0; a < pi.size(); ++a) {
    acc += pi[a];
    if (u < acc) return static_cast<ActionId>(a);
  }
  return static_cast<ActionId>(pi.size() - 1);
}

void WolfPhcAgent::Observe(const Experience& e) {
  static const PolicyDistribution kDummy = PolicyDistribution::Degenerate(1, 0);
  Q3Update(q_, e.state, e.dm_action, 0, e.reward_dm, e.next_state, e.terminal,
           kDummy, explore_.cfg().alpha, explore_.cfg().gamma);

  const StateId s = e.state;
  std::vector<double>& pi = PolicyRow(s);
  std::vector<double>& avg = AverageRow(s);
  const long n = ++visits_[s];
  for (std::size_t a = 0; a < pi.size(); ++a) {
    avg[a] += (pi[a] - avg[a]) / static_cast<double>(n);
  }

  const std::vector<double> values = ActionValues(s);
  double current = 0.0;
  double average = 0.0;
  for (std::size_t a = 0; a < pi.size(); ++a) {
    current += pi[a] * values[a];
    average += avg[a] * values[a];
  }
  const double delta = current > average ? params_.delta_win : params_.delta_lose;

  const auto greedy = static_cast<std::size_t>(GreedyAction(values));
  const double step = delta / static_cast<double>(num_actions_ - 1 > 0 ? num_actions_ - 1 : 1);
  for (std::size_t a = 0; a < pi.size(); ++a) {
    if (a == greedy) continue;
    const double moved = std::min(pi[a], step);
    pi[a] -= moved;
    pi[greedy] += moved;
  }
  // Guard the row against drift from repeated small moves.
  double total = 0.0;
  for (double& p : pi) {
    p = std::max(p, 0.0);
    total += p;
  }
  for (double& p : pi) p /= total;
}

// ---------------------------------------------------------------------------
// TftAgent

ActionId TftAgent::Act(StateId, Rng&) {
  return last_opponent_action_.value_or(kCooperate);
}

void TftAgent::Observe(const Experience& e) {
  Require(!e.opp_actions.empty(), "TftAgent: experience without opponent action");
  last_opponent_action_ = e.opp_actions[0];
}

// ---------------------------------------------------------------------------
// SmootherAdversary

SmootherAdversary::SmootherAdversary(SmootherState initial,
                                     std::vector<std::vector<double>> choice_features)
    : state_(std::move(initial)), features_(std::move(choice_features)) {
  for (const auto& f : features_) {
    if (f.size() != state_.p().size()) {
      throw ConfigError("smoother choice features must match the tracked dimension");
    }
  }
}

ActionId SmootherAdversary::Act(StateId, Rng&) { return state_.LeastLikely(); }

void SmootherAdversary::Observe(const Experience& e) {
  Require(!e.opp_actions.empty(), "SmootherAdversary: experience without opponent action");
  const ActionId x = e.opp_actions[0];
  Require(x >= 0 && static_cast<std::size_t>(x) < features_.size(),
          "SmootherAdversary: observed choice out of range");
  state_.Update(features_[static_cast<std::size_t>(x)]);
}

// ---------------------------------------------------------------------------
// MultiFpqAgent

ActionId JointIndex(std::span<const ActionId> actions, std::span<const int> sizes) {
  Require(actions.size() == sizes.size(), "JointIndex: dimension mismatch");
  ActionId index = 0;
  ActionId radix = 1;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    Require(actions[i] >= 0 && actions[i] < sizes[i], "JointIndex: action out of range");
    index += actions[i] * radix;
    radix *= sizes[i];
  }
  return index;
}

PolicyDistribution ProductDistribution(std::span<const PolicyDistribution> marginals) {
  Require(!marginals.empty(), "ProductDistribution: no marginals");
  std::vector<double> joint{1.0};
  for (const auto& m : marginals) {
    std::vector<double> next(joint.size() * m.size());
    // The earlier factors vary fastest, matching JointIndex.
    for (std::size_t j = 0; j < m.size(); ++j) {
      for (std::size_t i = 0; i < joint.size(); ++i) next[i + j * joint.size()] = joint[i] * m[j];
    }
    joint = std::move(next);
  }
  return PolicyDistribution(std::move(joint));
}

namespace {

int Product(const std::vector<int>& sizes) {
  int p = 1;
  for (int s : sizes) {
    if (s < 1) throw ConfigError("adversary action counts must be positive");
    p *= s;
  }
  return p;
}

}  // namespace

MultiFpqAgent::MultiFpqAgent(int num_actions, std::vector<int> opp_action_counts,
                             AgentConfig cfg, FpqOptions options)
    : sizes_(std::move(opp_action_counts)),
      q_(num_actions, Product(sizes_), cfg.initial_q),
      explore_(cfg) {
  if (sizes_.empty()) throw ConfigError("MultiFpqAgent needs at least one adversary");
  if (options.belief != BeliefKind::kDirichlet) {
    throw ConfigError("MultiFpqAgent supports flat Dirichlet beliefs only");
  }
  for (int n : sizes_) {
    beliefs_.push_back(
        DirichletCounts::Symmetric(n, options.prior_pseudo_count, options.forget_lambda));
  }
}

PolicyDistribution MultiFpqAgent::JointBelief() const {
  std::vector<PolicyDistribution> marginals;
  marginals.reserve(beliefs_.size());
  for (const auto& b : beliefs_) marginals.push_back(b.PosteriorMean());
  return ProductDistribution(marginals);
}

std::vector<double> MultiFpqAgent::ActionValues(StateId s) const {
  return QMarginals(q_, s, JointBelief());
}

ActionId MultiFpqAgent::Act(StateId s, Rng& rng) {
  return SelectAction(ActionValues(s), explore_.cfg(), rng);
}

void MultiFpqAgent::Observe(const Experience& e) {
  Require(e.opp_actions.size() == sizes_.size(),
          "MultiFpqAgent: one action per adversary required");
  for (std::size_t i = 0; i < beliefs_.size(); ++i) beliefs_[i].Observe(e.opp_actions[i]);
  const ActionId joint = JointIndex(e.opp_actions, sizes_);
  Q3Update(q_, e.state, e.dm_action, joint, e.reward_dm, e.next_state, e.terminal,
           JointBelief(), explore_.cfg().alpha, explore_.cfg().gamma);
}

}  // namespace tmdp
