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

#include "tmdp/beliefs.hpp"

#include <algorithm>
#include <numeric>

#include "tmdp/errors.hpp"

namespace tmdp {

DirichletCounts::DirichletCounts(std::vector<double> alphas, double forget_lambda)
    : alphas_(std::move(alphas)), forget_lambda_(forget_lambda) {
  Require(!alphas_.empty(), "DirichletCounts needs at least one action");
  Require(forget_lambda_ > 0.0 && forget_lambda_ <= 1.0,
          "forget_lambda must lie in (0, 1]");
  for (double a : alphas_) Require(a >= 0.0, "Dirichlet pseudo-counts must be nonnegative");
}

DirichletCounts DirichletCounts::Symmetric(int num_actions, double pseudo_count,
                                           double forget_lambda) {
  Require(num_actions > 0, "DirichletCounts needs at least one action");
  return DirichletCounts(
      std::vector<double>(static_cast<std::size_t>(num_actions), pseudo_count),
      forget_lambda);
}

void DirichletCounts::Observe(ActionId observed) {
  Require(observed >= 0 && observed < num_actions(),
          "observed action out of range for DirichletCounts");
  if (forget_lambda_ != 1.0) {
    for (double& a : alphas_) a *= forget_lambda_;
  }
  alphas_[static_cast<std::size_t>(observed)] += 1.0;
}

double DirichletCounts::Total() const {
  return std::accumulate(alphas_.begin(), alphas_.end(), 0.0);
}

PolicyDistribution DirichletCounts::PosteriorMean() const {
  const double total = Total();
  Require(total > 0.0, "posterior mean of an all-zero Dirichlet");
  std::vector<double> p(alphas_.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = alphas_[i] / total;
  return PolicyDistribution(std::move(p));
}

PolicyDistribution PosteriorMean(const DirichletCounts& d) { return d.PosteriorMean(); }

StateConditionedBelief::StateConditionedBelief(DirichletCounts action_prior,
                                               double smoothing_kappa)
    : state_counts_(static_cast<std::size_t>(action_prior.num_actions())),
      totals_(static_cast<std::size_t>(action_prior.num_actions()), 0),
      action_prior_(std::move(action_prior)),
      kappa_(smoothing_kappa) {
  Require(kappa_ > 0.0, "smoothing kappa must be positive");
}

void StateConditionedBelief::Observe(StateId s, ActionId observed) {
  Require(observed >= 0 && observed < num_actions(),
          "observed action out of range for StateConditionedBelief");
  const auto b = static_cast<std::size_t>(observed);
  ++state_counts_[b][s];
  ++totals_[b];
  visited_.insert(s);
  action_prior_.Observe(observed);
}

std::int64_t StateConditionedBelief::Count(StateId s, ActionId b) const {
  const auto& counts = state_counts_.at(static_cast<std::size_t>(b));
  auto it = counts.find(s);
  return it == counts.end() ? 0 : it->second;
}

std::int64_t StateConditionedBelief::Total(ActionId b) const {
  return totals_.at(static_cast<std::size_t>(b));
}

PolicyDistribution StateConditionedBelief::ConditionedBelief(StateId s) const {
  const PolicyDistribution prior = action_prior_.PosteriorMean();
  const double visited = static_cast<double>(std::max<std::size_t>(visited_.size(), 1));
  std::vector<double> p(prior.size());
  double total = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    double likelihood;
    if (totals_[j] == 0) {
      likelihood = 1.0 / visited;
    } else {
      likelihood = (static_cast<double>(Count(s, static_cast<ActionId>(j))) + kappa_) /
                   (static_cast<double>(totals_[j]) + kappa_ * visited);
    }
    p[j] = likelihood * prior[j];
    total += p[j];
  }
  if (!(total > 0.0)) return prior;
  for (double& x : p) x /= total;
  return PolicyDistribution(std::move(p));
}

SmootherState::SmootherState(PolicyDistribution initial, double beta)
    : p_(std::move(initial)), beta_(beta) {
  Require(p_.IsValid(), "smoother must start from a distribution");
  Require(beta_ > 0.0 && beta_ < 1.0, "smoother beta must lie in (0, 1)");
}

SmootherState SmootherState::UniformStart(int num_choices, double beta) {
  return SmootherState(PolicyDistribution::Uniform(static_cast<std::size_t>(num_choices)),
                       beta);
}

void SmootherState::Update(ActionId action) {
  Require(action >= 0 && static_cast<std::size_t>(action) < p_.size(),
          "smoother update with out-of-range action");
  for (std::size_t i = 0; i < p_.size(); ++i) {
    const double onehot = static_cast<ActionId>(i) == action ? 1.0 : 0.0;
    p_.probabilities[i] = beta_ * p_.probabilities[i] + (1.0 - beta_) * onehot;
  }
}

void SmootherState::Update(std::span<const double> a) {
  Require(a.size() == p_.size(), "smoother update with wrong dimension");
  for (std::size_t i = 0; i < p_.size(); ++i) {
    p_.probabilities[i] = beta_ * p_.probabilities[i] + (1.0 - beta_) * a[i];
  }
}

ActionId SmootherState::LeastLikely() const {
  const auto& p = p_.probabilities;
  return static_cast<ActionId>(std::min_element(p.begin(), p.end()) - p.begin());
}

ModelMixture::ModelMixture(std::vector<std::string> model_names,
                           std::vector<double> initial_counts)
    : names_(std::move(model_names)), counts_(std::move(initial_counts)) {
  Require(!names_.empty(), "model mixture needs at least one model");
  if (counts_.empty()) counts_.assign(names_.size(), 1.0);
  Require(counts_.size() == names_.size(), "one count per model required");
  for (double n : counts_) Require(n > 0.0, "model counts must be strictly positive");
}

void ModelMixture::Observe(std::span<const ActionId> predictions, ActionId observed) {
  Require(predictions.size() == counts_.size(), "one prediction per model required");
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (predictions[i] == observed) counts_[i] += 1.0;
  }
}

std::vector<double> ModelMixture::Weights() const {
  const double total = std::accumulate(counts_.begin(), counts_.end(), 0.0);
  std::vector<double> w(counts_.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = counts_[i] / total;
  return w;
}

PolicyDistribution ModelMixture::Belief(std::span<const PolicyDistribution> per_model) const {
  Require(per_model.size() == counts_.size(), "one belief per model required");
  if (per_model.size() == 1) return per_model.front();
  const std::size_t n = per_model.front().size();
  const auto w = Weights();
  std::vector<double> p(n, 0.0);
  for (std::size_t i = 0; i < per_model.size(); ++i) {
    Require(per_model[i].size() == n, "member beliefs disagree on dimension");
    for (std::size_t j = 0; j < n; ++j) p[j] += w[i] * per_model[i][j];
  }
  return PolicyDistribution(std::move(p));
}

PolicyDistribution MixtureBelief(const ModelMixture& m,
                                 std::span<const PolicyDistribution> per_model) {
  return m.Belief(per_model);
}

nlohmann::json ToJson(const PolicyDistribution& p) { return p.probabilities; }

nlohmann::json ToJson(const DirichletCounts& d) {
  return {{"alphas", std::vector<double>(d.alphas().begin(), d.alphas().end())},
          {"forget_lambda", d.forget_lambda()},
          {"posterior_mean", d.PosteriorMean().probabilities}};
}

nlohmann::json ToJson(const SmootherState& s) {
  return {{"p", s.p().probabilities}, {"beta", s.beta()}};
}

nlohmann::json ToJson(const ModelMixture& m) {
  return {{"models", m.model_names()},
          {"counts", std::vector<double>(m.counts().begin(), m.counts().end())},
          {"weights", m.Weights()}};
}

}  // namespace tmdp
