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

// Opponent models: Dirichlet-categorical counts with optional forgetting,
// state-conditioned beliefs, the exponential smoother and the posterior over
// competing opponent models.

#ifndef TMDP_BELIEFS_HPP_
#define TMDP_BELIEFS_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "nlohmann/json.hpp"
#include "tmdp/core.hpp"

namespace tmdp {

// Pseudo-counts alpha_j + h_j of a Dirichlet posterior over opponent actions.
// With forget_lambda < 1 every observation first scales all counts by lambda,
// so the belief tracks roughly the last 1 / (1 - lambda) observations.
class DirichletCounts {
 public:
  explicit DirichletCounts(std::vector<double> alphas, double forget_lambda = 1.0);

  // Symmetric prior with the given pseudo-count per action.
  static DirichletCounts Symmetric(int num_actions, double pseudo_count = 1.0,
                                   double forget_lambda = 1.0);

  // Scale by forget_lambda, then add one to `observed`.
  void Observe(ActionId observed);

  PolicyDistribution PosteriorMean() const;

  std::span<const double> alphas() const { return alphas_; }
  double forget_lambda() const { return forget_lambda_; }
  double Total() const;
  int num_actions() const { return static_cast<int>(alphas_.size()); }

 private:
  std::vector<double> alphas_;
  double forget_lambda_;
};

// p(b | s) proportional to p(s | b) p(b), with p(s | b) from exact per-action
// visit counts (Laplace-smoothed by kappa) and p(b) from a Dirichlet prior
// that observes every action.
class StateConditionedBelief {
 public:
  StateConditionedBelief(DirichletCounts action_prior, double smoothing_kappa = 1.0);

  void Observe(StateId s, ActionId observed);

  // Actions never observed in any state get a uniform p(s | b).
  PolicyDistribution ConditionedBelief(StateId s) const;

  std::int64_t Count(StateId s, ActionId b) const;
  std::int64_t Total(ActionId b) const;
  std::size_t num_visited_states() const { return visited_.size(); }
  const DirichletCounts& action_prior() const { return action_prior_; }
  double smoothing_kappa() const { return kappa_; }
  int num_actions() const { return action_prior_.num_actions(); }

 private:
  std::vector<std::unordered_map<StateId, std::int64_t>> state_counts_;
  std::vector<std::int64_t> totals_;
  std::unordered_set<StateId> visited_;
  DirichletCounts action_prior_;
  double kappa_;
};

// Exponential smoother p := beta p + (1 - beta) a over the decision maker's
// choices, as tracked by the scripted adversaries.
class SmootherState {
 public:
  SmootherState(PolicyDistribution initial, double beta);

  // Uniform start, e.g. (0.5, 0.5) for two targets.
  static SmootherState UniformStart(int num_choices, double beta);

  // One-hot update with choice `action`.
  void Update(ActionId action);
  // Update with an arbitrary distribution `a` (e.g. a normalized allocation).
  void Update(std::span<const double> a);

  // Lowest-index argmin of p.
  ActionId LeastLikely() const;

  const PolicyDistribution& p() const { return p_; }
  double beta() const { return beta_; }

 private:
  PolicyDistribution p_;
  double beta_;
};

// Posterior p(M_i | H) proportional to counts n_i over competing opponent
// models. A model earns a count when its point prediction matches the observed
// action; if no model matched, nothing changes.
class ModelMixture {
 public:
  explicit ModelMixture(std::vector<std::string> model_names,
                        std::vector<double> initial_counts = {});

  void Observe(std::span<const ActionId> predictions, ActionId observed);

  std::vector<double> Weights() const;

  // Posterior-weighted average of the members' beliefs.
  PolicyDistribution Belief(std::span<const PolicyDistribution> per_model) const;

  std::span<const double> counts() const { return counts_; }
  const std::vector<std::string>& model_names() const { return names_; }
  std::size_t size() const { return counts_.size(); }

 private:
  std::vector<std::string> names_;
  std::vector<double> counts_;
};

// Free-function forms of the belief operations.
PolicyDistribution PosteriorMean(const DirichletCounts& d);
PolicyDistribution MixtureBelief(const ModelMixture& m,
                                 std::span<const PolicyDistribution> per_model);

// Snapshot serialization.
nlohmann::json ToJson(const PolicyDistribution& p);
nlohmann::json ToJson(const DirichletCounts& d);
nlohmann::json ToJson(const SmootherState& s);
nlohmann::json ToJson(const ModelMixture& m);

}  // namespace tmdp

#endif  // TMDP_BELIEFS_HPP_
