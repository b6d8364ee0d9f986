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

// Dense oracles for small, fully specified TMDPs: the threatened Bellman
// operator, its contraction check, value iteration and a Q-learning run
// compared against the fixed point.

#ifndef TMDP_VERIFY_HPP_
#define TMDP_VERIFY_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "nlohmann/json.hpp"
#include "tmdp/core.hpp"
#include "tmdp/rng.hpp"

namespace tmdp {

// Dense Q(s, a, b), b fastest.
struct DenseQ {
  int num_states = 0;
  int num_dm_actions = 0;
  int num_opp_actions = 0;
  std::vector<double> values;

  DenseQ() = default;
  DenseQ(int states, int dm, int opp, double fill = 0.0);

  std::size_t Index(int s, int a, int b) const;
  double& at(int s, int a, int b) { return values[Index(s, a, b)]; }
  double at(int s, int a, int b) const { return values[Index(s, a, b)]; }
  bool SameShape(const DenseQ& other) const;
};

double SupNorm(const DenseQ& q);
double SupDistance(const DenseQ& x, const DenseQ& y);

struct ExplicitTMDP {
  int num_states = 1;
  int num_dm_actions = 1;
  int num_opp_actions = 1;
  // p(s' | s, a, b), indexed [((s * A + a) * B + b) * S + s'].
  std::vector<double> transition;
  // r(s, a, b), indexed like DenseQ.
  std::vector<double> reward;
  // p(b | s) per state.
  std::vector<PolicyDistribution> opp_policy;
  double gamma = 0.9;

  double P(int s, int a, int b, int next) const;
  double& P(int s, int a, int b, int next);
  double R(int s, int a, int b) const;
  double& R(int s, int a, int b);

  // Throws ContractViolation on malformed tensors.
  void Validate() const;
};

// Transitions and rewards drawn at random (rewards uniform in [-1, 1],
// transition rows and opponent policies from normalized uniforms).
ExplicitTMDP RandomTMDP(int num_states, int num_dm_actions, int num_opp_actions,
                        double gamma, Rng& rng);

// (Hq)(s,a,b) = sum_s' p(s'|s,a,b) [r(s,a,b) + gamma max_a' E_{p(b'|s')} q(s',a',b')].
DenseQ BellmanH(const ExplicitTMDP& m, const DenseQ& q);

// max over `trials` random pairs with entries in [-10, 10] of
// |Hq1 - Hq2|_inf / |q1 - q2|_inf. Identical pairs are skipped.
double ContractionCheck(const ExplicitTMDP& m, int trials, Rng& rng);

struct ValueIterationResult {
  DenseQ q;
  int iterations = 0;
  // A posteriori bound on |q - Q*|_inf.
  double error_bound = 0.0;
};

// Iterates H from `start` (zero when empty) until successive iterates differ
// by less than `tol` in sup norm.
ValueIterationResult ValueIteration(const ExplicitTMDP& m, double tol,
                                    const DenseQ* start = nullptr);

struct OracleRunOptions {
  long steps = 500000;
  double epsilon = 0.3;
  // Learning rate c / (1 + visits(s, a, b)).
  double rate_scale = 1.0;
  int start_state = 0;
};

// Tabular threatened Q-learning along one trajectory, with the true opponent
// policy as the belief and opponents sampled from it. Returns the learned Q.
DenseQ QLearning(const ExplicitTMDP& m, const OracleRunOptions& options, Rng& rng);

// |Q_learned - Q*|_inf with Q* from value iteration at tolerance 1e-10.
double QLearningVsOracle(const ExplicitTMDP& m, const OracleRunOptions& options,
                         Rng& rng);

struct CheckResult {
  std::string name;
  bool passed = false;
  double observed = 0.0;
  double threshold = 0.0;
  double seconds = 0.0;
  nlohmann::json details;
};

struct SuiteReport {
  std::string suite;
  std::vector<CheckResult> checks;

  bool passed() const;
  nlohmann::json ToJson() const;
};

// The 2-state, 2x2 TMDP used by the oracle suite.
ExplicitTMDP OracleFixture();

SuiteReport RunContractionSuite(std::uint64_t seed = 1);
SuiteReport RunOracleSuite(std::uint64_t seed = 1);
// "contraction", "oracle" or "all"; throws ConfigError otherwise.
SuiteReport RunVerifySuite(const std::string& suite, std::uint64_t seed = 1);

}  // namespace tmdp

#endif  // TMDP_VERIFY_HPP_
