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

#include "tmdp/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "tmdp/errors.hpp"

namespace tmdp {

DenseQ::DenseQ(int states, int dm, int opp, double fill)
    : num_states(states), num_dm_actions(dm), num_opp_actions(opp) {
  Require(states > 0 && dm > 0 && opp > 0, "dense Q dimensions must be positive");
  values.assign(static_cast<std::size_t>(states) * dm * opp, fill);
}

std::size_t DenseQ::Index(int s, int a, int b) const {
  return (static_cast<std::size_t>(s) * num_dm_actions + a) * num_opp_actions + b;
}

bool DenseQ::SameShape(const DenseQ& other) const {
  return num_states == other.num_states && num_dm_actions == other.num_dm_actions &&
         num_opp_actions == other.num_opp_actions;
}

double SupNorm(const DenseQ& q) {
  double m = 0.0;
  for (double v : q.values) m = std::max(m, std::abs(v));
  return m;
}

double SupDistance(const DenseQ& x, const DenseQ& y) {
  Require(x.SameShape(y), "sup distance between differently shaped tensors");
  double m = 0.0;
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    m = std::max(m, std::abs(x.values[i] - y.values[i]));
  }
  return m;
}

namespace {

std::size_t TransitionIndex(const ExplicitTMDP& m, int s, int a, int b, int next) {
  return ((static_cast<std::size_t>(s) * m.num_dm_actions + a) * m.num_opp_actions + b) *
             m.num_states + next;
}

std::size_t RewardIndex(const ExplicitTMDP& m, int s, int a, int b) {
  return (static_cast<std::size_t>(s) * m.num_dm_actions + a) * m.num_opp_actions + b;
}

std::vector<double> RandomSimplex(int n, Rng& rng) {
  std::vector<double> p(static_cast<std::size_t>(n));
  double total = 0.0;
  for (double& x : p) {
    x = rng.Uniform() + 1e-3;
    total += x;
  }
  for (double& x : p) x /= total;
  return p;
}

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

double ExplicitTMDP::P(int s, int a, int b, int next) const {
  return transition[TransitionIndex(*this, s, a, b, next)];
}
double& ExplicitTMDP::P(int s, int a, int b, int next) {
  return transition[TransitionIndex(*this, s, a, b, next)];
}
double ExplicitTMDP::R(int s, int a, int b) const { return reward[RewardIndex(*this, s, a, b)]; }
double& ExplicitTMDP::R(int s, int a, int b) { return reward[RewardIndex(*this, s, a, b)]; }

void ExplicitTMDP::Validate() const {
  Require(num_states > 0 && num_dm_actions > 0 && num_opp_actions > 0,
          "TMDP dimensions must be positive");
  Require(gamma >= 0.0 && gamma < 1.0, "gamma must lie in [0, 1)");
  const std::size_t sab = static_cast<std::size_t>(num_states) * num_dm_actions * num_opp_actions;
  Require(transition.size() == sab * static_cast<std::size_t>(num_states),
          "transition tensor has the wrong size");
  Require(reward.size() == sab, "reward tensor has the wrong size");
  Require(opp_policy.size() == static_cast<std::size_t>(num_states),
          "one opponent policy per state required");
  for (double r : reward) Require(std::isfinite(r), "rewards must be finite");
  for (int s = 0; s < num_states; ++s) {
    Require(opp_policy[static_cast<std::size_t>(s)].size() ==
                    static_cast<std::size_t>(num_opp_actions) &&
                opp_policy[static_cast<std::size_t>(s)].IsValid(),
            "opponent policy must be a distribution over opponent actions");
    for (int a = 0; a < num_dm_actions; ++a) {
      for (int b = 0; b < num_opp_actions; ++b) {
        double total = 0.0;
        for (int n = 0; n < num_states; ++n) {
          Require(P(s, a, b, n) >= 0.0, "negative transition probability");
          total += P(s, a, b, n);
        }
        Require(std::abs(total - 1.0) <= 1e-9, "transition row does not sum to one");
      }
    }
  }
}

ExplicitTMDP RandomTMDP(int num_states, int num_dm_actions, int num_opp_actions,
                        double gamma, Rng& rng) {
  ExplicitTMDP m;
  m.num_states = num_states;
  m.num_dm_actions = num_dm_actions;
  m.num_opp_actions = num_opp_actions;
  m.gamma = gamma;
  const std::size_t sab = static_cast<std::size_t>(num_states) * num_dm_actions * num_opp_actions;
  m.transition.reserve(sab * static_cast<std::size_t>(num_states));
  for (std::size_t i = 0; i < sab; ++i) {
    for (double p : RandomSimplex(num_states, rng)) m.transition.push_back(p);
  }
  m.reward.resize(sab);
  for (double& r : m.reward) r = 2.0 * rng.Uniform() - 1.0;
  for (int s = 0; s < num_states; ++s) {
    m.opp_policy.emplace_back(RandomSimplex(num_opp_actions, rng));
  }
  m.Validate();
  return m;
}

DenseQ BellmanH(const ExplicitTMDP& m, const DenseQ& q) {
  Require(q.num_states == m.num_states && q.num_dm_actions == m.num_dm_actions &&
              q.num_opp_actions == m.num_opp_actions,
          "Q shape does not match the TMDP");
  std::vector<double> best(static_cast<std::size_t>(m.num_states));
  for (int s = 0; s < m.num_states; ++s) {
    const PolicyDistribution& belief = m.opp_policy[static_cast<std::size_t>(s)];
    double v = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < m.num_dm_actions; ++a) {
      double expected = 0.0;
      for (int b = 0; b < m.num_opp_actions; ++b) {
        expected += belief[static_cast<std::size_t>(b)] * q.at(s, a, b);
      }
      v = std::max(v, expected);
    }
    best[static_cast<std::size_t>(s)] = v;
  }
  DenseQ out(m.num_states, m.num_dm_actions, m.num_opp_actions);
  for (int s = 0; s < m.num_states; ++s) {
    for (int a = 0; a < m.num_dm_actions; ++a) {
      for (int b = 0; b < m.num_opp_actions; ++b) {
        double total = 0.0;
        for (int n = 0; n < m.num_states; ++n) {
          total += m.P(s, a, b, n) * (m.R(s, a, b) + m.gamma * best[static_cast<std::size_t>(n)]);
        }
        out.at(s, a, b) = total;
      }
    }
  }
  return out;
}

double ContractionCheck(const ExplicitTMDP& m, int trials, Rng& rng) {
  Require(trials >= 1, "contraction check needs at least one trial");
  double worst = 0.0;
  DenseQ q1(m.num_states, m.num_dm_actions, m.num_opp_actions);
  DenseQ q2 = q1;
  for (int t = 0; t < trials; ++t) {
    for (double& v : q1.values) v = 20.0 * rng.Uniform() - 10.0;
    for (double& v : q2.values) v = 20.0 * rng.Uniform() - 10.0;
    const double denom = SupDistance(q1, q2);
    if (denom == 0.0) continue;
    worst = std::max(worst, SupDistance(BellmanH(m, q1), BellmanH(m, q2)) / denom);
  }
  return worst;
}

ValueIterationResult ValueIteration(const ExplicitTMDP& m, double tol, const DenseQ* start) {
  Require(tol > 0.0, "value iteration tolerance must be positive");
  ValueIterationResult r;
  r.q = start ? *start : DenseQ(m.num_states, m.num_dm_actions, m.num_opp_actions);
  Require(r.q.num_states == m.num_states && r.q.num_dm_actions == m.num_dm_actions &&
              r.q.num_opp_actions == m.num_opp_actions,
          "initial Q shape does not match the TMDP");
  while (true) {
    DenseQ next = BellmanH(m, r.q);
    const double change = SupDistance(next, r.q);
    r.q = std::move(next);
    ++r.iterations;
    if (change < tol) {
      r.error_bound = m.gamma < 1.0 ? change * m.gamma / (1.0 - m.gamma) : change;
      return r;
    }
  }
}

DenseQ QLearning(const ExplicitTMDP& m, const OracleRunOptions& options, Rng& rng) {
  m.Validate();
  Require(options.steps >= 0, "step budget must be nonnegative");
  Require(options.rate_scale > 0.0, "learning-rate scale must be positive");
  QTensor q(m.num_dm_actions, m.num_opp_actions);
  std::vector<long> visits(m.reward.size(), 0);
  AgentConfig behaviour;
  behaviour.epsilon = options.epsilon;
  int s = options.start_state;
  std::vector<double> row(static_cast<std::size_t>(m.num_states));
  for (long t = 0; t < options.steps; ++t) {
    const PolicyDistribution& belief = m.opp_policy[static_cast<std::size_t>(s)];
    const std::vector<double> psi = QMarginals(q, s, belief);
    const ActionId a = SelectAction(psi, behaviour, rng);
    // Sample b ~ p(b|s) and s' ~ p(s'|s,a,b) by inversion.
    ActionId b = m.num_opp_actions - 1;
    double u = rng.Uniform();
    for (int j = 0; j < m.num_opp_actions; ++j) {
      u -= belief[static_cast<std::size_t>(j)];
      if (u < 0.0) {
        b = j;
        break;
      }
    }
    int next = m.num_states - 1;
    u = rng.Uniform();
    for (int n = 0; n < m.num_states; ++n) {
      u -= m.P(s, a, b, n);
      if (u < 0.0) {
        next = n;
        break;
      }
    }
    long& n_visits = visits[RewardIndex(m, s, a, b)];
    const double alpha = options.rate_scale / (1.0 + static_cast<double>(n_visits));
    ++n_visits;
    Q3Update(q, s, a, b, m.R(s, a, b), next, false,
             m.opp_policy[static_cast<std::size_t>(next)], std::min(alpha, 1.0), m.gamma);
    s = next;
  }
  DenseQ out(m.num_states, m.num_dm_actions, m.num_opp_actions);
  for (int st = 0; st < m.num_states; ++st) {
    for (int a = 0; a < m.num_dm_actions; ++a) {
      for (int b = 0; b < m.num_opp_actions; ++b) out.at(st, a, b) = q.Get(st, a, b);
    }
  }
  return out;
}

double QLearningVsOracle(const ExplicitTMDP& m, const OracleRunOptions& options, Rng& rng) {
  const DenseQ star = ValueIteration(m, 1e-10).q;
  return SupDistance(QLearning(m, options, rng), star);
}

bool SuiteReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

nlohmann::json SuiteReport::ToJson() const {
  nlohmann::json out;
  out["suite"] = suite;
  out["passed"] = passed();
  out["checks"] = nlohmann::json::array();
  for (const CheckResult& c : checks) {
    nlohmann::json j = {{"name", c.name},
                        {"passed", c.passed},
                        {"observed", c.observed},
                        {"threshold", c.threshold},
                        {"seconds", c.seconds}};
    if (!c.details.is_null()) j["details"] = c.details;
    out["checks"].push_back(std::move(j));
  }
  return out;
}

ExplicitTMDP OracleFixture() {
  ExplicitTMDP m;
  m.num_states = 2;
  m.num_dm_actions = 2;
  m.num_opp_actions = 2;
  // With the 1/(1 + visits) schedule the bias from the zero start decays like
  // visits^-(1 - gamma), so the fixture keeps gamma moderate.
  m.gamma = 0.5;
  m.transition.assign(16, 0.0);
  m.reward.assign(8, 0.0);
  // Action 0 tends to stay, action 1 tends to switch; the opponent's action
  // shifts both the reward and the odds.
  const double stay[2][2] = {{0.8, 0.6}, {0.3, 0.1}};
  const double r[2][2][2] = {{{1.0, -1.0}, {0.5, 0.0}}, {{-0.5, 2.0}, {0.0, -1.5}}};
  for (int s = 0; s < 2; ++s) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        m.P(s, a, b, s) = stay[a][b];
        m.P(s, a, b, 1 - s) = 1.0 - stay[a][b];
        m.R(s, a, b) = r[s][a][b];
      }
    }
  }
  m.opp_policy = {PolicyDistribution({0.7, 0.3}), PolicyDistribution({0.4, 0.6})};
  m.Validate();
  return m;
}

SuiteReport RunContractionSuite(std::uint64_t seed) {
  SuiteReport report;
  report.suite = "contraction";
  constexpr int kModels = 20;
  constexpr int kPairs = 1000;
  for (double gamma : {0.5, 0.8, 0.96}) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(DeriveSeed(seed, static_cast<std::uint64_t>(gamma * 1000)));
    double worst = 0.0;
    for (int i = 0; i < kModels; ++i) {
      const int states = 1 + static_cast<int>(rng.Index(5));
      const int dm = 1 + static_cast<int>(rng.Index(3));
      const int opp = 1 + static_cast<int>(rng.Index(3));
      const ExplicitTMDP m = RandomTMDP(states, dm, opp, gamma, rng);
      worst = std::max(worst, ContractionCheck(m, kPairs, rng));
    }
    CheckResult c;
    c.name = "contraction_gamma_" + std::to_string(gamma).substr(0, 4);
    c.observed = worst;
    c.threshold = gamma + 1e-9;
    c.passed = worst <= c.threshold;
    c.seconds = Seconds(t0);
    c.details = {{"models", kModels}, {"pairs_per_model", kPairs}, {"gamma", gamma}};
    report.checks.push_back(std::move(c));
  }
  return report;
}

SuiteReport RunOracleSuite(std::uint64_t seed) {
  SuiteReport report;
  report.suite = "oracle";
  {
    const auto t0 = std::chrono::steady_clock::now();
    const ExplicitTMDP m = OracleFixture();
    const ValueIterationResult vi = ValueIteration(m, 1e-8);
    Rng rng(DeriveSeed(seed, 100));
    OracleRunOptions options;
    options.steps = 500000;
    const double error = SupDistance(QLearning(m, options, rng), vi.q);
    CheckResult c;
    c.name = "q_learning_vs_value_iteration";
    c.observed = error;
    c.threshold = 0.05;
    c.passed = error < c.threshold;
    c.seconds = Seconds(t0);
    c.details = {{"steps", options.steps},
                 {"epsilon", options.epsilon},
                 {"gamma", m.gamma},
                 {"value_iteration_sweeps", vi.iterations}};
    report.checks.push_back(std::move(c));
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    const ExplicitTMDP m = OracleFixture();
    const ValueIterationResult vi = ValueIteration(m, 1e-8);
    const double residual = SupDistance(BellmanH(m, vi.q), vi.q);
    CheckResult c;
    c.name = "value_iteration_fixed_point";
    c.observed = residual;
    c.threshold = 1e-8;
    c.passed = residual < c.threshold;
    c.seconds = Seconds(t0);
    report.checks.push_back(std::move(c));
  }
  return report;
}

SuiteReport RunVerifySuite(const std::string& suite, std::uint64_t seed) {
  if (suite == "contraction") return RunContractionSuite(seed);
  if (suite == "oracle") return RunOracleSuite(seed);
  if (suite == "all") {
    SuiteReport all;
    all.suite = "all";
    for (SuiteReport part : {RunContractionSuite(seed), RunOracleSuite(seed)}) {
      for (CheckResult& c : part.checks) all.checks.push_back(std::move(c));
    }
    return all;
  }
  throw ConfigError("unknown verify suite '" + suite + "' (expected contraction, oracle or all)");
}

}  // namespace tmdp
