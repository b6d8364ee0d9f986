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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "gtest/gtest.h"
#include "tmdp/core.hpp"
#include "tmdp/errors.hpp"
#include "tmdp/rng.hpp"
#include "tmdp/verify.hpp"

namespace tmdp {
namespace {

Experience Transition(StateId s, ActionId a, ActionId b, double r, StateId next, bool terminal) {
  Experience e;
  e.state = s;
  e.dm_action = a;
  e.opp_actions = {b};
  e.reward_dm = r;
  e.reward_opp = {-r};
  e.next_state = next;
  e.terminal = terminal;
  return e;
}

AgentConfig Greedy() {
  AgentConfig cfg;
  cfg.epsilon = 0.0;
  return cfg;
}

TEST(QTensorTest, UnwrittenKeysReadDefault) {
  QTensor q(2, 3, -4.5);
  EXPECT_EQ(q.Get(7, 1, 2), -4.5);
  q.Set(7, 1, 2, 3.0);
  EXPECT_EQ(q.Get(7, 1, 2), 3.0);
  EXPECT_EQ(q.Get(7, 1, 1), -4.5);
  EXPECT_EQ(q.Get(8, 1, 2), -4.5);
  EXPECT_EQ(q.size(), 1u);
}

TEST(QTensorTest, OutOfRangeActionsAreRejected) {
  QTensor q(2, 2);
  EXPECT_THROW(q.Get(0, 2, 0), ContractViolation);
  EXPECT_THROW(q.Set(0, 0, -1, 1.0), ContractViolation);
}

TEST(Q3UpdateTest, TerminalTransitionBootstrapsWithZero) {
  QTensor q(2, 2);
  AgentConfig cfg;
  cfg.alpha = 0.5;
  cfg.gamma = 0.9;
  q.Set(1, 0, 0, 100.0);
  const double v = Q3Update(q, Transition(0, 0, 0, 1.0, 1, true), PolicyDistribution::Uniform(2), cfg);
  EXPECT_DOUBLE_EQ(v, 0.5);
  EXPECT_DOUBLE_EQ(q.Get(0, 0, 0), 0.5);
}

TEST(Q3UpdateTest, ExpectationIsTakenInsideTheMax) {
  QTensor q(2, 2);
  AgentConfig cfg;
  cfg.alpha = 0.5;
  cfg.gamma = 0.9;
  q.Set(1, 0, 0, 2.0);
  q.Set(1, 0, 1, 2.0);
  const double v = Q3Update(q, Transition(0, 0, 0, 1.0, 1, false), PolicyDistribution({0.5, 0.5}), cfg);
  EXPECT_NEAR(v, 1.4, 1e-12);
}

TEST(Q3UpdateTest, MaxOfExpectationsDiffersFromExpectationOfMaxes) {
  // Q(s',a0,.) = (4, 0) and Q(s',a1,.) = (0, 4): each action's expectation
  // under a uniform belief is 2, while the per-b maximum would average 4.
  QTensor q(2, 2);
  q.Set(1, 0, 0, 4.0);
  q.Set(1, 1, 1, 4.0);
  EXPECT_DOUBLE_EQ(q.MaxExpected(1, PolicyDistribution::Uniform(2)), 2.0);
  const double v = Q3Update(q, 0, 0, 0, 0.0, 1, false, PolicyDistribution::Uniform(2), 1.0, 0.5);
  EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(Q3UpdateTest, BeliefDimensionMismatchIsAContractViolation) {
  QTensor q(2, 2);
  AgentConfig cfg;
  EXPECT_THROW(Q3Update(q, Transition(0, 0, 0, 1.0, 1, false), PolicyDistribution::Uniform(3), cfg),
               ContractViolation);
}

TEST(Q3UpdateTest, DecayingRateConvergesToTheOperatorFixedPoint) {
  // Deterministic two-state chain under a fixed uniform opponent. Sweeping
  // every (s, a, b) with a Robbins-Monro rate must reach the fixed point that
  // the dense value-iteration oracle computes independently.
  ExplicitTMDP m;
  m.num_states = 2;
  m.num_dm_actions = 2;
  m.num_opp_actions = 2;
  m.gamma = 0.5;
  m.transition.assign(16, 0.0);
  m.reward.assign(8, 0.0);
  m.opp_policy = {PolicyDistribution::Uniform(2), PolicyDistribution::Uniform(2)};
  for (int s = 0; s < 2; ++s) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        m.P(s, a, b, (s + a + b) % 2) = 1.0;
        m.R(s, a, b) = (a == b ? 1.0 : -0.5) + 0.25 * s;
      }
    }
  }
  const ValueIterationResult oracle = ValueIteration(m, 1e-12);

  QTensor q(2, 2);
  for (int sweep = 0; sweep < 20000; ++sweep) {
    const double alpha = 1.0 / std::pow(sweep + 1.0, 0.6);
    for (int s = 0; s < 2; ++s) {
      for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
          Q3Update(q, s, a, b, m.R(s, a, b), (s + a + b) % 2, false, PolicyDistribution::Uniform(2),
                   alpha, m.gamma);
        }
      }
    }
  }
  double err = 0.0;
  for (int s = 0; s < 2; ++s) {
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) err = std::max(err, std::abs(q.Get(s, a, b) - oracle.q.at(s, a, b)));
    }
  }
  EXPECT_LT(err, 1e-3);
}

TEST(Q3UpdateTest, ValuesStayWithinTheDiscountedRewardBound) {
  Rng rng(11);
  const double r_max = 3.0;
  const double gamma = 0.9;
  const double bound = r_max / (1.0 - gamma);
  QTensor q(3, 3);
  for (int i = 0; i < 200000; ++i) {
    const auto s = static_cast<StateId>(rng.Index(4));
    const auto a = static_cast<ActionId>(rng.Index(3));
    const auto b = static_cast<ActionId>(rng.Index(3));
    const double r = (2.0 * rng.Uniform() - 1.0) * r_max;
    std::vector<double> w = {rng.Uniform(), rng.Uniform(), rng.Uniform()};
    const double total = w[0] + w[1] + w[2];
    for (double& x : w) x /= total;
    Q3Update(q, s, a, b, r, static_cast<StateId>(rng.Index(4)), rng.Uniform() < 0.1,
             PolicyDistribution(w), rng.Uniform(), gamma);
  }
  q.ForEach([&](StateId, ActionId, ActionId, double v) {
    EXPECT_LE(v, bound);
    EXPECT_GE(v, -bound);
  });
}

TEST(QMarginalTest, WeightsEntriesByTheBelief) {
  QTensor q(1, 2);
  q.Set(0, 0, 0, 1.0);
  q.Set(0, 0, 1, 3.0);
  EXPECT_DOUBLE_EQ(QMarginal(q, 0, 0, PolicyDistribution({0.5, 0.5})), 2.0);
  EXPECT_DOUBLE_EQ(QMarginal(q, 0, 0, PolicyDistribution({1.0, 0.0})), 1.0);
  EXPECT_THROW(QMarginal(q, 0, 0, PolicyDistribution::Uniform(3)), ContractViolation);
}

TEST(QMarginalTest, UniformBeliefIsTheArithmeticMean) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.Index(6));
    QTensor q(2, n);
    std::vector<double> stored(static_cast<std::size_t>(n));
    for (int b = 0; b < n; ++b) {
      stored[static_cast<std::size_t>(b)] = 20.0 * rng.Uniform() - 10.0;
      q.Set(5, 1, b, stored[static_cast<std::size_t>(b)]);
    }
    double sum = 0.0;
    for (double v : stored) sum += v;
    EXPECT_NEAR(QMarginal(q, 5, 1, PolicyDistribution::Uniform(static_cast<std::size_t>(n))), sum / n,
                1e-12);
  }
}

TEST(QMarginalTest, IsLinearInTheBelief) {
  Rng rng(4);
  QTensor q(2, 3);
  for (ActionId b = 0; b < 3; ++b) q.Set(0, 0, b, 10.0 * rng.Uniform() - 5.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> p(3), r(3);
    for (auto* v : {&p, &r}) {
      double t = 0.0;
      for (double& x : *v) t += (x = rng.Uniform());
      for (double& x : *v) x /= t;
    }
    const double lambda = rng.Uniform();
    std::vector<double> mix(3);
    for (std::size_t i = 0; i < 3; ++i) mix[i] = lambda * p[i] + (1.0 - lambda) * r[i];
    const double lhs = QMarginal(q, 0, 0, PolicyDistribution(mix));
    const double rhs = lambda * QMarginal(q, 0, 0, PolicyDistribution(p)) +
                       (1.0 - lambda) * QMarginal(q, 0, 0, PolicyDistribution(r));
    EXPECT_NEAR(lhs, rhs, 1e-9);
  }
}

TEST(SelectActionTest, GreedyPicksTheUniqueMaximizer) {
  Rng rng(1);
  const std::vector<double> values = {5.0, 1.0, 1.0};
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(SelectAction(values, Greedy(), rng), 0);
}

TEST(SelectActionTest, TiesAreBrokenUniformly) {
  Rng rng(2);
  const std::vector<double> values = {2.0, 2.0};
  int zeros = 0;
  for (int i = 0; i < 10000; ++i) zeros += SelectAction(values, Greedy(), rng) == 0;
  EXPECT_NEAR(zeros / 10000.0, 0.5, 0.02);
}

TEST(SelectActionTest, SoftmaxWithEqualValuesIsUniform) {
  Rng rng(3);
  AgentConfig cfg;
  cfg.policy_kind = PolicyKind::kSoftmax;
  for (double temperature : {0.1, 1.0, 25.0}) {
    cfg.softmax_temperature = temperature;
    const std::vector<double> values = {0.0, 0.0};
    int zeros = 0;
    for (int i = 0; i < 10000; ++i) zeros += SelectAction(values, cfg, rng) == 0;
    EXPECT_NEAR(zeros / 10000.0, 0.5, 0.02);
  }
}

TEST(SelectActionTest, EmptyValuesAreAContractViolation) {
  Rng rng(4);
  EXPECT_THROW(SelectAction(std::vector<double>{}, Greedy(), rng), ContractViolation);
}

TEST(SelectActionTest, GreedyChoiceIsInvariantToPositiveAffineMaps) {
  Rng values_rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(4);
    for (double& x : v) x = std::round(values_rng.Uniform() * 4.0);
    const double c = 0.1 + 10.0 * values_rng.Uniform();
    const double d = 20.0 * values_rng.Uniform() - 10.0;
    std::vector<double> w(v.size());
    std::transform(v.begin(), v.end(), w.begin(), [&](double x) { return c * x + d; });
    Rng r1(100 + static_cast<std::uint64_t>(trial));
    Rng r2(100 + static_cast<std::uint64_t>(trial));
    for (int i = 0; i < 50; ++i) EXPECT_EQ(SelectAction(v, Greedy(), r1), SelectAction(w, Greedy(), r2));
  }
}

TEST(SelectActionTest, ExplorationFrequencyMatchesEpsilon) {
  Rng rng(6);
  AgentConfig cfg;
  cfg.epsilon = 0.3;
  const std::vector<double> values = {0.0, 1.0};
  int zeros = 0;
  for (int i = 0; i < 20000; ++i) zeros += SelectAction(values, cfg, rng) == 0;
  EXPECT_NEAR(zeros / 20000.0, 0.15, 0.01);
}

TEST(PolicyFromValuesTest, Examples) {
  const PolicyDistribution a = PolicyFromValues(std::vector<double>{5.0, 1.0}, 0.1);
  EXPECT_NEAR(a[0], 0.95, 1e-12);
  EXPECT_NEAR(a[1], 0.05, 1e-12);
  const PolicyDistribution b = PolicyFromValues(std::vector<double>{3.0, 3.0}, 0.2);
  EXPECT_NEAR(b[0], 0.5, 1e-12);
  EXPECT_NEAR(b[1], 0.5, 1e-12);
  const PolicyDistribution c = PolicyFromValues(std::vector<double>{1.0, 2.0, 3.0}, 0.3);
  EXPECT_NEAR(c[0], 0.1, 1e-12);
  EXPECT_NEAR(c[1], 0.1, 1e-12);
  EXPECT_NEAR(c[2], 0.8, 1e-12);
}

TEST(PolicyFromValuesTest, IsADistributionWithTheExplorationFloor) {
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.Index(6);
    std::vector<double> v(n);
    for (double& x : v) x = std::round(rng.Uniform() * 3.0);
    const double eps = rng.Uniform();
    const PolicyDistribution p = PolicyFromValues(v, eps);
    EXPECT_TRUE(p.IsValid(1e-9));
    for (std::size_t i = 0; i < n; ++i) EXPECT_GE(p[i], eps / static_cast<double>(n) - 1e-15);
  }
}

TEST(PolicyFromValuesTest, MatchesTheSamplingFrequencies) {
  Rng rng(8);
  AgentConfig cfg;
  cfg.epsilon = 0.4;
  const std::vector<double> values = {1.0, 3.0, 3.0, 0.0};
  const PolicyDistribution p = PolicyFromValues(values, cfg.epsilon);
  std::vector<int> counts(4, 0);
  const int n = 40000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(SelectAction(values, cfg, rng))];
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(counts[i] / static_cast<double>(n), p[i], 0.01);
}

TEST(SoftmaxTest, MatchesTheClosedForm) {
  const PolicyDistribution p = SoftmaxDistribution(std::vector<double>{0.0, std::log(3.0)}, 1.0);
  EXPECT_NEAR(p[0], 0.25, 1e-12);
  EXPECT_NEAR(p[1], 0.75, 1e-12);
  const PolicyDistribution big = SoftmaxDistribution(std::vector<double>{1000.0, 0.0}, 1.0);
  EXPECT_TRUE(big.IsValid());
  EXPECT_NEAR(big[0], 1.0, 1e-12);
}

TEST(AgentConfigTest, RejectsOutOfRangeFields) {
  AgentConfig ok;
  EXPECT_NO_THROW(ok.Validate());
  auto bad = [](auto mutate) {
    AgentConfig cfg;
    mutate(cfg);
    EXPECT_THROW(cfg.Validate(), ConfigError);
  };
  bad([](AgentConfig& c) { c.alpha = 0.0; });
  bad([](AgentConfig& c) { c.alpha = 1.5; });
  bad([](AgentConfig& c) { c.gamma = 1.0; });
  bad([](AgentConfig& c) { c.epsilon = -0.1; });
  bad([](AgentConfig& c) { c.epsilon_decay = 0.0; });
  bad([](AgentConfig& c) { c.decay_every = 0; });
  bad([](AgentConfig& c) { c.softmax_temperature = 0.0; });
  bad([](AgentConfig& c) { c.initial_q = std::nan(""); });
}

TEST(RoleSwapTest, SwapsTheChosenAdversaryIntoTheDecisionSeat) {
  Experience e;
  e.state = 3;
  e.next_state = 4;
  e.dm_action = 1;
  e.opp_actions = {2, 0, 1};
  e.reward_dm = 5.0;
  e.reward_opp = {-1.0, -2.0, -3.0};
  const Experience s = RoleSwapped(e, 1);
  EXPECT_EQ(s.dm_action, 0);
  EXPECT_EQ(s.reward_dm, -2.0);
  EXPECT_EQ(s.opp_actions, (std::vector<ActionId>{1, 2, 1}));
  EXPECT_EQ(s.reward_opp, (std::vector<double>{5.0, -1.0, -3.0}));
  EXPECT_EQ(s.state, 3);
  EXPECT_EQ(s.next_state, 4);
  const Experience back = RoleSwapped(RoleSwapped(e, 0), 0);
  EXPECT_EQ(back.dm_action, e.dm_action);
  EXPECT_EQ(back.opp_actions, e.opp_actions);
  EXPECT_EQ(back.reward_opp, e.reward_opp);
}

TEST(RngTest, DerivedStreamsAreFixedAndDistinct) {
  EXPECT_EQ(DeriveSeed(42, 1), DeriveSeed(42, 1));
  EXPECT_NE(DeriveSeed(42, 1), DeriveSeed(42, 2));
  EXPECT_NE(DeriveSeed(42, 1), DeriveSeed(43, 1));
  Rng a(DeriveSeed(9, 1));
  Rng b(DeriveSeed(9, 1));
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.NextU64(), b.NextU64());
}

}  // namespace
}  // namespace tmdp
