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

#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "tmdp/agents.hpp"
#include "tmdp/envs.hpp"
#include "tmdp/errors.hpp"

namespace tmdp {
namespace {

constexpr ActionId kC = 0;
constexpr ActionId kD = 1;

TEST(MatrixGameTest, PayoffsFollowTheTables) {
  const Experience ipd = MatrixStep(MatrixGameSpec::PrisonersDilemma(), 0, kC, kC);
  EXPECT_EQ(ipd.reward_dm, -1.0);
  EXPECT_EQ(ipd.reward_opp[0], -1.0);
  const Experience ish = MatrixStep(MatrixGameSpec::StagHunt(), 0, kC, kD);
  EXPECT_EQ(ish.reward_dm, 0.0);
  EXPECT_EQ(ish.reward_opp[0], 1.0);
  const Experience ic = MatrixStep(MatrixGameSpec::Chicken(), 0, kD, kD);
  EXPECT_EQ(ic.reward_dm, -4.0);
  EXPECT_EQ(ic.reward_opp[0], -4.0);
  EXPECT_FALSE(ic.terminal);
}

TEST(MatrixGameTest, PrisonersDilemmaIsSymmetric) {
  const MatrixGameSpec pd = MatrixGameSpec::PrisonersDilemma();
  for (ActionId a = 0; a < 2; ++a) {
    for (ActionId b = 0; b < 2; ++b) {
      EXPECT_EQ(MatrixStep(pd, 0, a, b).reward_dm, MatrixStep(pd, 0, b, a).reward_opp[0]);
    }
  }
}

TEST(MatrixGameTest, MemoryOneVisitsExactlyFiveStates) {
  MatrixGameSpec spec = MatrixGameSpec::PrisonersDilemma();
  spec.memory = Memory::kOne;
  MatrixGame game(spec, "ipd-mem1");
  Rng rng(1);
  std::set<StateId> seen = {game.Reset()};
  for (int t = 0; t < 2000; ++t) {
    const auto a = static_cast<ActionId>(rng.Index(2));
    const std::vector<ActionId> b = {static_cast<ActionId>(rng.Index(2))};
    const Experience e = game.Step(a, b);
    EXPECT_EQ(e.next_state, MemoryOneState(a, b[0]));
    seen.insert(e.next_state);
  }
  EXPECT_EQ(seen.size(), 5u);
}

TEST(MatrixGameTest, MemorylessStaysInOneState) {
  MatrixGame game(MatrixGameSpec::Chicken(), "ic");
  EXPECT_EQ(game.Reset(), kInitialState);
  const std::vector<ActionId> b = {kD};
  EXPECT_EQ(game.Step(kC, b).next_state, kInitialState);
}

TEST(MatrixGameTest, RejectsActionsOutsideCooperateDefect) {
  EXPECT_THROW(MatrixStep(MatrixGameSpec::StagHunt(), 0, 2, 0), ContractViolation);
}

// ---------------------------------------------------------------------------
// Friend-or-foe

TEST(StatelessFofTest, TieGoesToTheFirstTarget) {
  SmootherState adv = SmootherState::UniformStart(2, 0.8);
  const Experience e = StatelessFofStep(0, adv);
  EXPECT_EQ(e.reward_dm, 50.0);
  EXPECT_NEAR(adv.p()[0], 0.6, 1e-12);
}

TEST(StatelessFofTest, RewardsTheLeastLikelyTarget) {
  SmootherState adv(PolicyDistribution({0.6, 0.4}), 0.8);
  EXPECT_EQ(StatelessFofStep(1, adv).reward_dm, 50.0);
}

TEST(StatelessFofTest, AlwaysTheSameTargetLosesForever) {
  SmootherState adv = SmootherState::UniformStart(2, 0.8);
  StatelessFofStep(0, adv);
  for (int t = 0; t < 200; ++t) EXPECT_EQ(StatelessFofStep(0, adv).reward_dm, -50.0);
  EXPECT_NEAR(adv.p()[0], 1.0, 1e-12);
}

TEST(StatelessFofTest, MinimaxScalingIsZeroSum) {
  SmootherState adv = SmootherState::UniformStart(2, 0.8);
  Rng rng(2);
  for (int t = 0; t < 1000; ++t) {
    const Experience e = StatelessFofStep(static_cast<ActionId>(rng.Index(2)), adv);
    EXPECT_EQ(e.reward_dm + e.reward_opp[0], 0.0);
  }
}

TEST(StatelessFofTest, AlternativeScalingsFollowTheOutcome) {
  EXPECT_EQ(ScaledOpponentReward(RewardScaling::kPlusMinusOne, 50.0, 1), -1.0);
  EXPECT_EQ(ScaledOpponentReward(RewardScaling::kPlusMinusOne, -50.0, -1), 1.0);
  EXPECT_EQ(ScaledOpponentReward(RewardScaling::kZeroOne, 50.0, 1), 0.0);
  EXPECT_EQ(ScaledOpponentReward(RewardScaling::kZeroOne, -50.0, -1), 1.0);
  EXPECT_EQ(ParseRewardScaling("zero-sum"), RewardScaling::kMinimax);
  EXPECT_EQ(ParseRewardScaling("-1,1"), RewardScaling::kPlusMinusOne);
  EXPECT_EQ(ParseRewardScaling("0,1"), RewardScaling::kZeroOne);
  EXPECT_THROW(ParseRewardScaling("other"), ConfigError);
  EXPECT_FALSE(StatelessFriendOrFoe(RewardScaling::kNone).emits_opponent_reward());
}

double Level2AgainstSmoother(bool mirrored) {
  // Mirroring the target labels turns the adversary's lowest-index tie rule
  // into a highest-index one without touching the library.
  LevelKOptions o;
  o.self.alpha = o.inner.alpha = 0.1;
  o.self.gamma = o.inner.gamma = 0.8;
  o.self.epsilon = o.inner.epsilon = 0.1;
  o.base.forget_lambda = 0.8;
  std::unique_ptr<ValueLearner> agent = MakeLevelK(2, o);
  SmootherState adv = SmootherState::UniformStart(2, 0.8);
  Rng rng(3);
  double tail = 0.0;
  for (int t = 0; t < 5000; ++t) {
    const ActionId a = agent->Act(0, rng);
    Experience e = StatelessFofStep(mirrored ? 1 - a : a, adv);
    if (mirrored) {
      e.dm_action = 1 - e.dm_action;
      e.opp_actions[0] = 1 - e.opp_actions[0];
    }
    agent->Observe(e);
    agent->OnEpisodeEnd();
    if (t >= 4500) tail += e.reward_dm;
  }
  return tail / 500.0;
}

TEST(StatelessFofTest, TieOrderHasNoQualitativeEffect) {
  EXPECT_GT(Level2AgainstSmoother(false), 10.0);
  EXPECT_GT(Level2AgainstSmoother(true), 10.0);
}

// ---------------------------------------------------------------------------
// Gridworld

TEST(GridWorldTest, DefaultRoomIsSymmetric) {
  const GridWorldSpec spec = GridWorldSpec::Default();
  EXPECT_EQ(spec.width, 7);
  EXPECT_EQ(spec.height, 9);
  EXPECT_EQ(spec.max_steps, 50);
  EXPECT_NO_THROW(spec.Validate());
  for (int x = 0; x < spec.width; ++x) {
    EXPECT_TRUE(spec.IsWall({x, 0}));
    EXPECT_TRUE(spec.IsWall({x, spec.height - 1}));
  }
  EXPECT_EQ(spec.start, (Cell{3, 7}));
  const int d1 = std::abs(spec.target1.x - spec.start.x) + std::abs(spec.target1.y - spec.start.y);
  const int d2 = std::abs(spec.target2.x - spec.start.x) + std::abs(spec.target2.y - spec.start.y);
  EXPECT_EQ(d1, d2);
  EXPECT_EQ(spec.target1.y, spec.target2.y);
  EXPECT_EQ(spec.target1.x + spec.target2.x, spec.width - 1);
}

TEST(GridWorldTest, NamedLayouts) {
  const GridWorldSpec corners = GridWorldSpec::Named("corners");
  EXPECT_EQ(corners.target1, (Cell{1, 1}));
  EXPECT_EQ(corners.target2, (Cell{5, 1}));
  const GridWorldSpec compact = GridWorldSpec::Named("compact");
  EXPECT_EQ(compact.width, 5);
  EXPECT_EQ(compact.start, (Cell{2, 3}));
  EXPECT_THROW(GridWorldSpec::Named("maze"), ConfigError);
}

TEST(GridWorldTest, AsciiLayoutParsing) {
  const GridWorldSpec s = GridWorldSpec::FromAscii({"#####", "#1A2#", "#####"});
  EXPECT_EQ(s.start, (Cell{2, 1}));
  EXPECT_EQ(s.target1, (Cell{1, 1}));
  EXPECT_EQ(s.target2, (Cell{3, 1}));
  EXPECT_TRUE(s.IsWall({0, 0}));
  EXPECT_THROW(GridWorldSpec::FromAscii({"###", "#1A2#"}), ConfigError);
  EXPECT_THROW(GridWorldSpec::FromAscii({"#1A#"}), ConfigError);
  EXPECT_THROW(GridWorldSpec::FromAscii({"#1A2x"}), ConfigError);
}

TEST(GridWorldTest, WallBumpLeavesThePositionUnchanged) {
  const GridWorldSpec spec = GridWorldSpec::Default();
  const GridStepResult r = GridStep(spec, spec.start, 0, Move::kDown, 0);
  EXPECT_EQ(r.position, spec.start);
  EXPECT_EQ(r.experience.reward_dm, -1.0);
  EXPECT_FALSE(r.experience.terminal);
  EXPECT_FALSE(r.reached.has_value());
}

TEST(GridWorldTest, EnteringATargetEndsTheEpisode) {
  const GridWorldSpec spec = GridWorldSpec::Named("corners");
  const Cell next_to_1{1, 2};
  const GridStepResult win = GridStep(spec, next_to_1, 5, Move::kUp, 0);
  EXPECT_TRUE(win.experience.terminal);
  EXPECT_EQ(win.experience.reward_dm, -1.0 + 50.0);
  EXPECT_EQ(win.reached, std::optional<ActionId>(0));
  const GridStepResult loss = GridStep(spec, next_to_1, 5, Move::kUp, 1);
  EXPECT_EQ(loss.experience.reward_dm, -1.0 - 50.0);
  EXPECT_EQ(loss.experience.reward_opp[0], 51.0);
}

TEST(GridWorldTest, EpisodesNeverExceedFiftySteps) {
  GridFriendOrFoe env(GridWorldSpec::Named("corners"));
  Rng rng(4);
  for (int episode = 0; episode < 200; ++episode) {
    env.Reset();
    const std::vector<ActionId> target = {static_cast<ActionId>(rng.Index(2))};
    int steps = 0;
    double total = 0.0;
    while (true) {
      const Experience e = env.Step(static_cast<ActionId>(rng.Index(4)), target);
      ++steps;
      total += e.reward_dm;
      if (e.terminal) break;
    }
    EXPECT_LE(steps, 50);
    EXPECT_GE(total, -100.0);
    EXPECT_LE(total, 49.0);
  }
}

TEST(GridWorldTest, TimeoutMakesNoChoice) {
  GridFriendOrFoe env(GridWorldSpec::Named("corners"));
  env.Reset();
  const std::vector<ActionId> target = {0};
  Experience e;
  for (int t = 0; t < 50; ++t) e = env.Step(static_cast<ActionId>(Move::kDown), target);
  EXPECT_TRUE(e.terminal);
  EXPECT_FALSE(env.EpisodeChoice().has_value());
  EXPECT_EQ(env.steps_taken(), 50);
}

TEST(GridWorldTest, StateIdsRoundTrip) {
  const GridWorldSpec spec = GridWorldSpec::Default();
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) EXPECT_EQ(spec.CellOf(spec.StateOf({x, y})), (Cell{x, y}));
  }
}

// ---------------------------------------------------------------------------
// Blotto

BlottoOutcome Resolve(std::vector<int> allocation, std::vector<ActionId> attacks) {
  return BlottoRewards(BlottoSpec{}, allocation, attacks);
}

TEST(BlottoTest, AllocationsEnumerateCompositions) {
  const std::vector<std::vector<int>> expected = {{2, 0, 0}, {1, 1, 0}, {1, 0, 1},
                                                  {0, 2, 0}, {0, 1, 1}, {0, 0, 2}};
  EXPECT_EQ(BlottoSpec{}.Allocations(), expected);
  BlottoSpec bigger;
  bigger.positions = 4;
  bigger.dm_resources = 3;
  EXPECT_EQ(bigger.Allocations().size(), 20u);
}

TEST(BlottoTest, Examples) {
  const BlottoOutcome a = Resolve({1, 1, 0}, {0, 2});
  EXPECT_EQ(a.dm, -1.0);
  EXPECT_EQ(a.attackers, (std::vector<double>{0.0, 1.0}));
  const BlottoOutcome b = Resolve({2, 0, 0}, {0, 0});
  EXPECT_EQ(b.dm, 0.0);
  EXPECT_EQ(b.attackers, (std::vector<double>{0.0, 0.0}));
  const BlottoOutcome c = Resolve({0, 2, 0}, {0, 2});
  EXPECT_EQ(c.dm, -2.0);
  EXPECT_EQ(c.attackers, (std::vector<double>{1.0, 1.0}));
  const BlottoOutcome d = Resolve({2, 0, 0}, {0, 1});
  EXPECT_EQ(d.dm, 0.0);
  EXPECT_EQ(d.attackers, (std::vector<double>{-1.0, 1.0}));
}

TEST(BlottoTest, RewardsAlwaysSumToZero) {
  BlottoSpec spec;
  spec.attackers = 3;
  spec.dm_resources = 3;
  for (const auto& alloc : spec.Allocations()) {
    for (ActionId x = 0; x < 3; ++x) {
      for (ActionId y = 0; y < 3; ++y) {
        for (ActionId z = 0; z < 3; ++z) {
          const std::vector<ActionId> attacks = {x, y, z};
          const BlottoOutcome o = BlottoRewards(spec, alloc, attacks);
          const double total = std::accumulate(o.attackers.begin(), o.attackers.end(), o.dm);
          EXPECT_NEAR(total, 0.0, 1e-12);
        }
      }
    }
  }
}

TEST(BlottoTest, RejectsAllocationsOfTheWrongSize) {
  const std::vector<int> bad = {1, 0, 0};
  const std::vector<ActionId> attacks = {0, 1};
  EXPECT_THROW(BlottoRewards(BlottoSpec{}, bad, attacks), ContractViolation);
}

TEST(BlottoTest, EnvironmentShape) {
  Blotto env;
  EXPECT_EQ(env.num_dm_actions(), 6);
  EXPECT_EQ(env.opp_action_counts(), (std::vector<int>{3, 3}));
  const auto features = env.ChoiceFeatures();
  ASSERT_EQ(features.size(), 6u);
  EXPECT_EQ(features[1], (std::vector<double>{0.5, 0.5, 0.0}));
  const std::vector<ActionId> attacks = {0, 2};
  const Experience e = env.Step(1, attacks);
  EXPECT_EQ(e.reward_dm, -1.0);
  EXPECT_EQ(e.opp_actions, attacks);
}

TEST(EnvironmentFactoryTest, BuildsEveryIdentifier) {
  for (const std::string& id : EnvironmentIds()) {
    const std::unique_ptr<Environment> env = MakeEnvironment(id);
    ASSERT_NE(env, nullptr);
    EXPECT_EQ(env->id(), id);
  }
  EXPECT_THROW(MakeEnvironment("go"), ConfigError);
}

}  // namespace
}  // namespace tmdp
