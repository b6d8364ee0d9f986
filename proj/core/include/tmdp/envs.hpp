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

// Benchmark environments: 2x2 repeated matrix games (memoryless and
// memory-one), friend-or-foe target selection (stateless and gridworld) and a
// multi-attacker Blotto allocation game.

#ifndef TMDP_ENVS_HPP_
#define TMDP_ENVS_HPP_

#include <array>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tmdp/beliefs.hpp"
#include "tmdp/core.hpp"

namespace tmdp {

class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string id() const = 0;
  virtual StateId Reset() = 0;
  // `opp` holds one action per adversary.
  virtual Experience Step(ActionId dm, std::span<const ActionId> opp) = 0;

  virtual int num_dm_actions() const = 0;
  virtual std::vector<int> opp_action_counts() const = 0;

  // Episodes end on terminal transitions; otherwise every step is reported
  // as its own episode.
  virtual bool episodic() const { return false; }
  // Adversaries pick one action at Reset() that holds for the episode and
  // learn from EpisodeChoice() once it ends.
  virtual bool opponents_commit_per_episode() const { return false; }
  // The decision maker's episode-level choice visible to adversaries.
  virtual std::optional<ActionId> EpisodeChoice() const { return std::nullopt; }
  // False when adversary rewards are neither observed nor modeled.
  virtual bool emits_opponent_reward() const { return true; }
  // Feature vector an exponential-smoother adversary records for each
  // decision-maker choice.
  virtual std::vector<std::vector<double>> ChoiceFeatures() const;
};

// ---------------------------------------------------------------------------
// Repeated 2x2 matrix games

enum class Memory { kNone, kOne };

struct MatrixGameSpec {
  std::string name;
  // payoff[a][b] for row player A (the decision maker) and column player B.
  std::array<std::array<double, 2>, 2> payoff_a{};
  std::array<std::array<double, 2>, 2> payoff_b{};
  Memory memory = Memory::kNone;
  std::array<std::string, 2> labels{"C", "D"};

  static MatrixGameSpec PrisonersDilemma();
  static MatrixGameSpec StagHunt();
  static MatrixGameSpec Chicken();
};

inline constexpr StateId kInitialState = 0;

// Memory-one state encoding: s0 = 0, (a, b) = 1 + 2a + b.
StateId MemoryOneState(ActionId a, ActionId b);

// One round from `state`. Never terminal.
Experience MatrixStep(const MatrixGameSpec& spec, StateId state, ActionId a, ActionId b);

class MatrixGame : public Environment {
 public:
  explicit MatrixGame(MatrixGameSpec spec, std::string id);

  std::string id() const override { return id_; }
  StateId Reset() override;
  Experience Step(ActionId dm, std::span<const ActionId> opp) override;
  int num_dm_actions() const override { return 2; }
  std::vector<int> opp_action_counts() const override { return {2}; }
  const MatrixGameSpec& spec() const { return spec_; }

 private:
  MatrixGameSpec spec_;
  std::string id_;
  StateId state_ = kInitialState;
};

// ---------------------------------------------------------------------------
// Friend-or-foe

// How the adversary's reward is modeled when it is not observed.
enum class RewardScaling {
  kMinimax,      // r_B = -r_A
  kPlusMinusOne, // +1 when the decision maker loses the target, -1 when she wins
  kZeroOne,      // +1 when the decision maker loses the target, 0 otherwise
  kNone,         // not available
};

std::string ToString(RewardScaling s);
RewardScaling ParseRewardScaling(const std::string& name);

// Outcome of the target choice: +1 win, -1 loss, 0 no target reached.
double ScaledOpponentReward(RewardScaling scaling, double reward_dm, int outcome);

struct FofRewards {
  double win = 50.0;
  double lose = -50.0;
};

// Single-state game: the decision maker picks target 0 or 1, the adversary
// picks the target that hides the positive reward.
class StatelessFriendOrFoe : public Environment {
 public:
  explicit StatelessFriendOrFoe(RewardScaling scaling = RewardScaling::kMinimax,
                                FofRewards rewards = {});

  std::string id() const override { return "fof-stateless"; }
  StateId Reset() override { return 0; }
  Experience Step(ActionId dm, std::span<const ActionId> opp) override;
  int num_dm_actions() const override { return 2; }
  std::vector<int> opp_action_counts() const override { return {2}; }
  bool emits_opponent_reward() const override { return scaling_ != RewardScaling::kNone; }

  RewardScaling scaling() const { return scaling_; }

 private:
  RewardScaling scaling_;
  FofRewards rewards_;
};

// One round against an exponential-smoother adversary: reward from the
// pre-update estimate, then the smoother records the choice.
Experience StatelessFofStep(ActionId dm_target, SmootherState& adversary,
                            RewardScaling scaling = RewardScaling::kMinimax,
                            FofRewards rewards = {});

struct Cell {
  int x = 0;
  int y = 0;
  auto operator<=>(const Cell&) const = default;
};

enum class Move { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

struct GridWorldSpec {
  int width = 7;
  int height = 9;
  std::set<Cell> walls;
  Cell start;
  Cell target1;
  Cell target2;
  double step_reward = -1.0;
  double win_reward = 50.0;
  double lose_reward = -50.0;
  int max_steps = 50;

  // 7x9 room with a wall ring, start at the bottom-centre interior cell and
  // one target on either side of it.
  static GridWorldSpec Default();
  // Rows of '#' (wall), ' ' or '.' (floor), 'A' (start), '1' and '2'
  // (targets). Every row must have the same width.
  static GridWorldSpec FromAscii(const std::vector<std::string>& rows);
  // "room" (the default above), "corners" (the same room with the targets in
  // the two top interior corners) or "compact" (3x3 interior).
  static GridWorldSpec Named(const std::string& name);

  bool IsWall(Cell c) const;
  StateId StateOf(Cell c) const { return static_cast<StateId>(c.y) * width + c.x; }
  Cell CellOf(StateId s) const;
  void Validate() const;
};

struct GridStepResult {
  Experience experience;
  Cell position;
  // 0 or 1 when a target was entered.
  std::optional<ActionId> reached;
};

// One move. `steps_taken` counts moves before this one; the episode ends on
// entering a target or after max_steps moves.
GridStepResult GridStep(const GridWorldSpec& spec, Cell position, int steps_taken,
                        Move move, ActionId rewarded_target,
                        RewardScaling scaling = RewardScaling::kMinimax);

class GridFriendOrFoe : public Environment {
 public:
  explicit GridFriendOrFoe(GridWorldSpec spec = GridWorldSpec::Default(),
                           RewardScaling scaling = RewardScaling::kMinimax);

  std::string id() const override { return "fof-grid"; }
  StateId Reset() override;
  Experience Step(ActionId dm, std::span<const ActionId> opp) override;
  int num_dm_actions() const override { return 4; }
  std::vector<int> opp_action_counts() const override { return {2}; }
  bool episodic() const override { return true; }
  bool opponents_commit_per_episode() const override { return true; }
  std::optional<ActionId> EpisodeChoice() const override { return reached_; }
  bool emits_opponent_reward() const override { return scaling_ != RewardScaling::kNone; }
  // One-hot over the two targets.
  std::vector<std::vector<double>> ChoiceFeatures() const override {
    return {{1.0, 0.0}, {0.0, 1.0}};
  }

  const GridWorldSpec& spec() const { return spec_; }
  Cell position() const { return position_; }
  int steps_taken() const { return steps_; }

 private:
  GridWorldSpec spec_;
  RewardScaling scaling_;
  Cell position_;
  int steps_ = 0;
  std::optional<ActionId> reached_;
};

// ---------------------------------------------------------------------------
// Blotto

struct BlottoSpec {
  int positions = 3;
  int dm_resources = 2;
  int attackers = 2;
  double position_value = 1.0;

  // Every way to split dm_resources over the positions, in descending
  // lexicographic order: (2,0,0), (1,1,0), (1,0,1), (0,2,0), (0,1,1), (0,0,2).
  std::vector<std::vector<int>> Allocations() const;
};

struct BlottoOutcome {
  double dm = 0.0;
  std::vector<double> attackers;
};

// Resolves every attacked position by local superiority; the losing side's
// value is split evenly among the attackers at that position.
BlottoOutcome BlottoRewards(const BlottoSpec& spec, std::span<const int> allocation,
                            std::span<const ActionId> attacks);

class Blotto : public Environment {
 public:
  explicit Blotto(BlottoSpec spec = {});

  std::string id() const override { return "blotto"; }
  StateId Reset() override { return 0; }
  Experience Step(ActionId dm, std::span<const ActionId> opp) override;
  int num_dm_actions() const override { return static_cast<int>(allocations_.size()); }
  std::vector<int> opp_action_counts() const override;
  // Normalized allocation per decision-maker action.
  std::vector<std::vector<double>> ChoiceFeatures() const override;

  const BlottoSpec& spec() const { return spec_; }
  const std::vector<std::vector<int>>& allocations() const { return allocations_; }

 private:
  BlottoSpec spec_;
  std::vector<std::vector<int>> allocations_;
};

// Builds an environment from its CLI id: ipd, ish, ic, ipd-mem1,
// fof-stateless, fof-grid, blotto.
std::unique_ptr<Environment> MakeEnvironment(const std::string& id,
                                             RewardScaling scaling = RewardScaling::kMinimax);

const std::vector<std::string>& EnvironmentIds();

}  // namespace tmdp

#endif  // TMDP_ENVS_HPP_
