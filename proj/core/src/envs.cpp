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

#include "tmdp/envs.hpp"

#include <cmath>
#include <functional>
#include <numeric>

#include "tmdp/errors.hpp"

namespace tmdp {

std::vector<std::vector<double>> Environment::ChoiceFeatures() const {
  const int n = num_dm_actions();
  std::vector<std::vector<double>> out(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
  return out;
}

// ---------------------------------------------------------------------------
// Matrix games

MatrixGameSpec MatrixGameSpec::PrisonersDilemma() {
  MatrixGameSpec s;
  s.name = "prisoners_dilemma";
  s.payoff_a = {{{-1.0, -3.0}, {0.0, -2.0}}};
  s.payoff_b = {{{-1.0, 0.0}, {-3.0, -2.0}}};
  return s;
}

MatrixGameSpec MatrixGameSpec::StagHunt() {
  MatrixGameSpec s;
  s.name = "stag_hunt";
  s.payoff_a = {{{2.0, 0.0}, {1.0, 1.0}}};
  s.payoff_b = {{{2.0, 1.0}, {0.0, 1.0}}};
  return s;
}

MatrixGameSpec MatrixGameSpec::Chicken() {
  MatrixGameSpec s;
  s.name = "chicken";
  s.payoff_a = {{{0.0, -2.0}, {1.0, -4.0}}};
  s.payoff_b = {{{0.0, 1.0}, {-2.0, -4.0}}};
  return s;
}

StateId MemoryOneState(ActionId a, ActionId b) { return 1 + 2 * a + b; }

Experience MatrixStep(const MatrixGameSpec& spec, StateId state, ActionId a, ActionId b) {
  Require(a == 0 || a == 1, "matrix game row action must be 0 or 1");
  Require(b == 0 || b == 1, "matrix game column action must be 0 or 1");
  Experience e;
  e.state = state;
  e.dm_action = a;
  e.opp_actions = {b};
  e.reward_dm = spec.payoff_a[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
  e.reward_opp = {spec.payoff_b[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)]};
  e.next_state = spec.memory == Memory::kOne ? MemoryOneState(a, b) : kInitialState;
  e.terminal = false;
  return e;
}

MatrixGame::MatrixGame(MatrixGameSpec spec, std::string id)
    : spec_(std::move(spec)), id_(std::move(id)) {
  for (const auto& table : {spec_.payoff_a, spec_.payoff_b}) {
    for (const auto& row : table) {
      for (double v : row) Require(std::isfinite(v), "matrix payoffs must be finite");
    }
  }
}

StateId MatrixGame::Reset() {
  state_ = kInitialState;
  return state_;
}

Experience MatrixGame::Step(ActionId dm, std::span<const ActionId> opp) {
  Require(opp.size() == 1, "matrix games have exactly one adversary");
  Experience e = MatrixStep(spec_, state_, dm, opp[0]);
  state_ = e.next_state;
  return e;
}

// ---------------------------------------------------------------------------
// Friend-or-foe

std::string ToString(RewardScaling s) {
  switch (s) {
    case RewardScaling::kMinimax: return "minimax";
    case RewardScaling::kPlusMinusOne: return "pm1";
    case RewardScaling::kZeroOne: return "01";
    case RewardScaling::kNone: return "none";
  }
  return "none";
}

RewardScaling ParseRewardScaling(const std::string& name) {
  if (name == "minimax" || name == "zero-sum") return RewardScaling::kMinimax;
  if (name == "pm1" || name == "-1,1") return RewardScaling::kPlusMinusOne;
  if (name == "01" || name == "0,1") return RewardScaling::kZeroOne;
  if (name == "none") return RewardScaling::kNone;
  throw ConfigError("unknown reward scaling '" + name + "'");
}

double ScaledOpponentReward(RewardScaling scaling, double reward_dm, int outcome) {
  switch (scaling) {
    case RewardScaling::kMinimax: return -reward_dm;
    case RewardScaling::kPlusMinusOne: return outcome > 0 ? -1.0 : (outcome < 0 ? 1.0 : 0.0);
    case RewardScaling::kZeroOne: return outcome < 0 ? 1.0 : 0.0;
    case RewardScaling::kNone: return 0.0;
  }
  return 0.0;
}

StatelessFriendOrFoe::StatelessFriendOrFoe(RewardScaling scaling, FofRewards rewards)
    : scaling_(scaling), rewards_(rewards) {}

namespace {

Experience FofRound(ActionId dm_target, ActionId rewarded, RewardScaling scaling,
                    const FofRewards& rewards) {
  Require(dm_target == 0 || dm_target == 1, "friend-or-foe target must be 0 or 1");
  Require(rewarded == 0 || rewarded == 1, "rewarded target must be 0 or 1");
  const int outcome = dm_target == rewarded ? 1 : -1;
  Experience e;
  e.state = 0;
  e.next_state = 0;
  e.dm_action = dm_target;
  e.opp_actions = {rewarded};
  e.reward_dm = outcome > 0 ? rewards.win : rewards.lose;
  e.reward_opp = {ScaledOpponentReward(scaling, e.reward_dm, outcome)};
  return e;
}

}  // namespace

Experience StatelessFriendOrFoe::Step(ActionId dm, std::span<const ActionId> opp) {
  Require(opp.size() == 1, "friend-or-foe has exactly one adversary");
  return FofRound(dm, opp[0], scaling_, rewards_);
}

Experience StatelessFofStep(ActionId dm_target, SmootherState& adversary,
                            RewardScaling scaling, FofRewards rewards) {
  Experience e = FofRound(dm_target, adversary.LeastLikely(), scaling, rewards);
  adversary.Update(dm_target);
  return e;
}

GridWorldSpec GridWorldSpec::Default() {
  GridWorldSpec s;
  s.width = 7;
  s.height = 9;
  for (int x = 0; x < s.width; ++x) {
    s.walls.insert({x, 0});
    s.walls.insert({x, s.height - 1});
  }
  for (int y = 0; y < s.height; ++y) {
    s.walls.insert({0, y});
    s.walls.insert({s.width - 1, y});
  }
  s.start = {s.width / 2, s.height - 2};
  s.target1 = {s.start.x - 1, s.start.y};
  s.target2 = {s.start.x + 1, s.start.y};
  return s;
}

GridWorldSpec GridWorldSpec::FromAscii(const std::vector<std::string>& rows) {
  if (rows.empty() || rows.front().empty()) throw ConfigError("empty grid layout");
  GridWorldSpec s;
  s.height = static_cast<int>(rows.size());
  s.width = static_cast<int>(rows.front().size());
  int starts = 0, ones = 0, twos = 0;
  for (int y = 0; y < s.height; ++y) {
    const std::string& row = rows[static_cast<std::size_t>(y)];
    if (static_cast<int>(row.size()) != s.width) throw ConfigError("grid rows differ in width");
    for (int x = 0; x < s.width; ++x) {
      switch (row[static_cast<std::size_t>(x)]) {
        case '#': s.walls.insert({x, y}); break;
        case ' ':
        case '.': break;
        case 'A': s.start = {x, y}; ++starts; break;
        case '1': s.target1 = {x, y}; ++ones; break;
        case '2': s.target2 = {x, y}; ++twos; break;
        default:
          throw ConfigError(std::string("unexpected grid character '") +
                            row[static_cast<std::size_t>(x)] + "'");
      }
    }
  }
  if (starts != 1 || ones != 1 || twos != 1) {
    throw ConfigError("grid layout needs exactly one A, one 1 and one 2");
  }
  s.Validate();
  return s;
}

GridWorldSpec GridWorldSpec::Named(const std::string& name) {
  if (name == "room") return Default();
  if (name == "corners") {
    GridWorldSpec s = Default();
    s.target1 = {1, 1};
    s.target2 = {s.width - 2, 1};
    return s;
  }
  if (name == "compact") {
    return FromAscii({"#####",
                      "#1 2#",
                      "#   #",
                      "# A #",
                      "#####"});
  }
  throw ConfigError("unknown grid layout '" + name + "'");
}

bool GridWorldSpec::IsWall(Cell c) const {
  if (c.x < 0 || c.y < 0 || c.x >= width || c.y >= height) return true;
  return walls.contains(c);
}

Cell GridWorldSpec::CellOf(StateId s) const {
  return Cell{static_cast<int>(s % width), static_cast<int>(s / width)};
}

void GridWorldSpec::Validate() const {
  if (width < 1 || height < 1) throw ConfigError("grid dimensions must be positive");
  if (IsWall(start) || IsWall(target1) || IsWall(target2)) {
    throw ConfigError("start and targets must be open cells");
  }
  if (target1 == target2) throw ConfigError("targets must be distinct");
  if (max_steps < 1) throw ConfigError("max_steps must be positive");
}

GridStepResult GridStep(const GridWorldSpec& spec, Cell position, int steps_taken,
                        Move move, ActionId rewarded_target, RewardScaling scaling) {
  Require(rewarded_target == 0 || rewarded_target == 1, "rewarded target must be 0 or 1");
  Cell next = position;
  switch (move) {
    case Move::kUp: --next.y; break;
    case Move::kDown: ++next.y; break;
    case Move::kLeft: --next.x; break;
    case Move::kRight: ++next.x; break;
    default: throw ContractViolation("grid move out of range");
  }
  if (spec.IsWall(next)) next = position;

  GridStepResult out;
  out.position = next;
  Experience& e = out.experience;
  e.state = spec.StateOf(position);
  e.next_state = spec.StateOf(next);
  e.dm_action = static_cast<ActionId>(move);
  e.opp_actions = {rewarded_target};
  e.reward_dm = spec.step_reward;
  int outcome = 0;
  if (next == spec.target1 || next == spec.target2) {
    const ActionId reached = next == spec.target1 ? 0 : 1;
    out.reached = reached;
    outcome = reached == rewarded_target ? 1 : -1;
    e.reward_dm += outcome > 0 ? spec.win_reward : spec.lose_reward;
    e.terminal = true;
  }
  if (steps_taken + 1 >= spec.max_steps) e.terminal = true;
  e.reward_opp = {ScaledOpponentReward(scaling, e.reward_dm, outcome)};
  return out;
}

GridFriendOrFoe::GridFriendOrFoe(GridWorldSpec spec, RewardScaling scaling)
    : spec_(std::move(spec)), scaling_(scaling) {
  spec_.Validate();
  position_ = spec_.start;
}

StateId GridFriendOrFoe::Reset() {
  position_ = spec_.start;
  steps_ = 0;
  reached_.reset();
  return spec_.StateOf(position_);
}

Experience GridFriendOrFoe::Step(ActionId dm, std::span<const ActionId> opp) {
  Require(opp.size() == 1, "gridworld has exactly one adversary");
  Require(dm >= 0 && dm < 4, "grid move out of range");
  Require(steps_ < spec_.max_steps && !reached_, "step after the episode ended");
  GridStepResult r = GridStep(spec_, position_, steps_, static_cast<Move>(dm), opp[0], scaling_);
  position_ = r.position;
  ++steps_;
  reached_ = r.reached;
  return std::move(r.experience);
}

// ---------------------------------------------------------------------------
// Blotto

std::vector<std::vector<int>> BlottoSpec::Allocations() const {
  std::vector<std::vector<int>> out;
  std::vector<int> current(static_cast<std::size_t>(positions), 0);
  std::function<void(int, int)> fill = [&](int index, int remaining) {
    if (index == positions - 1) {
      current[static_cast<std::size_t>(index)] = remaining;
      out.push_back(current);
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      current[static_cast<std::size_t>(index)] = k;
      fill(index + 1, remaining - k);
    }
  };
  if (positions > 0) fill(0, dm_resources);
  return out;
}

BlottoOutcome BlottoRewards(const BlottoSpec& spec, std::span<const int> allocation,
                            std::span<const ActionId> attacks) {
  Require(static_cast<int>(allocation.size()) == spec.positions,
          "allocation must cover every position");
  Require(std::accumulate(allocation.begin(), allocation.end(), 0) == spec.dm_resources,
          "allocation must use exactly the available resources");
  Require(static_cast<int>(attacks.size()) == spec.attackers, "one attack per attacker required");
  for (ActionId p : attacks) Require(p >= 0 && p < spec.positions, "attack position out of range");
  for (int d : allocation) Require(d >= 0, "allocations must be nonnegative");

  BlottoOutcome out;
  out.attackers.assign(attacks.size(), 0.0);
  for (int p = 0; p < spec.positions; ++p) {
    int k = 0;
    for (ActionId a : attacks) k += a == p ? 1 : 0;
    if (k == 0) continue;
    const int d = allocation[static_cast<std::size_t>(p)];
    if (d == k) continue;
    const double sign = d > k ? 1.0 : -1.0;
    out.dm += sign * spec.position_value;
    const double share = spec.position_value / static_cast<double>(k);
    for (std::size_t i = 0; i < attacks.size(); ++i) {
      if (attacks[i] == p) out.attackers[i] -= sign * share;
    }
  }
  return out;
}

Blotto::Blotto(BlottoSpec spec) : spec_(spec), allocations_(spec_.Allocations()) {
  if (spec_.positions < 1 || spec_.dm_resources < 0 || spec_.attackers < 1) {
    throw ConfigError("invalid Blotto dimensions");
  }
}

std::vector<int> Blotto::opp_action_counts() const {
  return std::vector<int>(static_cast<std::size_t>(spec_.attackers), spec_.positions);
}

std::vector<std::vector<double>> Blotto::ChoiceFeatures() const {
  std::vector<std::vector<double>> out;
  for (const auto& alloc : allocations_) {
    std::vector<double> f(alloc.size());
    for (std::size_t i = 0; i < alloc.size(); ++i) {
      f[i] = spec_.dm_resources > 0
                 ? static_cast<double>(alloc[i]) / spec_.dm_resources
                 : 1.0 / static_cast<double>(alloc.size());
    }
    out.push_back(std::move(f));
  }
  return out;
}

Experience Blotto::Step(ActionId dm, std::span<const ActionId> opp) {
  Require(dm >= 0 && dm < num_dm_actions(), "Blotto allocation id out of range");
  const BlottoOutcome r =
      BlottoRewards(spec_, allocations_[static_cast<std::size_t>(dm)], opp);
  Experience e;
  e.state = 0;
  e.next_state = 0;
  e.dm_action = dm;
  e.opp_actions.assign(opp.begin(), opp.end());
  e.reward_dm = r.dm;
  e.reward_opp = r.attackers;
  return e;
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& EnvironmentIds() {
  static const std::vector<std::string> kIds = {
      "ipd", "ish", "ic", "ipd-mem1", "fof-stateless", "fof-grid", "blotto"};
  return kIds;
}

std::unique_ptr<Environment> MakeEnvironment(const std::string& id, RewardScaling scaling) {
  if (id == "ipd") return std::make_unique<MatrixGame>(MatrixGameSpec::PrisonersDilemma(), id);
  if (id == "ish") return std::make_unique<MatrixGame>(MatrixGameSpec::StagHunt(), id);
  if (id == "ic") return std::make_unique<MatrixGame>(MatrixGameSpec::Chicken(), id);
  if (id == "ipd-mem1") {
    MatrixGameSpec spec = MatrixGameSpec::PrisonersDilemma();
    spec.memory = Memory::kOne;
    return std::make_unique<MatrixGame>(spec, id);
  }
  if (id == "fof-stateless") return std::make_unique<StatelessFriendOrFoe>(scaling);
  if (id == "fof-grid") return std::make_unique<GridFriendOrFoe>(GridWorldSpec::Default(), scaling);
  if (id == "blotto") return std::make_unique<Blotto>();
  throw ConfigError("unknown environment '" + id + "'");
}

}  // namespace tmdp
