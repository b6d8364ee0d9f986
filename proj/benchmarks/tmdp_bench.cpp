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

// Per-step cost of the threatened Q update and of level-k agents.

#include <memory>

#include "benchmark/benchmark.h"
#include "tmdp/agents.hpp"
#include "tmdp/core.hpp"
#include "tmdp/envs.hpp"

namespace tmdp {
namespace {

void BM_Q3Update(benchmark::State& state) {
  const int actions = static_cast<int>(state.range(0));
  QTensor q(actions, actions);
  const PolicyDistribution belief = PolicyDistribution::Uniform(actions);
  Rng rng(1);
  for (auto _ : state) {
    const auto a = static_cast<ActionId>(rng.Index(static_cast<std::size_t>(actions)));
    const auto b = static_cast<ActionId>(rng.Index(static_cast<std::size_t>(actions)));
    benchmark::DoNotOptimize(Q3Update(q, 0, a, b, 1.0, 0, false, belief, 0.1, 0.9));
  }
}
BENCHMARK(BM_Q3Update)->Arg(2)->Arg(6)->Arg(16);

void BM_LevelKStep(benchmark::State& state) {
  LevelKOptions o;
  o.self.gamma = o.inner.gamma = 0.8;
  o.self.alpha = o.inner.alpha = 0.1;
  o.self.epsilon = o.inner.epsilon = 0.1;
  o.base.forget_lambda = 0.8;
  std::unique_ptr<ValueLearner> agent = MakeLevelK(static_cast<int>(state.range(0)), o);
  SmootherState adv = SmootherState::UniformStart(2, 0.8);
  Rng rng(2);
  for (auto _ : state) {
    const ActionId a = agent->Act(0, rng);
    agent->Observe(StatelessFofStep(a, adv));
    agent->OnEpisodeEnd();
  }
}
BENCHMARK(BM_LevelKStep)->DenseRange(1, 4);

}  // namespace
}  // namespace tmdp

BENCHMARK_MAIN();
