// Copyright 2026 The Cascade Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include <vector>

#include "cascade/envs.hpp"
#include "cascade/kernels.hpp"
#include "cascade/posterior.hpp"

namespace {

using namespace cascade;

struct Problem {
  TabularMdp model;
  RewardTables rewards;
};

Problem make_problem(int states) {
  RngStream rng(17, static_cast<std::uint64_t>(states));
  const int A = 4, H = 50;
  Problem p{make_random_mdp(states, A, H, rng, false), RewardTables::zeros(H, states, A)};
  for (double& x : p.rewards.step) x = rng.uniform();
  for (double& x : p.rewards.terminal) x = rng.uniform();
  return p;
}

std::vector<TabularMdp> make_members(int states) {
  ModelShape shape;
  shape.num_states = states;
  shape.num_actions = 4;
  shape.horizon = 1;
  shape.initial_dist.assign(states, 1.0 / states);
  const DirichletPosterior posterior(shape, 0.5);
  return make_ensemble(posterior, 10, RngStream(23)).members;
}

void BM_BackwardInduction(benchmark::State& state) {
  const Problem p = make_problem(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::backward_induction(p.model, p.rewards));
}

void BM_BackwardInductionSerial(benchmark::State& state) {
  const Problem p = make_problem(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::backward_induction_serial(p.model, p.rewards));
}

void BM_Disagreement(benchmark::State& state) {
  const auto members = make_members(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::disagreement_table(members));
}

void BM_DisagreementSerial(benchmark::State& state) {
  const auto members = make_members(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::disagreement_table_serial(members));
}

BENCHMARK(BM_BackwardInduction)->Arg(100)->Arg(400)->Arg(1600)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BackwardInductionSerial)->Arg(100)->Arg(400)->Arg(1600)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_Disagreement)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_DisagreementSerial)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
