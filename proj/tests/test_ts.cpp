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

#include <cmath>
#include <memory>
#include <set>
#include <vector>

#include "cascade/envs.hpp"
#include "cascade/errors.hpp"
#include "cascade/ts.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace cascade;

namespace {

TsRoundState tree_state(int depth, int B, TsInit init, RngStream& rng) {
  TsConfig cfg;
  cfg.population = B;
  cfg.fake_rollouts = 1;
  cfg.depth_scale = depth;
  cfg.init = init;
  return make_ts_state(std::make_unique<TreePosterior>(depth), cfg, rng);
}

}  // namespace

TEST_CASE("cascade-ts round 1 on the depth-2 tree picks distinct paths") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngStream rng(seed);
    const BinaryTree tree = make_binary_tree(2, rng);
    TsRoundState st = tree_state(2, 2, TsInit::kUniform, rng);
    cascade_ts_round(st, tree.mdp, rng);
    CHECK(st.round == 1);
    CHECK(st.posterior->buffer().num_fake() == 0);
    REQUIRE(st.population.size() == 2);
    RngStream r(seed, 1);
    const Trajectory a = rollout(tree.mdp, st.population[0], r);
    const Trajectory b = rollout(tree.mdp, st.population[1], r);
    CHECK(a.states() != b.states());
  }
}

TEST_CASE("planned initial population is already diverse") {
  RngStream rng(1);
  TsRoundState st = tree_state(3, 4, TsInit::kPlanned, rng);
  const BinaryTree tree = make_binary_tree(3, rng);
  std::set<std::vector<StateId>> finals;
  for (const TabularPolicy& pi : st.population) finals.insert(rollout(tree.mdp, pi, rng).states());
  CHECK(finals.size() == 4);
  CHECK(st.posterior->buffer().size() == 0);
}

TEST_CASE("single-policy batch repeats one trajectory") {
  RngStream rng(2);
  const BinaryTree tree = make_binary_tree(3, rng);
  TsRoundState st = tree_state(3, 4, TsInit::kPlanned, rng);
  for (int k = 0; k < 3; ++k) {
    single_policy_batch_round(st, tree.mdp, rng);
    REQUIRE(st.last_trajectories.size() == 4);
    for (const Trajectory& t : st.last_trajectories) CHECK(t.states() == st.last_trajectories[0].states());
  }
  CHECK(st.unique_paths() == 3);
}

TEST_CASE("sequential ts tries a new path per execution until the model closes") {
  RngStream rng(3);
  const BinaryTree tree = make_binary_tree(3, rng);
  TsRoundState st = tree_state(3, 2, TsInit::kPlanned, rng);
  for (int k = 0; k < 4; ++k) sequential_ts_round(st, tree.mdp, rng);
  CHECK(st.unique_paths() >= 7);
  CHECK(epsilon_accuracy(*st.posterior, tree.mdp) == 0.0);
}

TEST_CASE("epsilon accuracy examples") {
  RngStream rng(4);
  const BinaryTree tree = make_binary_tree(2, rng);
  const TreePosterior full = TreePosterior::from_edges(2, tree.spec.leaf_assignment);
  CHECK(epsilon_accuracy(full, tree.mdp) == 0.0);
  std::vector<int> half = tree.spec.leaf_assignment;
  half[1] = half[3] = -1;
  // Two open edges: no closure, both count as wrong.
  CHECK(epsilon_accuracy(TreePosterior::from_edges(2, half), tree.mdp) == 0.5);
  std::vector<int> three = tree.spec.leaf_assignment;
  three[2] = -1;
  CHECK(TreePosterior::from_edges(2, three).collapsed());
  CHECK(epsilon_accuracy(TreePosterior::from_edges(2, three), tree.mdp) == 0.0);

  // Tabular estimates: mode per row, ties wrong.
  using cascade::testing::deterministic_mdp;
  const TabularMdp truth = deterministic_mdp(2, 1, 1, {1, 1});
  CHECK(epsilon_accuracy(truth, truth) == 0.0);
  const TabularMdp flat(truth.shape(), TabularMdp::Rows{{{0, 0.5}, {1, 0.5}}, {{1, 1.0}}});
  CHECK(epsilon_accuracy(flat, truth) == 0.5);
  const std::vector<int> only_second{1};
  CHECK(epsilon_accuracy(flat, truth, only_second) == 0.0);
}

TEST_CASE("uninformed tree epsilon matches a Monte-Carlo oracle") {
  // With no data every edge is undetermined.
  RngStream rng(5);
  const BinaryTree tree = make_binary_tree(3, rng);
  CHECK(epsilon_accuracy(TreePosterior(3), tree.mdp) == 1.0);
  // A uniform sample's mode agrees with the truth on 1/2^L of the edges on average.
  const TreePosterior open(3);
  double acc = 0.0;
  const int n = 4000;
  for (int k = 0; k < n; ++k) acc += epsilon_accuracy(open.sample(rng), tree.mdp, tree_unknown_pairs(3));
  CHECK(acc / n == doctest::Approx(1.0 - 1.0 / 8.0).epsilon(0.02));
}

TEST_CASE("rounds to accuracy guards and sentinels") {
  RngStream rng(6);
  const BinaryTree tree = make_binary_tree(2, rng);
  TsRoundState st = tree_state(2, 2, TsInit::kPlanned, rng);
  CHECK(rounds_to_accuracy(TsAlgorithm::kCascadeTs, tree.mdp, 0.0, 0, st, rng) == kRoundsNotReached);
  CHECK_THROWS_AS(rounds_to_accuracy(TsAlgorithm::kCascadeTs, tree.mdp, 1.0, 5, st, rng), ConfigError);

  TsConfig cfg;
  cfg.depth_scale = 2;
  TsRoundState known = make_ts_state(
      std::make_unique<TreePosterior>(TreePosterior::from_edges(2, tree.spec.leaf_assignment)), cfg, rng);
  CHECK(rounds_to_accuracy(TsAlgorithm::kCascadeTs, tree.mdp, 0.0, 5, known, rng) == 0);
  cascade_ts_round(known, tree.mdp, rng);
  CHECK(epsilon_accuracy(*known.posterior, tree.mdp) == 0.0);
  for (double b : fake_counts_and_bonus(known.posterior->buffer(), 2)) CHECK(b <= 4.0);

  TsConfig bad;
  bad.population = 0;
  CHECK_THROWS_AS(make_ts_state(std::make_unique<TreePosterior>(2), bad, rng), ConfigError);
  CHECK(parse_ts_algorithm("single_policy_batch") == TsAlgorithm::kSinglePolicyBatch);
  CHECK_THROWS_AS(parse_ts_algorithm("ts"), ConfigError);
}

TEST_CASE("round counts on the depth-3 tree") {
  // ceil((2^L - 1) / B) for CASCADE-TS against 2^L - 1 for a fixed batch.
  int cascade_exact = 0, batch_exact = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RngStream rng(seed, 3);
    const BinaryTree tree = make_binary_tree(3, rng);
    TsRoundState a = tree_state(3, 2, TsInit::kPlanned, rng);
    TsRoundState b = tree_state(3, 2, TsInit::kPlanned, rng);
    RngStream ra(seed, 4), rb(seed, 5);
    if (rounds_to_accuracy(TsAlgorithm::kCascadeTs, tree.mdp, 0.0, 20, a, ra) == 4) ++cascade_exact;
    if (rounds_to_accuracy(TsAlgorithm::kSinglePolicyBatch, tree.mdp, 0.0, 20, b, rb) == 7) ++batch_exact;
  }
  CHECK(cascade_exact >= 19);
  CHECK(batch_exact == 20);
}
