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

#include <memory>
#include <set>
#include <vector>

#include "cascade/envs.hpp"
#include "cascade/errors.hpp"
#include "cascade/greedy.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace cascade;
using cascade::testing::deterministic_mdp;
using cascade::testing::shape_of;

namespace {

EmbeddingSpec onehot(int n) { return {EmbeddingKind::kFinalStateOneHot, 1.0, n}; }

}  // namespace

TEST_CASE("cascade with B = 1 is the InfoGain maximizer") {
  RngStream rng(1);
  for (int k = 0; k < 10; ++k) {
    const TabularMdp truth = make_random_mdp(6, 3, 4, rng, false);
    DirichletPosterior p(truth.shape(), 0.5);
    for (int j = 0; j < 5; ++j) {
      p.update(rollout(truth, TabularPolicy::uniform(6, 3, 4), rng), 0, DataOrigin::kReal);
    }
    const EnsembleModel ens = make_ensemble(p, 5, rng.child(k));
    RngStream sel(2, k);
    const PopulationPlan plan = select_population_cascade(p, 1, 0.7, ens, onehot(6), sel, 4);
    REQUIRE(plan.policies.size() == 1);
    CHECK(plan.policies[0] == select_policy_p2e(p, ens));
  }
}

TEST_CASE("cascade sends the second policy to the unvisited leaf") {
  const TreePosterior p = TreePosterior::from_edges(1, {0, 1});
  const EnsembleModel ens = make_ensemble(p, 4, RngStream(3));
  for (double s : disagreement_table(ens)) REQUIRE(s == 0.0);
  RngStream rng(4);
  const PopulationPlan plan = select_population_cascade(p, 2, 0.4, ens, onehot(3), rng, 1);
  CHECK(plan.policies[0].action(0, 0) == 0);
  CHECK(plan.policies[1].action(0, 0) == 1);
  CHECK(plan.objective_values[0] == 0.0);
  CHECK(plan.objective_values[1] == doctest::Approx(2 * 0.4));
  CHECK(plan.per_policy_imagined[0].size() == 1);
  // Three references at leaf 1: 3 * 2 / (3 - 1).
  RngStream rng3(4);
  const PopulationPlan wide = select_population_cascade(p, 2, 0.4, ens, onehot(3), rng3, 3);
  CHECK(wide.objective_values[1] == doctest::Approx(0.4 * 3.0));
}

TEST_CASE("lambda = 0 makes the population homogeneous") {
  RngStream rng(5);
  const TabularMdp truth = make_random_mdp(5, 2, 3, rng, true);
  DirichletPosterior p(truth.shape(), 1.0);
  p.update(rollout(truth, TabularPolicy::uniform(5, 2, 3), rng), 0, DataOrigin::kReal);
  const EnsembleModel ens = make_ensemble(p, 5, RngStream(6));
  const PopulationPlan plan = select_population_cascade(p, 4, 0.0, ens, onehot(5), rng, 8);
  for (const TabularPolicy& pi : plan.policies) CHECK(pi == plan.policies[0]);
  CHECK(plan.policies[0] == select_policy_p2e(p, ens));
}

TEST_CASE("objective values are the exact composite optima") {
  RngStream rng(7);
  const TabularMdp truth = make_random_mdp(5, 2, 3, rng, false);
  DirichletPosterior p(truth.shape(), 1.0);
  const EnsembleModel ens = make_ensemble(p, 5, RngStream(8));
  const PopulationPlan plan = select_population_cascade(p, 3, 0.5, ens, onehot(5), rng, 6);
  const auto sigma = disagreement_table(ens);
  const TabularMdp mean = p.mean();
  TrajectoryDataset ref;
  for (int i = 0; i < 3; ++i) {
    const RewardTables r = composite_reward(ref, sigma, 0.5, onehot(5), 3, 2);
    CHECK(evaluate_policy_return(mean, plan.policies[i], r) == doctest::Approx(plan.objective_values[i]).epsilon(1e-12));
    ref.append(plan.per_policy_imagined[i]);
  }
  CHECK_THROWS_AS(select_population_cascade(p, 0, 0.5, ens, onehot(5), rng), ConfigError);
  CHECK_THROWS_AS(select_population_cascade(p, 2, -0.1, ens, onehot(5), rng), ConfigError);
}

TEST_CASE("pp2e: collapsed posterior gives identical policies, open posterior gives variety") {
  const RngStream base(9);
  const BinaryTree tree = make_binary_tree(2, std::vector<int>{2, 0, 3, 1});
  const TreePosterior collapsed = TreePosterior::from_edges(2, tree.spec.leaf_assignment);
  const EnsembleModel ens = make_ensemble(collapsed, 3, base.child(0));
  RngStream rng = base.child(1);
  const PopulationPlan plan = select_population_pp2e(collapsed, 5, ens, rng);
  for (const TabularPolicy& pi : plan.policies) CHECK(pi == plan.policies[0]);

  // On a tree with H = L the path return never depends on the leaf
  // bijection, so variety needs a world whose samples change the plan.
  const DirichletPosterior open(shape_of(6, 3, 4), 0.3);
  int differ = 0;
  for (int k = 0; k < 20; ++k) {
    RngStream r(10, k);
    const EnsembleModel e = make_ensemble(open, 4, r.child(0));
    RngStream s = r.child(1);
    const PopulationPlan pp = select_population_pp2e(open, 2, e, s);
    if (!(pp.policies[0] == pp.policies[1])) ++differ;
  }
  CHECK(differ > 0);
}

TEST_CASE("random population") {
  RngStream rng(11);
  const PopulationPlan plan = random_population(shape_of(3, 4, 2), 3, rng);
  REQUIRE(plan.policies.size() == 3);
  for (const TabularPolicy& pi : plan.policies) {
    for (int t = 0; t < 2; ++t) {
      for (StateId s = 0; s < 3; ++s) {
        for (ActionId a = 0; a < 4; ++a) CHECK(pi.prob(t, s, a) == 0.25);
      }
    }
  }
  CHECK_THROWS_AS(random_population(shape_of(3, 4, 2), 0, rng), ConfigError);
  CHECK(parse_explore_algo("pp2e") == ExploreAlgo::kPp2e);
  CHECK_THROWS_AS(parse_explore_algo("ppo"), ConfigError);
}

TEST_CASE("deployment loop on the one-state world") {
  const TabularMdp one = deterministic_mdp(1, 1, 3, {0});
  DirichletPosterior p(one.shape(), 1.0);
  ExploreConfig cfg;
  cfg.algo = ExploreAlgo::kRandom;
  cfg.population = 1;
  RngStream rng(12);
  const RunLog log = run_deployment_loop(one, make_selector(cfg), 1, 3, p, rng);
  CHECK(log.num_trajectories() == 1);
  CHECK(log.snapshots.size() == 1);
  CHECK(p.buffer().size() == 3);
  CHECK_THROWS_AS(run_deployment_loop(one, make_selector(cfg), 0, 3, p, rng), ConfigError);
  CHECK_THROWS_AS(run_deployment_loop(one, make_selector(cfg), 1, 0, p, rng), ConfigError);
}

namespace {

RunLog four_rooms_run(std::uint64_t seed) {
  GridWorldSpec spec;
  spec.family = GridFamily::kFourRooms;
  spec.horizon = 20;
  const GridWorld world = make_gridworld(spec);
  DirichletPosterior p(world.mdp.shape(), 1.0);
  ExploreConfig cfg;
  cfg.population = 10;
  cfg.ensemble_size = 4;
  cfg.imagined_rollouts = 4;
  cfg.embedding = onehot(world.mdp.num_states());
  RngStream rng(seed);
  return run_deployment_loop(world.mdp, make_selector(cfg), 5, 20, p, rng);
}

}  // namespace

TEST_CASE("deployment loop on four rooms records every deployment") {
  const RunLog a = four_rooms_run(13);
  CHECK(a.snapshots.size() == 5);
  CHECK(a.deployments.size() == 5);
  CHECK(a.num_trajectories() == 50);
  std::uint64_t prev = 0;
  for (const DeploymentRecord& d : a.deployments) {
    CHECK(d.policies.size() == 10);
    CHECK(d.version_before_update == d.version_at_selection);
    CHECK(d.version_after_update == d.version_at_selection + 1);
    CHECK(d.version_at_selection >= prev);
    prev = d.version_after_update;
    for (const Trajectory& t : d.trajectories) CHECK(t.steps.size() == 20);
  }
  const RunLog b = four_rooms_run(13);
  for (std::size_t d = 0; d < 5; ++d) {
    CHECK(a.deployments[d].policies == b.deployments[d].policies);
    for (std::size_t k = 0; k < 10; ++k) {
      CHECK(a.deployments[d].trajectories[k].states() == b.deployments[d].trajectories[k].states());
    }
  }
}
