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

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cascade/mdp.hpp"
#include "cascade/objectives.hpp"
#include "cascade/posterior.hpp"
#include "cascade/rng.hpp"

namespace cascade {

/// A population of exploration policies and the imagined data behind it.
struct PopulationPlan {
  std::vector<TabularPolicy> policies;
  /// per_policy_imagined[i] holds the rollouts of policy i that entered the
  /// reference dataset of policies i+1, ...
  std::vector<TrajectoryDataset> per_policy_imagined;
  std::vector<double> objective_values;
};

/// Greedy cascade: policy i maximizes lambda * PopDiv(D^(i-1)) +
/// (1 - lambda) * InfoGain exactly in the posterior mean model, then adds
/// `imagined_rollouts` mean-model rollouts of itself to D.
PopulationPlan select_population_cascade(const ModelPosterior& posterior, int B, double lambda,
                                         const EnsembleModel& ensemble, const EmbeddingSpec& spec,
                                         RngStream& rng, int imagined_rollouts = 32);

/// Each policy maximizes InfoGain in its own posterior sample.
PopulationPlan select_population_pp2e(const ModelPosterior& posterior, int B,
                                      const EnsembleModel& ensemble, RngStream& rng);

/// InfoGain maximizer in the posterior mean model.
TabularPolicy select_policy_p2e(const ModelPosterior& posterior, const EnsembleModel& ensemble);

/// B uniform-stochastic policies.
PopulationPlan random_population(const ModelShape& shape, int B, RngStream& rng);

enum class ExploreAlgo { kCascade, kPp2e, kP2e, kRandom };

const char* to_string(ExploreAlgo algo);
/// Parses "cascade", "pp2e", "p2e" or "random".
ExploreAlgo parse_explore_algo(const std::string& name);

struct ExploreConfig {
  ExploreAlgo algo = ExploreAlgo::kCascade;
  int population = 10;  // B
  double lambda = 0.3;
  int ensemble_size = 10;
  int imagined_rollouts = 32;
  EmbeddingSpec embedding;
};

/// Builds a population for one deployment from the current posterior.
using PopulationSelector = std::function<PopulationPlan(const ModelPosterior&, RngStream&)>;

/// Selector for `config`. P2E's single policy is deployed B times so all
/// algorithms consume the same data budget.
PopulationSelector make_selector(const ExploreConfig& config);

struct DeploymentRecord {
  int index = 0;
  std::vector<TabularPolicy> policies;
  std::vector<Trajectory> trajectories;
  std::vector<int> trajectory_policy;  // generating policy per trajectory
  std::vector<double> objective_values;
  std::uint64_t version_at_selection = 0;
  /// Posterior version right before the post-deployment update; equal to
  /// `version_at_selection` because the population is frozen while deployed.
  std::uint64_t version_before_update = 0;
  std::uint64_t version_after_update = 0;
  double select_seconds = 0.0;
  double deploy_seconds = 0.0;
};

struct RunLog {
  std::vector<DeploymentRecord> deployments;
  /// Posterior after each deployment's update.
  std::vector<std::shared_ptr<const ModelPosterior>> snapshots;

  std::size_t num_trajectories() const;
};

/// D times {select population, deploy each policy for
/// ceil(K / H) reward-free episodes in the true env, update the posterior}.
/// Rollouts see a reward-free copy of `env`.
RunLog run_deployment_loop(const TabularMdp& env, const PopulationSelector& select, int deployments,
                           int transitions_per_policy, ModelPosterior& posterior, RngStream& rng);

}  // namespace cascade
