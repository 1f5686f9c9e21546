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

#include "cascade/greedy.hpp"

#include <chrono>

#include "cascade/errors.hpp"

namespace cascade {

namespace {

void check_population_size(int B) {
  if (B < 1) throw ConfigError("population size B must be >= 1", "algo.B");
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

PopulationPlan select_population_cascade(const ModelPosterior& posterior, int B, double lambda,
                                         const EnsembleModel& ensemble, const EmbeddingSpec& spec,
                                         RngStream& rng, int imagined_rollouts) {
  check_population_size(B);
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]", "algo.lambda");
  if (imagined_rollouts < 1) {
    throw ConfigError("imagined_rollouts must be >= 1", "algo.imagined_rollouts");
  }
  const TabularMdp planning = posterior.mean();
  const std::vector<double> sigma = disagreement_table(ensemble);
  const int H = planning.horizon();

  PopulationPlan plan;
  TrajectoryDataset reference;
  for (int i = 0; i < B; ++i) {
    const RewardTables rewards =
        composite_reward(reference, sigma, lambda, spec, H, planning.num_actions());
    PlanResult solved = solve_finite_horizon(planning, rewards);
    TrajectoryDataset imagined;
    for (int j = 0; j < imagined_rollouts; ++j) {
      const Trajectory t = rollout(planning, solved.policy, rng, false, Origin::kImagined);
      imagined.add(embed(t, spec), i, -1);
    }
    reference.append(imagined);
    plan.policies.push_back(std::move(solved.policy));
    plan.per_policy_imagined.push_back(std::move(imagined));
    plan.objective_values.push_back(solved.value);
  }
  return plan;
}

PopulationPlan select_population_pp2e(const ModelPosterior& posterior, int B,
                                      const EnsembleModel& ensemble, RngStream& rng) {
  check_population_size(B);
  const std::vector<double> sigma = disagreement_table(ensemble);
  const ModelShape& shape = posterior.shape();
  const RewardTables rewards =
      RewardTables::stationary(shape.horizon, shape.num_states, shape.num_actions, sigma);
  PopulationPlan plan;
  for (int i = 0; i < B; ++i) {
    RngStream sample_rng = rng.child(static_cast<std::uint64_t>(i));
    const TabularMdp world = posterior.sample(sample_rng);
    PlanResult solved = solve_finite_horizon(world, rewards);
    plan.policies.push_back(std::move(solved.policy));
    plan.per_policy_imagined.emplace_back();
    plan.objective_values.push_back(solved.value);
  }
  return plan;
}

TabularPolicy select_policy_p2e(const ModelPosterior& posterior, const EnsembleModel& ensemble) {
  const std::vector<double> sigma = disagreement_table(ensemble);
  const ModelShape& shape = posterior.shape();
  const RewardTables rewards =
      RewardTables::stationary(shape.horizon, shape.num_states, shape.num_actions, sigma);
  return solve_finite_horizon(posterior.mean(), rewards).policy;
}

PopulationPlan random_population(const ModelShape& shape, int B, RngStream&) {
  check_population_size(B);
  PopulationPlan plan;
  for (int i = 0; i < B; ++i) {
    plan.policies.push_back(TabularPolicy::uniform(shape.num_states, shape.num_actions, shape.horizon));
    plan.per_policy_imagined.emplace_back();
    plan.objective_values.push_back(0.0);
  }
  return plan;
}

const char* to_string(ExploreAlgo algo) {
  switch (algo) {
    case ExploreAlgo::kCascade: return "cascade";
    case ExploreAlgo::kPp2e: return "pp2e";
    case ExploreAlgo::kP2e: return "p2e";
    case ExploreAlgo::kRandom: return "random";
  }
  return "?";
}

ExploreAlgo parse_explore_algo(const std::string& name) {
  if (name == "cascade") return ExploreAlgo::kCascade;
  if (name == "pp2e") return ExploreAlgo::kPp2e;
  if (name == "p2e") return ExploreAlgo::kP2e;
  if (name == "random") return ExploreAlgo::kRandom;
  throw ConfigError("unknown exploration algorithm '" + name + "'", "algo.name");
}

PopulationSelector make_selector(const ExploreConfig& config) {
  check_population_size(config.population);
  if (config.algo != ExploreAlgo::kRandom && config.ensemble_size < 2) {
    throw ConfigError("ensemble_size must be >= 2", "algo.ensemble_size");
  }
  return [config](const ModelPosterior& posterior, RngStream& rng) -> PopulationPlan {
    const int B = config.population;
    if (config.algo == ExploreAlgo::kRandom) return random_population(posterior.shape(), B, rng);
    const EnsembleModel ensemble = make_ensemble(posterior, config.ensemble_size, rng.child(0));
    RngStream select_rng = rng.child(1);
    switch (config.algo) {
      case ExploreAlgo::kCascade:
        return select_population_cascade(posterior, B, config.lambda, ensemble, config.embedding,
                                         select_rng, config.imagined_rollouts);
      case ExploreAlgo::kPp2e:
        return select_population_pp2e(posterior, B, ensemble, select_rng);
      case ExploreAlgo::kP2e: {
        PopulationPlan plan;
        const TabularPolicy pi = select_policy_p2e(posterior, ensemble);
        for (int i = 0; i < B; ++i) {
          plan.policies.push_back(pi);
          plan.per_policy_imagined.emplace_back();
          plan.objective_values.push_back(0.0);
        }
        return plan;
      }
      case ExploreAlgo::kRandom: break;
    }
    throw InvalidStateError("unreachable exploration algorithm");
  };
}

std::size_t RunLog::num_trajectories() const {
  std::size_t n = 0;
  for (const auto& d : deployments) n += d.trajectories.size();
  return n;
}

RunLog run_deployment_loop(const TabularMdp& env, const PopulationSelector& select, int deployments,
                           int transitions_per_policy, ModelPosterior& posterior, RngStream& rng) {
  if (deployments < 1) throw ConfigError("deployments D must be >= 1", "algo.D");
  if (transitions_per_policy < 1) throw ConfigError("transitions per policy K must be >= 1", "algo.K");
  const ModelShape& shape = posterior.shape();
  if (shape.num_states != env.num_states() || shape.num_actions != env.num_actions() ||
      shape.horizon != env.horizon()) {
    throw ConfigError("posterior shape does not match the environment");
  }
  // Exploration never sees rewards: reading them from this copy throws.
  const TabularMdp reward_free = env.without_rewards();
  const int H = env.horizon();
  const int episodes = (transitions_per_policy + H - 1) / H;

  RunLog log;
  for (int d = 0; d < deployments; ++d) {
    DeploymentRecord rec;
    rec.index = d;
    rec.version_at_selection = posterior.version();
    auto t0 = std::chrono::steady_clock::now();
    RngStream select_rng = rng.child(2 * static_cast<std::uint64_t>(d));
    PopulationPlan plan = select(posterior, select_rng);
    rec.select_seconds = seconds_since(t0);

    t0 = std::chrono::steady_clock::now();
    const RngStream deploy_rng = rng.child(2 * static_cast<std::uint64_t>(d) + 1);
    const int B = static_cast<int>(plan.policies.size());
    rec.trajectories.resize(static_cast<std::size_t>(B) * episodes);
    rec.trajectory_policy.resize(rec.trajectories.size());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < B; ++i) {
      RngStream policy_rng = deploy_rng.child(static_cast<std::uint64_t>(i));
      for (int k = 0; k < episodes; ++k) {
        const std::size_t slot = static_cast<std::size_t>(i) * episodes + k;
        rec.trajectories[slot] = rollout(reward_free, plan.policies[i], policy_rng);
        rec.trajectory_policy[slot] = i;
      }
    }
    rec.deploy_seconds = seconds_since(t0);

    rec.version_before_update = posterior.version();
    if (rec.version_before_update != rec.version_at_selection) {
      throw InvalidStateError("posterior changed while a population was deployed");
    }
    std::vector<Transition> batch;
    batch.reserve(rec.trajectories.size() * H);
    for (const Trajectory& t : rec.trajectories) {
      for (std::size_t k = 0; k < t.steps.size(); ++k) {
        batch.push_back({t.steps[k].state, t.steps[k].action, t.next_state(k), d, DataOrigin::kReal});
      }
    }
    posterior.update(batch);
    rec.version_after_update = posterior.version();
    rec.policies = std::move(plan.policies);
    rec.objective_values = std::move(plan.objective_values);
    log.deployments.push_back(std::move(rec));
    log.snapshots.push_back(posterior.clone());
  }
  return log;
}

}  // namespace cascade
