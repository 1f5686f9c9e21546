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

#include "cascade/ts.hpp"

#include <cmath>

#include "cascade/envs.hpp"
#include "cascade/errors.hpp"

namespace cascade {

const char* to_string(TsAlgorithm algo) {
  switch (algo) {
    case TsAlgorithm::kCascadeTs: return "cascade_ts";
    case TsAlgorithm::kSequential: return "sequential_ts";
    case TsAlgorithm::kSinglePolicyBatch: return "single_policy_batch";
  }
  return "?";
}

TsAlgorithm parse_ts_algorithm(const std::string& name) {
  if (name == "cascade_ts") return TsAlgorithm::kCascadeTs;
  if (name == "sequential_ts") return TsAlgorithm::kSequential;
  if (name == "single_policy_batch") return TsAlgorithm::kSinglePolicyBatch;
  throw ConfigError("unknown TS algorithm '" + name + "'", "algo.name");
}

namespace {

void check_config(const TsConfig& c) {
  if (c.population < 1) throw ConfigError("population size B must be >= 1", "algo.B");
  if (c.fake_rollouts < 1) throw ConfigError("fake_rollouts M must be >= 1", "algo.fake_rollouts");
  if (c.depth_scale < 1) throw ConfigError("depth_scale must be >= 1", "algo.depth_scale");
}

// Bonus-sum maximizer in a fresh posterior draw; bonuses from the buffer
// (real plus whatever fake data it currently holds).
TabularPolicy bonus_policy(const ModelPosterior& posterior, int depth_scale, RngStream& rng) {
  const TabularMdp world = posterior.sample(rng);
  const ModelShape& shape = posterior.shape();
  const std::vector<double> bonus = fake_counts_and_bonus(posterior.buffer(), depth_scale);
  const RewardTables rewards =
      RewardTables::stationary(shape.horizon, shape.num_states, shape.num_actions, bonus);
  return solve_finite_horizon(world, rewards).policy;
}

std::vector<int> path_key(const Trajectory& t) {
  std::vector<int> key;
  key.reserve(2 * t.steps.size() + 1);
  for (const Step& st : t.steps) {
    key.push_back(st.state);
    key.push_back(st.action);
  }
  key.push_back(t.final_state);
  return key;
}

void record_real(TsRoundState& state, Trajectory t) {
  state.seen_paths.insert(path_key(t));
  state.last_trajectories.push_back(std::move(t));
}

// Steps (b)-(d): within-round cascade over fake data.
std::vector<TabularPolicy> select_with_fake_data(ModelPosterior& posterior, const TsConfig& config,
                                                 int round, RngStream& rng) {
  posterior.clear_fake();
  std::vector<TabularPolicy> next;
  next.reserve(config.population);
  for (int i = 0; i < config.population; ++i) {
    // Sample and plan in the same draw, then imagine inside it.
    const TabularMdp world = posterior.sample(rng);
    const ModelShape& shape = posterior.shape();
    const std::vector<double> bonus = fake_counts_and_bonus(posterior.buffer(), config.depth_scale);
    const RewardTables rewards =
        RewardTables::stationary(shape.horizon, shape.num_states, shape.num_actions, bonus);
    TabularPolicy pi = solve_finite_horizon(world, rewards).policy;
    for (int m = 0; m < config.fake_rollouts; ++m) {
      posterior.update(rollout(world, pi, rng, false, Origin::kImagined), round, DataOrigin::kFake);
    }
    next.push_back(std::move(pi));
  }
  posterior.clear_fake();
  return next;
}

void begin_round(TsRoundState& state, const TabularMdp& env) {
  if (!state.posterior) throw InvalidStateError("TS state has no posterior");
  if (state.posterior->buffer().num_fake() != 0) {
    throw InvalidStateError("fake buffer must be empty at the start of a round");
  }
  const ModelShape& shape = state.posterior->shape();
  if (shape.num_states != env.num_states() || shape.num_actions != env.num_actions() ||
      shape.horizon != env.horizon()) {
    throw ConfigError("posterior shape does not match the environment");
  }
  state.last_trajectories.clear();
}

}  // namespace

TsRoundState make_ts_state(std::unique_ptr<ModelPosterior> posterior, const TsConfig& config,
                           RngStream& rng) {
  check_config(config);
  if (!posterior) throw ConfigError("TS state needs a posterior");
  TsRoundState state;
  state.config = config;
  state.posterior = std::move(posterior);
  const ModelShape& shape = state.posterior->shape();
  if (config.init == TsInit::kUniform) {
    for (int i = 0; i < config.population; ++i) {
      state.population.push_back(
          TabularPolicy::uniform(shape.num_states, shape.num_actions, shape.horizon));
    }
  } else {
    state.population = select_with_fake_data(*state.posterior, config, 0, rng);
  }
  return state;
}

void cascade_ts_round(TsRoundState& state, const TabularMdp& env, RngStream& rng) {
  begin_round(state, env);
  const TabularMdp reward_free = env.without_rewards();
  const int round = state.round + 1;
  // (a) every current policy once in the true environment.
  std::vector<Transition> batch;
  for (const TabularPolicy& pi : state.population) {
    Trajectory t = rollout(reward_free, pi, rng);
    for (std::size_t k = 0; k < t.steps.size(); ++k) {
      batch.push_back({t.steps[k].state, t.steps[k].action, t.next_state(k), round, DataOrigin::kReal});
    }
    record_real(state, std::move(t));
  }
  state.posterior->update(batch);
  // (b)-(d)
  state.population = select_with_fake_data(*state.posterior, state.config, round, rng);
  state.round = round;
}

void sequential_ts_round(TsRoundState& state, const TabularMdp& env, RngStream& rng) {
  begin_round(state, env);
  const TabularMdp reward_free = env.without_rewards();
  const int round = state.round + 1;
  std::vector<TabularPolicy> executed;
  for (int i = 0; i < state.config.population; ++i) {
    TabularPolicy pi = bonus_policy(*state.posterior, state.config.depth_scale, rng);
    Trajectory t = rollout(reward_free, pi, rng);
    state.posterior->update(t, round, DataOrigin::kReal);
    record_real(state, std::move(t));
    executed.push_back(std::move(pi));
  }
  state.population = std::move(executed);
  state.round = round;
}

void single_policy_batch_round(TsRoundState& state, const TabularMdp& env, RngStream& rng) {
  begin_round(state, env);
  const TabularMdp reward_free = env.without_rewards();
  const int round = state.round + 1;
  const TabularPolicy pi = bonus_policy(*state.posterior, state.config.depth_scale, rng);
  std::vector<Transition> batch;
  for (int i = 0; i < state.config.population; ++i) {
    Trajectory t = rollout(reward_free, pi, rng);
    for (std::size_t k = 0; k < t.steps.size(); ++k) {
      batch.push_back({t.steps[k].state, t.steps[k].action, t.next_state(k), round, DataOrigin::kReal});
    }
    record_real(state, std::move(t));
  }
  state.posterior->update(batch);
  state.population.assign(state.config.population, pi);
  state.round = round;
}

void run_ts_round(TsAlgorithm algo, TsRoundState& state, const TabularMdp& env, RngStream& rng) {
  switch (algo) {
    case TsAlgorithm::kCascadeTs: cascade_ts_round(state, env, rng); return;
    case TsAlgorithm::kSequential: sequential_ts_round(state, env, rng); return;
    case TsAlgorithm::kSinglePolicyBatch: single_policy_batch_round(state, env, rng); return;
  }
}

// --- Accuracy ------------------------------------------------------------

double epsilon_accuracy(const TabularMdp& estimate, const TabularMdp& truth,
                        std::span<const int> pairs) {
  if (estimate.num_states() != truth.num_states() || estimate.num_actions() != truth.num_actions()) {
    throw ConfigError("epsilon_accuracy: model dimensions differ");
  }
  const int A = truth.num_actions();
  const int total = truth.num_states() * A;
  std::vector<int> all;
  if (pairs.empty()) {
    all.resize(total);
    for (int r = 0; r < total; ++r) all[r] = r;
    pairs = all;
  }
  int wrong = 0;
  for (int r : pairs) {
    if (r < 0 || r >= total) throw ConfigError("epsilon_accuracy: pair index out of range");
    const StateId s = r / A;
    const ActionId a = r % A;
    const StateId target = truth.successor(s, a);
    double best = -1.0;
    StateId arg = -1;
    bool tie = false;
    for (const Successor& e : estimate.row(s, a)) {
      if (e.prob > best + 1e-12) {
        best = e.prob;
        arg = e.next;
        tie = false;
      } else if (std::abs(e.prob - best) <= 1e-12) {
        tie = true;
      }
    }
    if (tie || arg != target) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(pairs.size());
}

double epsilon_accuracy(const TreePosterior& estimate, const TabularMdp& truth) {
  BinaryTreeSpec spec;
  spec.depth = estimate.depth();
  if (truth.num_states() != spec.num_nodes() || truth.num_actions() != 2) {
    throw ConfigError("epsilon_accuracy: truth is not a tree of the posterior's depth");
  }
  int wrong = 0;
  for (int e = 0; e < spec.num_edges(); ++e) {
    const int leaf = truth.successor(spec.edge_node(e), spec.edge_action(e)) - spec.first_leaf();
    if (estimate.edge_leaf(e) != leaf) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(spec.num_edges());
}

double epsilon_accuracy(const ModelPosterior& posterior, const TabularMdp& truth,
                        std::span<const int> pairs) {
  if (const auto* tree = dynamic_cast<const TreePosterior*>(&posterior)) {
    return epsilon_accuracy(*tree, truth);
  }
  if (posterior.buffer().num_fake() == 0 || !posterior.conditions_on_fake()) {
    return epsilon_accuracy(posterior.mean(), truth, pairs);
  }
  auto real_only = posterior.clone();
  real_only->clear_fake();
  return epsilon_accuracy(real_only->mean(), truth, pairs);
}

std::vector<int> tree_unknown_pairs(int depth) {
  BinaryTreeSpec spec;
  spec.depth = depth;
  std::vector<int> out;
  for (int e = 0; e < spec.num_edges(); ++e) out.push_back(spec.edge_node(e) * 2 + spec.edge_action(e));
  return out;
}

int rounds_to_accuracy(TsAlgorithm algo, const TabularMdp& env, double epsilon_target,
                       int max_rounds, TsRoundState& state, RngStream& rng,
                       std::span<const int> pairs) {
  if (!(epsilon_target >= 0.0 && epsilon_target < 1.0)) {
    throw ConfigError("epsilon_target must lie in [0, 1)", "eval.epsilon_target");
  }
  if (max_rounds <= 0) return kRoundsNotReached;
  if (epsilon_accuracy(*state.posterior, env, pairs) <= epsilon_target) return 0;
  for (int k = 1; k <= max_rounds; ++k) {
    run_ts_round(algo, state, env, rng);
    if (epsilon_accuracy(*state.posterior, env, pairs) <= epsilon_target) return k;
  }
  return kRoundsNotReached;
}

}  // namespace cascade
