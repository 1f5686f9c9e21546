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
#include <string>
#include <vector>

namespace cascade {

/// Run configuration. Text form is one `key.path = value` per line; `#`
/// starts a comment. Lists are comma separated. Every key has a default,
/// and fields documented as "0 = auto" are resolved from the others.
struct RunConfig {
  struct Env {
    std::string family = "four_rooms";  // four_rooms | multi_room | binary_tree
    int grid_size = 11;
    int num_rooms = 4;
    int room_size = 5;
    int depth = 3;    // binary_tree
    int horizon = 0;  // 0 = auto: depth for trees, 100 for grids
    std::uint64_t level_seed = 0;
    std::vector<std::uint64_t> test_level_seeds = {101, 102, 103, 104, 105};
  } env;

  struct Algo {
    std::string name = "cascade";
    int B = 10;
    double lambda = 0.3;
    int ensemble_size = 10;          // E
    int fake_rollouts = 0;           // M; 0 = auto: 1 for trees, 8 otherwise
    int imagined_rollouts = 32;      // m
    int deployments = 5;             // D
    // Full-scale reference: 200000 transitions per policy per deployment.
    int transitions_per_policy = 0;  // K; 0 = auto: 10 * H
    std::string embedding = "final_state";  // final_state | visitation
    double embedding_discount = 1.0;
    double prior_alpha = 1.0;
    std::string prior_support = "full";  // full | local | directional (grids)
    int depth_scale = 0;                 // 0 = auto: H (L for trees)
    std::string ts_init = "planned";     // planned | uniform
    int max_rounds = 0;                  // 0 = auto: 2^L + 2 for trees, 50 otherwise
  } algo;

  struct Eval {
    // coverage | rewarding_episodes | zeroshot | accuracy. Empty = auto:
    // coverage,rewarding_episodes for grids, coverage,accuracy for trees.
    std::vector<std::string> tasks;
    double success_threshold = 1.0;
    double epsilon_target = 0.0;
  } eval;

  struct Theory {
    int depth = 2;
    int B = 2;
    int greedy_instances = 100;
    int greedy_B = 2;
    int partition_trials = 10000;
    int factorization_trials = 100;
    int ts_seeds = 100;
    std::vector<int> ts_depths = {2};
    std::vector<int> ts_populations = {2};
  } theory;

  std::uint64_t seed = 0;
  std::uint64_t rng_stream = 0;
  std::string run_id = "run";
  std::string out_dir = "out";
};

/// Applies one `key = value` assignment. Throws ConfigError naming the key
/// when it is unknown or the value does not parse.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// Applies `KEY=VALUE`.
void apply_override(RunConfig& config, const std::string& assignment);

/// Parses the text form over the defaults.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Fills every auto field and validates ranges. Throws ConfigError with the
/// offending key.
RunConfig resolve(RunConfig config);

/// Text form of every key in canonical order; parse_config inverts it.
std::string to_text(const RunConfig& config);

/// All recognized keys in canonical order.
std::vector<std::string> config_keys();

}  // namespace cascade
