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

#include <memory>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cascade/mdp.hpp"
#include "cascade/posterior.hpp"
#include "cascade/rng.hpp"

namespace cascade {

enum class TsAlgorithm { kCascadeTs, kSequential, kSinglePolicyBatch };

const char* to_string(TsAlgorithm algo);
/// Parses "cascade_ts", "sequential_ts" or "single_policy_batch".
TsAlgorithm parse_ts_algorithm(const std::string& name);

/// How the population deployed in the first round is chosen.
enum class TsInit {
  /// Selected by the within-round loop from the empty buffer, where every
  /// bonus equals 2 * depth_scale.
  kPlanned,
  /// Uniform-stochastic policies.
  kUniform,
};

struct TsConfig {
  int population = 2;     // B
  int fake_rollouts = 1;  // M
  int depth_scale = 1;
  TsInit init = TsInit::kPlanned;
};

/// State carried between rounds. The posterior holds the real buffer; fake
/// data lives in it only while a round selects its next population.
struct TsRoundState {
  int round = 0;
  TsConfig config;
  std::unique_ptr<ModelPosterior> posterior;
  std::vector<TabularPolicy> population;
  /// Real trajectories of the latest round.
  std::vector<Trajectory> last_trajectories;
  /// Distinct real state-action sequences seen so far.
  std::set<std::vector<int>> seen_paths;

  int unique_paths() const noexcept { return static_cast<int>(seen_paths.size()); }
};

/// Fresh state; builds the first population per `config.init`.
TsRoundState make_ts_state(std::unique_ptr<ModelPosterior> posterior, const TsConfig& config,
                           RngStream& rng);

/// One CASCADE-TS round: deploy the population once each in `env` and
/// update on the data, clear fake data, then select B new policies, each
/// solving the bonus DP in a fresh posterior sample and adding M fake
/// rollouts of itself before the next selection.
void cascade_ts_round(TsRoundState& state, const TabularMdp& env, RngStream& rng);

/// B times {sample from real data, solve the bonus DP on real counts,
/// execute once, update}.
void sequential_ts_round(TsRoundState& state, const TabularMdp& env, RngStream& rng);

/// One bonus-DP policy from real data executed B times, one update at the end.
void single_policy_batch_round(TsRoundState& state, const TabularMdp& env, RngStream& rng);

void run_ts_round(TsAlgorithm algo, TsRoundState& state, const TabularMdp& env, RngStream& rng);

/// Fraction of (s, a) pairs whose most likely successor under `estimate` is
/// wrong; ties count as wrong. `pairs` restricts the count (s * A + a);
/// empty means all pairs. Requires a deterministic `truth`.
double epsilon_accuracy(const TabularMdp& estimate, const TabularMdp& truth,
                        std::span<const int> pairs = {});
/// Fraction of unknown-layer edges not determined by the real data (after
/// closure) or determined wrongly.
double epsilon_accuracy(const TreePosterior& estimate, const TabularMdp& truth);
/// Dispatches on the posterior type; uses real data only.
double epsilon_accuracy(const ModelPosterior& posterior, const TabularMdp& truth,
                        std::span<const int> pairs = {});

/// Pair indices of the unknown tree layer.
std::vector<int> tree_unknown_pairs(int depth);

inline constexpr int kRoundsNotReached = -1;

/// Smallest number of rounds after which epsilon_accuracy <= target, 0 when
/// the initial posterior already qualifies, kRoundsNotReached after
/// `max_rounds` rounds (or when max_rounds <= 0).
int rounds_to_accuracy(TsAlgorithm algo, const TabularMdp& env, double epsilon_target,
                       int max_rounds, TsRoundState& state, RngStream& rng,
                       std::span<const int> pairs = {});

}  // namespace cascade
