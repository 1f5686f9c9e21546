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
#include <span>
#include <string>
#include <vector>

#include "cascade/greedy.hpp"
#include "cascade/mdp.hpp"
#include "cascade/objectives.hpp"
#include "cascade/posterior.hpp"
#include "cascade/rng.hpp"
#include "cascade/ts.hpp"

namespace cascade {

// --- Exploration metrics -------------------------------------------------

/// Cumulative percentage of reachable states of `env` visited after each
/// deployment (s_0..s_H of every real trajectory).
std::vector<double> state_coverage(const RunLog& log, const TabularMdp& env);
/// Per-deployment coverage averaged over several levels sharing a state space.
std::vector<double> state_coverage(const RunLog& log, std::span<const TabularMdp> levels);

/// Real trajectories whose labeled return under `labeled_env` is positive;
/// 0 for a reward-free environment.
int rewarding_episodes(const RunLog& log, const TabularMdp& labeled_env);
/// Running total of rewarding_episodes after each deployment.
std::vector<int> cumulative_rewarding_episodes(const RunLog& log, const TabularMdp& labeled_env);

// --- Zero-shot transfer --------------------------------------------------

struct ZeroShotTask {
  /// Levels with rewards; labels come from each level's reward table.
  std::vector<TabularMdp> test_levels;
  double success_threshold = 1.0;
};

struct ZeroShotResult {
  double success_rate = 0.0;
  double mean_return = 0.0;
  std::vector<double> level_returns;
};

/// Per-(s, a) mean label over the given transitions. Unobserved pairs fall
/// back to sum_s' P(s'|s,a) rbar(s') in `model`, with rbar(s') the mean label
/// of transitions entering s' (0 when none). Indexed s * A + a.
std::vector<double> fit_reward_head(std::span<const Transition> transitions,
                                    const TabularMdp& labeler, const TabularMdp& model);

/// For each test level: label the collected real transitions, fit the
/// reward head, plan in the posterior mean model and evaluate exactly in
/// the level. Throws EvaluationError when no transitions were collected.
ZeroShotResult zero_shot_transfer(const ModelPosterior& posterior, const RunLog& log,
                                  const ZeroShotTask& task);

/// Mean after dropping floor(n/4) values at each end; plain mean for n < 4.
double iqm(std::vector<double> scores);

// --- Theory checks -------------------------------------------------------

enum class CheckStatus { kPass, kNonStrict, kFail };
const char* to_string(CheckStatus status);

struct Lemma1Report {
  CheckStatus status = CheckStatus::kFail;
  std::vector<int> best_tuple;  // path indices
  double best_mi = 0.0;
  std::vector<int> best_diagonal_tuple;
  double best_diagonal_mi = 0.0;
  double margin = 0.0;
};

/// Brute force over all B-tuples of path policies on the depth-L tree under
/// the uniform bijection posterior. Requires depth <= 3 and B <= 3.
Lemma1Report lemma1_check(int depth, int B);

struct GreedyReport {
  CheckStatus status = CheckStatus::kFail;
  double opt = 0.0;
  double greedy = 0.0;
  std::vector<int> opt_tuple;
  std::vector<int> greedy_tuple;
  double ratio() const { return opt > 0.0 ? greedy / opt : 1.0; }
};

/// Exhaustive optimum over B-tuples (with repetition) of the table's
/// policies versus sequential greedy argmax of exact MI.
GreedyReport greedy_bound_check(const OutcomeTable& instance, int B);

/// Weighted support of 2..6 random deterministic 4-state, 2-action worlds
/// (H = 3, start state 0) with its 16 stationary policies.
OutcomeTable random_greedy_instance(RngStream& rng);

struct PartitionReport {
  CheckStatus status = CheckStatus::kPass;
  int trials = 0;
  int violations = 0;
  int strict_cases = 0;
};

/// Random distributions and partitions: coarse entropy <= fine entropy,
/// strictly when some merged block has two positive masses.
PartitionReport entropy_partition_check(int trials, RngStream& rng);

struct FactorizationReport {
  int trials = 0;
  double max_abs_error = 0.0;
};

/// Random tuples of independent distributions: joint entropy versus the
/// sum of marginal entropies.
FactorizationReport factorization_check(int trials, RngStream& rng);

struct Lemma2Cell {
  int depth = 0;
  int population = 0;
  std::vector<int> cascade_ts;
  std::vector<int> sequential;
  std::vector<int> single_policy_batch;
};

/// Rounds to exact accuracy on `seeds` random trees for the three TS
/// algorithms (M = 1, depth_scale = L, per-seed streams from `base_seed`).
Lemma2Cell lemma2_cell(int depth, int B, int seeds, std::uint64_t base_seed,
                       TsInit init = TsInit::kPlanned);

}  // namespace cascade
