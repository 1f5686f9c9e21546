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

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "cascade/mdp.hpp"
#include "cascade/posterior.hpp"

namespace cascade {

enum class EmbeddingKind { kFinalStateOneHot, kDiscountedVisitation };

struct EmbeddingSpec {
  EmbeddingKind kind = EmbeddingKind::kFinalStateOneHot;
  double discount = 1.0;  // visitation kind only
  int dimension = 0;      // number of states
};

using Embedding = std::vector<double>;

/// One-hot of the final state, or sum_t gamma^t 1[s_t = s] over s_0..s_H.
Embedding embed(const Trajectory& trajectory, const EmbeddingSpec& spec);

/// Embeddings of imagined trajectories, tagged by generating policy and model.
struct TrajectoryDataset {
  std::vector<Embedding> embeddings;
  std::vector<int> policy_ids;
  std::vector<int> model_tags;  // -1 for the real environment

  std::size_t size() const noexcept { return embeddings.size(); }
  bool empty() const noexcept { return embeddings.empty(); }
  void add(Embedding e, int policy_id, int model_tag);
  /// Appends every record of `other`.
  void append(const TrajectoryDataset& other);
};

// --- Entropy and mutual information --------------------------------------

/// Shannon entropy in nats; 0 ln 0 = 0. Throws NumericalError unless `p`
/// is a probability vector.
double entropy(std::span<const double> p);

/// Discrete distribution over interned outcome ids.
using OutcomeDist = std::vector<std::pair<int, double>>;

/// Outcome distributions for every (world, policy) pair; `dist[w][i]`.
struct OutcomeTable {
  std::vector<double> weights;  // per world, sums to 1
  std::vector<std::vector<OutcomeDist>> dist;
  int num_outcomes = 0;

  std::size_t num_worlds() const noexcept { return dist.size(); }
  std::size_t num_policies() const noexcept { return dist.empty() ? 0 : dist.front().size(); }
};

/// Exact embedding distributions of each policy in each weighted world.
/// Outcomes equal as embeddings share an id. Throws ResourceError when
/// worlds * policies exceeds `cap`, or when path enumeration (stochastic
/// visitation embeddings) grows beyond `cap` paths in one evaluation.
OutcomeTable build_outcome_table(std::span<const TabularPolicy> policies,
                                 std::span<const std::pair<TabularMdp, double>> support,
                                 const EmbeddingSpec& spec, double cap = 1e6);

/// I(tau_1..tau_B; M) for the policies at `selection` (indices into the
/// table, repeats allowed): entropy of the world-averaged product of the
/// per-world outcome distributions minus the weighted per-world entropies.
double mutual_information(const OutcomeTable& table, std::span<const int> selection,
                          double cap = 1e7);

/// `build_outcome_table` followed by `mutual_information` over all policies.
double exact_mutual_information(std::span<const TabularPolicy> policies,
                                std::span<const std::pair<TabularMdp, double>> support,
                                const EmbeddingSpec& spec, double cap = 1e6);

/// Entropy of the product of independent outcome distributions, computed
/// by enumerating the joint support.
double joint_conditional_entropy(std::span<const std::vector<double>> factors,
                                 double cap = 1e7);
/// Sum of the factor entropies.
double factorized_conditional_entropy(std::span<const std::vector<double>> factors);

// --- Population objectives -----------------------------------------------

/// Mean over candidates of sum_ref ||phi - phi_ref||^2 / max(|D| - 1, 1).
double popdiv(std::span<const Trajectory> candidates, const TrajectoryDataset& reference,
              const EmbeddingSpec& spec);
/// Same quantity for one embedding.
double popdiv_embedding(const Embedding& candidate, const TrajectoryDataset& reference);

/// Empirical variance of per-world mean embeddings over the worlds of
/// `ensemble` and the policies `selected` + `candidate`, centered at their
/// grand mean, with denominator E * i - 1.
double var_over_means(const TabularPolicy& candidate, std::span<const TabularPolicy> selected,
                      const EnsembleModel& ensemble, const EmbeddingSpec& spec);

/// Expected embedding of `policy` in `model`.
Embedding mean_embedding(const TabularMdp& model, const TabularPolicy& policy,
                         const EmbeddingSpec& spec);

/// Sum of sigma(s, a) over the trajectory's steps.
double infogain(const Trajectory& trajectory, const EnsembleModel& ensemble);
/// Same with a precomputed sigma table (s * A + a).
double infogain(const Trajectory& trajectory, std::span<const double> sigma, int num_actions);

/// Reward tables whose exact return is lambda * PopDiv + (1 - lambda) * InfoGain:
/// step reward (1 - lambda) sigma(s, a), terminal reward
/// lambda * sum_ref ||e_s - phi_ref||^2 / max(|D| - 1, 1) (zero when D is empty).
/// Only the final-state embedding reduces to a terminal reward.
RewardTables composite_reward(const TrajectoryDataset& selected, std::span<const double> sigma,
                              double lambda, const EmbeddingSpec& spec, int horizon,
                              int num_actions);
RewardTables composite_reward(const TrajectoryDataset& selected, const EnsembleModel& ensemble,
                              double lambda, const EmbeddingSpec& spec, int horizon);

/// Exact E[PopDiv] of `policy` in `model` by forward propagation.
double expected_popdiv(const TabularMdp& model, const TabularPolicy& policy,
                       const TrajectoryDataset& reference, const EmbeddingSpec& spec);
/// Exact E[InfoGain] of `policy` in `model` by forward propagation.
double expected_infogain(const TabularMdp& model, const TabularPolicy& policy,
                         std::span<const double> sigma);

}  // namespace cascade
