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
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cascade/rng.hpp"

namespace cascade {

using StateId = int;
using ActionId = int;

/// One entry of a sparse transition row.
struct Successor {
  StateId next;
  double prob;
};

/// Everything about a finite MDP that is known without data: sizes,
/// start distribution, horizon and discount.
struct ModelShape {
  int num_states = 0;
  int num_actions = 0;
  int horizon = 1;
  double discount = 1.0;
  std::vector<double> initial_dist;
};

/// Finite episodic MDP with sparse transition rows.
///
/// Rewards are optional and live on (s, a, s') triples. A model without
/// a reward table is reward-free: asking it for rewards is a contract
/// violation rather than a silent zero.
class TabularMdp {
 public:
  using Rows = std::vector<std::vector<Successor>>;
  using RewardRows = std::vector<std::vector<double>>;

  /// `rows[s * num_actions + a]` lists successors of (s, a). Duplicate
  /// successors are merged. `rewards`, when given, is aligned entry by
  /// entry with `rows` (before merging, duplicates must carry equal rewards).
  TabularMdp(ModelShape shape, Rows rows, std::optional<RewardRows> rewards = std::nullopt);
  /// Empty placeholder with zero states.
  TabularMdp() = default;

  int num_states() const noexcept { return shape_.num_states; }
  int num_actions() const noexcept { return shape_.num_actions; }
  int horizon() const noexcept { return shape_.horizon; }
  double discount() const noexcept { return shape_.discount; }
  const std::vector<double>& initial_dist() const noexcept { return shape_.initial_dist; }
  const ModelShape& shape() const noexcept { return shape_; }

  std::span<const Successor> row(StateId s, ActionId a) const {
    const std::size_t r = index(s, a);
    return {entries_.data() + offsets_[r], entries_.data() + offsets_[r + 1]};
  }
  /// P(next | s, a); zero when `next` is not listed.
  double prob(StateId s, ActionId a, StateId next) const;

  bool has_rewards() const noexcept { return rewards_.has_value(); }
  /// R(s, a, next); throws ContractViolation on a reward-free model.
  double reward(StateId s, ActionId a, StateId next) const;
  /// Expected one-step reward sum_{s'} P(s'|s,a) R(s,a,s').
  double expected_reward(StateId s, ActionId a) const;

  /// Same dynamics with the reward table removed.
  TabularMdp without_rewards() const;
  /// Same model with a different horizon.
  TabularMdp with_horizon(int horizon) const;

  /// True when every row has a single successor with probability one.
  bool is_deterministic() const;
  /// The unique successor of a deterministic row.
  StateId successor(StateId s, ActionId a) const;

  bool in_range(StateId s) const noexcept { return s >= 0 && s < shape_.num_states; }
  bool action_in_range(ActionId a) const noexcept { return a >= 0 && a < shape_.num_actions; }

 private:
  std::size_t index(StateId s, ActionId a) const noexcept {
    return static_cast<std::size_t>(s) * static_cast<std::size_t>(shape_.num_actions) +
           static_cast<std::size_t>(a);
  }

  ModelShape shape_;
  std::vector<std::size_t> offsets_;
  std::vector<Successor> entries_;
  std::optional<std::vector<double>> rewards_;
};

/// Validates a probability vector (non-negative, sums to 1 within `tol`).
bool is_probability_vector(std::span<const double> p, double tol = 1e-9);

enum class Origin { kReal, kImagined };

struct Step {
  StateId state;
  ActionId action;
};

struct Trajectory {
  std::vector<Step> steps;
  StateId final_state = 0;
  std::vector<double> reward_labels;
  Origin origin = Origin::kReal;

  /// s_0, ..., s_H (steps followed by the final state).
  std::vector<StateId> states() const;
  /// Successor of step t.
  StateId next_state(std::size_t t) const {
    return t + 1 < steps.size() ? steps[t + 1].state : final_state;
  }
};

/// Time-indexed policy over a finite horizon.
class TabularPolicy {
 public:
  enum class Kind { kDeterministic, kStochastic };

  /// Deterministic policy; `actions[t * num_states + s]`.
  static TabularPolicy deterministic(int num_states, int num_actions, int horizon,
                                     std::vector<ActionId> actions);
  /// Stochastic policy; `probs[(t * num_states + s) * num_actions + a]`.
  static TabularPolicy stochastic(int num_states, int num_actions, int horizon,
                                  std::vector<double> probs);
  static TabularPolicy uniform(int num_states, int num_actions, int horizon);
  /// Plays `actions[t]` at time t regardless of state.
  static TabularPolicy open_loop(int num_states, int num_actions,
                                 std::span<const ActionId> actions);
  /// Same action table at every time step; `actions[s]`.
  static TabularPolicy stationary(int num_states, int num_actions, int horizon,
                                  std::span<const ActionId> actions);

  Kind kind() const noexcept { return kind_; }
  bool is_deterministic() const noexcept { return kind_ == Kind::kDeterministic; }
  int num_states() const noexcept { return num_states_; }
  int num_actions() const noexcept { return num_actions_; }
  int horizon() const noexcept { return horizon_; }

  /// Action of a deterministic policy.
  ActionId action(int t, StateId s) const;
  /// pi(a | t, s) for either kind.
  double prob(int t, StateId s, ActionId a) const;
  ActionId sample(int t, StateId s, RngStream& rng) const;

  const std::vector<ActionId>& action_table() const noexcept { return actions_; }

  friend bool operator==(const TabularPolicy&, const TabularPolicy&) = default;

 private:
  TabularPolicy() = default;

  Kind kind_ = Kind::kDeterministic;
  int num_states_ = 0;
  int num_actions_ = 0;
  int horizon_ = 0;
  std::vector<ActionId> actions_;
  std::vector<double> probs_;
};

/// Step rewards r(t, s, a) and terminal rewards r_H(s) for exact planning.
struct RewardTables {
  int horizon = 0;
  int num_states = 0;
  int num_actions = 0;
  std::vector<double> step;      // (t * S + s) * A + a
  std::vector<double> terminal;  // s

  static RewardTables zeros(int horizon, int num_states, int num_actions);
  /// Same r(s, a) for every time step.
  static RewardTables stationary(int horizon, int num_states, int num_actions,
                                 std::span<const double> per_pair);

  double& at(int t, StateId s, ActionId a) {
    return step[(static_cast<std::size_t>(t) * num_states + s) * num_actions + a];
  }
  double at(int t, StateId s, ActionId a) const {
    return step[(static_cast<std::size_t>(t) * num_states + s) * num_actions + a];
  }
};

/// Expected step rewards of a model's own reward table, all time steps.
RewardTables task_reward_tables(const TabularMdp& model);

struct PlanResult {
  TabularPolicy policy;
  double value = 0.0;
};

/// Samples one episode of exactly `horizon` steps.
Trajectory rollout(const TabularMdp& model, const TabularPolicy& policy, RngStream& rng,
                   bool with_rewards = false, Origin origin = Origin::kReal);

/// Exact backward induction; lowest action index wins ties.
PlanResult solve_finite_horizon(const TabularMdp& model, const RewardTables& rewards);

/// Exact expected return by forward propagation of the state distribution.
double evaluate_policy_return(const TabularMdp& model, const TabularPolicy& policy,
                              const RewardTables& rewards);

/// State distributions d_0..d_H under `policy`.
std::vector<std::vector<double>> state_distributions(const TabularMdp& model,
                                                     const TabularPolicy& policy);

/// States reachable from the support of the initial distribution.
std::vector<StateId> reachable_states(const TabularMdp& model);

struct EnumerationOptions {
  bool stationary = true;
  /// States whose action is enumerated; others play action 0. Empty means all.
  std::vector<StateId> relevant_states;
  double cap = 1e7;
};

/// Enumerates deterministic policies in odometer order (first relevant
/// state, earliest time step varies fastest).
class PolicyEnumerator {
 public:
  PolicyEnumerator(const TabularMdp& model, EnumerationOptions options = {});

  /// Number of policies the enumeration yields.
  std::uint64_t count() const noexcept { return count_; }
  /// Writes the next policy into `out`; false when exhausted.
  bool next(TabularPolicy& out);
  void reset();

 private:
  int num_states_;
  int num_actions_;
  int horizon_;
  bool stationary_;
  std::vector<StateId> relevant_;
  std::vector<ActionId> digits_;
  std::uint64_t count_ = 0;
  std::uint64_t emitted_ = 0;
};

/// All policies of the enumeration, materialized.
std::vector<TabularPolicy> enumerate_deterministic_policies(const TabularMdp& model,
                                                            EnumerationOptions options = {});

}  // namespace cascade
