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

#include "cascade/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "cascade/errors.hpp"
#include "cascade/kernels.hpp"

namespace cascade {

bool is_probability_vector(std::span<const double> p, double tol) {
  double total = 0.0;
  for (double x : p) {
    if (!(x >= 0.0) || !std::isfinite(x)) return false;
    total += x;
  }
  return std::abs(total - 1.0) <= tol;
}

TabularMdp::TabularMdp(ModelShape shape, Rows rows, std::optional<RewardRows> rewards)
    : shape_(std::move(shape)) {
  const int S = shape_.num_states;
  const int A = shape_.num_actions;
  if (S < 1 || A < 1) throw ConfigError("TabularMdp: num_states and num_actions must be >= 1");
  if (shape_.horizon < 1) throw ConfigError("TabularMdp: horizon must be >= 1");
  if (!(shape_.discount > 0.0 && shape_.discount <= 1.0)) {
    throw ConfigError("TabularMdp: discount must lie in (0, 1]");
  }
  if (shape_.initial_dist.size() != static_cast<std::size_t>(S) ||
      !is_probability_vector(shape_.initial_dist)) {
    throw ConfigError("TabularMdp: initial distribution must be a probability vector over states");
  }
  const std::size_t num_rows = static_cast<std::size_t>(S) * A;
  if (rows.size() != num_rows) throw ConfigError("TabularMdp: expected S*A transition rows");
  if (rewards && rewards->size() != num_rows) {
    throw ConfigError("TabularMdp: reward rows must align with transition rows");
  }

  offsets_.reserve(num_rows + 1);
  offsets_.push_back(0);
  std::vector<double> reward_entries;
  for (std::size_t r = 0; r < num_rows; ++r) {
    auto& row = rows[r];
    if (rewards && (*rewards)[r].size() != row.size()) {
      throw ConfigError("TabularMdp: reward row length differs from transition row");
    }
    // Merge duplicates after sorting by successor.
    std::vector<std::size_t> order(row.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return row[x].next < row[y].next; });
    double total = 0.0;
    const std::size_t row_start = entries_.size();
    for (std::size_t k : order) {
      const Successor& e = row[k];
      if (e.next < 0 || e.next >= S) throw ConfigError("TabularMdp: successor index out of range");
      if (!(e.prob >= 0.0) || !std::isfinite(e.prob)) {
        throw ConfigError("TabularMdp: transition probabilities must be finite and non-negative");
      }
      total += e.prob;
      const double rew = rewards ? (*rewards)[r][k] : 0.0;
      if (rewards && !std::isfinite(rew)) throw NumericalError("TabularMdp: non-finite reward");
      if (entries_.size() > row_start && entries_.back().next == e.next) {
        entries_.back().prob += e.prob;
        if (rewards && reward_entries.back() != rew) {
          throw ConfigError("TabularMdp: duplicate successor with conflicting rewards");
        }
      } else {
        entries_.push_back(e);
        if (rewards) reward_entries.push_back(rew);
      }
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw ConfigError("TabularMdp: transition row (" + std::to_string(r / A) + ", " +
                        std::to_string(r % A) + ") sums to " + std::to_string(total));
    }
    offsets_.push_back(entries_.size());
  }
  if (rewards) rewards_ = std::move(reward_entries);
}

double TabularMdp::prob(StateId s, ActionId a, StateId next) const {
  for (const Successor& e : row(s, a)) {
    if (e.next == next) return e.prob;
  }
  return 0.0;
}

double TabularMdp::reward(StateId s, ActionId a, StateId next) const {
  if (!rewards_) throw ContractViolation("reward requested from a reward-free model");
  const std::size_t r = index(s, a);
  for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) {
    if (entries_[k].next == next) return (*rewards_)[k];
  }
  return 0.0;
}

double TabularMdp::expected_reward(StateId s, ActionId a) const {
  if (!rewards_) throw ContractViolation("reward requested from a reward-free model");
  const std::size_t r = index(s, a);
  double total = 0.0;
  for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) {
    total += entries_[k].prob * (*rewards_)[k];
  }
  return total;
}

TabularMdp TabularMdp::without_rewards() const {
  TabularMdp copy = *this;
  copy.rewards_.reset();
  return copy;
}

TabularMdp TabularMdp::with_horizon(int horizon) const {
  if (horizon < 1) throw ConfigError("TabularMdp: horizon must be >= 1");
  TabularMdp copy = *this;
  copy.shape_.horizon = horizon;
  return copy;
}

bool TabularMdp::is_deterministic() const {
  for (std::size_t r = 0; r + 1 < offsets_.size(); ++r) {
    std::size_t nonzero = 0;
    for (std::size_t k = offsets_[r]; k < offsets_[r + 1]; ++k) {
      if (entries_[k].prob > 0.0) {
        ++nonzero;
        if (entries_[k].prob != 1.0 && std::abs(entries_[k].prob - 1.0) > 1e-12) return false;
      }
    }
    if (nonzero != 1) return false;
  }
  return true;
}

StateId TabularMdp::successor(StateId s, ActionId a) const {
  StateId best = -1;
  double best_p = 0.0;
  for (const Successor& e : row(s, a)) {
    if (e.prob > best_p) {
      best_p = e.prob;
      best = e.next;
    }
  }
  if (std::abs(best_p - 1.0) > 1e-9) throw UnsupportedError("successor: row is not deterministic");
  return best;
}

std::vector<StateId> Trajectory::states() const {
  std::vector<StateId> out;
  out.reserve(steps.size() + 1);
  for (const Step& st : steps) out.push_back(st.state);
  out.push_back(final_state);
  return out;
}

// --- TabularPolicy -------------------------------------------------------

TabularPolicy TabularPolicy::deterministic(int num_states, int num_actions, int horizon,
                                           std::vector<ActionId> actions) {
  if (num_states < 1 || num_actions < 1 || horizon < 1) {
    throw ConfigError("TabularPolicy: sizes must be positive");
  }
  if (actions.size() != static_cast<std::size_t>(num_states) * horizon) {
    throw ConfigError("TabularPolicy: action table must have H*S entries");
  }
  for (ActionId a : actions) {
    if (a < 0 || a >= num_actions) throw ConfigError("TabularPolicy: action out of range");
  }
  TabularPolicy p;
  p.kind_ = Kind::kDeterministic;
  p.num_states_ = num_states;
  p.num_actions_ = num_actions;
  p.horizon_ = horizon;
  p.actions_ = std::move(actions);
  return p;
}

TabularPolicy TabularPolicy::stochastic(int num_states, int num_actions, int horizon,
                                        std::vector<double> probs) {
  if (num_states < 1 || num_actions < 1 || horizon < 1) {
    throw ConfigError("TabularPolicy: sizes must be positive");
  }
  const std::size_t rows = static_cast<std::size_t>(num_states) * horizon;
  if (probs.size() != rows * num_actions) {
    throw ConfigError("TabularPolicy: probability table must have H*S*A entries");
  }
  for (std::size_t r = 0; r < rows; ++r) {
    std::span<const double> row(probs.data() + r * num_actions, num_actions);
    if (!is_probability_vector(row)) {
      throw ConfigError("TabularPolicy: stochastic row does not sum to 1");
    }
  }
  TabularPolicy p;
  p.kind_ = Kind::kStochastic;
  p.num_states_ = num_states;
  p.num_actions_ = num_actions;
  p.horizon_ = horizon;
  p.probs_ = std::move(probs);
  return p;
}

TabularPolicy TabularPolicy::uniform(int num_states, int num_actions, int horizon) {
  const std::size_t n = static_cast<std::size_t>(num_states) * horizon * num_actions;
  return stochastic(num_states, num_actions, horizon,
                    std::vector<double>(n, 1.0 / static_cast<double>(num_actions)));
}

TabularPolicy TabularPolicy::open_loop(int num_states, int num_actions,
                                       std::span<const ActionId> actions) {
  const int horizon = static_cast<int>(actions.size());
  std::vector<ActionId> table(static_cast<std::size_t>(num_states) * horizon);
  for (int t = 0; t < horizon; ++t) {
    std::fill_n(table.begin() + static_cast<std::ptrdiff_t>(t) * num_states, num_states,
                actions[t]);
  }
  return deterministic(num_states, num_actions, horizon, std::move(table));
}

TabularPolicy TabularPolicy::stationary(int num_states, int num_actions, int horizon,
                                        std::span<const ActionId> actions) {
  if (actions.size() != static_cast<std::size_t>(num_states)) {
    throw ConfigError("TabularPolicy: stationary table must have S entries");
  }
  std::vector<ActionId> table;
  table.reserve(static_cast<std::size_t>(num_states) * horizon);
  for (int t = 0; t < horizon; ++t) table.insert(table.end(), actions.begin(), actions.end());
  return deterministic(num_states, num_actions, horizon, std::move(table));
}

ActionId TabularPolicy::action(int t, StateId s) const {
  if (kind_ != Kind::kDeterministic) throw ConfigError("action() on a stochastic policy");
  return actions_[static_cast<std::size_t>(t) * num_states_ + s];
}

double TabularPolicy::prob(int t, StateId s, ActionId a) const {
  if (kind_ == Kind::kDeterministic) return action(t, s) == a ? 1.0 : 0.0;
  return probs_[(static_cast<std::size_t>(t) * num_states_ + s) * num_actions_ + a];
}

ActionId TabularPolicy::sample(int t, StateId s, RngStream& rng) const {
  if (kind_ == Kind::kDeterministic) return action(t, s);
  const std::size_t base = (static_cast<std::size_t>(t) * num_states_ + s) * num_actions_;
  return static_cast<ActionId>(
      rng.categorical(std::span<const double>(probs_.data() + base, num_actions_)));
}

// --- Reward tables -------------------------------------------------------

RewardTables RewardTables::zeros(int horizon, int num_states, int num_actions) {
  RewardTables r;
  r.horizon = horizon;
  r.num_states = num_states;
  r.num_actions = num_actions;
  r.step.assign(static_cast<std::size_t>(horizon) * num_states * num_actions, 0.0);
  r.terminal.assign(num_states, 0.0);
  return r;
}

RewardTables RewardTables::stationary(int horizon, int num_states, int num_actions,
                                      std::span<const double> per_pair) {
  if (per_pair.size() != static_cast<std::size_t>(num_states) * num_actions) {
    throw ConfigError("RewardTables: per-pair table must have S*A entries");
  }
  RewardTables r = zeros(horizon, num_states, num_actions);
  for (int t = 0; t < horizon; ++t) {
    std::copy(per_pair.begin(), per_pair.end(),
              r.step.begin() + static_cast<std::ptrdiff_t>(t) * num_states * num_actions);
  }
  return r;
}

RewardTables task_reward_tables(const TabularMdp& model) {
  std::vector<double> per_pair(static_cast<std::size_t>(model.num_states()) * model.num_actions());
  for (StateId s = 0; s < model.num_states(); ++s) {
    for (ActionId a = 0; a < model.num_actions(); ++a) {
      per_pair[static_cast<std::size_t>(s) * model.num_actions() + a] = model.expected_reward(s, a);
    }
  }
  return RewardTables::stationary(model.horizon(), model.num_states(), model.num_actions(),
                                  per_pair);
}

namespace {

void check_policy_dims(const TabularMdp& model, const TabularPolicy& policy) {
  if (policy.num_states() != model.num_states() || policy.num_actions() != model.num_actions() ||
      policy.horizon() != model.horizon()) {
    throw ConfigError("policy dimensions do not match the model");
  }
}

void check_reward_dims(const TabularMdp& model, const RewardTables& rewards) {
  if (rewards.horizon != model.horizon() || rewards.num_states != model.num_states() ||
      rewards.num_actions != model.num_actions() ||
      rewards.step.size() != static_cast<std::size_t>(rewards.horizon) * rewards.num_states *
                                 rewards.num_actions ||
      rewards.terminal.size() != static_cast<std::size_t>(rewards.num_states)) {
    throw ConfigError("reward table dimensions do not match the model");
  }
}

StateId sample_successor(std::span<const Successor> row, RngStream& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  StateId last = row.front().next;
  for (const Successor& e : row) {
    if (e.prob <= 0.0) continue;
    acc += e.prob;
    last = e.next;
    if (u < acc) return e.next;
  }
  return last;
}

}  // namespace

Trajectory rollout(const TabularMdp& model, const TabularPolicy& policy, RngStream& rng,
                   bool with_rewards, Origin origin) {
  check_policy_dims(model, policy);
  if (with_rewards && !model.has_rewards()) {
    throw ConfigError("rollout: rewards requested from a reward-free model");
  }
  Trajectory traj;
  traj.origin = origin;
  traj.steps.reserve(model.horizon());
  StateId s = static_cast<StateId>(rng.categorical(model.initial_dist()));
  for (int t = 0; t < model.horizon(); ++t) {
    const ActionId a = policy.sample(t, s, rng);
    const StateId next = sample_successor(model.row(s, a), rng);
    traj.steps.push_back({s, a});
    if (with_rewards) traj.reward_labels.push_back(model.reward(s, a, next));
    s = next;
  }
  traj.final_state = s;
  return traj;
}

PlanResult solve_finite_horizon(const TabularMdp& model, const RewardTables& rewards) {
  check_reward_dims(model, rewards);
  for (double x : rewards.step) {
    if (!std::isfinite(x)) throw NumericalError("solve_finite_horizon: non-finite step reward");
  }
  for (double x : rewards.terminal) {
    if (!std::isfinite(x)) throw NumericalError("solve_finite_horizon: non-finite terminal reward");
  }
  kernels::BackwardInduction bi = kernels::backward_induction(model, rewards);
  double value = 0.0;
  const auto& rho = model.initial_dist();
  for (StateId s = 0; s < model.num_states(); ++s) value += rho[s] * bi.values[s];
  return {TabularPolicy::deterministic(model.num_states(), model.num_actions(), model.horizon(),
                                       std::move(bi.actions)),
          value};
}

std::vector<std::vector<double>> state_distributions(const TabularMdp& model,
                                                     const TabularPolicy& policy) {
  check_policy_dims(model, policy);
  const int S = model.num_states();
  std::vector<std::vector<double>> d(model.horizon() + 1, std::vector<double>(S, 0.0));
  d[0] = model.initial_dist();
  for (int t = 0; t < model.horizon(); ++t) {
    for (StateId s = 0; s < S; ++s) {
      const double mass = d[t][s];
      if (mass == 0.0) continue;
      for (ActionId a = 0; a < model.num_actions(); ++a) {
        const double pa = policy.prob(t, s, a);
        if (pa == 0.0) continue;
        for (const Successor& e : model.row(s, a)) d[t + 1][e.next] += mass * pa * e.prob;
      }
    }
  }
  return d;
}

double evaluate_policy_return(const TabularMdp& model, const TabularPolicy& policy,
                              const RewardTables& rewards) {
  check_reward_dims(model, rewards);
  const auto d = state_distributions(model, policy);
  double total = 0.0;
  for (int t = 0; t < model.horizon(); ++t) {
    for (StateId s = 0; s < model.num_states(); ++s) {
      if (d[t][s] == 0.0) continue;
      for (ActionId a = 0; a < model.num_actions(); ++a) {
        const double pa = policy.prob(t, s, a);
        if (pa != 0.0) total += d[t][s] * pa * rewards.at(t, s, a);
      }
    }
  }
  for (StateId s = 0; s < model.num_states(); ++s) {
    total += d[model.horizon()][s] * rewards.terminal[s];
  }
  return total;
}

std::vector<StateId> reachable_states(const TabularMdp& model) {
  std::vector<char> seen(model.num_states(), 0);
  std::deque<StateId> frontier;
  for (StateId s = 0; s < model.num_states(); ++s) {
    if (model.initial_dist()[s] > 0.0) {
      seen[s] = 1;
      frontier.push_back(s);
    }
  }
  while (!frontier.empty()) {
    const StateId s = frontier.front();
    frontier.pop_front();
    for (ActionId a = 0; a < model.num_actions(); ++a) {
      for (const Successor& e : model.row(s, a)) {
        if (e.prob > 0.0 && !seen[e.next]) {
          seen[e.next] = 1;
          frontier.push_back(e.next);
        }
      }
    }
  }
  std::vector<StateId> out;
  for (StateId s = 0; s < model.num_states(); ++s) {
    if (seen[s]) out.push_back(s);
  }
  return out;
}

// --- Enumeration ---------------------------------------------------------

PolicyEnumerator::PolicyEnumerator(const TabularMdp& model, EnumerationOptions options)
    : num_states_(model.num_states()),
      num_actions_(model.num_actions()),
      horizon_(model.horizon()),
      stationary_(options.stationary),
      relevant_(std::move(options.relevant_states)) {
  if (relevant_.empty()) {
    for (StateId s = 0; s < num_states_; ++s) relevant_.push_back(s);
  }
  for (StateId s : relevant_) {
    if (s < 0 || s >= num_states_) throw ConfigError("PolicyEnumerator: relevant state out of range");
  }
  const double slots = static_cast<double>(relevant_.size()) * (stationary_ ? 1 : horizon_);
  const double required = std::pow(static_cast<double>(num_actions_), slots);
  if (required > options.cap) {
    throw ResourceError("policy enumeration needs " + std::to_string(required) +
                            " policies, above the cap of " + std::to_string(options.cap),
                        required);
  }
  count_ = static_cast<std::uint64_t>(std::llround(required));
  digits_.assign(static_cast<std::size_t>(slots), 0);
}

void PolicyEnumerator::reset() {
  std::fill(digits_.begin(), digits_.end(), 0);
  emitted_ = 0;
}

bool PolicyEnumerator::next(TabularPolicy& out) {
  if (emitted_ >= count_) return false;
  if (emitted_ > 0) {
    for (auto& d : digits_) {
      if (++d < num_actions_) break;
      d = 0;
    }
  }
  ++emitted_;
  std::vector<ActionId> table(static_cast<std::size_t>(num_states_) * horizon_, 0);
  const std::size_t R = relevant_.size();
  for (int t = 0; t < horizon_; ++t) {
    for (std::size_t k = 0; k < R; ++k) {
      const std::size_t digit = stationary_ ? k : static_cast<std::size_t>(t) + k * horizon_;
      table[static_cast<std::size_t>(t) * num_states_ + relevant_[k]] = digits_[digit];
    }
  }
  out = TabularPolicy::deterministic(num_states_, num_actions_, horizon_, std::move(table));
  return true;
}

std::vector<TabularPolicy> enumerate_deterministic_policies(const TabularMdp& model,
                                                            EnumerationOptions options) {
  PolicyEnumerator it(model, std::move(options));
  std::vector<TabularPolicy> out;
  out.reserve(it.count());
  TabularPolicy p = TabularPolicy::uniform(1, 1, 1);
  while (it.next(p)) out.push_back(p);
  return out;
}

}  // namespace cascade
