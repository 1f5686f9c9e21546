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

#include "cascade/kernels.hpp"

#include <cmath>
#include <utility>

#include "cascade/errors.hpp"

namespace cascade::kernels {

namespace {

// Relative slack under which two action values count as tied, so that
// the lowest-index rule is not defeated by rounding in the sums.
constexpr double kTieTolerance = 1e-12;

inline bool strictly_better(double candidate, double best) {
  return candidate > best + kTieTolerance * (1.0 + std::abs(best));
}

inline void backup_state(const TabularMdp& model, const RewardTables& rewards, int t, StateId s,
                         const std::vector<double>& next_values, std::vector<double>& values,
                         std::vector<ActionId>& actions) {
  const int A = model.num_actions();
  double best = 0.0;
  ActionId best_a = 0;
  for (ActionId a = 0; a < A; ++a) {
    double q = rewards.at(t, s, a);
    for (const Successor& e : model.row(s, a)) q += e.prob * next_values[e.next];
    if (a == 0 || strictly_better(q, best)) {
      best = q;
      best_a = a;
    }
  }
  values[s] = best;
  actions[static_cast<std::size_t>(t) * model.num_states() + s] = best_a;
}

}  // namespace

BackwardInduction backward_induction(const TabularMdp& model, const RewardTables& rewards) {
  const int S = model.num_states();
  const int H = model.horizon();
  BackwardInduction out;
  out.actions.assign(static_cast<std::size_t>(S) * H, 0);
  std::vector<double> next_values = rewards.terminal;
  std::vector<double> values(S, 0.0);
  for (int t = H - 1; t >= 0; --t) {
#pragma omp parallel for schedule(static)
    for (StateId s = 0; s < S; ++s) {
      backup_state(model, rewards, t, s, next_values, values, out.actions);
    }
    std::swap(next_values, values);
  }
  out.values = std::move(next_values);
  return out;
}

BackwardInduction backward_induction_serial(const TabularMdp& model, const RewardTables& rewards) {
  const int S = model.num_states();
  const int H = model.horizon();
  BackwardInduction out;
  out.actions.assign(static_cast<std::size_t>(S) * H, 0);
  std::vector<double> next_values = rewards.terminal;
  std::vector<double> values(S, 0.0);
  for (int t = H - 1; t >= 0; --t) {
    for (StateId s = 0; s < S; ++s) {
      backup_state(model, rewards, t, s, next_values, values, out.actions);
    }
    std::swap(next_values, values);
  }
  out.values = std::move(next_values);
  return out;
}

double row_disagreement(std::span<const TabularMdp> members, StateId s, ActionId a) {
  const std::size_t E = members.size();
  if (E < 2) throw ConfigError("ensemble disagreement needs at least two members");
  // Dense position map reused across calls; only touched slots are reset.
  thread_local std::vector<int> position;
  const auto S = static_cast<std::size_t>(members[0].num_states());
  if (position.size() < S) position.assign(S, -1);
  std::vector<StateId> support;
  for (const TabularMdp& m : members) {
    for (const Successor& e : m.row(s, a)) {
      if (position[e.next] < 0) {
        position[e.next] = static_cast<int>(support.size());
        support.push_back(e.next);
      }
    }
  }
  const std::size_t K = support.size();
  std::vector<double> probs(E * K, 0.0);
  for (std::size_t m = 0; m < E; ++m) {
    for (const Successor& e : members[m].row(s, a)) probs[m * K + position[e.next]] += e.prob;
  }
  for (StateId x : support) position[x] = -1;
  double total = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    double mean = 0.0;
    for (std::size_t m = 0; m < E; ++m) mean += probs[m * K + k];
    mean /= static_cast<double>(E);
    for (std::size_t m = 0; m < E; ++m) {
      const double d = probs[m * K + k] - mean;
      total += d * d;
    }
  }
  return total / static_cast<double>(E);
}

namespace {

void check_members(std::span<const TabularMdp> members) {
  if (members.size() < 2) throw ConfigError("ensemble disagreement needs at least two members");
  for (const TabularMdp& m : members) {
    if (m.num_states() != members[0].num_states() || m.num_actions() != members[0].num_actions()) {
      throw ConfigError("ensemble members disagree on model dimensions");
    }
  }
}

}  // namespace

std::vector<double> disagreement_table(std::span<const TabularMdp> members) {
  check_members(members);
  const int S = members[0].num_states();
  const int A = members[0].num_actions();
  std::vector<double> out(static_cast<std::size_t>(S) * A, 0.0);
  const long long n = static_cast<long long>(out.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (long long r = 0; r < n; ++r) {
    out[r] = row_disagreement(members, static_cast<StateId>(r / A), static_cast<ActionId>(r % A));
  }
  return out;
}

std::vector<double> disagreement_table_serial(std::span<const TabularMdp> members) {
  check_members(members);
  const int S = members[0].num_states();
  const int A = members[0].num_actions();
  std::vector<double> out(static_cast<std::size_t>(S) * A, 0.0);
  for (std::size_t r = 0; r < out.size(); ++r) {
    out[r] = row_disagreement(members, static_cast<StateId>(r / A), static_cast<ActionId>(r % A));
  }
  return out;
}

}  // namespace cascade::kernels
