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

#include "cascade/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cascade/envs.hpp"
#include "cascade/errors.hpp"

namespace cascade {

// --- Exploration metrics -------------------------------------------------

std::vector<double> state_coverage(const RunLog& log, const TabularMdp& env) {
  const std::vector<StateId> reachable = reachable_states(env);
  std::vector<char> is_reachable(env.num_states(), 0);
  for (StateId s : reachable) is_reachable[s] = 1;
  std::vector<char> visited(env.num_states(), 0);
  int count = 0;
  auto visit = [&](StateId s) {
    if (s < 0 || s >= env.num_states()) throw ConfigError("state_coverage: state out of range");
    if (is_reachable[s] && !visited[s]) {
      visited[s] = 1;
      ++count;
    }
  };
  std::vector<double> out;
  out.reserve(log.deployments.size());
  for (const DeploymentRecord& d : log.deployments) {
    for (const Trajectory& t : d.trajectories) {
      for (const Step& st : t.steps) visit(st.state);
      visit(t.final_state);
    }
    out.push_back(100.0 * count / static_cast<double>(reachable.size()));
  }
  return out;
}

std::vector<double> state_coverage(const RunLog& log, std::span<const TabularMdp> levels) {
  if (levels.empty()) throw ConfigError("state_coverage: no levels given");
  std::vector<double> total(log.deployments.size(), 0.0);
  for (const TabularMdp& level : levels) {
    const auto c = state_coverage(log, level);
    for (std::size_t k = 0; k < c.size(); ++k) total[k] += c[k];
  }
  for (double& x : total) x /= static_cast<double>(levels.size());
  return total;
}

std::vector<int> cumulative_rewarding_episodes(const RunLog& log, const TabularMdp& labeled_env) {
  std::vector<int> out;
  out.reserve(log.deployments.size());
  int n = 0;
  for (const DeploymentRecord& d : log.deployments) {
    if (labeled_env.has_rewards()) {
      for (const Trajectory& t : d.trajectories) {
        if (t.origin != Origin::kReal) continue;
        double ret = 0.0;
        for (std::size_t k = 0; k < t.steps.size(); ++k) {
          ret += labeled_env.reward(t.steps[k].state, t.steps[k].action, t.next_state(k));
        }
        if (ret > 0.0) ++n;
      }
    }
    out.push_back(n);
  }
  return out;
}

int rewarding_episodes(const RunLog& log, const TabularMdp& labeled_env) {
  const std::vector<int> c = cumulative_rewarding_episodes(log, labeled_env);
  return c.empty() ? 0 : c.back();
}

// --- Zero-shot transfer --------------------------------------------------

std::vector<double> fit_reward_head(std::span<const Transition> transitions,
                                    const TabularMdp& labeler, const TabularMdp& model) {
  const int S = model.num_states();
  const int A = model.num_actions();
  std::vector<double> pair_sum(static_cast<std::size_t>(S) * A, 0.0);
  std::vector<int> pair_n(pair_sum.size(), 0);
  std::vector<double> next_sum(S, 0.0);
  std::vector<int> next_n(S, 0);
  for (const Transition& t : transitions) {
    if (t.origin != DataOrigin::kReal) continue;
    const double r = labeler.reward(t.state, t.action, t.next);
    const std::size_t k = static_cast<std::size_t>(t.state) * A + t.action;
    pair_sum[k] += r;
    ++pair_n[k];
    next_sum[t.next] += r;
    ++next_n[t.next];
  }
  std::vector<double> head(pair_sum.size(), 0.0);
  for (StateId s = 0; s < S; ++s) {
    for (ActionId a = 0; a < A; ++a) {
      const std::size_t k = static_cast<std::size_t>(s) * A + a;
      if (pair_n[k] > 0) {
        head[k] = pair_sum[k] / pair_n[k];
        continue;
      }
      double r = 0.0;
      for (const Successor& e : model.row(s, a)) {
        if (next_n[e.next] > 0) r += e.prob * next_sum[e.next] / next_n[e.next];
      }
      head[k] = r;
    }
  }
  return head;
}

ZeroShotResult zero_shot_transfer(const ModelPosterior& posterior, const RunLog& log,
                                  const ZeroShotTask& task) {
  std::vector<Transition> collected;
  for (const DeploymentRecord& d : log.deployments) {
    for (const Trajectory& t : d.trajectories) {
      for (std::size_t k = 0; k < t.steps.size(); ++k) {
        collected.push_back({t.steps[k].state, t.steps[k].action, t.next_state(k), d.index,
                             DataOrigin::kReal});
      }
    }
  }
  if (collected.empty()) throw EvaluationError("zero_shot_transfer: no collected transitions");
  if (task.test_levels.empty()) throw EvaluationError("zero_shot_transfer: no test levels");

  const TabularMdp planning = posterior.mean();
  ZeroShotResult out;
  int successes = 0;
  for (const TabularMdp& level : task.test_levels) {
    if (level.num_states() != planning.num_states() || level.num_actions() != planning.num_actions()) {
      throw ConfigError("zero_shot_transfer: test level does not share the model's state space");
    }
    const std::vector<double> head = fit_reward_head(collected, level, planning);
    const RewardTables fitted = RewardTables::stationary(level.horizon(), level.num_states(),
                                                         level.num_actions(), head);
    const PlanResult plan = solve_finite_horizon(planning.with_horizon(level.horizon()), fitted);
    const double ret = evaluate_policy_return(level, plan.policy, task_reward_tables(level));
    out.level_returns.push_back(ret);
    if (ret >= task.success_threshold - 1e-12) ++successes;
  }
  const double n = static_cast<double>(task.test_levels.size());
  out.success_rate = successes / n;
  out.mean_return =
      std::accumulate(out.level_returns.begin(), out.level_returns.end(), 0.0) / n;
  return out;
}

double iqm(std::vector<double> scores) {
  if (scores.empty()) throw EvaluationError("iqm of an empty score list");
  std::sort(scores.begin(), scores.end());
  const std::size_t n = scores.size();
  const std::size_t cut = n < 4 ? 0 : n / 4;
  double total = 0.0;
  for (std::size_t k = cut; k < n - cut; ++k) total += scores[k];
  return total / static_cast<double>(n - 2 * cut);
}

// --- Theory checks -------------------------------------------------------

const char* to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::kPass: return "PASS";
    case CheckStatus::kNonStrict: return "NON-STRICT";
    case CheckStatus::kFail: return "FAIL";
  }
  return "?";
}

namespace {

constexpr double kTol = 1e-12;

bool next_tuple(std::vector<int>& tuple, int base) {
  for (std::size_t k = tuple.size(); k-- > 0;) {
    if (++tuple[k] < base) return true;
    tuple[k] = 0;
  }
  return false;
}

// Non-decreasing tuples enumerate multisets once.
bool next_multiset(std::vector<int>& tuple, int base) {
  for (std::size_t k = tuple.size(); k-- > 0;) {
    if (tuple[k] + 1 < base) {
      ++tuple[k];
      for (std::size_t j = k + 1; j < tuple.size(); ++j) tuple[j] = tuple[k];
      return true;
    }
  }
  return false;
}

bool all_distinct(std::vector<int> t) {
  std::sort(t.begin(), t.end());
  return std::adjacent_find(t.begin(), t.end()) == t.end();
}

}  // namespace

Lemma1Report lemma1_check(int depth, int B) {
  if (depth < 1 || B < 1) throw ConfigError("lemma1_check: depth and B must be >= 1");
  if (depth > 3 || B > 3) {
    const double edges = std::ldexp(1.0, depth);
    throw ResourceError("lemma1_check enumeration is limited to depth <= 3 and B <= 3",
                        std::tgamma(edges + 1.0) * std::pow(edges, B));
  }
  const int paths = 1 << depth;
  std::vector<int> perm(paths);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::pair<TabularMdp, double>> support;
  do {
    support.emplace_back(make_binary_tree(depth, perm).mdp, 0.0);
  } while (std::next_permutation(perm.begin(), perm.end()));
  for (auto& w : support) w.second = 1.0 / static_cast<double>(support.size());

  BinaryTreeSpec spec;
  spec.depth = depth;
  std::vector<TabularPolicy> policies;
  for (int p = 0; p < paths; ++p) policies.push_back(tree_path_policy(spec, p));
  EmbeddingSpec emb{EmbeddingKind::kFinalStateOneHot, 1.0, spec.num_nodes()};
  const OutcomeTable table = build_outcome_table(policies, support, emb);

  Lemma1Report rep;
  double best_distinct = -1.0;
  std::vector<int> best_distinct_tuple;
  double best_any = -1.0;
  rep.best_diagonal_mi = -1.0;
  std::vector<int> tuple(B, 0);
  do {
    const double mi = mutual_information(table, tuple);
    const bool diagonal = std::all_of(tuple.begin(), tuple.end(), [&](int x) { return x == tuple[0]; });
    if (mi > best_any + kTol) best_any = mi;
    if (diagonal && mi > rep.best_diagonal_mi + kTol) {
      rep.best_diagonal_mi = mi;
      rep.best_diagonal_tuple = tuple;
    }
    if (all_distinct(tuple) && mi > best_distinct + kTol) {
      best_distinct = mi;
      best_distinct_tuple = tuple;
    }
  } while (next_tuple(tuple, paths));

  if (B == 1) {
    rep.status = CheckStatus::kPass;
    rep.best_tuple = rep.best_diagonal_tuple;
    rep.best_mi = rep.best_diagonal_mi;
    return rep;
  }
  if (best_distinct_tuple.empty()) {
    rep.status = CheckStatus::kNonStrict;
    rep.best_tuple = rep.best_diagonal_tuple;
    rep.best_mi = best_any;
    return rep;
  }
  rep.best_tuple = best_distinct_tuple;
  rep.best_mi = best_distinct;
  rep.margin = best_distinct - rep.best_diagonal_mi;
  if (rep.margin > kTol && best_distinct >= best_any - kTol) {
    rep.status = CheckStatus::kPass;
  } else if (std::abs(rep.margin) <= kTol) {
    rep.status = CheckStatus::kNonStrict;
  } else {
    rep.status = CheckStatus::kFail;
  }
  return rep;
}

GreedyReport greedy_bound_check(const OutcomeTable& instance, int B) {
  if (B < 1) throw ConfigError("greedy_bound_check: B must be >= 1");
  const int P = static_cast<int>(instance.num_policies());
  if (P < 1) throw ConfigError("greedy_bound_check: instance has no policies");
  GreedyReport rep;
  std::vector<int> tuple(B, 0);
  rep.opt = -1.0;
  do {
    const double mi = mutual_information(instance, tuple);
    if (mi > rep.opt + kTol) {
      rep.opt = mi;
      rep.opt_tuple = tuple;
    }
  } while (next_multiset(tuple, P));

  std::vector<int> chosen;
  for (int b = 0; b < B; ++b) {
    double best = -1.0;
    int arg = 0;
    chosen.push_back(0);
    for (int i = 0; i < P; ++i) {
      chosen.back() = i;
      const double mi = mutual_information(instance, chosen);
      if (mi > best + kTol) {
        best = mi;
        arg = i;
      }
    }
    chosen.back() = arg;
    rep.greedy = best;
  }
  rep.greedy_tuple = chosen;
  const double bound = (1.0 - std::exp(-1.0)) * rep.opt;
  rep.status = (rep.opt <= kTol || rep.greedy >= bound - kTol) ? CheckStatus::kPass : CheckStatus::kFail;
  return rep;
}

OutcomeTable random_greedy_instance(RngStream& rng) {
  constexpr int S = 4, A = 2, H = 3;
  const int worlds = 2 + static_cast<int>(rng.uniform_index(5));
  ModelShape shape;
  shape.num_states = S;
  shape.num_actions = A;
  shape.horizon = H;
  shape.initial_dist = {1.0, 0.0, 0.0, 0.0};
  std::vector<std::pair<TabularMdp, double>> support;
  double total = 0.0;
  for (int w = 0; w < worlds; ++w) {
    TabularMdp::Rows rows(S * A);
    for (auto& row : rows) row = {{static_cast<StateId>(rng.uniform_index(S)), 1.0}};
    const double weight = rng.gamma(1.0);
    total += weight;
    support.emplace_back(TabularMdp(shape, std::move(rows)), weight);
  }
  for (auto& w : support) w.second /= total;
  const std::vector<TabularPolicy> policies =
      enumerate_deterministic_policies(support.front().first, EnumerationOptions{});
  const EmbeddingSpec emb{EmbeddingKind::kFinalStateOneHot, 1.0, S};
  return build_outcome_table(policies, support, emb);
}

PartitionReport entropy_partition_check(int trials, RngStream& rng) {
  if (trials < 0) throw ConfigError("entropy_partition_check: trials must be >= 0");
  PartitionReport rep;
  rep.trials = trials;
  for (int k = 0; k < trials; ++k) {
    const int n = 2 + static_cast<int>(rng.uniform_index(7));
    std::vector<double> p(n);
    double total = 0.0;
    for (double& x : p) {
      // A quarter of entries are exact zeros, to exercise the non-strict case.
      x = rng.uniform() < 0.25 ? 0.0 : 0.01 + rng.uniform();
      total += x;
    }
    if (total == 0.0) {
      p[0] = 1.0;
      total = 1.0;
    }
    for (double& x : p) x /= total;
    // Random partition into fewer than n blocks.
    const int blocks = 1 + static_cast<int>(rng.uniform_index(n - 1));
    std::vector<int> label(n);
    for (int i = 0; i < n; ++i) label[i] = i < blocks ? i : static_cast<int>(rng.uniform_index(blocks));
    rng.shuffle(label);
    std::vector<double> coarse(blocks, 0.0);
    std::vector<int> positive(blocks, 0);
    for (int i = 0; i < n; ++i) {
      coarse[label[i]] += p[i];
      if (p[i] > 0.0) ++positive[label[i]];
    }
    const bool strict = std::any_of(positive.begin(), positive.end(), [](int c) { return c >= 2; });
    const double hf = entropy(p);
    const double hc = entropy(coarse);
    if (strict) {
      ++rep.strict_cases;
      if (!(hc < hf)) ++rep.violations;
    } else if (hc > hf + kTol) {
      ++rep.violations;
    }
  }
  rep.status = rep.violations == 0 ? CheckStatus::kPass : CheckStatus::kFail;
  return rep;
}

FactorizationReport factorization_check(int trials, RngStream& rng) {
  FactorizationReport rep;
  rep.trials = trials;
  for (int k = 0; k < trials; ++k) {
    const int factors = 2 + static_cast<int>(rng.uniform_index(3));
    std::vector<std::vector<double>> dists(factors);
    for (auto& d : dists) {
      d.resize(1 + rng.uniform_index(6));
      double total = 0.0;
      for (double& x : d) {
        x = rng.gamma(1.0);
        total += x;
      }
      for (double& x : d) x /= total;
    }
    const double err =
        std::abs(joint_conditional_entropy(dists) - factorized_conditional_entropy(dists));
    rep.max_abs_error = std::max(rep.max_abs_error, err);
  }
  return rep;
}

Lemma2Cell lemma2_cell(int depth, int B, int seeds, std::uint64_t base_seed, TsInit init) {
  if (seeds < 1) throw ConfigError("lemma2_cell: seeds must be >= 1");
  Lemma2Cell cell;
  cell.depth = depth;
  cell.population = B;
  const int max_rounds = (1 << depth) + 2;
  const TsConfig config{B, 1, depth, init};
  const auto cell_id = static_cast<std::uint64_t>(depth * 64 + B);
  const RngStream root(base_seed, cell_id);
  for (int k = 0; k < seeds; ++k) {
    const RngStream seed_rng = root.child(static_cast<std::uint64_t>(k));
    RngStream tree_rng = seed_rng.child(0);
    const BinaryTree tree = make_binary_tree(depth, tree_rng);
    auto run = [&](TsAlgorithm algo, std::uint64_t stream) {
      RngStream rng = seed_rng.child(stream);
      TsRoundState state = make_ts_state(std::make_unique<TreePosterior>(depth), config, rng);
      return rounds_to_accuracy(algo, tree.mdp, 0.0, max_rounds, state, rng);
    };
    cell.cascade_ts.push_back(run(TsAlgorithm::kCascadeTs, 1));
    cell.sequential.push_back(run(TsAlgorithm::kSequential, 2));
    cell.single_policy_batch.push_back(run(TsAlgorithm::kSinglePolicyBatch, 3));
  }
  return cell;
}

}  // namespace cascade
