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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 when
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "cascade/config.hpp"
#include "cascade/envs.hpp"
#include "cascade/evaluation.hpp"
#include "cascade/experiment.hpp"
#include "cascade/greedy.hpp"
#include "cascade/objectives.hpp"

namespace {

using namespace cascade;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// --- 1 ---------------------------------------------------------------------

Outcome diverse_pair() {
  const auto t0 = Clock::now();
  const Lemma1Report r = lemma1_check(2, 2);
  const double secs = seconds_since(t0);
  const bool distinct = r.best_tuple.size() == 2 && r.best_tuple[0] != r.best_tuple[1];
  const bool pass = r.status == CheckStatus::kPass && distinct &&
                    std::abs(r.best_mi - std::log(12.0)) <= 1e-9 &&
                    std::abs(r.best_diagonal_mi - std::log(4.0)) <= 1e-9 &&
                    r.best_mi > r.best_diagonal_mi && secs < 10.0;
  return {pass, fmt("best MI %.12f (ln 12 = %.12f), diagonal %.12f, tuple (%d,%d), %.2fs", r.best_mi,
                    std::log(12.0), r.best_diagonal_mi, r.best_tuple.at(0), r.best_tuple.at(1), secs)};
}

// --- 2 ---------------------------------------------------------------------

Outcome factorization() {
  RngStream rng(2026, 2);
  const FactorizationReport r = factorization_check(100, rng);
  return {r.trials == 100 && r.max_abs_error <= 1e-9,
          fmt("%d tuples, max |joint - sum| = %.3e", r.trials, r.max_abs_error)};
}

// --- 3 ---------------------------------------------------------------------

Outcome greedy_bound() {
  const auto t0 = Clock::now();
  RngStream root(2026, 3);
  int violations = 0;
  double worst = 1.0;
  for (int i = 0; i < 100; ++i) {
    RngStream rng = root.child(static_cast<std::uint64_t>(i));
    const GreedyReport r = greedy_bound_check(random_greedy_instance(rng), 2);
    if (r.greedy < (1.0 - 1.0 / std::exp(1.0)) * r.opt - 1e-12) ++violations;
    worst = std::min(worst, r.ratio());
  }
  const double secs = seconds_since(t0);
  return {violations == 0 && secs < 300.0,
          fmt("100 instances, %d violations, worst ratio %.4f, %.2fs", violations, worst, secs)};
}

// --- 4 ---------------------------------------------------------------------

double mean_of(const std::vector<int>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

Outcome ts_rounds() {
  const auto t0 = Clock::now();
  bool pass = true;
  std::string detail;
  for (int L : {3, 4, 5}) {
    for (int B : {2, 4}) {
      const Lemma2Cell c = lemma2_cell(L, B, 100, 2026);
      const int paths = (1 << L) - 1;
      const int want = (paths + B - 1) / B;
      const auto exact = std::count(c.cascade_ts.begin(), c.cascade_ts.end(), want);
      const auto batch = std::count(c.single_policy_batch.begin(), c.single_policy_batch.end(), paths);
      const bool reached = std::none_of(c.sequential.begin(), c.sequential.end(), [](int t) { return t < 0; }) &&
                           std::none_of(c.cascade_ts.begin(), c.cascade_ts.end(), [](int t) { return t < 0; });
      const double ms = mean_of(c.sequential), mc = mean_of(c.cascade_ts), mb = mean_of(c.single_policy_batch);
      const bool ok = exact >= 95 && batch == 100 && reached && ms <= mc && mc <= mb;
      pass = pass && ok;
      detail += fmt("[L%d B%d cascade=%d %ld%% batch=%d %ld%% means %.2f<=%.2f<=%.2f%s] ", L, B, want,
                    static_cast<long>(exact), paths, static_cast<long>(batch), ms, mc, mb, ok ? "" : " FAIL");
    }
  }
  const double secs = seconds_since(t0);
  return {pass && secs < 600.0, detail + fmt("%.1fs", secs)};
}

// --- 5 ---------------------------------------------------------------------

// Forward propagation written independently of the library.
double oracle_return(const TabularMdp& m, const TabularPolicy& pi, const RewardTables& r) {
  const int S = m.num_states(), A = m.num_actions(), H = m.horizon();
  std::vector<double> d = m.initial_dist();
  double total = 0.0;
  for (int t = 0; t < H; ++t) {
    std::vector<double> next(S, 0.0);
    for (StateId s = 0; s < S; ++s) {
      if (d[s] == 0.0) continue;
      for (ActionId a = 0; a < A; ++a) {
        const double w = d[s] * pi.prob(t, s, a);
        if (w == 0.0) continue;
        total += w * r.at(t, s, a);
        for (const Successor& e : m.row(s, a)) next[e.next] += w * e.prob;
      }
    }
    d = std::move(next);
  }
  for (StateId s = 0; s < S; ++s) total += d[s] * r.terminal[s];
  return total;
}

Outcome dp_oracle() {
  RngStream root(2026, 5);
  int mismatches = 0;
  double worst = 0.0;
  std::uint64_t policies = 0;
  int done = 0;
  for (int i = 0; done < 200; ++i) {
    RngStream rng = root.child(static_cast<std::uint64_t>(i));
    const int S = 2 + static_cast<int>(rng.uniform_index(3));
    const int A = 2 + static_cast<int>(rng.uniform_index(2));
    const int H = 1 + static_cast<int>(rng.uniform_index(4));
    if (std::pow(static_cast<double>(A), S * H) > 1e5) continue;
    const TabularMdp m = make_random_mdp(S, A, H, rng, rng.uniform() < 0.3);
    RewardTables r = RewardTables::zeros(H, S, A);
    for (double& x : r.step) x = 2.0 * rng.uniform() - 1.0;
    for (double& x : r.terminal) x = 2.0 * rng.uniform() - 1.0;
    const PlanResult solved = solve_finite_horizon(m, r);
    EnumerationOptions opt;
    opt.stationary = false;
    PolicyEnumerator en(m, opt);
    TabularPolicy pi = TabularPolicy::uniform(S, A, H);
    double best = -1e300;
    while (en.next(pi)) {
      best = std::max(best, oracle_return(m, pi, r));
      ++policies;
    }
    const double err = std::max(std::abs(best - solved.value),
                                std::abs(oracle_return(m, solved.policy, r) - solved.value));
    worst = std::max(worst, err);
    if (err > 1e-9) ++mismatches;
    ++done;
  }
  return {mismatches == 0, fmt("200 instances, %llu policies enumerated, max |error| %.3e, %d mismatches",
                               static_cast<unsigned long long>(policies), worst, mismatches)};
}

// --- 6 ---------------------------------------------------------------------

Outcome composite_consistency() {
  RngStream root(2026, 6);
  double worst = 0.0;
  int bad = 0;
  for (int i = 0; i < 50; ++i) {
    RngStream rng = root.child(static_cast<std::uint64_t>(i));
    const int S = 3 + static_cast<int>(rng.uniform_index(6));
    const int A = 2 + static_cast<int>(rng.uniform_index(3));
    const int H = 2 + static_cast<int>(rng.uniform_index(4));
    const TabularMdp truth = make_random_mdp(S, A, H, rng, rng.uniform() < 0.5);
    DirichletPosterior posterior(truth.shape(), 0.2 + rng.uniform());
    const int episodes = static_cast<int>(rng.uniform_index(6));
    for (int k = 0; k < episodes; ++k) {
      posterior.update(rollout(truth, TabularPolicy::uniform(S, A, H), rng), 0, DataOrigin::kReal);
    }
    const double lambda = rng.uniform();
    const EnsembleModel ensemble = make_ensemble(posterior, 2 + static_cast<int>(rng.uniform_index(5)), rng.child(99));
    const EmbeddingSpec spec{EmbeddingKind::kFinalStateOneHot, 1.0, S};
    const int m = 1 + static_cast<int>(rng.uniform_index(8));
    const PopulationPlan plan = select_population_cascade(posterior, 2, lambda, ensemble, spec, rng, m);
    const TrajectoryDataset& D = plan.per_policy_imagined[0];
    const TabularPolicy& pi = plan.policies[1];

    // Independent evaluation: sigma by hand, then PopDiv and InfoGain by
    // forward propagation in the mean model.
    const TabularMdp mean = posterior.mean();
    std::vector<double> sigma(static_cast<std::size_t>(S) * A, 0.0);
    for (StateId s = 0; s < S; ++s) {
      for (ActionId a = 0; a < A; ++a) {
        std::vector<double> avg(S, 0.0);
        for (const TabularMdp& w : ensemble.members) {
          for (StateId x = 0; x < S; ++x) avg[x] += w.prob(s, a, x) / ensemble.size();
        }
        double v = 0.0;
        for (const TabularMdp& w : ensemble.members) {
          for (StateId x = 0; x < S; ++x) v += std::pow(w.prob(s, a, x) - avg[x], 2) / ensemble.size();
        }
        sigma[s * A + a] = v;
      }
    }
    std::vector<double> d = mean.initial_dist();
    double info = 0.0;
    for (int t = 0; t < H; ++t) {
      std::vector<double> next(S, 0.0);
      for (StateId s = 0; s < S; ++s) {
        const ActionId a = pi.action(t, s);
        info += d[s] * sigma[s * A + a];
        for (const Successor& e : mean.row(s, a)) next[e.next] += d[s] * e.prob;
      }
      d = std::move(next);
    }
    double div = 0.0;
    for (StateId s = 0; s < S; ++s) {
      double sum = 0.0;
      for (const Embedding& ref : D.embeddings) {
        for (StateId x = 0; x < S; ++x) sum += std::pow((x == s ? 1.0 : 0.0) - ref[x], 2);
      }
      div += d[s] * sum / std::max(static_cast<double>(D.size()) - 1.0, 1.0);
    }
    const double expect = lambda * div + (1.0 - lambda) * info;
    const RewardTables r = composite_reward(D, ensemble, lambda, spec, H);
    const double got = evaluate_policy_return(mean, pi, r);
    const double err = std::max(std::abs(got - expect), std::abs(plan.objective_values[1] - expect));
    worst = std::max(worst, err);
    if (err > 1e-9) ++bad;
  }
  return {bad == 0, fmt("50 configurations, max |error| %.3e, %d mismatches", worst, bad)};
}

// --- 7 ---------------------------------------------------------------------

RunConfig four_rooms_config(const std::string& algo, int seed) {
  RunConfig c;
  for (const char* kv :
       {"env.family=four_rooms", "env.grid_size=11", "env.horizon=35",
        "env.test_level_seeds=5000,5001,5002,5003,5004", "algo.B=10", "algo.deployments=5",
        "algo.transitions_per_policy=35", "algo.lambda=0.99", "algo.ensemble_size=10",
        "algo.imagined_rollouts=32", "algo.prior_alpha=0.1", "algo.prior_support=directional"}) {
    apply_override(c, kv);
  }
  c.algo.name = algo;
  c.seed = static_cast<std::uint64_t>(seed);
  c.env.level_seed = 1000 + static_cast<std::uint64_t>(seed);
  return c;
}

double metric(const RunResult& r, const std::string& name, int step) {
  for (const MetricRow& m : r.metrics) {
    if (m.metric == name && m.step == step) return m.value;
  }
  throw std::runtime_error("missing metric " + name);
}

struct FourRoomsMeans {
  std::vector<double> coverage = std::vector<double>(4, 0.0);
  std::vector<double> success = std::vector<double>(4, 0.0);
};

const std::vector<std::string> kFourRoomsAlgos{"cascade", "pp2e", "p2e", "random"};

FourRoomsMeans four_rooms_means(std::uint64_t rng_stream, int seeds) {
  FourRoomsMeans out;
  for (int a = 0; a < 4; ++a) {
    for (int s = 0; s < seeds; ++s) {
      RunConfig c = four_rooms_config(kFourRoomsAlgos[a], s);
      c.rng_stream = rng_stream;
      const RunResult r = run_experiment(c, RunMode::kZeroShot);
      out.coverage[a] += metric(r, "state_coverage", 5) / seeds;
      out.success[a] += metric(r, "zeroshot_success_rate", 5) / seeds;
    }
  }
  return out;
}

Outcome four_rooms() {
  const auto t0 = Clock::now();
  const FourRoomsMeans m = four_rooms_means(0, 10);
  const auto& cov = m.coverage;
  const auto& succ = m.success;
  const double secs = seconds_since(t0);
  const bool pass = cov[0] >= cov[1] && cov[1] >= cov[2] && succ[0] >= 0.9 && succ[3] <= 0.1 && secs < 1800.0;
  std::string detail = fmt("coverage cascade %.1f >= pp2e %.1f >= p2e %.1f (random %.1f); zero-shot cascade %.2f, "
                           "random %.2f (pp2e %.2f, p2e %.2f); %.1fs",
                           cov[0], cov[1], cov[2], cov[3], succ[0], succ[3], succ[1], succ[2], secs);
  // Not part of the verdict: spread of the same protocol over streams 1..9.
  FourRoomsMeans spread;
  const int streams = 9;
  for (std::uint64_t st = 1; st <= streams; ++st) {
    const FourRoomsMeans s = four_rooms_means(st, 10);
    for (int a = 0; a < 4; ++a) {
      spread.coverage[a] += s.coverage[a] / streams;
      spread.success[a] += s.success[a] / streams;
    }
  }
  detail += fmt(" | streams 1-9 mean: coverage %.1f/%.1f/%.1f/%.1f, zero-shot cascade %.3f random %.3f",
                spread.coverage[0], spread.coverage[1], spread.coverage[2], spread.coverage[3],
                spread.success[0], spread.success[3]);
  return {pass, detail};
}

// --- 8 ---------------------------------------------------------------------

Outcome homogeneity() {
  const BinaryTree tree = make_binary_tree(3, std::vector<int>{5, 2, 7, 0, 3, 6, 1, 4});
  const TreePosterior collapsed = TreePosterior::from_edges(3, tree.spec.leaf_assignment);
  const EmbeddingSpec spec{EmbeddingKind::kFinalStateOneHot, 1.0, tree.spec.num_nodes()};
  const EnsembleModel ens = make_ensemble(collapsed, 5, RngStream(2026, 80));
  RngStream rng(2026, 81);
  const PopulationPlan same = select_population_cascade(collapsed, 6, 0.0, ens, spec, rng, 8);
  const bool identical = std::all_of(same.policies.begin(), same.policies.end(),
                                     [&](const TabularPolicy& p) { return p == same.policies[0]; });

  // Root with two absorbing goals; sigma is identically zero.
  const TreePosterior two_goal = TreePosterior::from_edges(1, {0, 1});
  const EnsembleModel flat = make_ensemble(two_goal, 5, RngStream(2026, 82));
  const auto sigma = disagreement_table(flat);
  const bool zero = std::all_of(sigma.begin(), sigma.end(), [](double x) { return x == 0.0; });
  const PopulationPlan diverse = select_population_cascade(two_goal, 2, 0.5, flat, {EmbeddingKind::kFinalStateOneHot, 1.0, 3}, rng, 8);
  const TabularMdp world = two_goal.mean();
  RngStream r(2026, 83);
  const StateId end1 = rollout(world, diverse.policies[0], r).final_state;
  const StateId end2 = rollout(world, diverse.policies[1], r).final_state;
  return {identical && zero && end1 != end2,
          fmt("lambda 0: %zu policies identical=%s; lambda 0.5: terminal states %d and %d", same.policies.size(),
              identical ? "yes" : "no", end1, end2)};
}

// --- 9 ---------------------------------------------------------------------

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "cascade_acceptance_determinism";
  fs::remove_all(root);
  struct Case {
    RunConfig config;
    RunMode mode;
  };
  std::vector<Case> cases;
  cases.push_back({four_rooms_config("cascade", 3), RunMode::kZeroShot});
  cases.push_back({four_rooms_config("pp2e", 4), RunMode::kExplore});
  RunConfig ts;
  ts.env.family = "binary_tree";
  ts.env.depth = 4;
  ts.algo.name = "cascade_ts";
  ts.algo.B = 4;
  ts.seed = 9;
  cases.push_back({ts, RunMode::kTs});
  int identical = 0;
  std::size_t bytes = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const fs::path a = root / (std::to_string(i) + "a"), b = root / (std::to_string(i) + "b");
    write_run(run_experiment(cases[i].config, cases[i].mode), a.string());
    write_run(run_experiment(cases[i].config, cases[i].mode), b.string());
    bool same = true;
    for (const char* f : {"metrics.csv", "transitions.log"}) {
      const std::string x = slurp(a / f), y = slurp(b / f);
      same = same && !x.empty() && x == y;
      bytes += x.size();
    }
    if (same) ++identical;
  }
  fs::remove_all(root);
  return {identical == static_cast<int>(cases.size()),
          fmt("%d/%zu runs byte-identical (%zu bytes compared per copy)", identical, cases.size(), bytes)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"exact MI of diverse versus diagonal pairs", diverse_pair},
      {"entropy factorization", factorization},
      {"greedy (1 - 1/e) bound", greedy_bound},
      {"TS round counts and ordering", ts_rounds},
      {"DP oracle equivalence", dp_oracle},
      {"composite objective consistency", composite_consistency},
      {"FourRooms coverage and zero-shot ordering", four_rooms},
      {"homogeneity failure mode", homogeneity},
      {"determinism of run artifacts", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s criterion %zu: %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
