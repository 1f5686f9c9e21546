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

#include "cascade/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include "cascade/envs.hpp"
#include "cascade/errors.hpp"
#include "cascade/greedy.hpp"
#include "cascade/ts.hpp"

namespace cascade {

namespace {

// Stream ids for RNG roots independent of the run seed's algorithm stream.
constexpr std::uint64_t kTreeLevelStream = 0x74726565;  // "tree"
constexpr std::uint64_t kGreedyStream = 0x67726479;
constexpr std::uint64_t kPartitionStream = 0x70617274;
constexpr std::uint64_t kFactorStream = 0x66616374;

bool is_ts_algo(const std::string& name) {
  return name == "cascade_ts" || name == "sequential_ts" || name == "single_policy_batch";
}

bool has_task(const RunConfig& c, const char* task) {
  return std::find(c.eval.tasks.begin(), c.eval.tasks.end(), task) != c.eval.tasks.end();
}

std::string format_value(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

// The environment of a run plus everything derived from its layout.
struct Instance {
  TabularMdp mdp;
  std::optional<GridWorld> grid;
  bool tree = false;
};

Instance build_instance(const RunConfig& c) {
  Instance inst;
  if (c.env.family == "binary_tree") {
    RngStream rng(c.env.level_seed, kTreeLevelStream);
    inst.mdp = make_binary_tree(c.env.depth, rng).mdp;
    inst.tree = true;
    return inst;
  }
  GridWorldSpec spec;
  spec.family = c.env.family == "four_rooms" ? GridFamily::kFourRooms : GridFamily::kMultiRoom;
  spec.grid_size = c.env.grid_size;
  spec.num_rooms = c.env.num_rooms;
  spec.room_size = c.env.room_size;
  spec.level_seed = c.env.level_seed;
  spec.horizon = c.env.horizon;
  inst.grid = make_gridworld(spec);
  inst.mdp = inst.grid->mdp;
  return inst;
}

std::unique_ptr<ModelPosterior> build_posterior(const RunConfig& c, const Instance& inst) {
  if (inst.tree) return std::make_unique<TreePosterior>(c.env.depth);
  std::optional<DirichletPosterior::Support> support;
  if (c.algo.prior_support == "local") support = inst.grid->local_support();
  if (c.algo.prior_support == "directional") support = inst.grid->directional_support();
  return std::make_unique<DirichletPosterior>(inst.mdp.shape(), c.algo.prior_alpha, std::move(support));
}

ExploreConfig explore_config(const RunConfig& c, int num_states) {
  ExploreConfig e;
  e.algo = parse_explore_algo(c.algo.name);
  e.population = c.algo.B;
  e.lambda = c.algo.lambda;
  e.ensemble_size = c.algo.ensemble_size;
  e.imagined_rollouts = c.algo.imagined_rollouts;
  e.embedding.kind = c.algo.embedding == "visitation" ? EmbeddingKind::kDiscountedVisitation
                                                      : EmbeddingKind::kFinalStateOneHot;
  e.embedding.discount = c.algo.embedding_discount;
  e.embedding.dimension = num_states;
  return e;
}

std::string buffer_log(const ModelPosterior& posterior) {
  std::ostringstream out;
  posterior.buffer().write_log(out);
  return out.str();
}

void run_explore(RunResult& result, bool zero_shot) {
  const RunConfig& c = result.config;
  const Instance inst = build_instance(c);
  auto posterior = build_posterior(c, inst);
  const RngStream root(c.seed, c.rng_stream);
  RngStream rng = root.child(1);
  const RunLog log = run_deployment_loop(inst.mdp, make_selector(explore_config(c, inst.mdp.num_states())),
                                         c.algo.deployments, c.algo.transitions_per_policy,
                                         *posterior, rng);
  auto& m = result.metrics;
  const int D = static_cast<int>(log.deployments.size());
  if (has_task(c, "coverage")) {
    const auto cov = state_coverage(log, inst.mdp);
    for (int d = 0; d < D; ++d) m.push_back({"state_coverage", d + 1, cov[d]});
  }
  if (has_task(c, "rewarding_episodes")) {
    const auto rew = cumulative_rewarding_episodes(log, inst.mdp);
    for (int d = 0; d < D; ++d) m.push_back({"rewarding_episodes", d + 1, static_cast<double>(rew[d])});
  }
  if (has_task(c, "accuracy")) {
    for (int d = 0; d < D; ++d) {
      m.push_back({"epsilon", d + 1, epsilon_accuracy(*log.snapshots[d], inst.mdp)});
    }
  }
  std::size_t transitions = 0;
  for (int d = 0; d < D; ++d) {
    for (const Trajectory& t : log.deployments[d].trajectories) transitions += t.steps.size();
    m.push_back({"real_transitions", d + 1, static_cast<double>(transitions)});
  }
  if (zero_shot || has_task(c, "zeroshot")) {
    if (!inst.grid) throw ConfigError("zero-shot transfer needs a gridworld", "env.family");
    if (c.env.test_level_seeds.empty()) {
      throw ConfigError("zero-shot transfer needs at least one test level", "env.test_level_seeds");
    }
    ZeroShotTask task;
    task.success_threshold = c.eval.success_threshold;
    for (std::uint64_t s : c.env.test_level_seeds) {
      task.test_levels.push_back(inst.grid->with_goal_seed(s).mdp);
    }
    const ZeroShotResult z = zero_shot_transfer(*posterior, log, task);
    m.push_back({"zeroshot_success_rate", D, z.success_rate});
    m.push_back({"zeroshot_mean_return", D, z.mean_return});
  }
  result.transitions_log = buffer_log(*posterior);
}

void run_ts(RunResult& result) {
  const RunConfig& c = result.config;
  const Instance inst = build_instance(c);
  if (!inst.mdp.is_deterministic()) throw ConfigError("TS accuracy needs a deterministic environment");
  const RngStream root(c.seed, c.rng_stream);
  RngStream rng = root.child(1);
  TsConfig tc;
  tc.population = c.algo.B;
  tc.fake_rollouts = c.algo.fake_rollouts;
  tc.depth_scale = c.algo.depth_scale;
  tc.init = c.algo.ts_init == "uniform" ? TsInit::kUniform : TsInit::kPlanned;
  TsRoundState state = make_ts_state(build_posterior(c, inst), tc, rng);
  const TsAlgorithm algo = parse_ts_algorithm(c.algo.name);

  auto& m = result.metrics;
  double eps = epsilon_accuracy(*state.posterior, inst.mdp);
  m.push_back({"epsilon", 0, eps});
  int reached = eps <= c.eval.epsilon_target ? 0 : kRoundsNotReached;
  for (int k = 1; reached == kRoundsNotReached && k <= c.algo.max_rounds; ++k) {
    run_ts_round(algo, state, inst.mdp, rng);
    eps = epsilon_accuracy(*state.posterior, inst.mdp);
    m.push_back({"epsilon", k, eps});
    m.push_back({"unique_paths", k, static_cast<double>(state.unique_paths())});
    if (eps <= c.eval.epsilon_target) reached = k;
  }
  m.push_back({"rounds_to_accuracy", 0, static_cast<double>(reached)});
  result.transitions_log = buffer_log(*state.posterior);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::string csv_rows(const RunConfig& c, const std::string& algo, const std::string& env,
                     const std::vector<MetricRow>& rows) {
  std::string out;
  for (const MetricRow& r : rows) {
    out += c.run_id + "," + algo + "," + env + "," + std::to_string(c.seed) + "," +
           std::to_string(r.step) + "," + r.metric + "," + format_value(r.value) + "\n";
  }
  return out;
}

std::string safe_name(std::string s) {
  for (char& ch : s) {
    const bool ok = std::isalnum(static_cast<unsigned char>(ch)) || ch == '-' || ch == '_' ||
                    ch == '.' || ch == '=';
    if (!ok) ch = '_';
  }
  return s;
}

}  // namespace

RunResult run_experiment(const RunConfig& config, RunMode mode) {
  RunResult result;
  result.config = resolve(config);
  if (result.config.run_id.find(',') != std::string::npos) {
    throw ConfigError("run_id must not contain commas", "run_id");
  }
  const bool ts = is_ts_algo(result.config.algo.name);
  if (mode == RunMode::kTs && !ts) {
    throw ConfigError("the ts command needs a TS algorithm, got '" + result.config.algo.name + "'",
                      "algo.name");
  }
  if (mode != RunMode::kTs && ts) {
    throw ConfigError("TS algorithm '" + result.config.algo.name + "' needs the ts command",
                      "algo.name");
  }
  if (ts) {
    run_ts(result);
  } else {
    run_explore(result, mode == RunMode::kZeroShot);
  }
  return result;
}

std::string metrics_csv(const RunResult& run, bool header) {
  std::string out = header ? std::string(kMetricsHeader) + "\n" : std::string();
  return out + csv_rows(run.config, run.config.algo.name, run.config.env.family, run.metrics);
}

void write_run(const RunResult& run, const std::string& dir) {
  const std::filesystem::path root(dir);
  std::filesystem::create_directories(root);
  write_file(root / "metrics.csv", metrics_csv(run));
  write_file(root / "transitions.log", run.transitions_log);
  write_file(root / "config.resolved", to_text(run.config));
}

SweepResult run_sweep(const RunConfig& base, const SweepAxis& axis,
                      const std::vector<std::uint64_t>& seeds, RunMode mode) {
  if (seeds.empty()) throw ConfigError("sweep needs at least one seed", "--seeds");
  if (axis.values.empty()) throw ConfigError("sweep axis has no values", axis.key);
  {
    const auto keys = config_keys();
    if (std::find(keys.begin(), keys.end(), axis.key) == keys.end()) {
      throw ConfigError("unknown sweep axis key '" + axis.key + "'", axis.key);
    }
    if (axis.key == "seed" || axis.key == "rng_stream" || axis.key == "run_id") {
      throw ConfigError("sweep axis cannot be '" + axis.key + "'", axis.key);
    }
  }
  const std::size_t n = axis.values.size() * seeds.size();
  std::vector<RunConfig> cells(n, base);
  for (std::size_t c = 0; c < n; ++c) {
    RunConfig& cfg = cells[c];
    const std::string& value = axis.values[c / seeds.size()];
    set_config_value(cfg, axis.key, value);
    cfg.seed = seeds[c % seeds.size()];
    cfg.rng_stream = c;
    cfg.run_id = safe_name(base.run_id + "-" + axis.key + "=" + value + "-s" + std::to_string(cfg.seed));
    resolve(cfg);  // surface config errors before any work starts
  }

  SweepResult sweep;
  sweep.runs.resize(n);
  std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(n); ++c) {
    try {
      sweep.runs[c] = run_experiment(cells[c], mode);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<std::string> lines;
  for (const RunResult& r : sweep.runs) {
    std::istringstream rows(metrics_csv(r, false));
    std::string line;
    while (std::getline(rows, line)) lines.push_back(line);
  }
  std::sort(lines.begin(), lines.end());
  sweep.merged_csv = std::string(kMetricsHeader) + "\n";
  for (const std::string& l : lines) sweep.merged_csv += l + "\n";
  return sweep;
}

void write_sweep(const SweepResult& sweep, const std::string& dir) {
  const std::filesystem::path root(dir);
  std::filesystem::create_directories(root);
  for (const RunResult& r : sweep.runs) write_run(r, (root / r.config.run_id).string());
  write_file(root / "merged.csv", sweep.merged_csv);
}

// --- Theory suite --------------------------------------------------------

bool TheoryResult::passed() const {
  return std::none_of(lines.begin(), lines.end(),
                      [](const TheoryLine& l) { return l.status == CheckStatus::kFail; });
}

TheoryResult run_theory_suite(const RunConfig& config) {
  TheoryResult out;
  out.config = resolve(config);
  const RunConfig::Theory& t = out.config.theory;
  auto metric = [&](const std::string& name, double v) { out.metrics.push_back({name, 0, v}); };
  auto line = [&](std::string check, CheckStatus status, std::string detail) {
    out.lines.push_back({std::move(check), status, std::move(detail)});
  };

  {
    const Lemma1Report r = lemma1_check(t.depth, t.B);
    metric("diverse_pair_best_mi", r.best_mi);
    metric("diverse_pair_best_diagonal_mi", r.best_diagonal_mi);
    metric("diverse_pair_margin", r.margin);
    line("diverse_pair", r.status,
         "depth=" + std::to_string(t.depth) + " B=" + std::to_string(t.B) + " best_mi=" +
             format_value(r.best_mi) + " diagonal_mi=" + format_value(r.best_diagonal_mi));
  }
  {
    int violations = 0;
    double min_ratio = 1.0;
    const RngStream root(out.config.seed, kGreedyStream);
    for (int i = 0; i < t.greedy_instances; ++i) {
      RngStream rng = root.child(static_cast<std::uint64_t>(i));
      const GreedyReport r = greedy_bound_check(random_greedy_instance(rng), t.greedy_B);
      if (r.status == CheckStatus::kFail) ++violations;
      min_ratio = std::min(min_ratio, r.ratio());
    }
    metric("greedy_violations", violations);
    metric("greedy_min_ratio", min_ratio);
    const CheckStatus status = violations > 0          ? CheckStatus::kFail
                               : t.greedy_instances == 0 ? CheckStatus::kNonStrict
                                                         : CheckStatus::kPass;
    line("greedy_bound", status,
         "instances=" + std::to_string(t.greedy_instances) + " violations=" +
             std::to_string(violations) + " min_ratio=" + format_value(min_ratio));
  }
  {
    RngStream rng(out.config.seed, kPartitionStream);
    const PartitionReport r = entropy_partition_check(t.partition_trials, rng);
    metric("partition_violations", r.violations);
    const CheckStatus status = r.violations > 0 ? CheckStatus::kFail
                               : r.trials == 0  ? CheckStatus::kNonStrict
                                                : CheckStatus::kPass;
    line("entropy_partition", status,
         "trials=" + std::to_string(r.trials) + " violations=" + std::to_string(r.violations));
  }
  {
    RngStream rng(out.config.seed, kFactorStream);
    const FactorizationReport r = factorization_check(t.factorization_trials, rng);
    metric("factorization_max_abs_error", r.max_abs_error);
    const CheckStatus status = r.max_abs_error > 1e-9 ? CheckStatus::kFail
                               : r.trials == 0        ? CheckStatus::kNonStrict
                                                      : CheckStatus::kPass;
    line("entropy_factorization", status,
         "trials=" + std::to_string(r.trials) + " max_abs_error=" + format_value(r.max_abs_error));
  }
  for (int L : t.ts_depths) {
    for (int B : t.ts_populations) {
      const std::string cell = "L" + std::to_string(L) + "_B" + std::to_string(B);
      if (t.ts_seeds == 0) {
        line("ts_rounds_" + cell, CheckStatus::kNonStrict, "no seeds");
        continue;
      }
      const Lemma2Cell r = lemma2_cell(L, B, t.ts_seeds, out.config.seed);
      const int edges = (1 << L) - 1;
      const int cascade_expected = (edges + B - 1) / B;
      auto mean = [](const std::vector<int>& xs) {
        double s = 0.0;
        for (int x : xs) s += x;
        return s / static_cast<double>(xs.size());
      };
      const auto hits = [](const std::vector<int>& xs, int v) {
        return static_cast<double>(std::count(xs.begin(), xs.end(), v)) / static_cast<double>(xs.size());
      };
      const bool reached = std::none_of(r.cascade_ts.begin(), r.cascade_ts.end(), [](int x) { return x < 0; }) &&
                           std::none_of(r.sequential.begin(), r.sequential.end(), [](int x) { return x < 0; }) &&
                           std::none_of(r.single_policy_batch.begin(), r.single_policy_batch.end(),
                                        [](int x) { return x < 0; });
      const double c_hit = hits(r.cascade_ts, cascade_expected);
      const double s_hit = hits(r.single_policy_batch, edges);
      const double mc = mean(r.cascade_ts), ms = mean(r.sequential), mb = mean(r.single_policy_batch);
      metric("ts_" + cell + "_cascade_mean_rounds", mc);
      metric("ts_" + cell + "_sequential_mean_rounds", ms);
      metric("ts_" + cell + "_single_batch_mean_rounds", mb);
      metric("ts_" + cell + "_cascade_exact_fraction", c_hit);
      metric("ts_" + cell + "_single_batch_exact_fraction", s_hit);
      const bool ok = reached && c_hit >= 0.95 && s_hit == 1.0 && ms <= mc && mc <= mb;
      line("ts_rounds_" + cell, ok ? CheckStatus::kPass : CheckStatus::kFail,
           "cascade_mean=" + format_value(mc) + " sequential_mean=" + format_value(ms) +
               " single_batch_mean=" + format_value(mb) + " cascade_exact=" + format_value(c_hit) +
               " single_batch_exact=" + format_value(s_hit));
    }
  }
  return out;
}

std::string metrics_csv(const TheoryResult& result) {
  return std::string(kMetricsHeader) + "\n" + csv_rows(result.config, "theory", "-", result.metrics);
}

}  // namespace cascade
