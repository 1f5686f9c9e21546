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

#include "cascade/config.hpp"
#include "cascade/evaluation.hpp"

namespace cascade {

enum class RunMode {
  kExplore,   // deployment loop with a population explorer
  kZeroShot,  // deployment loop followed by zero-shot transfer
  kTs,        // Thompson-sampling rounds
};

struct MetricRow {
  std::string metric;
  int step = 0;  // deployment or round, 1-based; 0 for run-level values
  double value = 0.0;
};

struct RunResult {
  RunConfig config;  // resolved
  std::vector<MetricRow> metrics;
  std::string transitions_log;
};

inline constexpr const char* kMetricsHeader = "run_id,algo,env,seed,deployment_or_round,metric,value";

/// Executes one run in memory. Throws ConfigError for an invalid config or
/// an algorithm that does not match `mode`.
RunResult run_experiment(const RunConfig& config, RunMode mode);

/// Metric rows in CSV form, optionally preceded by kMetricsHeader.
std::string metrics_csv(const RunResult& run, bool header = true);

/// Writes metrics.csv, transitions.log and config.resolved into `dir`.
void write_run(const RunResult& run, const std::string& dir);

struct SweepAxis {
  std::string key;
  std::vector<std::string> values;
};

struct SweepResult {
  std::vector<RunResult> runs;  // axis-major, seed-minor
  /// Header plus every run's rows, sorted.
  std::string merged_csv;
};

/// Cartesian product of axis values and seeds. Cell c uses seed
/// seeds[c % |seeds|] and RNG stream c; cells run in parallel.
SweepResult run_sweep(const RunConfig& base, const SweepAxis& axis,
                      const std::vector<std::uint64_t>& seeds, RunMode mode);

/// One subdirectory per run plus merged.csv.
void write_sweep(const SweepResult& sweep, const std::string& dir);

struct TheoryLine {
  std::string check;
  CheckStatus status = CheckStatus::kFail;
  std::string detail;
};

struct TheoryResult {
  RunConfig config;
  std::vector<TheoryLine> lines;
  std::vector<MetricRow> metrics;

  /// True when no line failed; non-strict lines count as passes.
  bool passed() const;
};

/// Diverse-pair brute force, greedy bound, entropy partition, factorization and
/// the TS round-count experiment, sized by `config.theory`. Throws
/// ResourceError when a brute force exceeds its cap.
TheoryResult run_theory_suite(const RunConfig& config);

/// Rows of `result` in CSV form with kMetricsHeader.
std::string metrics_csv(const TheoryResult& result);

}  // namespace cascade
