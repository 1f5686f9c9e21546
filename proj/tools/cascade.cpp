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

// Command-line driver: explore, zeroshot, ts, sweep and theory runs.
//
// Exit codes: 0 success, 1 runtime failure (or a failed theory check),
// 2 invalid configuration or an exceeded brute-force cap.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cascade/config.hpp"
#include "cascade/errors.hpp"
#include "cascade/experiment.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Config file (key.path = value per line)");
  cmd->add_option("--seed", flags.seed, "Run seed; overrides the config");
  cmd->add_option("--out", flags.out_dir, "Output directory; overrides the config");
  cmd->add_option("--override", flags.overrides, "KEY=VALUE, applied after the config file")
      ->take_all();
}

cascade::RunConfig load(const CommonFlags& flags) {
  cascade::RunConfig config =
      flags.config_path.empty() ? cascade::RunConfig{} : cascade::load_config(flags.config_path);
  for (const std::string& o : flags.overrides) cascade::apply_override(config, o);
  if (flags.seed) config.seed = *flags.seed;
  if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
  return config;
}

// "0,1,5" or "0-9" or a mix such as "0-3,7".
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      const auto dash = item.find('-');
      if (dash == std::string::npos) {
        seeds.push_back(std::stoull(item));
      } else {
        const std::uint64_t lo = std::stoull(item.substr(0, dash));
        const std::uint64_t hi = std::stoull(item.substr(dash + 1));
        if (hi < lo) throw cascade::ConfigError("seed range '" + item + "' is empty", "--seeds");
        for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
      }
    } catch (const std::logic_error&) {
      throw cascade::ConfigError("cannot parse seed list '" + text + "'", "--seeds");
    }
  }
  return seeds;
}

cascade::SweepAxis parse_axis(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos) throw cascade::ConfigError("axis must be KEY=V1,V2,...", "--axis");
  cascade::SweepAxis axis;
  axis.key = text.substr(0, eq);
  std::stringstream ss(text.substr(eq + 1));
  std::string v;
  while (std::getline(ss, v, ',')) {
    if (!v.empty()) axis.values.push_back(v);
  }
  return axis;
}

int run_single(const CommonFlags& flags, cascade::RunMode mode) {
  const cascade::RunConfig config = load(flags);
  const cascade::RunResult run = cascade::run_experiment(config, mode);
  cascade::write_run(run, run.config.out_dir);
  std::cout << "wrote " << run.metrics.size() << " metric rows to " << run.config.out_dir << "\n";
  return 0;
}

int run_theory(const CommonFlags& flags) {
  const cascade::RunConfig config = load(flags);
  const cascade::TheoryResult result = cascade::run_theory_suite(config);
  for (const cascade::TheoryLine& l : result.lines) {
    const char* tag = l.status == cascade::CheckStatus::kPass        ? "PASS"
                      : l.status == cascade::CheckStatus::kNonStrict ? "WARN"
                                                                     : "FAIL";
    std::cout << tag << " " << l.check << " " << l.detail << "\n";
  }
  std::filesystem::create_directories(result.config.out_dir);
  std::ofstream(std::filesystem::path(result.config.out_dir) / "metrics.csv", std::ios::binary)
      << cascade::metrics_csv(result);
  std::ofstream(std::filesystem::path(result.config.out_dir) / "config.resolved", std::ios::binary)
      << cascade::to_text(result.config);
  return result.passed() ? 0 : 1;
}

int run_sweep(const CommonFlags& flags, const std::string& axis_text, const std::string& seeds_text,
              const std::string& mode_name) {
  const cascade::RunConfig config = load(flags);
  cascade::RunMode mode = cascade::RunMode::kExplore;
  if (mode_name == "ts") {
    mode = cascade::RunMode::kTs;
  } else if (mode_name == "zeroshot") {
    mode = cascade::RunMode::kZeroShot;
  } else if (mode_name != "explore") {
    throw cascade::ConfigError("unknown sweep mode '" + mode_name + "'", "--mode");
  }
  const cascade::SweepResult sweep =
      cascade::run_sweep(config, parse_axis(axis_text), parse_seeds(seeds_text), mode);
  cascade::write_sweep(sweep, config.out_dir);
  std::cout << "wrote " << sweep.runs.size() << " runs and merged.csv to " << config.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Population exploration experiments on tabular MDPs"};
  app.require_subcommand(1);

  CommonFlags explore_flags, zeroshot_flags, ts_flags, theory_flags, sweep_flags;
  CLI::App* explore = app.add_subcommand("explore", "Deployment loop with a population explorer");
  add_common(explore, explore_flags);
  CLI::App* zeroshot = app.add_subcommand("zeroshot", "Deployment loop followed by zero-shot transfer");
  add_common(zeroshot, zeroshot_flags);
  CLI::App* ts = app.add_subcommand("ts", "Thompson-sampling rounds until the accuracy target");
  add_common(ts, ts_flags);
  CLI::App* theory = app.add_subcommand("theory", "Exact checks of the theoretical claims");
  add_common(theory, theory_flags);
  CLI::App* sweep = app.add_subcommand("sweep", "Cartesian sweep over one key and a seed list");
  add_common(sweep, sweep_flags);
  std::string axis_text, seeds_text = "0", mode_name = "explore";
  sweep->add_option("--axis", axis_text, "KEY=V1,V2,...")->required();
  sweep->add_option("--seeds", seeds_text, "Seed list, e.g. 0-9 or 1,4,7");
  sweep->add_option("--mode", mode_name, "explore | zeroshot | ts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*explore) return run_single(explore_flags, cascade::RunMode::kExplore);
    if (*zeroshot) return run_single(zeroshot_flags, cascade::RunMode::kZeroShot);
    if (*ts) return run_single(ts_flags, cascade::RunMode::kTs);
    if (*theory) return run_theory(theory_flags);
    if (*sweep) return run_sweep(sweep_flags, axis_text, seeds_text, mode_name);
  } catch (const cascade::ConfigError& e) {
    std::cerr << "config error";
    if (!e.key().empty()) std::cerr << " [" << e.key() << "]";
    std::cerr << ": " << e.what() << "\n";
    return 2;
  } catch (const cascade::ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
