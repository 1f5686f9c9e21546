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

#include "cascade/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "cascade/errors.hpp"

namespace cascade {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  if (trim(value).empty()) return out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string v = trim(text);
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("cannot parse value '" + v + "' for key " + key, key);
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(out)) throw ConfigError("non-finite value for key " + key, key);
  }
  return out;
}

std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

template <class T>
std::string join(const std::vector<T>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_same_v<T, std::string>) {
      out += xs[i];
    } else {
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
  std::vector<T> out;
  for (const std::string& item : split_list(value)) out.push_back(parse_number<T>(key, item));
  return out;
}

struct Field {
  const char* key;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define CASCADE_INT_FIELD(KEY, MEMBER)                                                        \
  Field {                                                                                     \
    KEY, [](RunConfig& c, const std::string& k, const std::string& v) {                       \
      c.MEMBER = parse_number<decltype(c.MEMBER)>(k, v);                                      \
    },                                                                                        \
        [](const RunConfig& c) { return std::to_string(c.MEMBER); }                           \
  }
#define CASCADE_DOUBLE_FIELD(KEY, MEMBER)                                                     \
  Field {                                                                                     \
    KEY, [](RunConfig& c, const std::string& k, const std::string& v) {                       \
      c.MEMBER = parse_number<double>(k, v);                                                  \
    },                                                                                        \
        [](const RunConfig& c) { return format_double(c.MEMBER); }                            \
  }
#define CASCADE_STRING_FIELD(KEY, MEMBER)                                                     \
  Field {                                                                                     \
    KEY, [](RunConfig& c, const std::string&, const std::string& v) { c.MEMBER = trim(v); }, \
        [](const RunConfig& c) { return c.MEMBER; }                                           \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      CASCADE_STRING_FIELD("env.family", env.family),
      CASCADE_INT_FIELD("env.grid_size", env.grid_size),
      CASCADE_INT_FIELD("env.num_rooms", env.num_rooms),
      CASCADE_INT_FIELD("env.room_size", env.room_size),
      CASCADE_INT_FIELD("env.depth", env.depth),
      CASCADE_INT_FIELD("env.horizon", env.horizon),
      CASCADE_INT_FIELD("env.level_seed", env.level_seed),
      Field{"env.test_level_seeds",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.env.test_level_seeds = parse_list<std::uint64_t>(k, v);
            },
            [](const RunConfig& c) { return join(c.env.test_level_seeds); }},
      CASCADE_STRING_FIELD("algo.name", algo.name),
      CASCADE_INT_FIELD("algo.B", algo.B),
      CASCADE_DOUBLE_FIELD("algo.lambda", algo.lambda),
      CASCADE_INT_FIELD("algo.ensemble_size", algo.ensemble_size),
      CASCADE_INT_FIELD("algo.fake_rollouts", algo.fake_rollouts),
      CASCADE_INT_FIELD("algo.imagined_rollouts", algo.imagined_rollouts),
      CASCADE_INT_FIELD("algo.deployments", algo.deployments),
      CASCADE_INT_FIELD("algo.transitions_per_policy", algo.transitions_per_policy),
      CASCADE_STRING_FIELD("algo.embedding", algo.embedding),
      CASCADE_DOUBLE_FIELD("algo.embedding_discount", algo.embedding_discount),
      CASCADE_DOUBLE_FIELD("algo.prior_alpha", algo.prior_alpha),
      CASCADE_STRING_FIELD("algo.prior_support", algo.prior_support),
      CASCADE_INT_FIELD("algo.depth_scale", algo.depth_scale),
      CASCADE_STRING_FIELD("algo.ts_init", algo.ts_init),
      CASCADE_INT_FIELD("algo.max_rounds", algo.max_rounds),
      Field{"eval.tasks",
            [](RunConfig& c, const std::string&, const std::string& v) { c.eval.tasks = split_list(v); },
            [](const RunConfig& c) { return join(c.eval.tasks); }},
      CASCADE_DOUBLE_FIELD("eval.success_threshold", eval.success_threshold),
      CASCADE_DOUBLE_FIELD("eval.epsilon_target", eval.epsilon_target),
      CASCADE_INT_FIELD("theory.depth", theory.depth),
      CASCADE_INT_FIELD("theory.B", theory.B),
      CASCADE_INT_FIELD("theory.greedy_instances", theory.greedy_instances),
      CASCADE_INT_FIELD("theory.greedy_B", theory.greedy_B),
      CASCADE_INT_FIELD("theory.partition_trials", theory.partition_trials),
      CASCADE_INT_FIELD("theory.factorization_trials", theory.factorization_trials),
      CASCADE_INT_FIELD("theory.ts_seeds", theory.ts_seeds),
      Field{"theory.ts_depths",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.theory.ts_depths = parse_list<int>(k, v);
            },
            [](const RunConfig& c) { return join(c.theory.ts_depths); }},
      Field{"theory.ts_populations",
            [](RunConfig& c, const std::string& k, const std::string& v) {
              c.theory.ts_populations = parse_list<int>(k, v);
            },
            [](const RunConfig& c) { return join(c.theory.ts_populations); }},
      CASCADE_INT_FIELD("seed", seed),
      CASCADE_INT_FIELD("rng_stream", rng_stream),
      CASCADE_STRING_FIELD("run_id", run_id),
      CASCADE_STRING_FIELD("out_dir", out_dir),
  };
  return table;
}

#undef CASCADE_INT_FIELD
#undef CASCADE_DOUBLE_FIELD
#undef CASCADE_STRING_FIELD

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key + ": " + what, key);
}

bool one_of(const std::string& v, std::initializer_list<const char*> options) {
  for (const char* o : options) {
    if (v == o) return true;
  }
  return false;
}

}  // namespace

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  const std::string k = trim(key);
  for (const Field& f : fields()) {
    if (k == f.key) {
      f.set(config, k, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + k + "'", k);
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "' is not KEY=VALUE", trim(assignment));
  }
  set_config_value(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + " is not 'key = value'", trim(line));
    }
    set_config_value(config, line.substr(0, eq), line.substr(eq + 1));
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path, "--config");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

RunConfig resolve(RunConfig c) {
  require(one_of(c.env.family, {"four_rooms", "multi_room", "binary_tree"}), "env.family",
          "expected four_rooms, multi_room or binary_tree");
  const bool tree = c.env.family == "binary_tree";
  if (tree) {
    require(c.env.depth >= 1 && c.env.depth <= 16, "env.depth", "must lie in [1, 16]");
    if (c.env.horizon == 0) c.env.horizon = c.env.depth;
    require(c.env.horizon == c.env.depth, "env.horizon", "must equal env.depth for binary trees");
  } else {
    if (c.env.horizon == 0) c.env.horizon = 100;
    require(c.env.horizon >= 1, "env.horizon", "must be >= 1");
  }
  require(one_of(c.algo.name, {"cascade", "pp2e", "p2e", "random", "cascade_ts", "sequential_ts",
                               "single_policy_batch"}),
          "algo.name", "unknown algorithm '" + c.algo.name + "'");
  require(c.algo.B >= 1, "algo.B", "must be >= 1");
  require(c.algo.lambda >= 0.0 && c.algo.lambda <= 1.0, "algo.lambda", "must lie in [0, 1]");
  require(c.algo.ensemble_size >= 1, "algo.ensemble_size", "must be >= 1");
  if (c.algo.fake_rollouts == 0) c.algo.fake_rollouts = tree ? 1 : 8;
  require(c.algo.fake_rollouts >= 1, "algo.fake_rollouts", "must be >= 1");
  require(c.algo.imagined_rollouts >= 1, "algo.imagined_rollouts", "must be >= 1");
  require(c.algo.deployments >= 1, "algo.deployments", "must be >= 1");
  if (c.algo.transitions_per_policy == 0) c.algo.transitions_per_policy = 10 * c.env.horizon;
  require(c.algo.transitions_per_policy >= 1, "algo.transitions_per_policy", "must be >= 1");
  require(one_of(c.algo.embedding, {"final_state", "visitation"}), "algo.embedding",
          "expected final_state or visitation");
  require(c.algo.embedding_discount > 0.0 && c.algo.embedding_discount <= 1.0,
          "algo.embedding_discount", "must lie in (0, 1]");
  require(c.algo.prior_alpha > 0.0, "algo.prior_alpha", "must be positive");
  require(one_of(c.algo.prior_support, {"full", "local", "directional"}), "algo.prior_support",
          "expected full, local or directional");
  require(!tree || c.algo.prior_support == "full", "algo.prior_support",
          "binary trees use the exact bijection posterior; support must be full");
  if (c.algo.depth_scale == 0) c.algo.depth_scale = c.env.horizon;
  require(c.algo.depth_scale >= 1, "algo.depth_scale", "must be >= 1");
  require(one_of(c.algo.ts_init, {"planned", "uniform"}), "algo.ts_init",
          "expected planned or uniform");
  if (c.algo.max_rounds == 0) c.algo.max_rounds = tree ? (1 << c.env.depth) + 2 : 50;
  require(c.algo.max_rounds >= 1, "algo.max_rounds", "must be >= 1");
  if (c.eval.tasks.empty()) {
    c.eval.tasks = tree ? std::vector<std::string>{"coverage", "accuracy"}
                        : std::vector<std::string>{"coverage", "rewarding_episodes"};
  }
  for (const std::string& t : c.eval.tasks) {
    require(one_of(t, {"coverage", "rewarding_episodes", "zeroshot", "accuracy"}), "eval.tasks",
            "unknown task '" + t + "'");
    require(!(tree && (t == "zeroshot" || t == "rewarding_episodes")), "eval.tasks",
            "task '" + t + "' needs a gridworld");
  }
  require(c.eval.epsilon_target >= 0.0 && c.eval.epsilon_target < 1.0, "eval.epsilon_target",
          "must lie in [0, 1)");
  require(c.theory.depth >= 1, "theory.depth", "must be >= 1");
  require(c.theory.B >= 1, "theory.B", "must be >= 1");
  require(c.theory.greedy_B >= 1, "theory.greedy_B", "must be >= 1");
  require(c.theory.greedy_instances >= 0, "theory.greedy_instances", "must be >= 0");
  require(c.theory.partition_trials >= 0, "theory.partition_trials", "must be >= 0");
  require(c.theory.factorization_trials >= 0, "theory.factorization_trials", "must be >= 0");
  require(c.theory.ts_seeds >= 0, "theory.ts_seeds", "must be >= 0");
  for (int d : c.theory.ts_depths) require(d >= 1 && d <= 16, "theory.ts_depths", "must lie in [1, 16]");
  for (int b : c.theory.ts_populations) require(b >= 1, "theory.ts_populations", "must be >= 1");
  require(!c.run_id.empty(), "run_id", "must be non-empty");
  return c;
}

std::string to_text(const RunConfig& config) {
  std::string out;
  for (const Field& f : fields()) {
    out += f.key;
    out += " = ";
    out += f.get(config);
    out += "\n";
  }
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const Field& f : fields()) keys.emplace_back(f.key);
  return keys;
}

}  // namespace cascade
