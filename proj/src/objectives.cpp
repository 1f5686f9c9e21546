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

#include "cascade/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>

#include "cascade/errors.hpp"

namespace cascade {

Embedding embed(const Trajectory& trajectory, const EmbeddingSpec& spec) {
  if (spec.dimension < 1) throw ConfigError("embedding dimension must be positive");
  auto check = [&](StateId s) {
    if (s < 0 || s >= spec.dimension) throw ConfigError("embed: state index out of range");
  };
  Embedding out(spec.dimension, 0.0);
  if (spec.kind == EmbeddingKind::kFinalStateOneHot) {
    check(trajectory.final_state);
    out[trajectory.final_state] = 1.0;
    return out;
  }
  double w = 1.0;
  for (const Step& st : trajectory.steps) {
    check(st.state);
    out[st.state] += w;
    w *= spec.discount;
  }
  check(trajectory.final_state);
  out[trajectory.final_state] += w;
  return out;
}

void TrajectoryDataset::add(Embedding e, int policy_id, int model_tag) {
  embeddings.push_back(std::move(e));
  policy_ids.push_back(policy_id);
  model_tags.push_back(model_tag);
}

void TrajectoryDataset::append(const TrajectoryDataset& other) {
  embeddings.insert(embeddings.end(), other.embeddings.begin(), other.embeddings.end());
  policy_ids.insert(policy_ids.end(), other.policy_ids.begin(), other.policy_ids.end());
  model_tags.insert(model_tags.end(), other.model_tags.begin(), other.model_tags.end());
}

// --- Entropy and mutual information --------------------------------------

namespace {

inline double plogp(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

double dist_entropy(const OutcomeDist& d) {
  double h = 0.0;
  for (const auto& [id, p] : d) h -= plogp(p);
  return h;
}

// Interns embedding vectors; exact equality defines an outcome.
class OutcomeInterner {
 public:
  int id(const Embedding& e) {
    auto [it, inserted] = ids_.try_emplace(e, static_cast<int>(ids_.size()));
    return it->second;
  }
  int size() const { return static_cast<int>(ids_.size()); }

 private:
  std::map<Embedding, int> ids_;
};

OutcomeDist visitation_outcomes(const TabularMdp& model, const TabularPolicy& policy,
                                const EmbeddingSpec& spec, OutcomeInterner& interner, double cap) {
  struct Node {
    StateId s;
    double prob;
    Embedding e;
  };
  const int H = model.horizon();
  std::vector<Node> frontier;
  for (StateId s = 0; s < model.num_states(); ++s) {
    const double p = model.initial_dist()[s];
    if (p > 0.0) frontier.push_back({s, p, Embedding(spec.dimension, 0.0)});
  }
  double w = 1.0;
  for (int t = 0; t < H; ++t) {
    std::vector<Node> next;
    for (Node& n : frontier) {
      n.e[n.s] += w;
      for (ActionId a = 0; a < model.num_actions(); ++a) {
        const double pa = policy.prob(t, n.s, a);
        if (pa == 0.0) continue;
        for (const Successor& x : model.row(n.s, a)) {
          if (x.prob == 0.0) continue;
          next.push_back({x.next, n.prob * pa * x.prob, n.e});
        }
      }
      if (static_cast<double>(next.size()) > cap) {
        throw ResourceError("visitation outcome enumeration exceeds the path cap",
                            static_cast<double>(next.size()));
      }
    }
    frontier = std::move(next);
    w *= spec.discount;
  }
  std::map<int, double> acc;
  for (Node& n : frontier) {
    n.e[n.s] += w;
    acc[interner.id(n.e)] += n.prob;
  }
  return {acc.begin(), acc.end()};
}

}  // namespace

double entropy(std::span<const double> p) {
  if (p.empty() || !is_probability_vector(p)) throw NumericalError("entropy: not a probability vector");
  double h = 0.0;
  for (double x : p) h -= plogp(x);
  return h;
}

OutcomeTable build_outcome_table(std::span<const TabularPolicy> policies,
                                 std::span<const std::pair<TabularMdp, double>> support,
                                 const EmbeddingSpec& spec, double cap) {
  if (support.empty()) throw ConfigError("mutual information needs a non-empty posterior support");
  const double evaluations = static_cast<double>(support.size()) * static_cast<double>(policies.size());
  if (evaluations > cap) {
    throw ResourceError("world-policy evaluations exceed the enumeration cap", evaluations);
  }
  OutcomeTable table;
  double total_weight = 0.0;
  for (const auto& [model, w] : support) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw NumericalError("posterior weights must be non-negative");
    if (model.num_states() != spec.dimension) {
      throw ConfigError("embedding dimension does not match the world");
    }
    total_weight += w;
  }
  if (std::abs(total_weight - 1.0) > 1e-9) throw NumericalError("posterior weights must sum to 1");

  OutcomeInterner interner;
  table.weights.reserve(support.size());
  table.dist.reserve(support.size());
  for (const auto& [model, w] : support) {
    table.weights.push_back(w);
    auto& row = table.dist.emplace_back();
    row.reserve(policies.size());
    for (const TabularPolicy& pi : policies) {
      if (spec.kind == EmbeddingKind::kFinalStateOneHot) {
        const auto d = state_distributions(model, pi);
        OutcomeDist od;
        for (StateId s = 0; s < model.num_states(); ++s) {
          if (d.back()[s] > 0.0) od.emplace_back(s, d.back()[s]);
        }
        row.push_back(std::move(od));
      } else {
        row.push_back(visitation_outcomes(model, pi, spec, interner, cap));
      }
    }
  }
  table.num_outcomes =
      spec.kind == EmbeddingKind::kFinalStateOneHot ? spec.dimension : interner.size();
  return table;
}

double mutual_information(const OutcomeTable& table, std::span<const int> selection, double cap) {
  if (selection.empty()) return 0.0;
  for (int i : selection) {
    if (i < 0 || static_cast<std::size_t>(i) >= table.num_policies()) {
      throw ConfigError("mutual_information: policy index out of range");
    }
  }
  // Tuples are encoded in mixed radix num_outcomes.
  const double radix = std::max(table.num_outcomes, 1);
  if (std::pow(radix, static_cast<double>(selection.size())) > 9.0e18) {
    throw ResourceError("joint outcome space too large to encode", std::pow(radix, selection.size()));
  }
  const auto R = static_cast<std::uint64_t>(radix);

  std::vector<std::pair<std::uint64_t, double>> joint;
  double conditional = 0.0;
  for (std::size_t w = 0; w < table.num_worlds(); ++w) {
    const double weight = table.weights[w];
    if (weight == 0.0) continue;
    std::vector<std::pair<std::uint64_t, double>> partial{{0, weight}};
    for (int i : selection) {
      const OutcomeDist& d = table.dist[w][i];
      conditional += weight * dist_entropy(d);
      std::vector<std::pair<std::uint64_t, double>> grown;
      grown.reserve(partial.size() * d.size());
      for (const auto& [key, p] : partial) {
        for (const auto& [id, q] : d) grown.emplace_back(key * R + static_cast<std::uint64_t>(id), p * q);
      }
      partial = std::move(grown);
      if (static_cast<double>(joint.size() + partial.size()) > cap) {
        throw ResourceError("joint outcome enumeration exceeds the cap",
                            static_cast<double>(joint.size() + partial.size()));
      }
    }
    joint.insert(joint.end(), partial.begin(), partial.end());
  }
  std::sort(joint.begin(), joint.end());
  double h = 0.0;
  for (std::size_t k = 0; k < joint.size();) {
    double mass = 0.0;
    std::size_t j = k;
    for (; j < joint.size() && joint[j].first == joint[k].first; ++j) mass += joint[j].second;
    h -= plogp(mass);
    k = j;
  }
  // Round-off can leave a tiny negative value at zero information.
  return std::max(0.0, h - conditional);
}

double exact_mutual_information(std::span<const TabularPolicy> policies,
                                std::span<const std::pair<TabularMdp, double>> support,
                                const EmbeddingSpec& spec, double cap) {
  const OutcomeTable table = build_outcome_table(policies, support, spec, cap);
  std::vector<int> all(policies.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return mutual_information(table, all, cap);
}

double joint_conditional_entropy(std::span<const std::vector<double>> factors, double cap) {
  double size = 1.0;
  for (const auto& f : factors) {
    if (f.empty() || !is_probability_vector(f)) throw NumericalError("factor is not a probability vector");
    size *= static_cast<double>(f.size());
  }
  if (size > cap) throw ResourceError("joint support exceeds the cap", size);
  std::vector<double> joint{1.0};
  for (const auto& f : factors) {
    std::vector<double> grown;
    grown.reserve(joint.size() * f.size());
    for (double p : joint) {
      for (double q : f) grown.push_back(p * q);
    }
    joint = std::move(grown);
  }
  double h = 0.0;
  for (double p : joint) h -= plogp(p);
  return h;
}

double factorized_conditional_entropy(std::span<const std::vector<double>> factors) {
  double h = 0.0;
  for (const auto& f : factors) h += entropy(f);
  return h;
}

// --- Population objectives -----------------------------------------------

double popdiv_embedding(const Embedding& candidate, const TrajectoryDataset& reference) {
  if (reference.empty()) throw ConfigError("popdiv: reference dataset is empty");
  double total = 0.0;
  for (const Embedding& r : reference.embeddings) {
    if (r.size() != candidate.size()) throw ConfigError("popdiv: embedding dimensions differ");
    for (std::size_t k = 0; k < r.size(); ++k) {
      const double d = candidate[k] - r[k];
      total += d * d;
    }
  }
  const double denom = std::max<double>(static_cast<double>(reference.size()) - 1.0, 1.0);
  return total / denom;
}

double popdiv(std::span<const Trajectory> candidates, const TrajectoryDataset& reference,
              const EmbeddingSpec& spec) {
  if (reference.empty()) throw ConfigError("popdiv: reference dataset is empty");
  if (candidates.empty()) throw ConfigError("popdiv: no candidate rollouts");
  double total = 0.0;
  for (const Trajectory& t : candidates) total += popdiv_embedding(embed(t, spec), reference);
  return total / static_cast<double>(candidates.size());
}

Embedding mean_embedding(const TabularMdp& model, const TabularPolicy& policy,
                         const EmbeddingSpec& spec) {
  if (model.num_states() != spec.dimension) throw ConfigError("embedding dimension does not match");
  const auto d = state_distributions(model, policy);
  if (spec.kind == EmbeddingKind::kFinalStateOneHot) return d.back();
  Embedding out(spec.dimension, 0.0);
  double w = 1.0;
  for (const auto& dt : d) {
    for (int s = 0; s < spec.dimension; ++s) out[s] += w * dt[s];
    w *= spec.discount;
  }
  return out;
}

double var_over_means(const TabularPolicy& candidate, std::span<const TabularPolicy> selected,
                      const EnsembleModel& ensemble, const EmbeddingSpec& spec) {
  const std::size_t E = ensemble.members.size();
  const std::size_t n = E * (selected.size() + 1);
  if (n < 2) throw ConfigError("var_over_means needs at least two (world, policy) means");
  std::vector<Embedding> means;
  means.reserve(n);
  for (const TabularMdp& m : ensemble.members) {
    for (const TabularPolicy& p : selected) means.push_back(mean_embedding(m, p, spec));
    means.push_back(mean_embedding(m, candidate, spec));
  }
  Embedding grand(spec.dimension, 0.0);
  for (const Embedding& mu : means) {
    for (int k = 0; k < spec.dimension; ++k) grand[k] += mu[k];
  }
  for (double& g : grand) g /= static_cast<double>(n);
  double total = 0.0;
  for (const Embedding& mu : means) {
    for (int k = 0; k < spec.dimension; ++k) {
      const double d = mu[k] - grand[k];
      total += d * d;
    }
  }
  return total / static_cast<double>(n - 1);
}

double infogain(const Trajectory& trajectory, const EnsembleModel& ensemble) {
  double total = 0.0;
  for (const Step& st : trajectory.steps) total += ensemble_disagreement(ensemble, st.state, st.action);
  return total;
}

double infogain(const Trajectory& trajectory, std::span<const double> sigma, int num_actions) {
  double total = 0.0;
  for (const Step& st : trajectory.steps) {
    total += sigma[static_cast<std::size_t>(st.state) * num_actions + st.action];
  }
  return total;
}

RewardTables composite_reward(const TrajectoryDataset& selected, std::span<const double> sigma,
                              double lambda, const EmbeddingSpec& spec, int horizon,
                              int num_actions) {
  if (spec.kind != EmbeddingKind::kFinalStateOneHot) {
    throw UnsupportedError("composite_reward requires the final-state embedding");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]", "algo.lambda");
  const int S = spec.dimension;
  if (sigma.size() != static_cast<std::size_t>(S) * num_actions) {
    throw ConfigError("composite_reward: sigma table has the wrong size");
  }
  std::vector<double> step(sigma.size());
  for (std::size_t k = 0; k < sigma.size(); ++k) step[k] = (1.0 - lambda) * sigma[k];
  RewardTables r = RewardTables::stationary(horizon, S, num_actions, step);
  if (selected.empty() || lambda == 0.0) return r;

  // sum_ref ||e_s - phi||^2 = sum_ref ||phi||^2 - 2 sum_ref phi_s + |D|.
  double sumsq = 0.0;
  std::vector<double> column(S, 0.0);
  for (const Embedding& phi : selected.embeddings) {
    if (phi.size() != static_cast<std::size_t>(S)) throw ConfigError("composite_reward: embedding size");
    for (int s = 0; s < S; ++s) {
      sumsq += phi[s] * phi[s];
      column[s] += phi[s];
    }
  }
  const double count = static_cast<double>(selected.size());
  const double denom = std::max(count - 1.0, 1.0);
  for (int s = 0; s < S; ++s) r.terminal[s] = lambda * (sumsq - 2.0 * column[s] + count) / denom;
  return r;
}

RewardTables composite_reward(const TrajectoryDataset& selected, const EnsembleModel& ensemble,
                              double lambda, const EmbeddingSpec& spec, int horizon) {
  const std::vector<double> sigma = disagreement_table(ensemble);
  return composite_reward(selected, sigma, lambda, spec, horizon,
                          ensemble.members.front().num_actions());
}

double expected_popdiv(const TabularMdp& model, const TabularPolicy& policy,
                       const TrajectoryDataset& reference, const EmbeddingSpec& spec) {
  if (spec.kind != EmbeddingKind::kFinalStateOneHot) {
    throw UnsupportedError("expected_popdiv is exact only for the final-state embedding");
  }
  const auto d = state_distributions(model, policy);
  double total = 0.0;
  Embedding e(spec.dimension, 0.0);
  for (StateId s = 0; s < model.num_states(); ++s) {
    if (d.back()[s] == 0.0) continue;
    e[s] = 1.0;
    total += d.back()[s] * popdiv_embedding(e, reference);
    e[s] = 0.0;
  }
  return total;
}

double expected_infogain(const TabularMdp& model, const TabularPolicy& policy,
                         std::span<const double> sigma) {
  const int A = model.num_actions();
  if (sigma.size() != static_cast<std::size_t>(model.num_states()) * A) {
    throw ConfigError("expected_infogain: sigma table has the wrong size");
  }
  const auto d = state_distributions(model, policy);
  double total = 0.0;
  for (int t = 0; t < model.horizon(); ++t) {
    for (StateId s = 0; s < model.num_states(); ++s) {
      if (d[t][s] == 0.0) continue;
      for (ActionId a = 0; a < A; ++a) {
        total += d[t][s] * policy.prob(t, s, a) * sigma[static_cast<std::size_t>(s) * A + a];
      }
    }
  }
  return total;
}

}  // namespace cascade
