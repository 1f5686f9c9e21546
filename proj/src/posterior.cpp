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

#include "cascade/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "cascade/envs.hpp"
#include "cascade/errors.hpp"
#include "cascade/kernels.hpp"

namespace cascade {

// --- ExperienceBuffer ----------------------------------------------------

ExperienceBuffer::ExperienceBuffer(int num_states, int num_actions)
    : num_states_(num_states), num_actions_(num_actions) {
  if (num_states < 1 || num_actions < 1) throw ConfigError("ExperienceBuffer: sizes must be positive");
  const std::size_t n = static_cast<std::size_t>(num_states) * num_actions;
  rows_.resize(n);
  real_.assign(n, 0);
  fake_.assign(n, 0);
}

std::size_t ExperienceBuffer::index(StateId s, ActionId a) const {
  if (s < 0 || s >= num_states_ || a < 0 || a >= num_actions_) {
    throw ConfigError("ExperienceBuffer: state or action out of range");
  }
  return static_cast<std::size_t>(s) * num_actions_ + a;
}

void ExperienceBuffer::add(const Transition& t) {
  const std::size_t r = index(t.state, t.action);
  if (t.next < 0 || t.next >= num_states_) throw ConfigError("ExperienceBuffer: successor out of range");
  auto& row = rows_[r];
  auto it = std::lower_bound(row.begin(), row.end(), t.next,
                             [](const SuccessorCount& c, StateId n) { return c.next < n; });
  if (it == row.end() || it->next != t.next) it = row.insert(it, SuccessorCount{t.next});
  if (t.origin == DataOrigin::kReal) {
    ++it->real;
    ++real_[r];
  } else {
    ++it->fake;
    ++fake_[r];
    ++num_fake_;
  }
  log_.push_back(t);
}

void ExperienceBuffer::add_trajectory(const Trajectory& trajectory, int deployment,
                                      DataOrigin origin) {
  for (std::size_t t = 0; t < trajectory.steps.size(); ++t) {
    add({trajectory.steps[t].state, trajectory.steps[t].action, trajectory.next_state(t), deployment,
         origin});
  }
}

void ExperienceBuffer::clear_fake() {
  if (num_fake_ == 0) return;
  std::erase_if(log_, [](const Transition& t) { return t.origin == DataOrigin::kFake; });
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (fake_[r] == 0) continue;
    fake_[r] = 0;
    auto& row = rows_[r];
    for (auto& c : row) c.fake = 0;
    std::erase_if(row, [](const SuccessorCount& c) { return c.real == 0; });
  }
  num_fake_ = 0;
}

void ExperienceBuffer::write_log(std::ostream& out) const {
  for (const Transition& t : log_) {
    out << t.state << ' ' << t.action << ' ' << t.next << ' ' << t.deployment << ' '
        << (t.origin == DataOrigin::kReal ? "real" : "fake") << '\n';
  }
}

// --- ModelPosterior ------------------------------------------------------

ModelPosterior::ModelPosterior(ModelShape shape)
    : shape_(std::move(shape)), buffer_(shape_.num_states, shape_.num_actions) {}

void ModelPosterior::observe(const Transition&) {}

void ModelPosterior::update(std::span<const Transition> transitions) {
  if (transitions.empty()) return;
  for (const Transition& t : transitions) {
    observe(t);
    buffer_.add(t);
  }
  ++version_;
}

void ModelPosterior::update(const Trajectory& trajectory, int deployment, DataOrigin origin) {
  std::vector<Transition> ts;
  ts.reserve(trajectory.steps.size());
  for (std::size_t t = 0; t < trajectory.steps.size(); ++t) {
    ts.push_back({trajectory.steps[t].state, trajectory.steps[t].action, trajectory.next_state(t),
                  deployment, origin});
  }
  update(ts);
}

void ModelPosterior::clear_fake() {
  if (buffer_.num_fake() == 0) return;
  buffer_.clear_fake();
  ++version_;
}

// --- DirichletPosterior --------------------------------------------------

DirichletPosterior::DirichletPosterior(ModelShape shape, double prior_alpha,
                                       std::optional<Support> support)
    : ModelPosterior(std::move(shape)), alpha_(prior_alpha), support_(std::move(support)) {
  if (!(prior_alpha > 0.0) || !std::isfinite(prior_alpha)) {
    throw ConfigError("prior_alpha must be positive", "algo.prior_alpha");
  }
  if (support_) {
    const int S = shape_.num_states;
    if (support_->size() != static_cast<std::size_t>(S) * shape_.num_actions) {
      throw ConfigError("Dirichlet support must list one row per (s, a)");
    }
    for (auto& row : *support_) {
      if (row.empty()) throw ConfigError("Dirichlet support rows must be non-empty");
      for (StateId x : row) {
        if (x < 0 || x >= S) throw ConfigError("Dirichlet support state out of range");
      }
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
    }
  }
}

std::unique_ptr<ModelPosterior> DirichletPosterior::clone() const {
  return std::make_unique<DirichletPosterior>(*this);
}

std::vector<std::pair<StateId, double>> DirichletPosterior::row_params(StateId s, ActionId a) const {
  const int S = shape_.num_states;
  const auto counts = buffer_.successors(s, a);
  std::vector<std::pair<StateId, double>> out;
  if (!support_) {
    out.reserve(S);
    std::size_t k = 0;
    for (StateId x = 0; x < S; ++x) {
      double c = alpha_;
      if (k < counts.size() && counts[k].next == x) {
        c += counts[k].real + counts[k].fake;
        ++k;
      }
      out.emplace_back(x, c);
    }
    return out;
  }
  // Merge the sorted prior support with the sorted observed successors.
  const auto& prior = (*support_)[static_cast<std::size_t>(s) * shape_.num_actions + a];
  std::size_t i = 0, k = 0;
  while (i < prior.size() || k < counts.size()) {
    const StateId pi = i < prior.size() ? prior[i] : std::numeric_limits<StateId>::max();
    const StateId ck = k < counts.size() ? counts[k].next : std::numeric_limits<StateId>::max();
    if (pi == ck) {
      out.emplace_back(pi, alpha_ + counts[k].real + counts[k].fake);
      ++i;
      ++k;
    } else if (pi < ck) {
      out.emplace_back(pi, alpha_);
      ++i;
    } else {
      out.emplace_back(ck, static_cast<double>(counts[k].real + counts[k].fake));
      ++k;
    }
  }
  return out;
}

double DirichletPosterior::concentration(StateId s, ActionId a, StateId next) const {
  for (const auto& [x, c] : row_params(s, a)) {
    if (x == next) return c;
  }
  return 0.0;
}

TabularMdp DirichletPosterior::sample(RngStream& rng) const {
  const int S = shape_.num_states;
  const int A = shape_.num_actions;
  TabularMdp::Rows rows(static_cast<std::size_t>(S) * A);
  for (StateId s = 0; s < S; ++s) {
    for (ActionId a = 0; a < A; ++a) {
      auto params = row_params(s, a);
      auto& row = rows[static_cast<std::size_t>(s) * A + a];
      row.reserve(params.size());
      double total = 0.0;
      for (const auto& [x, c] : params) {
        // Tiny shapes can underflow to zero; keep every entry strictly positive.
        const double g = std::max(rng.gamma(c), std::numeric_limits<double>::min());
        row.push_back({x, g});
        total += g;
      }
      for (Successor& e : row) e.prob /= total;
    }
  }
  return TabularMdp(shape_, std::move(rows));
}

TabularMdp DirichletPosterior::mean() const {
  const int S = shape_.num_states;
  const int A = shape_.num_actions;
  TabularMdp::Rows rows(static_cast<std::size_t>(S) * A);
  for (StateId s = 0; s < S; ++s) {
    for (ActionId a = 0; a < A; ++a) {
      auto params = row_params(s, a);
      double total = 0.0;
      for (const auto& p : params) total += p.second;
      auto& row = rows[static_cast<std::size_t>(s) * A + a];
      row.reserve(params.size());
      for (const auto& [x, c] : params) row.push_back({x, c / total});
    }
  }
  return TabularMdp(shape_, std::move(rows));
}

// --- TreePosterior -------------------------------------------------------

namespace {

ModelShape tree_shape(int depth) {
  if (depth < 1 || depth > 16) throw ConfigError("binary tree depth must lie in [1, 16]", "env.depth");
  ModelShape shape;
  shape.num_states = (1 << (depth + 1)) - 1;
  shape.num_actions = 2;
  shape.horizon = depth;
  shape.initial_dist.assign(shape.num_states, 0.0);
  shape.initial_dist[0] = 1.0;
  return shape;
}

}  // namespace

TreePosterior::TreePosterior(int depth)
    : ModelPosterior(tree_shape(depth)),
      depth_(depth),
      edges_(static_cast<std::size_t>(1) << depth, -1),
      leaf_owner_(static_cast<std::size_t>(1) << depth, -1) {}

TreePosterior TreePosterior::from_edges(int depth, std::vector<int> edges) {
  TreePosterior p(depth);
  if (edges.size() != p.edges_.size()) throw ConfigError("from_edges: expected 2^L entries");
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const int leaf = edges[e];
    if (leaf < 0) continue;
    if (leaf >= static_cast<int>(edges.size())) throw InvalidStateError("from_edges: leaf out of range");
    if (p.leaf_owner_[leaf] >= 0) throw InvalidStateError("from_edges: two edges claim one leaf");
    p.assign(static_cast<int>(e), leaf);
  }
  p.apply_closure();
  return p;
}

std::unique_ptr<ModelPosterior> TreePosterior::clone() const {
  return std::make_unique<TreePosterior>(*this);
}

void TreePosterior::assign(int edge, int leaf) {
  edges_[edge] = leaf;
  leaf_owner_[leaf] = edge;
  ++known_;
}

void TreePosterior::apply_closure() {
  const int n = static_cast<int>(edges_.size());
  if (known_ != n - 1) return;
  const int edge = static_cast<int>(std::find(edges_.begin(), edges_.end(), -1) - edges_.begin());
  const int leaf =
      static_cast<int>(std::find(leaf_owner_.begin(), leaf_owner_.end(), -1) - leaf_owner_.begin());
  assign(edge, leaf);
}

void TreePosterior::observe(const Transition& t) {
  // Only real data moves beliefs; fake data is bookkeeping for bonuses.
  if (t.origin == DataOrigin::kFake) return;
  BinaryTreeSpec spec;
  spec.depth = depth_;
  const StateId n = t.state;
  if (n < 0 || n >= spec.num_nodes() || t.action < 0 || t.action > 1 || t.next < 0 ||
      t.next >= spec.num_nodes()) {
    throw ConfigError("TreePosterior: transition index out of range");
  }
  if (n >= spec.first_leaf()) {
    if (t.next != n) throw DataCorruptionError("TreePosterior: leaves must be absorbing");
    return;
  }
  if (n < spec.first_unknown_node()) {
    if (t.next != BinaryTreeSpec::fixed_child(n, t.action)) {
      throw DataCorruptionError("TreePosterior: transition contradicts the known upper layers");
    }
    return;
  }
  if (t.next < spec.first_leaf()) throw DataCorruptionError("TreePosterior: edge must end on a leaf");
  const int edge = spec.edge_of(n, t.action);
  const int leaf = t.next - spec.first_leaf();
  if (edges_[edge] >= 0) {
    if (edges_[edge] != leaf) throw DataCorruptionError("TreePosterior: edge observed with two leaves");
    return;
  }
  if (leaf_owner_[leaf] >= 0) throw DataCorruptionError("TreePosterior: leaf reached by two edges");
  assign(edge, leaf);
  apply_closure();
}

void TreePosterior::check_consistent() const {
  std::vector<char> seen(leaf_owner_.size(), 0);
  for (int leaf : edges_) {
    if (leaf < 0) continue;
    if (seen[leaf]) throw InvalidStateError("TreePosterior: contradictory observations");
    seen[leaf] = 1;
  }
}

double TreePosterior::num_consistent_models() const {
  double count = 1.0;
  for (int k = 2; k <= static_cast<int>(edges_.size()) - known_; ++k) count *= k;
  return count;
}

TabularMdp TreePosterior::build(const std::vector<int>& assignment) const {
  return make_binary_tree(depth_, assignment).mdp;
}

TabularMdp TreePosterior::sample(RngStream& rng) const {
  check_consistent();
  std::vector<int> free_leaves;
  for (std::size_t leaf = 0; leaf < leaf_owner_.size(); ++leaf) {
    if (leaf_owner_[leaf] < 0) free_leaves.push_back(static_cast<int>(leaf));
  }
  rng.shuffle(free_leaves);
  std::vector<int> assignment = edges_;
  std::size_t k = 0;
  for (int& leaf : assignment) {
    if (leaf < 0) leaf = free_leaves[k++];
  }
  return build(assignment);
}

TabularMdp TreePosterior::mean() const {
  check_consistent();
  BinaryTreeSpec spec;
  spec.depth = depth_;
  std::vector<int> free_leaves;
  for (std::size_t leaf = 0; leaf < leaf_owner_.size(); ++leaf) {
    if (leaf_owner_[leaf] < 0) free_leaves.push_back(static_cast<int>(leaf));
  }
  const int S = spec.num_nodes();
  TabularMdp::Rows rows(static_cast<std::size_t>(S) * 2);
  for (StateId n = 0; n < S; ++n) {
    for (ActionId a = 0; a < 2; ++a) {
      auto& row = rows[static_cast<std::size_t>(n) * 2 + a];
      if (n >= spec.first_leaf()) {
        row = {{n, 1.0}};
      } else if (n < spec.first_unknown_node()) {
        row = {{BinaryTreeSpec::fixed_child(n, a), 1.0}};
      } else if (const int leaf = edges_[spec.edge_of(n, a)]; leaf >= 0) {
        row = {{spec.first_leaf() + leaf, 1.0}};
      } else {
        // Marginal of a uniform bijection: uniform over unclaimed leaves.
        const double p = 1.0 / static_cast<double>(free_leaves.size());
        for (int l : free_leaves) row.push_back({spec.first_leaf() + l, p});
      }
    }
  }
  return TabularMdp(shape_, std::move(rows));
}

// --- Ensembles and bonuses -----------------------------------------------

EnsembleModel make_ensemble(const ModelPosterior& posterior, int size, const RngStream& rng) {
  if (size < 1) throw ConfigError("ensemble size must be >= 1", "algo.ensemble_size");
  EnsembleModel ens;
  ens.sample_seed = mix64(rng.seed() ^ mix64(rng.stream_id()));
  ens.members.reserve(size);
  for (int e = 0; e < size; ++e) {
    RngStream member_rng = rng.child(static_cast<std::uint64_t>(e));
    ens.members.push_back(posterior.sample(member_rng));
  }
  return ens;
}

double ensemble_disagreement(const EnsembleModel& ensemble, StateId s, ActionId a) {
  if (ensemble.size() < 2) throw ConfigError("ensemble disagreement needs at least two members");
  const TabularMdp& m0 = ensemble.members.front();
  if (!m0.in_range(s) || !m0.action_in_range(a)) throw ConfigError("disagreement: pair out of range");
  return kernels::row_disagreement(ensemble.members, s, a);
}

std::vector<double> disagreement_table(const EnsembleModel& ensemble) {
  return kernels::disagreement_table(ensemble.members);
}

std::vector<double> fake_counts_and_bonus(const ExperienceBuffer& buffer, int depth_scale) {
  const int S = buffer.num_states();
  const int A = buffer.num_actions();
  std::vector<double> bonus(static_cast<std::size_t>(S) * A);
  for (StateId s = 0; s < S; ++s) {
    for (ActionId a = 0; a < A; ++a) {
      const int n = buffer.count(s, a);
      bonus[static_cast<std::size_t>(s) * A + a] =
          n == 0 ? 2.0 * depth_scale : std::min(1.0, 1.0 / std::sqrt(static_cast<double>(n)));
    }
  }
  return bonus;
}

}  // namespace cascade
