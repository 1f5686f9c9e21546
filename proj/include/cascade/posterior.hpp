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
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "cascade/mdp.hpp"
#include "cascade/rng.hpp"

namespace cascade {

enum class DataOrigin { kReal, kFake };

struct Transition {
  StateId state;
  ActionId action;
  StateId next;
  int deployment = 0;
  DataOrigin origin = DataOrigin::kReal;
};

/// Transition list plus per-row counts split by origin.
///
/// Counts are maintained incrementally and always equal a recount of the
/// list. Rows keep their successors sorted by state index so that every
/// derived quantity is independent of insertion order.
class ExperienceBuffer {
 public:
  struct SuccessorCount {
    StateId next;
    int real = 0;
    int fake = 0;
  };

  ExperienceBuffer() = default;
  ExperienceBuffer(int num_states, int num_actions);

  int num_states() const noexcept { return num_states_; }
  int num_actions() const noexcept { return num_actions_; }

  void add(const Transition& t);
  /// Appends all H transitions of `trajectory`.
  void add_trajectory(const Trajectory& trajectory, int deployment, DataOrigin origin);
  /// Drops every fake transition; real counts are untouched.
  void clear_fake();

  int real_count(StateId s, ActionId a) const { return real_[index(s, a)]; }
  int fake_count(StateId s, ActionId a) const { return fake_[index(s, a)]; }
  int count(StateId s, ActionId a) const { return real_count(s, a) + fake_count(s, a); }
  std::span<const SuccessorCount> successors(StateId s, ActionId a) const { return rows_[index(s, a)]; }

  const std::vector<Transition>& transitions() const noexcept { return log_; }
  std::size_t size() const noexcept { return log_.size(); }
  std::size_t num_fake() const noexcept { return num_fake_; }

  /// One record per line: `s a s' deployment origin`.
  void write_log(std::ostream& out) const;

 private:
  std::size_t index(StateId s, ActionId a) const;

  int num_states_ = 0;
  int num_actions_ = 0;
  std::vector<Transition> log_;
  std::vector<std::vector<SuccessorCount>> rows_;
  std::vector<int> real_;
  std::vector<int> fake_;
  std::size_t num_fake_ = 0;
};

/// A distribution over transition models given an experience buffer.
///
/// Every update bumps `version()`, so callers can assert that no update
/// happened across a span of work.
class ModelPosterior {
 public:
  explicit ModelPosterior(ModelShape shape);
  virtual ~ModelPosterior() = default;

  virtual std::unique_ptr<ModelPosterior> clone() const = 0;
  /// Thompson draw.
  virtual TabularMdp sample(RngStream& rng) const = 0;
  /// Posterior predictive model.
  virtual TabularMdp mean() const = 0;
  /// Whether fake transitions condition the model (as opposed to only
  /// entering the counts that drive bonuses).
  virtual bool conditions_on_fake() const noexcept = 0;

  /// Adds transitions to the buffer and conditions on them.
  void update(std::span<const Transition> transitions);
  void update(const Trajectory& trajectory, int deployment, DataOrigin origin);
  void clear_fake();

  const ExperienceBuffer& buffer() const noexcept { return buffer_; }
  const ModelShape& shape() const noexcept { return shape_; }
  std::uint64_t version() const noexcept { return version_; }

 protected:
  /// Validates a transition before it enters the buffer.
  virtual void observe(const Transition& t);

  ModelShape shape_;
  ExperienceBuffer buffer_;
  std::uint64_t version_ = 0;
};

/// Independent symmetric Dirichlet per (s, a) row.
///
/// By default each row's support is every state. A restricted support
/// (per row) shrinks the prior to those successors; observed successors
/// outside it are added to the row, so no data is ever assigned zero mass.
class DirichletPosterior final : public ModelPosterior {
 public:
  using Support = std::vector<std::vector<StateId>>;

  DirichletPosterior(ModelShape shape, double prior_alpha,
                     std::optional<Support> support = std::nullopt);

  std::unique_ptr<ModelPosterior> clone() const override;
  TabularMdp sample(RngStream& rng) const override;
  TabularMdp mean() const override;
  bool conditions_on_fake() const noexcept override { return true; }

  double prior_alpha() const noexcept { return alpha_; }
  /// Posterior concentration of (s, a, next): alpha + N(s, a, next) when
  /// `next` is in the row's support, N(s, a, next) otherwise.
  double concentration(StateId s, ActionId a, StateId next) const;

 private:
  /// (successor, concentration) pairs of a row, sorted by successor.
  std::vector<std::pair<StateId, double>> row_params(StateId s, ActionId a) const;

  double alpha_;
  std::optional<Support> support_;
};

/// Exact posterior over binary trees with an unknown leaf bijection.
///
/// Real transitions reveal edges; fake transitions only enter the buffer
/// counts. When all but one edge are known the last one is inferred.
class TreePosterior final : public ModelPosterior {
 public:
  explicit TreePosterior(int depth);
  /// Posterior with some edges already revealed (`edges[e]` is a leaf
  /// offset or -1). Throws InvalidStateError when two edges share a leaf.
  static TreePosterior from_edges(int depth, std::vector<int> edges);

  std::unique_ptr<ModelPosterior> clone() const override;
  TabularMdp sample(RngStream& rng) const override;
  TabularMdp mean() const override;
  bool conditions_on_fake() const noexcept override { return false; }

  int depth() const noexcept { return depth_; }
  /// Leaf offset of edge `e`, or -1 while it is undetermined.
  int edge_leaf(int edge) const { return edges_[edge]; }
  const std::vector<int>& edges() const noexcept { return edges_; }
  int num_determined() const noexcept { return known_; }
  bool collapsed() const noexcept { return known_ == static_cast<int>(edges_.size()); }
  /// Number of bijections consistent with the observed edges.
  double num_consistent_models() const;

 protected:
  void observe(const Transition& t) override;

 private:
  void assign(int edge, int leaf);
  void apply_closure();
  void check_consistent() const;
  TabularMdp build(const std::vector<int>& assignment) const;

  int depth_;
  std::vector<int> edges_;      // edge -> leaf offset or -1
  std::vector<int> leaf_owner_;  // leaf offset -> edge or -1
  int known_ = 0;
};

/// A snapshot of posterior draws used for disagreement.
struct EnsembleModel {
  std::vector<TabularMdp> members;
  std::uint64_t sample_seed = 0;

  int size() const noexcept { return static_cast<int>(members.size()); }
};

/// Draws `size` members, member e from `rng.child(e)`.
EnsembleModel make_ensemble(const ModelPosterior& posterior, int size, const RngStream& rng);

/// sigma(s, a) = (1/E) sum_e ||p_e(.|s,a) - p_bar(.|s,a)||^2.
double ensemble_disagreement(const EnsembleModel& ensemble, StateId s, ActionId a);
/// sigma for every pair, indexed s * A + a.
std::vector<double> disagreement_table(const EnsembleModel& ensemble);

/// Bonus table indexed s * A + a: 2 * depth_scale where N(s, a) = 0,
/// min(1, 1 / sqrt(N)) otherwise, with N counting real and fake data.
std::vector<double> fake_counts_and_bonus(const ExperienceBuffer& buffer, int depth_scale);

}  // namespace cascade
