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

// Data-parallel inner loops. Each kernel has an OpenMP version used by the
// library and a serial reference kept for tests and benchmarks. Both write
// disjoint output slots in the same arithmetic order, so their results are
// bit-identical regardless of thread count.

#pragma once

#include <span>
#include <vector>

#include "cascade/mdp.hpp"

namespace cascade::kernels {

struct BackwardInduction {
  std::vector<ActionId> actions;  // t * S + s
  std::vector<double> values;     // V_0(s)
};

BackwardInduction backward_induction(const TabularMdp& model, const RewardTables& rewards);
BackwardInduction backward_induction_serial(const TabularMdp& model, const RewardTables& rewards);

/// sigma(s, a) = (1/E) sum_e ||p_e(.|s,a) - mean(.|s,a)||^2, laid out s * A + a.
std::vector<double> disagreement_table(std::span<const TabularMdp> members);
std::vector<double> disagreement_table_serial(std::span<const TabularMdp> members);

/// Disagreement of one row.
double row_disagreement(std::span<const TabularMdp> members, StateId s, ActionId a);

}  // namespace cascade::kernels
