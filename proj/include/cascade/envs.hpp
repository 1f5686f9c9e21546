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
#include <optional>
#include <string>
#include <vector>

#include "cascade/mdp.hpp"
#include "cascade/rng.hpp"

namespace cascade {

// --- Binary trees --------------------------------------------------------
//
// Nodes are numbered in heap order: node n has children 2n+1 (action 0)
// and 2n+2 (action 1); layer l holds nodes [2^l - 1, 2^(l+1) - 2]. All
// layers above L-1 are wired this way and are public knowledge. The 2^L
// edges leaving layer L-1 (edge e = 2 * (n - first node of layer L-1) + a)
// are mapped onto the 2^L leaves by an unknown bijection.

struct BinaryTreeSpec {
  int depth = 1;
  std::vector<int> leaf_assignment;  // edge -> leaf offset in [0, 2^L)
  std::uint64_t seed = 0;

  int num_edges() const { return 1 << depth; }
  int num_nodes() const { return (1 << (depth + 1)) - 1; }
  int first_leaf() const { return (1 << depth) - 1; }
  int first_unknown_node() const { return (1 << (depth - 1)) - 1; }
  /// Edge index of (node, action) at layer L-1, or -1 for other pairs.
  int edge_of(StateId node, ActionId action) const;
  StateId edge_node(int edge) const { return first_unknown_node() + edge / 2; }
  ActionId edge_action(int edge) const { return edge % 2; }
  /// Known child of an internal node above layer L-1.
  static StateId fixed_child(StateId node, ActionId action) { return 2 * node + 1 + action; }
};

struct BinaryTree {
  TabularMdp mdp;
  BinaryTreeSpec spec;
};

/// Deterministic tree of the given depth; leaves are absorbing, H = depth.
BinaryTree make_binary_tree(int depth, RngStream& rng);
/// Tree with an explicit leaf assignment (must be a bijection).
BinaryTree make_binary_tree(int depth, std::vector<int> leaf_assignment);

/// Open-loop policy following path `path` (bits of `path`, most significant
/// first, are the actions at layers 0..L-1). Path p ends on edge p.
TabularPolicy tree_path_policy(const BinaryTreeSpec& spec, int path);
/// All non-leaf nodes; the states whose action matters.
std::vector<StateId> tree_internal_nodes(const BinaryTreeSpec& spec);

// --- Gridworlds ----------------------------------------------------------

enum class GridFamily { kFourRooms, kMultiRoom };

struct GridCell {
  int row = 0;
  int col = 0;
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

struct GridWorldSpec {
  GridFamily family = GridFamily::kFourRooms;
  int grid_size = 11;  // four_rooms: side length including the outer wall
  int num_rooms = 4;   // multi_room
  int room_size = 5;   // multi_room: interior side length of each room
  std::uint64_t level_seed = 0;
  /// Goal cell; when absent it is drawn from the level seed inside the
  /// room farthest from the start.
  std::optional<GridCell> goal;
  int horizon = 100;
};

enum Move : ActionId { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

/// A generated level: wall layout, state indexing and the MDP.
///
/// States are the floor cells in row-major order followed by one absorbing
/// terminal state. Any action taken on the goal cell moves to the terminal;
/// transitions entering the goal carry reward 1.
struct GridWorld {
  GridWorldSpec spec;
  int rows = 0;
  int cols = 0;
  std::vector<char> wall;         // rows * cols
  std::vector<int> room_of_cell;  // room index per cell, -1 for walls and doorways
  int num_rooms = 0;
  std::vector<StateId> state_of_cell;  // -1 for walls
  std::vector<GridCell> cell_of_state;  // floor states only
  GridCell start;
  GridCell goal;
  StateId terminal = 0;
  TabularMdp mdp;

  int num_floor_cells() const { return static_cast<int>(cell_of_state.size()); }
  StateId state_at(GridCell c) const { return state_of_cell[c.row * cols + c.col]; }
  bool is_wall(GridCell c) const { return wall[c.row * cols + c.col] != 0; }
  /// Floor cells of the goal room (where generated goals are placed).
  std::vector<GridCell> goal_room_cells() const;
  /// Shortest path length (in moves) from start to goal, -1 if unreachable.
  int shortest_path_to_goal() const;
  /// Same layout and start with the goal moved to `goal`.
  GridWorld with_goal(GridCell goal) const;
  /// Same layout with a goal drawn from `seed` inside the goal room.
  GridWorld with_goal_seed(std::uint64_t seed) const;
  /// Per-(s, a) successor sets for a locality prior: the cell itself and
  /// its floor neighbours (the terminal maps to itself). Indexed s * 4 + a.
  std::vector<std::vector<StateId>> local_support() const;
  /// Per-(s, a) successor sets for a directional prior: the cell itself and
  /// the floor neighbour in the action's direction, if any. The layout is
  /// public; whether a move succeeds is not. Indexed s * 4 + a.
  std::vector<std::vector<StateId>> directional_support() const;
  /// ASCII picture: '#' wall, '.' floor, 'S' start, 'G' goal.
  std::string render() const;
};

/// Builds a level. The layout is a pure function of the spec (the level
/// seed drives doorway placement and, when unset, the goal).
GridWorld make_gridworld(const GridWorldSpec& spec);

// --- Random MDPs ---------------------------------------------------------

/// Rows from a symmetric Dirichlet(1) (stochastic) or a uniformly chosen
/// successor (deterministic); uniform initial distribution.
TabularMdp make_random_mdp(int num_states, int num_actions, int horizon, RngStream& rng,
                           bool deterministic);

}  // namespace cascade
