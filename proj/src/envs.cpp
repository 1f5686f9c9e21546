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

#include "cascade/envs.hpp"

#include <algorithm>
#include <deque>
#include <string>

#include "cascade/errors.hpp"

namespace cascade {

// --- Binary trees --------------------------------------------------------

int BinaryTreeSpec::edge_of(StateId node, ActionId action) const {
  const int first = first_unknown_node();
  if (node < first || node >= first_leaf()) return -1;
  return 2 * (node - first) + action;
}

BinaryTree make_binary_tree(int depth, std::vector<int> leaf_assignment) {
  if (depth < 1 || depth > 16) throw ConfigError("binary tree depth must lie in [1, 16]", "env.depth");
  BinaryTreeSpec spec;
  spec.depth = depth;
  const int edges = spec.num_edges();
  if (leaf_assignment.size() != static_cast<std::size_t>(edges)) {
    throw ConfigError("leaf assignment must cover all 2^L edges");
  }
  std::vector<char> used(edges, 0);
  for (int leaf : leaf_assignment) {
    if (leaf < 0 || leaf >= edges || used[leaf]) {
      throw ConfigError("leaf assignment is not a bijection onto the leaves");
    }
    used[leaf] = 1;
  }
  spec.leaf_assignment = std::move(leaf_assignment);

  const int S = spec.num_nodes();
  ModelShape shape;
  shape.num_states = S;
  shape.num_actions = 2;
  shape.horizon = depth;
  shape.discount = 1.0;
  shape.initial_dist.assign(S, 0.0);
  shape.initial_dist[0] = 1.0;

  TabularMdp::Rows rows(static_cast<std::size_t>(S) * 2);
  for (StateId n = 0; n < S; ++n) {
    for (ActionId a = 0; a < 2; ++a) {
      StateId next;
      if (n >= spec.first_leaf()) {
        next = n;
      } else if (n >= spec.first_unknown_node()) {
        next = spec.first_leaf() + spec.leaf_assignment[spec.edge_of(n, a)];
      } else {
        next = BinaryTreeSpec::fixed_child(n, a);
      }
      rows[static_cast<std::size_t>(n) * 2 + a] = {{next, 1.0}};
    }
  }
  return {TabularMdp(std::move(shape), std::move(rows)), std::move(spec)};
}

BinaryTree make_binary_tree(int depth, RngStream& rng) {
  if (depth < 1 || depth > 16) throw ConfigError("binary tree depth must lie in [1, 16]", "env.depth");
  std::vector<int> assignment(static_cast<std::size_t>(1) << depth);
  for (std::size_t i = 0; i < assignment.size(); ++i) assignment[i] = static_cast<int>(i);
  rng.shuffle(assignment);
  BinaryTree tree = make_binary_tree(depth, std::move(assignment));
  tree.spec.seed = rng.seed();
  return tree;
}

TabularPolicy tree_path_policy(const BinaryTreeSpec& spec, int path) {
  if (path < 0 || path >= spec.num_edges()) throw ConfigError("tree path index out of range");
  std::vector<ActionId> actions(spec.depth);
  for (int l = 0; l < spec.depth; ++l) actions[l] = (path >> (spec.depth - 1 - l)) & 1;
  return TabularPolicy::open_loop(spec.num_nodes(), 2, actions);
}

std::vector<StateId> tree_internal_nodes(const BinaryTreeSpec& spec) {
  std::vector<StateId> out;
  for (StateId n = 0; n < spec.first_leaf(); ++n) out.push_back(n);
  return out;
}

// --- Gridworlds ----------------------------------------------------------

namespace {

constexpr int kDr[4] = {-1, 1, 0, 0};
constexpr int kDc[4] = {0, 0, -1, 1};

struct Layout {
  int rows = 0;
  int cols = 0;
  std::vector<char> wall;
  std::vector<int> room;
  int num_rooms = 0;
  int goal_room = 0;
  GridCell start;
};

Layout four_rooms_layout(const GridWorldSpec& spec, RngStream& rng) {
  const int n = spec.grid_size;
  if (n < 7 || n % 2 == 0) {
    throw ConfigError("four_rooms grid_size must be odd and at least 7", "env.grid_size");
  }
  Layout L;
  L.rows = L.cols = n;
  L.wall.assign(static_cast<std::size_t>(n) * n, 0);
  L.room.assign(static_cast<std::size_t>(n) * n, -1);
  const int m = n / 2;
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const bool border = r == 0 || c == 0 || r == n - 1 || c == n - 1;
      if (border || r == m || c == m) {
        L.wall[r * n + c] = 1;
      } else {
        L.room[r * n + c] = (r > m ? 2 : 0) + (c > m ? 1 : 0);
      }
    }
  }
  // One doorway in each of the four inner wall segments.
  const int span = m - 1;
  L.wall[(1 + static_cast<int>(rng.uniform_index(span))) * n + m] = 0;
  L.wall[(m + 1 + static_cast<int>(rng.uniform_index(span))) * n + m] = 0;
  L.wall[m * n + 1 + static_cast<int>(rng.uniform_index(span))] = 0;
  L.wall[m * n + m + 1 + static_cast<int>(rng.uniform_index(span))] = 0;
  L.num_rooms = 4;
  L.goal_room = 3;
  L.start = {1, 1};
  return L;
}

Layout multi_room_layout(const GridWorldSpec& spec, RngStream& rng) {
  const int k = spec.num_rooms;
  const int w = spec.room_size;
  if (k < 2) throw ConfigError("multi_room needs at least 2 rooms", "env.num_rooms");
  if (w < 2) throw ConfigError("multi_room room_size must be at least 2", "env.room_size");
  Layout L;
  L.rows = w + 2;
  L.cols = k * (w + 1) + 1;
  L.wall.assign(static_cast<std::size_t>(L.rows) * L.cols, 1);
  L.room.assign(static_cast<std::size_t>(L.rows) * L.cols, -1);
  for (int i = 0; i < k; ++i) {
    const int c0 = 1 + i * (w + 1);
    for (int r = 1; r <= w; ++r) {
      for (int c = c0; c < c0 + w; ++c) {
        L.wall[r * L.cols + c] = 0;
        L.room[r * L.cols + c] = i;
      }
    }
    if (i + 1 < k) {
      const int door_row = 1 + static_cast<int>(rng.uniform_index(w));
      L.wall[door_row * L.cols + c0 + w] = 0;
    }
  }
  L.num_rooms = k;
  L.goal_room = k - 1;
  L.start = {1, 1};
  return L;
}

std::vector<int> bfs_distances(const std::vector<char>& wall, int rows, int cols, GridCell from) {
  std::vector<int> dist(static_cast<std::size_t>(rows) * cols, -1);
  std::deque<GridCell> q;
  dist[from.row * cols + from.col] = 0;
  q.push_back(from);
  while (!q.empty()) {
    GridCell c = q.front();
    q.pop_front();
    for (int a = 0; a < 4; ++a) {
      GridCell n{c.row + kDr[a], c.col + kDc[a]};
      if (n.row < 0 || n.col < 0 || n.row >= rows || n.col >= cols) continue;
      const int idx = n.row * cols + n.col;
      if (wall[idx] || dist[idx] >= 0) continue;
      dist[idx] = dist[c.row * cols + c.col] + 1;
      q.push_back(n);
    }
  }
  return dist;
}

GridCell draw_goal(const std::vector<int>& room, int rows, int cols, int goal_room, GridCell start,
                   RngStream& rng) {
  std::vector<GridCell> cells;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      GridCell cell{r, c};
      if (room[r * cols + c] == goal_room && !(cell == start)) cells.push_back(cell);
    }
  }
  if (cells.empty()) throw ConfigError("goal room has no free cell");
  return cells[rng.uniform_index(cells.size())];
}

GridWorld assemble(const GridWorldSpec& spec, const Layout& L, GridCell goal) {
  GridWorld g;
  g.spec = spec;
  g.spec.goal = goal;
  g.rows = L.rows;
  g.cols = L.cols;
  g.wall = L.wall;
  g.room_of_cell = L.room;
  g.num_rooms = L.num_rooms;
  g.start = L.start;
  g.goal = goal;
  if (spec.horizon < 1) throw ConfigError("gridworld horizon must be >= 1", "env.horizon");
  if (goal.row < 0 || goal.col < 0 || goal.row >= g.rows || goal.col >= g.cols ||
      g.is_wall(goal)) {
    throw ConfigError("gridworld goal must be a floor cell", "env.goal");
  }
  if (goal == g.start) throw ConfigError("gridworld goal coincides with the start cell", "env.goal");

  g.state_of_cell.assign(g.wall.size(), -1);
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      if (!g.wall[r * g.cols + c]) {
        g.state_of_cell[r * g.cols + c] = static_cast<StateId>(g.cell_of_state.size());
        g.cell_of_state.push_back({r, c});
      }
    }
  }
  g.terminal = static_cast<StateId>(g.cell_of_state.size());
  const int S = g.terminal + 1;

  const int dist = g.shortest_path_to_goal();
  if (dist < 0) throw ConfigError("gridworld goal is unreachable from the start", "env.goal");
  if (dist > spec.horizon) {
    throw ConfigError("gridworld goal is not reachable within the horizon", "env.horizon");
  }

  ModelShape shape;
  shape.num_states = S;
  shape.num_actions = 4;
  shape.horizon = spec.horizon;
  shape.discount = 1.0;
  shape.initial_dist.assign(S, 0.0);
  shape.initial_dist[g.state_at(g.start)] = 1.0;

  const StateId goal_state = g.state_at(goal);
  TabularMdp::Rows rows(static_cast<std::size_t>(S) * 4);
  TabularMdp::RewardRows rewards(rows.size());
  for (StateId s = 0; s < S; ++s) {
    for (int a = 0; a < 4; ++a) {
      StateId next;
      if (s == g.terminal || s == goal_state) {
        next = g.terminal;
      } else {
        const GridCell c = g.cell_of_state[s];
        const GridCell n{c.row + kDr[a], c.col + kDc[a]};
        next = g.is_wall(n) ? s : g.state_at(n);
      }
      rows[static_cast<std::size_t>(s) * 4 + a] = {{next, 1.0}};
      rewards[static_cast<std::size_t>(s) * 4 + a] = {next == goal_state ? 1.0 : 0.0};
    }
  }
  g.mdp = TabularMdp(std::move(shape), std::move(rows), std::move(rewards));
  return g;
}

Layout make_layout(const GridWorldSpec& spec, RngStream& rng) {
  return spec.family == GridFamily::kFourRooms ? four_rooms_layout(spec, rng)
                                               : multi_room_layout(spec, rng);
}

}  // namespace

GridWorld make_gridworld(const GridWorldSpec& spec) {
  RngStream rng(spec.level_seed, 0x6c61796f7574ULL);
  Layout L = make_layout(spec, rng);
  GridCell goal = spec.goal ? *spec.goal : draw_goal(L.room, L.rows, L.cols, L.goal_room, L.start, rng);
  return assemble(spec, L, goal);
}

std::vector<GridCell> GridWorld::goal_room_cells() const {
  const int goal_room = room_of_cell[goal.row * cols + goal.col];
  std::vector<GridCell> out;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (room_of_cell[r * cols + c] == goal_room && goal_room >= 0) out.push_back({r, c});
    }
  }
  return out;
}

int GridWorld::shortest_path_to_goal() const {
  const auto dist = bfs_distances(wall, rows, cols, start);
  return dist[goal.row * cols + goal.col];
}

GridWorld GridWorld::with_goal(GridCell new_goal) const {
  Layout L;
  L.rows = rows;
  L.cols = cols;
  L.wall = wall;
  L.room = room_of_cell;
  L.num_rooms = num_rooms;
  L.start = start;
  GridWorldSpec s = spec;
  s.goal = new_goal;
  return assemble(s, L, new_goal);
}

GridWorld GridWorld::with_goal_seed(std::uint64_t seed) const {
  // The goal room is fixed by the family, not by the current goal.
  const int goal_room = spec.family == GridFamily::kFourRooms ? 3 : num_rooms - 1;
  RngStream rng(seed, 0x676f616cULL);
  return with_goal(draw_goal(room_of_cell, rows, cols, goal_room, start, rng));
}

std::vector<std::vector<StateId>> GridWorld::local_support() const {
  const int S = terminal + 1;
  std::vector<std::vector<StateId>> out(static_cast<std::size_t>(S) * 4);
  for (StateId s = 0; s < S; ++s) {
    std::vector<StateId> row{s};
    if (s != terminal) {
      const GridCell c = cell_of_state[s];
      for (int a = 0; a < 4; ++a) {
        const GridCell n{c.row + kDr[a], c.col + kDc[a]};
        if (!is_wall(n)) row.push_back(state_at(n));
      }
    }
    for (int a = 0; a < 4; ++a) out[static_cast<std::size_t>(s) * 4 + a] = row;
  }
  return out;
}

std::vector<std::vector<StateId>> GridWorld::directional_support() const {
  const int S = terminal + 1;
  std::vector<std::vector<StateId>> out(static_cast<std::size_t>(S) * 4);
  for (StateId s = 0; s < S; ++s) {
    for (int a = 0; a < 4; ++a) {
      std::vector<StateId>& row = out[static_cast<std::size_t>(s) * 4 + a];
      row.push_back(s);
      if (s == terminal) continue;
      const GridCell c = cell_of_state[s];
      const GridCell n{c.row + kDr[a], c.col + kDc[a]};
      if (!is_wall(n)) row.push_back(state_at(n));
    }
  }
  return out;
}

std::string GridWorld::render() const {
  std::string out;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      GridCell cell{r, c};
      char ch = is_wall(cell) ? '#' : '.';
      if (cell == start) ch = 'S';
      if (cell == goal) ch = 'G';
      out.push_back(ch);
    }
    out.push_back('\n');
  }
  return out;
}

// --- Random MDPs ---------------------------------------------------------

TabularMdp make_random_mdp(int num_states, int num_actions, int horizon, RngStream& rng,
                           bool deterministic) {
  if (num_states < 1 || num_actions < 1) throw ConfigError("random MDP sizes must be >= 1");
  if (horizon < 1) throw ConfigError("random MDP horizon must be >= 1");
  ModelShape shape;
  shape.num_states = num_states;
  shape.num_actions = num_actions;
  shape.horizon = horizon;
  shape.initial_dist.assign(num_states, 1.0 / num_states);
  TabularMdp::Rows rows(static_cast<std::size_t>(num_states) * num_actions);
  for (auto& row : rows) {
    if (deterministic) {
      row = {{static_cast<StateId>(rng.uniform_index(num_states)), 1.0}};
      continue;
    }
    std::vector<double> g(num_states);
    double total = 0.0;
    for (auto& x : g) {
      x = rng.gamma(1.0);
      total += x;
    }
    for (int k = 0; k < num_states; ++k) row.push_back({k, g[k] / total});
  }
  return TabularMdp(std::move(shape), std::move(rows));
}

}  // namespace cascade
