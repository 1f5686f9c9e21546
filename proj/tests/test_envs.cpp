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

#include <algorithm>
#include <deque>
#include <set>
#include <vector>

#include "cascade/envs.hpp"
#include "cascade/errors.hpp"
#include "doctest.h"

using namespace cascade;

TEST_CASE("binary tree sizes and assignment counts") {
  RngStream rng(1);
  const BinaryTree t1 = make_binary_tree(1, rng);
  CHECK(t1.mdp.num_states() == 3);
  CHECK(t1.spec.num_edges() == 2);

  const BinaryTree t2 = make_binary_tree(2, rng);
  CHECK(t2.mdp.num_states() == 7);
  CHECK(t2.spec.num_edges() == 4);
  std::vector<int> perm = {0, 1, 2, 3};
  int bijections = 0;
  do ++bijections;
  while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(bijections == 24);

  const BinaryTree t3 = make_binary_tree(3, rng);
  CHECK(t3.mdp.num_states() == 15);
  std::set<StateId> leaves;
  for (int p = 0; p < 8; ++p) {
    RngStream r(0);
    leaves.insert(rollout(t3.mdp, tree_path_policy(t3.spec, p), r).final_state);
  }
  CHECK(leaves.size() == 8);
}

TEST_CASE("binary tree structure") {
  RngStream rng(2);
  const BinaryTree t = make_binary_tree(3, rng);
  CHECK(t.mdp.horizon() == 3);
  CHECK(t.mdp.is_deterministic());
  CHECK_FALSE(t.mdp.has_rewards());
  CHECK(t.mdp.initial_dist()[0] == 1.0);
  for (StateId leaf = t.spec.first_leaf(); leaf < t.spec.num_nodes(); ++leaf) {
    for (ActionId a = 0; a < 2; ++a) CHECK(t.mdp.successor(leaf, a) == leaf);
  }
  // Layers above L-1 follow the public heap order.
  for (StateId n = 0; n < t.spec.first_unknown_node(); ++n) {
    for (ActionId a = 0; a < 2; ++a) CHECK(t.mdp.successor(n, a) == 2 * n + 1 + a);
  }
  // Path p ends at the leaf the assignment gives edge p.
  for (int p = 0; p < 8; ++p) {
    RngStream r(0);
    const StateId leaf = rollout(t.mdp, tree_path_policy(t.spec, p), r).final_state;
    CHECK(leaf == t.spec.first_leaf() + t.spec.leaf_assignment[p]);
  }
}

TEST_CASE("binary tree guards") {
  RngStream rng(3);
  CHECK_THROWS_AS(make_binary_tree(0, rng), ConfigError);
  CHECK_THROWS_AS(make_binary_tree(17, rng), ConfigError);
  CHECK_THROWS_AS(make_binary_tree(2, std::vector<int>{0, 0, 1, 2}), ConfigError);
}

TEST_CASE("binary tree assignments are uniform over bijections") {
  RngStream rng(4);
  std::vector<int> hits(24, 0);
  const int n = 24000;
  for (int i = 0; i < n; ++i) {
    const BinaryTree t = make_binary_tree(2, rng);
    std::vector<int> perm = {0, 1, 2, 3};
    int rank = 0;
    do {
      if (perm == t.spec.leaf_assignment) break;
      ++rank;
    } while (std::next_permutation(perm.begin(), perm.end()));
    REQUIRE(rank < 24);
    ++hits[rank];
  }
  for (int h : hits) CHECK(std::abs(h / static_cast<double>(n) - 1.0 / 24.0) <= 0.01);
}

namespace {

// Independent flood fill over the wall grid.
int count_floor_components(const GridWorld& g) {
  std::vector<char> seen(g.rows * g.cols, 0);
  int components = 0;
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      if (g.is_wall({r, c}) || seen[r * g.cols + c]) continue;
      ++components;
      std::deque<GridCell> q{{r, c}};
      seen[r * g.cols + c] = 1;
      while (!q.empty()) {
        const GridCell x = q.front();
        q.pop_front();
        const int dr[4] = {-1, 1, 0, 0}, dc[4] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
          const GridCell n{x.row + dr[k], x.col + dc[k]};
          if (n.row < 0 || n.col < 0 || n.row >= g.rows || n.col >= g.cols) continue;
          if (g.is_wall(n) || seen[n.row * g.cols + n.col]) continue;
          seen[n.row * g.cols + n.col] = 1;
          q.push_back(n);
        }
      }
    }
  }
  return components;
}

}  // namespace

TEST_CASE("four rooms layout") {
  GridWorldSpec spec;
  spec.level_seed = 7;
  const GridWorld g = make_gridworld(spec);
  CHECK(g.rows == 11);
  CHECK(g.cols == 11);
  CHECK(g.num_rooms == 4);
  int floor = 0;
  for (char w : g.wall) floor += w == 0;
  CHECK(g.mdp.num_states() == floor + 1);
  CHECK(g.terminal == floor);
  CHECK(count_floor_components(g) == 1);
  // Room cells are equal in number and doorways number exactly four.
  std::vector<int> room_size(4, 0);
  int doorways = 0;
  for (int r = 0; r < g.rows; ++r) {
    for (int c = 0; c < g.cols; ++c) {
      if (g.is_wall({r, c})) continue;
      const int room = g.room_of_cell[r * g.cols + c];
      if (room < 0) {
        ++doorways;
      } else {
        ++room_size[room];
      }
    }
  }
  CHECK(doorways == 4);
  CHECK(std::all_of(room_size.begin(), room_size.end(), [&](int n) { return n == room_size[0]; }));
}

TEST_CASE("gridworld dynamics and rewards") {
  GridWorldSpec spec;
  spec.level_seed = 3;
  const GridWorld g = make_gridworld(spec);
  const TabularMdp& m = g.mdp;
  CHECK(m.num_actions() == 4);
  CHECK(m.is_deterministic());
  const StateId s0 = g.state_at(g.start);
  CHECK(m.initial_dist()[s0] == 1.0);
  // The start (1, 1) is a corner: up and left bump into walls.
  CHECK(m.successor(s0, kUp) == s0);
  CHECK(m.successor(s0, kLeft) == s0);
  CHECK(m.successor(s0, kDown) == g.state_at({2, 1}));
  CHECK(m.successor(s0, kRight) == g.state_at({1, 2}));
  const StateId goal = g.state_at(g.goal);
  for (ActionId a = 0; a < 4; ++a) {
    CHECK(m.successor(goal, a) == g.terminal);
    CHECK(m.successor(g.terminal, a) == g.terminal);
  }
  // Reward only on transitions entering the goal.
  for (StateId s = 0; s < m.num_states(); ++s) {
    for (ActionId a = 0; a < 4; ++a) {
      const StateId n = m.successor(s, a);
      CHECK(m.reward(s, a, n) == (n == goal ? 1.0 : 0.0));
    }
  }
  CHECK_FALSE(m.without_rewards().has_rewards());
}

TEST_CASE("gridworld generation is a pure function of the level seed") {
  GridWorldSpec a;
  a.level_seed = 42;
  const GridWorld g1 = make_gridworld(a), g2 = make_gridworld(a);
  CHECK(g1.wall == g2.wall);
  CHECK(g1.goal == g2.goal);
  CHECK(g1.render() == g2.render());
}

TEST_CASE("multi room path length") {
  GridWorldSpec spec;
  spec.family = GridFamily::kMultiRoom;
  spec.num_rooms = 4;
  spec.room_size = 5;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    spec.level_seed = seed;
    const GridWorld g = make_gridworld(spec);
    CHECK(g.num_rooms == 4);
    CHECK(g.shortest_path_to_goal() >= 3 * (spec.room_size - 1));
    CHECK(count_floor_components(g) == 1);
  }
}

TEST_CASE("gridworld guards") {
  GridWorldSpec spec;
  const GridWorld g = make_gridworld(spec);
  CHECK_THROWS_AS(g.with_goal(g.start), ConfigError);
  GridWorldSpec short_h;
  short_h.horizon = 3;
  CHECK_THROWS_AS(make_gridworld(short_h), ConfigError);
}

TEST_CASE("test-level goals stay inside the goal room") {
  GridWorldSpec spec;
  spec.level_seed = 5;
  const GridWorld g = make_gridworld(spec);
  const auto room = g.goal_room_cells();
  for (std::uint64_t s = 100; s < 110; ++s) {
    const GridWorld t = g.with_goal_seed(s);
    CHECK(t.wall == g.wall);
    CHECK(std::find(room.begin(), room.end(), t.goal) != room.end());
  }
}

TEST_CASE("prior supports") {
  GridWorldSpec spec;
  const GridWorld g = make_gridworld(spec);
  const auto dir = g.directional_support();
  const auto loc = g.local_support();
  const StateId s0 = g.state_at(g.start);
  CHECK(dir[s0 * 4 + kUp] == std::vector<StateId>{s0});
  CHECK(dir[s0 * 4 + kDown].size() == 2);
  CHECK(loc[s0 * 4 + kUp].size() == 3);
  // The true successor of every non-goal pair lies in both supports.
  const StateId goal = g.state_at(g.goal);
  for (StateId s = 0; s < g.terminal; ++s) {
    if (s == goal) continue;
    for (ActionId a = 0; a < 4; ++a) {
      const StateId n = g.mdp.successor(s, a);
      const auto& d = dir[s * 4 + a];
      CHECK(std::find(d.begin(), d.end(), n) != d.end());
    }
  }
}

TEST_CASE("random MDPs") {
  RngStream a(9), b(9);
  const TabularMdp det = make_random_mdp(5, 2, 3, a, true);
  CHECK(det.is_deterministic());
  const TabularMdp sto = make_random_mdp(5, 2, 3, b, false);
  for (StateId s = 0; s < 5; ++s) {
    for (ActionId act = 0; act < 2; ++act) {
      double sum = 0.0;
      for (const Successor& e : sto.row(s, act)) sum += e.prob;
      CHECK(std::abs(sum - 1.0) <= 1e-9);
    }
  }
  RngStream c(9);
  const TabularMdp again = make_random_mdp(5, 2, 3, c, true);
  for (StateId s = 0; s < 5; ++s) {
    for (ActionId act = 0; act < 2; ++act) CHECK(again.successor(s, act) == det.successor(s, act));
  }
  RngStream d(1);
  CHECK_THROWS_AS(make_random_mdp(0, 2, 3, d, true), ConfigError);
}
