#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "dagsmooth/errors.hpp"
#include "dagsmooth/graph.hpp"
#include "dagsmooth/rng.hpp"
#include "dagsmooth/validation.hpp"
#include "testutil.hpp"

using namespace dagsmooth;
using testutil::make_dag;

TEST_CASE("edgeless graph: every node is root and leaf") {
  Dag d = make_dag(3, {});
  CHECK(d.node_count() == 3);
  CHECK(d.edge_count() == 0);
  for (int v = 0; v < 3; ++v) {
    CHECK(d.depth(v) == 1);
    CHECK(d.descendant_closure(v).size() == 1);
    CHECK(d.descendant_closure(v)[0] == v);
  }
  CHECK(d.leaves().size() == 3);
  CHECK(d.roots().size() == 3);
}

TEST_CASE("three-chain structure") {
  Dag d = testutil::chain(3);
  CHECK(d.depth(0) == 1);
  CHECK(d.depth(1) == 2);
  CHECK(d.depth(2) == 3);
  CHECK(d.leaves().size() == 1);
  CHECK(d.leaves()[0] == 2);
  auto c0 = d.descendant_closure(0);
  CHECK(std::vector<int>(c0.begin(), c0.end()) == std::vector<int>{0, 1, 2});
}

TEST_CASE("construction errors") {
  CHECK_THROWS_AS(make_dag(2, {{0, 1}, {1, 0}}), CycleDetected);
  CHECK_THROWS_AS(make_dag(2, {{0, 1}, {0, 1}}), DuplicateEdge);
  CHECK_THROWS_AS(make_dag(2, {{0, 0}}), DuplicateEdge);
  CHECK_THROWS_AS(make_dag(2, {{0, 2}}), IndexOutOfRange);
  CHECK_THROWS_AS(make_dag(2, {{-1, 1}}), IndexOutOfRange);
  CHECK_THROWS_AS(make_dag(3, {{0, 1}, {1, 2}, {2, 0}}), CycleDetected);
}

TEST_CASE("topological order: smallest index first") {
  Dag edgeless = make_dag(4, {});
  auto t = edgeless.topo_order();
  CHECK(std::vector<int>(t.begin(), t.end()) == std::vector<int>{0, 1, 2, 3});

  Dag chain3 = testutil::chain(3);
  auto tc = chain3.topo_order();
  CHECK(std::vector<int>(tc.begin(), tc.end()) == std::vector<int>{0, 1, 2});
}

TEST_CASE("diamond: order is a valid order and honors the tie-break") {
  std::vector<std::pair<int, int>> edges = {{0, 1}, {0, 2}, {1, 3}, {2, 3}};
  Dag d = make_dag(4, edges);
  auto t = d.topo_order();
  std::vector<int> got(t.begin(), t.end());

  // Enumerate all valid topological orders by brute force.
  std::vector<int> perm = {0, 1, 2, 3};
  std::vector<std::vector<int>> valid;
  do {
    std::vector<int> pos(4);
    for (int i = 0; i < 4; ++i) pos[static_cast<size_t>(perm[static_cast<size_t>(i)])] = i;
    bool ok = true;
    for (auto [u, v] : edges) ok = ok && pos[static_cast<size_t>(u)] < pos[static_cast<size_t>(v)];
    if (ok) valid.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));

  CHECK(std::find(valid.begin(), valid.end(), got) != valid.end());
  CHECK(got == std::vector<int>{0, 1, 2, 3});

  auto part = d.depth_partition();
  REQUIRE(part.size() == 3);
  CHECK(part[0] == std::vector<int>{0});
  CHECK(part[1] == std::vector<int>{1, 2});
  CHECK(part[2] == std::vector<int>{3});
}

TEST_CASE("depth partition basics") {
  CHECK(make_dag(3, {}).depth_partition() == std::vector<std::vector<int>>{{0, 1, 2}});
  CHECK(testutil::chain(3).depth_partition() == std::vector<std::vector<int>>{{0}, {1}, {2}});
}

TEST_CASE("closures match breadth-first reachability on random graphs") {
  for (int rep = 0; rep < 20; ++rep) {
    Dag d = random_dag(derive_seed(42, static_cast<std::uint64_t>(rep)), 20, 200);
    for (int v = 0; v < d.node_count(); ++v) {
      auto c = d.descendant_closure(v);
      CHECK(std::vector<int>(c.begin(), c.end()) == testutil::bfs_closure(d, v));
    }
  }
}

TEST_CASE("closure nesting: w in C_v implies C_w subset of C_v") {
  Dag d = random_dag(7, 30, 60);
  for (int v = 0; v < d.node_count(); ++v) {
    auto cv = d.descendant_closure(v);
    for (int w : cv) {
      auto cw = d.descendant_closure(w);
      CHECK(std::includes(cv.begin(), cv.end(), cw.begin(), cw.end()));
    }
  }
}

TEST_CASE("topological order is a fixed point of rebuilding") {
  Dag a = random_dag(11, 30, 120);
  std::vector<std::pair<int, int>> edges(a.edges().begin(), a.edges().end());
  Dag b = Dag::build(a.node_count(), edges);
  CHECK(std::vector<int>(a.topo_order().begin(), a.topo_order().end()) ==
        std::vector<int>(b.topo_order().begin(), b.topo_order().end()));
}

TEST_CASE("depths satisfy the longest-path recursion") {
  Dag d = random_dag(13, 40, 150);
  for (int v = 0; v < d.node_count(); ++v) {
    if (d.parents(v).empty()) {
      CHECK(d.depth(v) == 1);
    } else {
      int want = 0;
      for (int u : d.parents(v)) want = std::max(want, d.depth(u) + 1);
      CHECK(d.depth(v) == want);
    }
  }
}

TEST_CASE("zero-node graph is legal everywhere") {
  Dag d = make_dag(0, {});
  CHECK(d.node_count() == 0);
  CHECK(d.topo_order().empty());
  CHECK(d.depth_partition().empty());
  CHECK(d.leaves().empty());
  CHECK_THROWS_AS(d.depth(0), IndexOutOfRange);
}

TEST_CASE("truth assignment upward closure is an edge scan") {
  Dag d = testutil::chain(3);
  TruthAssignment t;
  t.nonnull = {1, 1, 0};
  CHECK(t.upward_closed(d));
  t.nonnull = {0, 1, 0};
  CHECK(!t.upward_closed(d));
  t.nonnull = {1, 1, 1};
  CHECK(t.upward_closed(d));
  CHECK(t.signal_count() == 3);
}
