#include <catch2/catch_amalgamated.hpp>

#include <queue>

#include "recmet/rng.hpp"
#include "recmet/tree.hpp"

using namespace recmet;

namespace {

// brute-force path search over an explicit tree, used as the oracle
std::vector<VertexId> bfs_path(const GammaTree& t, VertexId from, VertexId to) {
  const auto n = static_cast<std::size_t>(t.size());
  std::vector<VertexId> prev(n, -2);
  std::queue<VertexId> q;
  q.push(from);
  prev[from] = -1;
  while (!q.empty()) {
    const VertexId v = q.front();
    q.pop();
    if (v == to) break;
    std::vector<VertexId> nbrs = t.children(v);
    if (v != 0) nbrs.push_back(t.parent(v));
    for (const VertexId w : nbrs)
      if (prev[w] == -2) {
        prev[w] = v;
        q.push(w);
      }
  }
  std::vector<VertexId> path;
  for (VertexId v = to; v != -1; v = prev[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

GammaTree fig_tree() {
  // root 0 with children {1,4,5}; 1 has {2,3}; 5 has {6}
  return GammaTree::explicit_from_parents({-1, 0, 1, 1, 0, 0, 5});
}

}  // namespace

TEST_CASE("star tree ancestor queries") {
  const GammaTree t = GammaTree::star_n();
  CHECK(t.mrca(3, 7) == 0);
  CHECK(t.mrca(5, 5) == 5);
  CHECK(t.mrca(0, 9) == 0);
  CHECK(t.in_subtree(0, 123456));
  CHECK_FALSE(t.in_subtree(2, 3));
  CHECK(t.in_subtree(4, 4));

  const PathQuery p12 = t.path_excl_mrca(1, 2);
  CHECK(p12.q == 0);
  CHECK(p12.path == std::vector<VertexId>{1, 2});
  const PathQuery p05 = t.path_excl_mrca(0, 5);
  CHECK(p05.q == 0);
  CHECK(p05.path == std::vector<VertexId>{5});
  CHECK(t.path_excl_mrca(4, 4).path.empty());
}

TEST_CASE("explicit tree of the concrete-construction figure") {
  const GammaTree t = fig_tree();
  CHECK(t.mrca(2, 3) == 1);  // siblings under vertex 1
  CHECK(t.mrca(2, 6) == 0);
  const PathQuery p = t.path_excl_mrca(2, 5);
  CHECK(p.q == 0);
  CHECK(p.path == std::vector<VertexId>{2, 1, 5});
  CHECK(t.in_subtree(1, 3));
  CHECK_FALSE(t.in_subtree(1, 4));
  CHECK(t.height() == 2);
}

TEST_CASE("invalid vertices are rejected") {
  const GammaTree t = fig_tree();
  CHECK_THROWS_AS(t.mrca(0, 7), std::domain_error);
  CHECK_THROWS_AS(t.path_excl_mrca(-1, 2), std::domain_error);
  CHECK_THROWS_AS(GammaTree::star_n().in_subtree(-3, 1), std::domain_error);
  CHECK_THROWS_AS(GammaTree::explicit_from_parents({-1, 2, 1}), std::domain_error);
  CHECK_THROWS_AS(GammaTree::explicit_from_parents({0, 0}), std::domain_error);
}

TEST_CASE("path properties against brute force on random trees") {
  RngStream rng(2024, 7);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_index(30));
    std::vector<VertexId> parents(n);
    parents[0] = -1;
    for (int v = 1; v < n; ++v)
      parents[v] = static_cast<VertexId>(rng.uniform_index(v));
    const GammaTree t = GammaTree::explicit_from_parents(parents);
    for (int rep = 0; rep < 20; ++rep) {
      const auto i = static_cast<VertexId>(rng.uniform_index(n));
      const auto j = static_cast<VertexId>(rng.uniform_index(n));
      const VertexId q = t.mrca(i, j);
      CHECK(q == t.mrca(j, i));
      CHECK(t.in_subtree(q, i));
      CHECK(t.in_subtree(q, j));
      const PathQuery pq = t.path_excl_mrca(i, j);
      // |pi(i,j)| = depth(i) + depth(j) - 2 depth(q)
      CHECK(static_cast<std::int64_t>(pq.path.size()) ==
            t.depth(i) + t.depth(j) - 2 * t.depth(q));
      if (i != j) {
        auto oracle = bfs_path(t, i, j);
        oracle.erase(std::remove(oracle.begin(), oracle.end(), q), oracle.end());
        CHECK(pq.path == oracle);
      } else {
        CHECK(pq.path.empty());
      }
    }
  }
}

TEST_CASE("star-N2 pairing is a bijection with (1,1) at the root") {
  CHECK(pair_encode(1, 1) == 0);
  RngStream rng(5, 5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto i = static_cast<std::int64_t>(1 + rng.uniform_index(1000));
    const auto j = static_cast<std::int64_t>(1 + rng.uniform_index(1000));
    const auto [di, dj] = pair_decode(pair_encode(i, j));
    CHECK(di == i);
    CHECK(dj == j);
  }
  const GammaTree t = GammaTree::star_n2();
  CHECK(t.mrca(pair_encode(2, 3), pair_encode(4, 1)) == 0);
  CHECK(t.depth(pair_encode(9, 2)) == 1);
}
