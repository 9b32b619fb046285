#pragma once

// Combinatorics of the structural tree Gamma: words, ancestry, paths and
// common ancestors. Star-shaped infinite trees are kept symbolic; explicit
// finite trees are backed by a parent array with genealogy-respecting ids
// (parent id < child id, root is vertex 0 with parent -1).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace recmet {

using VertexId = std::int64_t;

enum class TreeKind { ExplicitFinite, StarN, StarN2 };

// q is the most recent common ancestor; path is pi(i,j): the vertices of the
// unique i-j path including both ends, with q removed. Empty when i == j.
struct PathQuery {
  VertexId q = 0;
  std::vector<VertexId> path;
};

// Bijection (Z+)^2 -> N used for star-N2 vertex ids, with (1,1) -> 0.
inline VertexId pair_encode(std::int64_t i, std::int64_t j) {
  if (i < 1 || j < 1) throw std::domain_error("pair_encode: indices start at 1");
  const std::int64_t a = i - 1, b = j - 1;
  return a >= b ? a * a + a + b : a + b * b;  // Szudzik pairing
}

inline std::pair<std::int64_t, std::int64_t> pair_decode(VertexId v) {
  if (v < 0) throw std::domain_error("pair_decode: negative id");
  const auto s = static_cast<std::int64_t>(std::sqrt(static_cast<double>(v)));
  std::int64_t r = s;
  while (r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  const std::int64_t rem = v - r * r;
  if (rem < r) return {rem + 1, r + 1};
  return {r + 1, rem - r + 1};
}

class GammaTree {
 public:
  static GammaTree star_n() { return GammaTree(TreeKind::StarN); }
  static GammaTree star_n2() { return GammaTree(TreeKind::StarN2); }

  static GammaTree explicit_from_parents(std::vector<VertexId> parents) {
    if (parents.empty() || parents[0] != -1)
      throw std::domain_error("explicit tree: vertex 0 must be the root (parent -1)");
    for (std::size_t v = 1; v < parents.size(); ++v) {
      if (parents[v] < 0 || parents[v] >= static_cast<VertexId>(v))
        throw std::domain_error(
            "explicit tree: parent id must be smaller than child id (vertex " +
            std::to_string(v) + ")");
    }
    GammaTree t(TreeKind::ExplicitFinite);
    t.parents_ = std::move(parents);
    t.children_.resize(t.parents_.size());
    t.depth_.assign(t.parents_.size(), 0);
    for (std::size_t v = 1; v < t.parents_.size(); ++v) {
      t.children_[t.parents_[v]].push_back(static_cast<VertexId>(v));
      t.depth_[v] = t.depth_[t.parents_[v]] + 1;
    }
    t.height_ = t.depth_.empty() ? 0 : *std::max_element(t.depth_.begin(), t.depth_.end());
    return t;
  }

  TreeKind kind() const { return kind_; }
  bool is_star() const { return kind_ != TreeKind::ExplicitFinite; }

  // Finite vertex count, or -1 for the symbolic stars.
  std::int64_t size() const {
    return is_star() ? -1 : static_cast<std::int64_t>(parents_.size());
  }

  // All presets have height 1 (stars) or the explicit tree's height.
  std::int64_t height() const { return is_star() ? 1 : height_; }
  bool finite_height() const { return true; }

  bool valid_vertex(VertexId v) const {
    if (is_star()) return v >= 0;
    return v >= 0 && v < static_cast<VertexId>(parents_.size());
  }

  VertexId parent(VertexId v) const {
    check(v);
    if (v == 0) return -1;
    return is_star() ? 0 : parents_[v];
  }

  std::int64_t depth(VertexId v) const {
    check(v);
    if (is_star()) return v == 0 ? 0 : 1;
    return depth_[v];
  }

  const std::vector<VertexId>& children(VertexId v) const {
    if (is_star())
      throw std::domain_error("children: not materialized for star trees");
    check(v);
    return children_[v];
  }

  VertexId mrca(VertexId i, VertexId j) const {
    check(i);
    check(j);
    if (is_star()) return i == j ? i : 0;
    while (i != j) {
      if (i > j)
        i = parents_[i];
      else
        j = parents_[j];
    }
    return i;
  }

  // true iff j is in Gamma_i (i is an ancestor of j, or i == j).
  bool in_subtree(VertexId i, VertexId j) const {
    check(i);
    check(j);
    if (i == 0 || i == j) return true;
    if (is_star()) return false;
    while (j > i) j = parents_[j];
    return j == i;
  }

  PathQuery path_excl_mrca(VertexId i, VertexId j) const {
    check(i);
    check(j);
    PathQuery out;
    if (i == j) {
      out.q = i;
      return out;
    }
    if (is_star()) {
      out.q = 0;
      if (i != 0) out.path.push_back(i);
      if (j != 0) out.path.push_back(j);
      return out;
    }
    const VertexId q = mrca(i, j);
    out.q = q;
    std::vector<VertexId> up;
    for (VertexId v = i; v != q; v = parents_[v]) up.push_back(v);
    std::vector<VertexId> down;
    for (VertexId v = j; v != q; v = parents_[v]) down.push_back(v);
    out.path = std::move(up);
    out.path.insert(out.path.end(), down.rbegin(), down.rend());
    return out;
  }

 private:
  explicit GammaTree(TreeKind k) : kind_(k) {}

  void check(VertexId v) const {
    if (!valid_vertex(v))
      throw std::domain_error("invalid Gamma vertex id " + std::to_string(v));
  }

  TreeKind kind_;
  std::vector<VertexId> parents_;
  std::vector<std::vector<VertexId>> children_;
  std::vector<std::int64_t> depth_;
  std::int64_t height_ = 0;
};

}  // namespace recmet
