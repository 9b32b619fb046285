#pragma once

// The recursion core: a lazily expanded, memoized Theta-trie. Every node
// theta carries one frozen (R,S,L) realization and one frozen exit point, so
// all iteration depths and all sampled points share the same randomness (the
// coupling). Spaces are never materialized; only addresses and on-demand
// distances exist.
//
// Distances follow the two gluing formulas: for points falling in subspaces
// i and j of a node, the connecting path contributes L(i,j), the two
// endpoint subspaces contribute rescaled heights of the continuing points,
// interior path subspaces contribute rescaled heights of their exit points,
// and an ancestor endpoint contributes a rescaled pair distance between the
// continuation and the exit point of the ancestor subspace.
//
// A trie is single-writer: queries may expand memoized state, so concurrent
// use of one trie needs external exclusion. Replicate-level parallelism uses
// one trie per replicate; tries move freely between threads.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "recmet/models.hpp"
#include "recmet/rng.hpp"

namespace recmet {

struct ResourceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EngineOptions {
  int max_depth = 64;
  double resolution_floor = 0.0;  // prune branches once (R_theta)^alpha < floor
  std::uint64_t max_nodes = 4000000;
  int height_depth = 16;  // depth of the height samples in big_subspace_count
};

enum class Measure { Mu, MuBar };

struct PointAddress {
  std::vector<std::uint32_t> letters;
  Measure tag = Measure::Mu;
  bool terminated = false;  // ended on a remainder atom
};

struct DistanceMatrixSample {
  std::uint32_t k = 0;
  int depth = 0;
  std::vector<double> entries;  // (k+1) x (k+1), row 0 is the root
  std::vector<PointAddress> addresses;
  double at(std::uint32_t i, std::uint32_t j) const {
    return entries[i * (k + 1) + j];
  }
};

struct CutLine {
  double epsilon = 0.0;
  std::vector<std::vector<std::uint32_t>> nodes;  // crossing words
  std::vector<double> r_mass;
  std::vector<double> s_mass;
  std::vector<bool> is_remainder;
  // Nodes still above epsilon when the budget ran out (partial result).
  std::vector<std::vector<std::uint32_t>> pending;
  std::vector<double> pending_r_mass;
  bool budget_exhausted = false;
};

class ThetaTrie {
 public:
  ThetaTrie(BranchLaw law, std::uint64_t seed, EngineOptions opt = {})
      : law_(std::move(law)), seed_(seed), opt_(opt) {
    root_ = std::make_unique<Node>();
    root_->hash = hash_combine(0x7265636d65746b31ull, seed_);
    root_->scale_alpha = 1.0;
    root_->mass_r = 1.0;
    root_->mass_s = 1.0;
    realize(*root_);
  }

  ThetaTrie(const ThetaTrie&) = delete;
  ThetaTrie& operator=(const ThetaTrie&) = delete;

  const BranchLaw& law() const { return law_; }
  const EngineOptions& options() const { return opt_; }
  std::uint64_t node_count() const { return node_count_; }
  const BranchParams& root_params() const { return root_->params; }

  // A word of length <= depth; letter t is drawn among the realized slots of
  // the node at prefix t with weights s (mu) or r (mu_bar). Landing on the
  // remainder atom terminates the address; dropping below the resolution
  // floor stops it (the tail would be pruned by every evaluation anyway).
  PointAddress sample_point(int depth, Measure measure, RngStream& rng) {
    check_depth(depth);
    PointAddress p;
    p.tag = measure;
    Node* nd = root_.get();
    for (int t = 0; t < depth; ++t) {
      const std::uint32_t slot = measure == Measure::Mu
                                     ? nd->params.pick_s(rng)
                                     : nd->params.pick_r(rng);
      p.letters.push_back(slot);
      if (nd->params.has_rem() && slot == nd->params.rem_slot()) {
        p.terminated = true;
        break;
      }
      if (below_floor(*nd, slot)) break;
      nd = &child(*nd, slot);
    }
    return p;
  }

  // Distance from the root to p, truncated at recursion depth m (Y_m).
  double root_distance(const PointAddress& p, int m) {
    check_depth(m);
    return height(*root_, p.letters, 0, m);
  }

  // Distance between two points of the same trie, truncated at depth m (D_m).
  double pair_distance(const PointAddress& a, const PointAddress& b, int m) {
    check_depth(m);
    return pair_local(*root_, View{&a.letters, 0}, View{&b.letters, 0}, m);
  }

  // k independent mu-points on the shared trie; row/col 0 is the root. The
  // result is an exact finite metric because all crossings reuse the same
  // frozen exit points.
  DistanceMatrixSample distance_matrix(std::uint32_t k, int m, RngStream& rng) {
    if (k < 1) throw std::domain_error("distance_matrix: k must be >= 1");
    check_depth(m);
    DistanceMatrixSample out;
    out.k = k;
    out.depth = m;
    out.addresses.reserve(k);
    for (std::uint32_t i = 0; i < k; ++i)
      out.addresses.push_back(sample_point(m, Measure::Mu, rng));
    out.entries.assign(static_cast<std::size_t>(k + 1) * (k + 1), 0.0);
    for (std::uint32_t i = 0; i < k; ++i) {
      const double h = root_distance(out.addresses[i], m);
      out.entries[0 * (k + 1) + (i + 1)] = h;
      out.entries[(i + 1) * (k + 1) + 0] = h;
    }
    for (std::uint32_t i = 0; i < k; ++i)
      for (std::uint32_t j = i + 1; j < k; ++j) {
        const double d = pair_distance(out.addresses[i], out.addresses[j], m);
        out.entries[(i + 1) * (k + 1) + (j + 1)] = d;
        out.entries[(j + 1) * (k + 1) + (i + 1)] = d;
      }
    return out;
  }

  // Fragmentation stopping line: words whose r-mass product first drops
  // below epsilon. Remainder atoms always count as crossing nodes with their
  // lumped mass. Exceeding the node budget flags a partial result.
  CutLine cut_line(double epsilon, std::uint64_t max_nodes) {
    if (!(epsilon > 0.0)) throw std::domain_error("cut_line: epsilon must be > 0");
    CutLine out;
    out.epsilon = epsilon;
    struct Item {
      Node* nd;
      std::vector<std::uint32_t> word;
    };
    std::vector<Item> queue;
    queue.push_back({root_.get(), {}});
    std::size_t qi = 0;
    while (qi < queue.size()) {
      Item item = std::move(queue[qi++]);
      Node& nd = *item.nd;
      const std::uint32_t n = nd.params.size();
      for (std::uint32_t slot = 0; slot < n; ++slot) {
        const double cm = nd.mass_r * nd.params.r(slot);
        std::vector<std::uint32_t> word = item.word;
        word.push_back(slot);
        if (cm < epsilon) {
          out.nodes.push_back(std::move(word));
          out.r_mass.push_back(cm);
          out.s_mass.push_back(nd.mass_s * nd.params.s(slot));
          out.is_remainder.push_back(false);
        } else {
          if (node_count_ >= std::min<std::uint64_t>(max_nodes, opt_.max_nodes)) {
            out.budget_exhausted = true;
            out.pending.push_back(std::move(word));
            out.pending_r_mass.push_back(cm);
            continue;
          }
          queue.push_back({&child(nd, slot), std::move(word)});
        }
      }
      if (nd.params.has_rem() && nd.params.rem_r() > 0.0) {
        std::vector<std::uint32_t> word = item.word;
        word.push_back(nd.params.rem_slot());
        out.nodes.push_back(std::move(word));
        out.r_mass.push_back(nd.mass_r * nd.params.rem_r());
        out.s_mass.push_back(nd.mass_s * nd.params.rem_s());
        out.is_remainder.push_back(true);
      }
    }
    return out;
  }

  // Diagnostic N^b_eps: how many cut-line subspaces have estimated scaled
  // height above eps/2. Heights are estimated by the max over sampled
  // points, a lower-biased stand-in for the essential supremum.
  std::uint64_t big_subspace_count(const CutLine& line, double epsilon,
                                   int height_samples, RngStream& rng) {
    std::uint64_t count = 0;
    for (std::size_t idx = 0; idx < line.nodes.size(); ++idx) {
      if (line.is_remainder[idx]) continue;  // lumped atoms are points
      const double scale = std::pow(line.r_mass[idx], law_.alpha());
      Node* nd = root_.get();
      bool pruned = false;
      for (const std::uint32_t slot : line.nodes[idx]) {
        if (below_floor(*nd, slot)) {
          pruned = true;
          break;
        }
        nd = &child(*nd, slot);
      }
      if (pruned) continue;
      double h = 0.0;
      for (int s = 0; s < height_samples; ++s) {
        std::vector<std::uint32_t> letters;
        Node* cur = nd;
        for (int t = 0; t < opt_.height_depth; ++t) {
          const std::uint32_t slot = cur->params.pick_s(rng);
          letters.push_back(slot);
          if (cur->params.has_rem() && slot == cur->params.rem_slot()) break;
          if (below_floor(*cur, slot)) break;
          cur = &child(*cur, slot);
        }
        h = std::max(h, height(*nd, letters, 0, opt_.height_depth));
      }
      if (scale * h > epsilon / 2.0) ++count;
    }
    return count;
  }

 private:
  struct Node {
    BranchParams params;
    double scale_alpha = 1.0;  // (R_theta)^alpha
    double mass_r = 1.0;       // R_theta
    double mass_s = 1.0;       // S_theta
    std::uint64_t hash = 0;
    RngStream exit_rng;
    std::vector<std::uint32_t> exit_letters;
    bool exit_stopped = false;
    std::unordered_map<std::uint32_t, std::unique_ptr<Node>> kids;
    std::unordered_map<int, double> exit_height_memo;
  };

  struct View {
    const std::vector<std::uint32_t>* letters;
    std::size_t off;
    bool exhausted() const { return off >= letters->size(); }
    std::uint32_t head() const { return (*letters)[off]; }
    View next() const { return {letters, off + 1}; }
  };

  static constexpr std::uint64_t kPurposeRealize = 0x7265616c697a6531ull;
  static constexpr std::uint64_t kPurposeExit = 0x657869747061746aull;

  void check_depth(int m) const {
    if (m < 0) throw std::domain_error("depth must be >= 0");
    if (m > opt_.max_depth)
      throw ResourceError("depth " + std::to_string(m) +
                          " exceeds configured max_depth " +
                          std::to_string(opt_.max_depth));
  }

  void realize(Node& nd) {
    RngStream rng(seed_, hash_combine(nd.hash, kPurposeRealize));
    nd.params = law_.sample(rng);
    nd.exit_rng = RngStream(seed_, hash_combine(nd.hash, kPurposeExit));
  }

  bool below_floor(const Node& nd, std::uint32_t slot) const {
    if (opt_.resolution_floor <= 0.0) return false;
    return nd.scale_alpha * nd.params.r_alpha(slot) < opt_.resolution_floor;
  }

  Node& child(Node& nd, std::uint32_t slot) {
    auto it = nd.kids.find(slot);
    if (it != nd.kids.end()) return *it->second;
    if (nd.params.has_rem() && slot == nd.params.rem_slot())
      throw std::logic_error("remainder atom has no subspace");
    if (slot >= nd.params.size())
      throw std::domain_error("unrealized vertex beyond truncation");
    if (++node_count_ > opt_.max_nodes)
      throw ResourceError("node budget exceeded (" +
                          std::to_string(opt_.max_nodes) + ")");
    auto kid = std::make_unique<Node>();
    kid->hash = hash_combine(nd.hash, static_cast<std::uint64_t>(slot) + 1);
    kid->scale_alpha = nd.scale_alpha * nd.params.r_alpha(slot);
    kid->mass_r = nd.mass_r * nd.params.r(slot);
    kid->mass_s = nd.mass_s * nd.params.s(slot);
    realize(*kid);
    Node& ref = *kid;
    nd.kids.emplace(slot, std::move(kid));
    return ref;
  }

  // Extends the frozen exit path of nd to `len` letters (mu-weighted),
  // stopping at remainder atoms or below the resolution floor.
  void extend_exit(Node& nd, std::size_t len) {
    if (nd.exit_stopped) return;
    Node* cur = &nd;
    for (const std::uint32_t slot : nd.exit_letters) cur = &child(*cur, slot);
    while (nd.exit_letters.size() < len) {
      const std::uint32_t slot = cur->params.pick_s(nd.exit_rng);
      nd.exit_letters.push_back(slot);
      if (cur->params.has_rem() && slot == cur->params.rem_slot()) {
        nd.exit_stopped = true;
        return;
      }
      if (below_floor(*cur, slot)) {
        nd.exit_stopped = true;
        return;
      }
      cur = &child(*cur, slot);
    }
  }

  double exit_height(Node& nd, int depth) {
    if (depth <= 0) return 0.0;
    const auto it = nd.exit_height_memo.find(depth);
    if (it != nd.exit_height_memo.end()) return it->second;
    extend_exit(nd, static_cast<std::size_t>(depth));
    const double h = height(nd, nd.exit_letters, 0, depth);
    nd.exit_height_memo.emplace(depth, h);
    return h;
  }

  // Height (root distance) of a point inside nd's space, local units:
  //   Y_m = L(root, J) + sum over root-to-J path vertices k of R_k^alpha *
  //         (continuation height if k == J, exit-point height otherwise).
  double height(Node& nd, const std::vector<std::uint32_t>& letters,
                std::size_t off, int depth) {
    if (depth <= 0 || off >= letters.size()) return 0.0;
    const BranchParams& par = nd.params;
    const std::uint32_t j = letters[off];
    double acc = par.L(0, j);
    const bool j_is_rem = par.has_rem() && j == par.rem_slot();
    if (!j_is_rem && !below_floor(nd, j))
      acc += par.r_alpha(j) * height(child(nd, j), letters, off + 1, depth - 1);
    // strict ancestors of j contribute their exit points
    for (std::int32_t v = par.parent_of(j); v >= 0;
         v = par.parent_of(static_cast<std::uint32_t>(v))) {
      const auto k = static_cast<std::uint32_t>(v);
      if (!below_floor(nd, k))
        acc += par.r_alpha(k) * exit_height(child(nd, k), depth - 1);
    }
    return acc;
  }

  // Distance between two points of nd's space, local units (D_m).
  double pair_local(Node& nd, View a, View b, int depth) {
    if (depth <= 0) return 0.0;
    if (a.exhausted() && b.exhausted()) return 0.0;
    if (a.exhausted()) return height(nd, *b.letters, b.off, depth);
    if (b.exhausted()) return height(nd, *a.letters, a.off, depth);
    const BranchParams& par = nd.params;
    const std::uint32_t i = a.head();
    const std::uint32_t j = b.head();
    const bool i_rem = par.has_rem() && i == par.rem_slot();
    const bool j_rem = par.has_rem() && j == par.rem_slot();
    if (i == j) {
      if (i_rem) return 0.0;  // both at the lumped atom
      if (below_floor(nd, i)) return 0.0;
      return par.r_alpha(i) * pair_local(child(nd, i), a.next(), b.next(), depth - 1);
    }
    const std::uint32_t q = par.mrca_slot(i, j);
    double acc = par.L(i, j);
    // non-ancestor endpoints carry the continuing points' heights
    if (q != i && !i_rem && !below_floor(nd, i))
      acc += par.r_alpha(i) * height(child(nd, i), *a.letters, a.off + 1, depth - 1);
    if (q != j && !j_rem && !below_floor(nd, j))
      acc += par.r_alpha(j) * height(child(nd, j), *b.letters, b.off + 1, depth - 1);
    // interior path vertices (strictly between an endpoint and q) carry their
    // exit points; stars have none
    if (!par.is_star()) {
      for (std::uint32_t e : {i, j}) {
        if (e == q) continue;
        for (std::int32_t v = par.parent_of(e);
             v >= 0 && v != static_cast<std::int32_t>(q);
             v = par.parent_of(static_cast<std::uint32_t>(v))) {
          const auto k = static_cast<std::uint32_t>(v);
          if (!below_floor(nd, k))
            acc += par.r_alpha(k) * exit_height(child(nd, k), depth - 1);
        }
      }
    }
    // Ancestor endpoint: its subspace carries a pair distance between the
    // continuing point and the subspace's exit point (the D-type term).
    if (q == i && !i_rem && !below_floor(nd, i)) {
      Node& ci = child(nd, i);
      extend_exit(ci, static_cast<std::size_t>(depth - 1));
      acc += par.r_alpha(i) *
             pair_local(ci, a.next(), View{&ci.exit_letters, 0}, depth - 1);
    } else if (q == j && !j_rem && !below_floor(nd, j)) {
      Node& cj = child(nd, j);
      extend_exit(cj, static_cast<std::size_t>(depth - 1));
      acc += par.r_alpha(j) *
             pair_local(cj, View{&cj.exit_letters, 0}, b.next(), depth - 1);
    }
    return acc;
  }

  BranchLaw law_;
  std::uint64_t seed_;
  EngineOptions opt_;
  std::unique_ptr<Node> root_;
  std::uint64_t node_count_ = 1;
};

}  // namespace recmet
