#pragma once

// Model laws tau producing (R, S, L, alpha) realizations: the beta-stable
// looptree, the beta-stable tree (Brownian CRT at beta = 2), a deterministic
// finite demo, and user-supplied explicit tables; plus the Monte Carlo
// checkers for the contraction / added-length / height hypotheses.
//
// A realization keeps one slot per kept Gamma-vertex, in per-node child
// order (slot 0 is the Gamma-root). Everything truncated away is lumped into
// a remainder atom carried as the extra slot size(); it behaves as a marked
// point glued at its own attachment position and has no subspace.
//
// BranchLaw is immutable and shareable across threads; sampling takes an
// exclusive RngStream per call site. Estimator runs parallelize over
// replicates with per-replicate streams.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "recmet/rng.hpp"
#include "recmet/samplers.hpp"
#include "recmet/stats.hpp"
#include "recmet/tree.hpp"

namespace recmet {

enum class ModelKind { Looptree, StableTree, BrownianCrt, FiniteDemo, Explicit };

struct TruncationPolicy {
  double eps_tail = 1e-3;
  std::uint32_t max_children = 20000;
};

// Attachment geometry of the block, enough to evaluate L lazily.
struct BlockLoop {
  double circumference = 0.0;
  std::vector<double> pos;  // positions on the unit circle, one per slot
  double pos_rem = 0.0;
};
struct BlockInterval {
  double length = 0.0;
  std::vector<double> pos;  // spine positions in [0,1), one per slot
  double pos_rem = 0.0;
};
struct BlockDense {
  std::uint32_t n = 0;
  std::vector<double> d;  // row-major symmetric matrix, no remainder column
};
using BlockGeometry = std::variant<BlockLoop, BlockInterval, BlockDense>;

class BranchParams {
 public:
  BranchParams() = default;
  BranchParams(double alpha, std::vector<double> r, std::vector<double> s,
               double rem_r, double rem_s, BlockGeometry block,
               std::shared_ptr<const std::vector<VertexId>> parents)
      : alpha_(alpha),
        rem_r_(rem_r),
        rem_s_(rem_s),
        block_(std::move(block)),
        parents_(std::move(parents)) {
    cum_r_.resize(r.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) cum_r_[i] = (acc += r[i]);
    if (!s.empty()) {
      cum_s_.resize(s.size());
      acc = 0.0;
      for (std::size_t i = 0; i < s.size(); ++i) cum_s_[i] = (acc += s[i]);
    }
  }

  std::uint32_t size() const { return static_cast<std::uint32_t>(cum_r_.size()); }
  std::uint32_t rem_slot() const { return size(); }
  bool has_rem() const { return parents_ == nullptr; }
  double alpha() const { return alpha_; }

  double r(std::uint32_t i) const {
    return cum_r_[i] - (i ? cum_r_[i - 1] : 0.0);
  }
  double s(std::uint32_t i) const {
    if (cum_s_.empty()) return r(i);
    return cum_s_[i] - (i ? cum_s_[i - 1] : 0.0);
  }
  double rem_r() const { return rem_r_; }
  double rem_s() const { return rem_s_; }
  double r_alpha(std::uint32_t i) const { return std::pow(r(i), alpha_); }

  // Slot-tree structure: stars hang every slot (and the remainder) off slot
  // 0; explicit models use the law's parent array.
  bool is_star() const { return parents_ == nullptr; }
  std::int32_t parent_of(std::uint32_t slot) const {
    if (slot == 0) return -1;
    if (is_star()) return 0;
    return static_cast<std::int32_t>((*parents_)[slot]);
  }
  bool is_ancestor(std::uint32_t i, std::uint32_t j) const {
    // true iff j is in the subtree rooted at i (i == j included)
    if (i == 0 || i == j) return true;
    if (is_star()) return false;
    if (j == rem_slot()) return false;
    VertexId v = j;
    while (v > static_cast<VertexId>(i)) v = (*parents_)[v];
    return v == static_cast<VertexId>(i);
  }
  std::uint32_t mrca_slot(std::uint32_t i, std::uint32_t j) const {
    if (i == j) return i;
    if (is_star()) return 0;
    VertexId a = i, b = j;
    while (a != b) {
      if (a > b)
        a = (*parents_)[a];
      else
        b = (*parents_)[b];
    }
    return static_cast<std::uint32_t>(a);
  }
  // pi(i,j): both endpoints included, mrca removed.
  void path_excl_mrca(std::uint32_t i, std::uint32_t j, std::uint32_t& q,
                      std::vector<std::uint32_t>& path) const {
    path.clear();
    if (i == j) {
      q = i;
      return;
    }
    if (is_star()) {
      q = 0;
      if (i != 0) path.push_back(i);
      if (j != 0) path.push_back(j);
      return;
    }
    q = mrca_slot(i, j);
    for (VertexId v = i; v != static_cast<VertexId>(q); v = (*parents_)[v])
      path.push_back(static_cast<std::uint32_t>(v));
    std::vector<std::uint32_t> down;
    for (VertexId v = j; v != static_cast<VertexId>(q); v = (*parents_)[v])
      down.push_back(static_cast<std::uint32_t>(v));
    path.insert(path.end(), down.rbegin(), down.rend());
  }

  // Marked-point distance between attachment points of two slots (the
  // remainder slot is allowed wherever the block carries its position).
  double L(std::uint32_t i, std::uint32_t j) const {
    if (i == j) return 0.0;
    if (i >= size() + (has_rem() ? 1u : 0u) || j >= size() + (has_rem() ? 1u : 0u))
      throw std::domain_error("eval_L: unrealized vertex beyond truncation");
    return std::visit(
        [&](const auto& blk) -> double {
          using T = std::decay_t<decltype(blk)>;
          if constexpr (std::is_same_v<T, BlockLoop>) {
            const double a = i == rem_slot() ? blk.pos_rem : blk.pos[i];
            const double b = j == rem_slot() ? blk.pos_rem : blk.pos[j];
            const double t = std::abs(a - b);
            return blk.circumference * std::min(t, 1.0 - t);
          } else if constexpr (std::is_same_v<T, BlockInterval>) {
            const double a = i == rem_slot() ? blk.pos_rem : blk.pos[i];
            const double b = j == rem_slot() ? blk.pos_rem : blk.pos[j];
            return blk.length * std::abs(a - b);
          } else {
            return blk.d[i * blk.n + j];
          }
        },
        block_);
  }

  const BlockGeometry& block() const { return block_; }

  // Samples a slot under the s-weights (mu); may return rem_slot().
  std::uint32_t pick_s(RngStream& rng) const {
    return pick(rng, cum_s_.empty() ? cum_r_ : cum_s_,
                cum_s_.empty() ? rem_r_ : rem_s_);
  }
  // Samples a slot under the r-weights (mu_bar / fragmentation).
  std::uint32_t pick_r(RngStream& rng) const { return pick(rng, cum_r_, rem_r_); }

  double realized_r_mass() const { return cum_r_.empty() ? 0.0 : cum_r_.back(); }
  double realized_s_mass() const {
    return cum_s_.empty() ? realized_r_mass() : cum_s_.back();
  }

 private:
  std::uint32_t pick(RngStream& rng, const std::vector<double>& cum,
                     double rem) const {
    const double total = (cum.empty() ? 0.0 : cum.back()) + rem;
    const double u = rng.uniform() * total;
    if (cum.empty() || u >= cum.back()) return rem_slot();
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    return static_cast<std::uint32_t>(it - cum.begin());
  }

  double alpha_ = 0.5;
  std::vector<double> cum_r_;
  std::vector<double> cum_s_;  // empty when s == r
  double rem_r_ = 0.0, rem_s_ = 0.0;
  BlockGeometry block_;
  std::shared_ptr<const std::vector<VertexId>> parents_;  // null for stars
};

class BranchLaw {
 public:
  static BranchLaw looptree(double beta, TruncationPolicy pol = {}) {
    if (!(beta > 1.0) || !(beta < 2.0))
      throw std::domain_error("looptree: beta must be in (1,2)");
    BranchLaw law(ModelKind::Looptree, GammaTree::star_n());
    law.beta_ = beta;
    law.alpha_ = 1.0 / beta;
    law.trunc_ = pol;
    return law;
  }

  static BranchLaw stable_tree(double beta, TruncationPolicy pol = {}) {
    if (!(beta > 1.0) || !(beta <= 2.0))
      throw std::domain_error("stable_tree: beta must be in (1,2]");
    BranchLaw law(ModelKind::StableTree, GammaTree::star_n2());
    law.beta_ = beta;
    law.alpha_ = 1.0 - 1.0 / beta;
    law.trunc_ = pol;
    return law;
  }

  static BranchLaw brownian_crt(TruncationPolicy pol = {}) {
    BranchLaw law = stable_tree(2.0, pol);
    law.kind_ = ModelKind::BrownianCrt;
    return law;
  }

  static BranchLaw finite_demo() {
    BranchLaw law = explicit_law({-1, 0}, {0.5, 0.5}, {0.5, 0.5},
                                 {0.0, 1.0, 1.0, 0.0}, 0.8);
    law.kind_ = ModelKind::FiniteDemo;
    return law;
  }

  static BranchLaw explicit_law(std::vector<VertexId> parents,
                                std::vector<double> r, std::vector<double> s,
                                std::vector<double> L_dense, double alpha) {
    GammaTree tree = GammaTree::explicit_from_parents(parents);
    const std::size_t n = parents.size();
    if (r.size() != n || s.size() != n)
      throw std::domain_error("explicit law: r/s size mismatch");
    if (L_dense.size() != n * n)
      throw std::domain_error("explicit law: L must be a dense n x n matrix");
    if (!(alpha > 0.0) || !(alpha < 1.0))
      throw std::domain_error("explicit law: alpha must be in (0,1)");
    auto check_simplex = [](const std::vector<double>& v, const char* what) {
      double sum = 0.0;
      for (double x : v) {
        if (!(x > 0.0)) throw std::domain_error(std::string(what) + ": weights must be positive");
        sum += x;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw std::domain_error(std::string(what) + ": weights must sum to 1");
    };
    check_simplex(r, "explicit law r");
    check_simplex(s, "explicit law s");
    for (std::size_t i = 0; i < n; ++i) {
      if (L_dense[i * n + i] != 0.0)
        throw std::domain_error("explicit law: L must have zero diagonal");
      for (std::size_t j = 0; j < n; ++j) {
        if (L_dense[i * n + j] < 0.0 ||
            L_dense[i * n + j] != L_dense[j * n + i])
          throw std::domain_error("explicit law: L must be symmetric nonnegative");
      }
    }
    BranchLaw law(ModelKind::Explicit, std::move(tree));
    law.alpha_ = alpha;
    law.parents_ = std::make_shared<const std::vector<VertexId>>(std::move(parents));
    bool same = true;
    for (std::size_t i = 0; i < n; ++i) same = same && r[i] == s[i];
    law.proto_ = BranchParams(
        alpha, std::move(r), same ? std::vector<double>{} : std::move(s), 0.0,
        0.0, BlockDense{static_cast<std::uint32_t>(n), std::move(L_dense)},
        law.parents_);
    return law;
  }

  ModelKind kind() const { return kind_; }
  double beta() const { return beta_; }
  double alpha() const { return alpha_; }
  const GammaTree& tree() const { return tree_; }
  const TruncationPolicy& truncation() const { return trunc_; }

  BranchParams sample(RngStream& rng) const {
    switch (kind_) {
      case ModelKind::Looptree:
        return sample_looptree(rng);
      case ModelKind::StableTree:
      case ModelKind::BrownianCrt:
        return sample_stable_tree(rng);
      case ModelKind::FiniteDemo:
      case ModelKind::Explicit:
        return *proto_;
    }
    throw std::logic_error("unreachable");
  }

 private:
  BranchLaw(ModelKind k, GammaTree t) : kind_(k), tree_(std::move(t)) {}

  BranchParams sample_looptree(RngStream& rng) const {
    const double c = 1.0 - 1.0 / beta_;
    const double d = 2.0 / beta_ - 1.0;
    const auto x = sample_dirichlet(rng, {c, c, c, d});
    const std::size_t cap =
        trunc_.max_children > 3 ? trunc_.max_children - 3 : 1;
    const auto pd = sample_pd(rng, 1.0 / beta_, d, trunc_.eps_tail, cap);
    std::vector<double> r(3 + pd.atoms.size());
    r[0] = x[0];
    r[1] = x[1];
    r[2] = x[2];
    for (std::size_t k = 0; k < pd.atoms.size(); ++k) r[3 + k] = x[3] * pd.atoms[k];
    const double rem = x[3] * pd.tail_mass;
    const double w = diversity(pd, 1.0 / beta_).value;
    BlockLoop blk;
    blk.circumference = std::pow(x[3], 1.0 / beta_) * w;
    blk.pos.resize(r.size());
    for (auto& p : blk.pos) p = rng.uniform();
    blk.pos_rem = rng.uniform();
    return BranchParams(alpha_, std::move(r), {}, rem, rem, std::move(blk), nullptr);
  }

  BranchParams sample_stable_tree(RngStream& rng) const {
    const double a_p = 1.0 - 1.0 / beta_;
    const auto pd_p =
        sample_pd(rng, a_p, a_p, 0.5 * trunc_.eps_tail, trunc_.max_children);
    const double w = diversity(pd_p, a_p).value;
    const std::size_t m = pd_p.atoms.size();
    std::vector<double> spine_u(m);
    for (auto& u : spine_u) u = rng.uniform();

    // Split the child budget over spine atoms; n_i ~ P_i^(2/3) minimizes the
    // total slot count for a given lumped tail when Q tails decay like
    // n^(-(1-a)/a).
    std::vector<std::size_t> budget(m, 1);
    {
      double wsum = 0.0;
      for (double p : pd_p.atoms) wsum += std::pow(p, 2.0 / 3.0);
      std::size_t left = trunc_.max_children >= m ? trunc_.max_children - m : 0;
      for (std::size_t i = 0; i < m; ++i) {
        const auto extra = static_cast<std::size_t>(
            static_cast<double>(left) * std::pow(pd_p.atoms[i], 2.0 / 3.0) / wsum);
        budget[i] += std::min(extra, left);
      }
    }

    std::vector<double> r;
    std::vector<double> pos;
    r.reserve(trunc_.max_children);
    pos.reserve(trunc_.max_children);
    const double a_q = 1.0 / beta_;
    const double b_q = 1.0 / beta_ - 1.0;
    double kept = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const auto q =
          sample_pd(rng, a_q, b_q, 0.5 * trunc_.eps_tail, budget[i]);
      for (double qa : q.atoms) {
        r.push_back(pd_p.atoms[i] * qa);
        pos.push_back(spine_u[i]);
        kept += r.back();
      }
    }
    const double rem = std::max(0.0, 1.0 - kept);

    // Swap a size-biased slot into the root position (slot 0), relabeling the
    // attachment data with it so L stays consistent.
    if (!r.empty()) {
      const double u = rng.uniform() * kept;
      double acc = 0.0;
      std::size_t picked = r.size() - 1;
      for (std::size_t i = 0; i < r.size(); ++i) {
        acc += r[i];
        if (u < acc) {
          picked = i;
          break;
        }
      }
      std::swap(r[0], r[picked]);
      std::swap(pos[0], pos[picked]);
    }

    BlockInterval blk;
    blk.length = w;
    blk.pos = std::move(pos);
    blk.pos_rem = rng.uniform();
    return BranchParams(alpha_, std::move(r), {}, rem, rem, std::move(blk), nullptr);
  }

  ModelKind kind_;
  GammaTree tree_;
  double beta_ = 0.0;
  double alpha_ = 0.5;
  TruncationPolicy trunc_;
  std::shared_ptr<const std::vector<VertexId>> parents_;
  std::optional<BranchParams> proto_;
};

// ---------------------------------------------------------------------------
// Hypothesis checkers (Monte Carlo)

enum class Verdict { Satisfied, Violated, Inconclusive };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Satisfied: return "satisfied";
    case Verdict::Violated: return "violated";
    default: return "inconclusive";
  }
}

struct HypothesisReport {
  std::string name;
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  Verdict verdict = Verdict::Inconclusive;
  std::string note;
  double censor_rate = 0.0;
};

namespace detail {

constexpr double kZ99 = 2.3263478740408408;  // one-sided 99% normal quantile

inline std::string compact_num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

// Sum of R_i^alpha over the ancestors of j_slot (j itself included). A J
// landing on the lumped remainder is censored: only the exact root/ancestor
// terms are counted and the caller is told.
inline double ancestor_weight_sum(const BranchParams& par, std::uint32_t j,
                                  bool& censored) {
  censored = false;
  if (par.has_rem() && j == par.rem_slot()) {
    censored = true;
    return par.r_alpha(0);
  }
  double acc = par.r_alpha(j);
  for (std::int32_t v = par.parent_of(j); v >= 0;
       v = par.parent_of(static_cast<std::uint32_t>(v)))
    acc += par.r_alpha(static_cast<std::uint32_t>(v));
  return acc;
}

inline bool halves_stable(const std::vector<double>& vals, double tol) {
  const std::size_t h = vals.size() / 2;
  if (h == 0) return false;
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < h; ++i) m1 += vals[i];
  for (std::size_t i = h; i < vals.size(); ++i) m2 += vals[i];
  m1 /= static_cast<double>(h);
  m2 /= static_cast<double>(vals.size() - h);
  const double denom = std::max(std::abs(m1), 1e-300);
  return std::abs(m2 - m1) / denom < tol;
}

}  // namespace detail

struct ContractionReport {
  HypothesisReport sum_part;  // E[(sum_i 1_{J in Gamma_i} R_i^alpha)^p]
  HypothesisReport l_part;    // E[L(root, J)^p]
};

inline ContractionReport estimate_contraction(const BranchLaw& law, double p,
                                              std::uint64_t n, RngStream& rng) {
  if (p < 1.0) throw std::domain_error("estimate_contraction: p must be >= 1");
  if (n < 100) throw std::domain_error("estimate_contraction: n must be >= 100");
  std::vector<double> sums(n), ls(n);
  std::uint64_t censored = 0;
  for (std::uint64_t t = 0; t < n; ++t) {
    const BranchParams par = law.sample(rng);
    const std::uint32_t j = par.pick_s(rng);
    bool cen = false;
    const double sum = detail::ancestor_weight_sum(par, j, cen);
    censored += cen;
    sums[t] = std::pow(sum, p);
    ls[t] = std::pow(par.L(0, j), p);
  }
  ContractionReport out;
  out.sum_part.name = "H2_p" + detail::compact_num(p);
  out.sum_part.estimate = mean(sums);
  out.sum_part.std_error = std_error(sums);
  out.sum_part.n_samples = n;
  out.sum_part.censor_rate = static_cast<double>(censored) / static_cast<double>(n);
  const bool contracting =
      out.sum_part.estimate + detail::kZ99 * out.sum_part.std_error < 1.0;
  out.l_part.name = out.sum_part.name + "_L";
  out.l_part.estimate = mean(ls);
  out.l_part.std_error = std_error(ls);
  out.l_part.n_samples = n;
  const bool l_stable = detail::halves_stable(ls, 0.10);
  out.l_part.verdict = l_stable ? Verdict::Satisfied : Verdict::Inconclusive;
  out.l_part.note = l_stable ? "sample-stable" : "halves differ by >10%";
  out.sum_part.verdict = contracting && l_stable ? Verdict::Satisfied
                         : contracting          ? Verdict::Inconclusive
                                                : Verdict::Violated;
  return out;
}

inline HypothesisReport estimate_h1(const BranchLaw& law, std::uint64_t n,
                                    RngStream& rng) {
  if (n < 1) throw std::domain_error("estimate_h1: n must be >= 1");
  std::uint64_t hits = 0;
  for (std::uint64_t t = 0; t < n; ++t) {
    const BranchParams par = law.sample(rng);
    bool positive = false;
    const std::uint32_t limit = par.size() + (par.has_rem() ? 1u : 0u);
    for (std::uint32_t i = 1; i < limit && !positive; ++i)
      positive = par.L(0, i) > 0.0;
    hits += positive;
  }
  HypothesisReport rep;
  rep.name = "H1";
  rep.estimate = static_cast<double>(hits) / static_cast<double>(n);
  rep.std_error =
      std::sqrt(rep.estimate * (1.0 - rep.estimate) / static_cast<double>(n));
  rep.n_samples = n;
  rep.verdict = rep.estimate - detail::kZ99 * rep.std_error > 0.0
                    ? Verdict::Satisfied
                    : (hits == 0 ? Verdict::Violated : Verdict::Inconclusive);
  return rep;
}

inline HypothesisReport estimate_h3(const BranchLaw& law, double p,
                                    std::uint64_t n, RngStream& rng,
                                    bool force_mc = false) {
  HypothesisReport rep;
  rep.name = "H3_p" + detail::compact_num(p);
  if (law.tree().finite_height() && !force_mc) {
    rep.verdict = Verdict::Satisfied;
    rep.note = "structural";
    rep.estimate = 0.0;
    return rep;
  }
  std::vector<double> vals(n);
  for (std::uint64_t t = 0; t < n; ++t) {
    const BranchParams par = law.sample(rng);
    double sup = 0.0;
    if (par.is_star()) {
      // non-root slots all see the single strict ancestor 0
      if (par.size() > 1 || par.has_rem()) sup = par.r_alpha(0);
    } else {
      std::vector<double> acc(par.size(), 0.0);
      for (std::uint32_t i = 1; i < par.size(); ++i) {
        const auto pa = static_cast<std::uint32_t>(par.parent_of(i));
        acc[i] = acc[pa] + par.r_alpha(pa);
        sup = std::max(sup, acc[i]);
      }
    }
    vals[t] = std::pow(sup, p);
  }
  rep.estimate = mean(vals);
  rep.std_error = std_error(vals);
  rep.n_samples = n;
  rep.verdict = detail::halves_stable(vals, 0.10) ? Verdict::Satisfied
                                                  : Verdict::Inconclusive;
  rep.note = "monte-carlo";
  return rep;
}

inline HypothesisReport estimate_necessary(const BranchLaw& law, std::uint64_t n,
                                           RngStream& rng) {
  if (n < 100) throw std::domain_error("estimate_necessary: n must be >= 100");
  std::vector<double> sums(n);
  std::uint64_t censored = 0;
  for (std::uint64_t t = 0; t < n; ++t) {
    const BranchParams par = law.sample(rng);
    bool cen = false;
    sums[t] = detail::ancestor_weight_sum(par, par.pick_s(rng), cen);
    censored += cen;
  }
  HypothesisReport rep;
  rep.name = "necessary";
  rep.estimate = mean(sums);
  rep.std_error = std_error(sums);
  rep.n_samples = n;
  rep.censor_rate = static_cast<double>(censored) / static_cast<double>(n);
  rep.verdict = rep.estimate - detail::kZ99 * rep.std_error <= 1.0
                    ? Verdict::Satisfied
                    : Verdict::Violated;
  return rep;
}

inline HypothesisReport estimate_rstar_negmoment(const BranchLaw& law,
                                                 double delta, std::uint64_t n,
                                                 RngStream& rng) {
  if (!(delta > 0.0))
    throw std::domain_error("estimate_rstar_negmoment: delta must be > 0");
  if (n < 100) throw std::domain_error("estimate_rstar_negmoment: n >= 100");
  std::vector<double> vals;
  vals.reserve(2 * n);
  std::uint64_t censored = 0;
  for (std::uint64_t t = 0; t < 2 * n; ++t) {
    const BranchParams par = law.sample(rng);
    const std::uint32_t i = par.pick_r(rng);
    if (par.has_rem() && i == par.rem_slot()) {
      ++censored;
      continue;
    }
    vals.push_back(std::pow(par.r(i), -delta));
  }
  HypothesisReport rep;
  rep.name = "Rstar_negmoment_d" + detail::compact_num(delta);
  rep.n_samples = vals.size();
  rep.censor_rate = static_cast<double>(censored) / static_cast<double>(2 * n);
  if (vals.empty()) {
    rep.verdict = Verdict::Inconclusive;
    rep.note = "all picks censored";
    return rep;
  }
  double first = 0.0;
  const std::size_t nh = std::min<std::size_t>(vals.size(), n);
  for (std::size_t i = 0; i < nh; ++i) first += vals[i];
  first /= static_cast<double>(nh);
  rep.estimate = mean(vals);
  rep.std_error = std_error(vals);
  const double rel =
      std::abs(rep.estimate - first) / std::max(std::abs(first), 1e-300);
  rep.verdict = rel < 0.10 ? Verdict::Satisfied : Verdict::Inconclusive;
  rep.note = "relative change at doubled n: " + std::to_string(rel);
  return rep;
}

}  // namespace recmet
