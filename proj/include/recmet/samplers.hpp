#pragma once

// Variate generation for the model laws: Beta, Dirichlet, Poisson-Dirichlet
// stick-breaking with truncation, size-biased picks, and the a-diversity
// functional of a ranked PD sequence.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "recmet/rng.hpp"

namespace recmet {

inline double sample_beta(RngStream& rng, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("sample_beta: parameters must be positive");
  const double x = rng.gamma(a);
  const double y = rng.gamma(b);
  return x / (x + y);
}

inline std::vector<double> sample_dirichlet(RngStream& rng,
                                            const std::vector<double>& betas) {
  if (betas.empty())
    throw std::domain_error("sample_dirichlet: empty parameter list");
  std::vector<double> out(betas.size());
  double total = 0.0;
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] > 0.0))
      throw std::domain_error("sample_dirichlet: parameters must be positive");
    out[i] = rng.gamma(betas[i]);
    total += out[i];
  }
  for (auto& x : out) x /= total;
  return out;
}

// One realization of PoiDir(a,b), generated until the residual stick mass
// drops below eps_tail (or max_atoms is hit), atoms sorted descending.
// The residual is kept as tail_mass, never renormalized away.
struct TruncatedPD {
  std::vector<double> atoms;
  double tail_mass = 0.0;
  double a = 0.0;
  double b = 0.0;
};

inline TruncatedPD sample_pd(RngStream& rng, double a, double b,
                             double eps_tail,
                             std::size_t max_atoms =
                                 std::numeric_limits<std::size_t>::max()) {
  if (!(a > 0.0) || !(a < 1.0))
    throw std::domain_error("sample_pd: a must be in (0,1)");
  if (!(b >= -a)) throw std::domain_error("sample_pd: b must be >= -a");
  if (!(eps_tail > 0.0) || !(eps_tail < 1.0))
    throw std::domain_error("sample_pd: eps_tail must be in (0,1)");
  TruncatedPD pd;
  pd.a = a;
  pd.b = b;
  if (b == -a) {
    // Degenerate case: Dirac on (1, 0, 0, ...).
    pd.atoms = {1.0};
    pd.tail_mass = 0.0;
    return pd;
  }
  double rest = 1.0;
  std::size_t i = 1;
  while (rest >= eps_tail && pd.atoms.size() < max_atoms) {
    const double w = sample_beta(rng, 1.0 - a, b + static_cast<double>(i) * a);
    pd.atoms.push_back(w * rest);
    rest *= (1.0 - w);
    ++i;
  }
  pd.tail_mass = rest;
  std::sort(pd.atoms.begin(), pd.atoms.end(), std::greater<double>());
  return pd;
}

struct SizeBiasedPick {
  std::ptrdiff_t index = -1;  // -1 means the tail was picked
  double mass = 0.0;
  bool is_tail = false;
};

// Picks index i with probability masses[i], the tail marker with probability
// tail_mass. Requires sum(masses) + tail_mass == 1 within 1e-9.
inline SizeBiasedPick size_biased_pick(RngStream& rng,
                                       const std::vector<double>& masses,
                                       double tail_mass) {
  double total = tail_mass;
  for (double m : masses) {
    if (m < 0.0) throw std::domain_error("size_biased_pick: negative mass");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::domain_error("size_biased_pick: masses not normalized");
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) {
    acc += masses[i];
    if (u < acc && masses[i] > 0.0)
      return {static_cast<std::ptrdiff_t>(i), masses[i], false};
  }
  return {-1, tail_mass, true};
}

struct DiversityEstimate {
  double value = 0.0;
  int window = 1;
};

// Estimator of the a-diversity S = Gamma(1-a) lim n (P_n)^a of a truncated
// realization. The ranked list is complete exactly for atom sizes >=
// tail_mass (every dropped atom is a fraction of the residual stick), so the
// default estimator reads the small-atom mass function at that completeness
// threshold: M(x) ~ S a x^(1-a) / ((1-a) Gamma(1-a)). An explicit window
// selects the rank-window average Gamma(1-a) mean_n n (P_n)^a instead,
// anchored at the completeness boundary; at the raw end of a truncated list
// the ranks belong to the kept atoms only and that average is meaningless.
inline DiversityEstimate diversity(const TruncatedPD& pd, double a, int window = 0) {
  if (!(a > 0.0) || !(a < 1.0))
    throw std::domain_error("diversity: a must be in (0,1)");
  const auto n = static_cast<std::ptrdiff_t>(pd.atoms.size());
  if (window > n)
    throw std::domain_error("diversity: window exceeds atom count");
  if (pd.b == -pd.a || (n == 1 && pd.tail_mass == 0.0)) {
    // Degenerate sequence has no tail: report 0 with the window clamped.
    return {0.0, 1};
  }
  const double x_star = pd.tail_mass;
  if (window == 0) {
    if (x_star <= 0.0) window = static_cast<int>(std::max<std::ptrdiff_t>(1, n / 10));
    else {
      double below = x_star;
      std::ptrdiff_t cnt = 1;
      for (auto it = pd.atoms.rbegin(); it != pd.atoms.rend() && *it < x_star; ++it) {
        below += *it;
        ++cnt;
      }
      const double s = below * (1.0 - a) * std::tgamma(1.0 - a) /
                       (a * std::pow(x_star, 1.0 - a));
      return {s, static_cast<int>(cnt)};
    }
  }
  // rank-window form over the last `window` complete ranks
  std::ptrdiff_t n_star = n;
  if (x_star > 0.0) {
    n_star = 0;
    while (n_star < n && pd.atoms[n_star] >= x_star) ++n_star;
  }
  if (n_star < 1) n_star = 1;
  const auto w = std::min<std::ptrdiff_t>(window, n_star);
  const double g = std::tgamma(1.0 - a);
  double acc = 0.0;
  for (std::ptrdiff_t r = n_star - w; r < n_star; ++r) {
    const double rank = static_cast<double>(r + 1);
    acc += rank * std::pow(pd.atoms[r], a);
  }
  return {g * acc / static_cast<double>(w), static_cast<int>(w)};
}

}  // namespace recmet
