#pragma once

// Statistics on engine output: two-sample energy discrepancies as the
// empirical surrogate for weak convergence of the distance matrix
// distribution, coupled convergence profiles, moment estimation, greedy
// covering (Minkowski slope), and the mu_bar mass-scaling probe for the
// Hausdorff bound.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "recmet/engine.hpp"
#include "recmet/models.hpp"
#include "recmet/rng.hpp"
#include "recmet/stats.hpp"

namespace recmet {

struct EnergyResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Two-sample energy statistic on flattened matrix samples, permutation
// p-value. Exactly 0 when the two sets coincide, symmetric in (A,B).
inline EnergyResult energy_distance(const std::vector<std::vector<double>>& A,
                                    const std::vector<std::vector<double>>& B,
                                    int permutations, RngStream& rng) {
  if (A.empty() || B.empty())
    throw std::domain_error("energy_distance: empty sample set");
  const std::size_t dim = A[0].size();
  for (const auto& v : A)
    if (v.size() != dim) throw std::domain_error("energy_distance: size mismatch");
  for (const auto& v : B)
    if (v.size() != dim) throw std::domain_error("energy_distance: size mismatch");

  const std::size_t n = A.size(), m = B.size(), tot = n + m;
  std::vector<double> dist(tot * tot, 0.0);
  const auto& at = [&](std::size_t i) -> const std::vector<double>& {
    return i < n ? A[i] : B[i - n];
  };
  for (std::size_t i = 0; i < tot; ++i) {
    const auto& x = at(i);
    for (std::size_t j = i + 1; j < tot; ++j) {
      const auto& y = at(j);
      double acc = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        const double t = x[d] - y[d];
        acc += t * t;
      }
      dist[i * tot + j] = dist[j * tot + i] = std::sqrt(acc);
    }
  }

  std::vector<std::size_t> idx(tot);
  for (std::size_t i = 0; i < tot; ++i) idx[i] = i;
  const auto stat_for = [&](const std::vector<std::size_t>& perm) {
    double s_aa = 0.0, s_bb = 0.0, s_ab = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) s_aa += dist[perm[i] * tot + perm[j]];
    for (std::size_t i = n; i < tot; ++i)
      for (std::size_t j = n; j < tot; ++j) s_bb += dist[perm[i] * tot + perm[j]];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = n; j < tot; ++j) s_ab += dist[perm[i] * tot + perm[j]];
    const double nn = static_cast<double>(n), mm = static_cast<double>(m);
    return 2.0 * s_ab / (nn * mm) - s_aa / (nn * nn) - s_bb / (mm * mm);
  };

  EnergyResult out;
  out.statistic = stat_for(idx);
  if (permutations <= 0) return out;
  int ge = 0;
  for (int p = 0; p < permutations; ++p) {
    for (std::size_t i = tot - 1; i > 0; --i)
      std::swap(idx[i], idx[rng.uniform_index(i + 1)]);
    if (stat_for(idx) >= out.statistic) ++ge;
  }
  out.p_value = (1.0 + ge) / (1.0 + permutations);
  return out;
}

// Smallest-found count of radius-eps balls (centered on sample points)
// covering the sample: greedy max-coverage over bitset neighborhoods.
inline std::uint32_t covering_number(const std::vector<float>& dist,
                                     std::size_t n, double eps) {
  if (n == 0) return 0;
  const std::size_t words = (n + 63) / 64;
  std::vector<std::uint64_t> masks(n * words, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (dist[i * n + j] <= eps) masks[i * words + j / 64] |= 1ull << (j % 64);
  std::vector<std::uint64_t> uncovered(words, ~0ull);
  if (n % 64) uncovered[words - 1] = (1ull << (n % 64)) - 1;
  std::size_t left = n;
  std::uint32_t centers = 0;
  while (left > 0) {
    std::size_t best = 0, best_cover = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t c = 0;
      for (std::size_t w = 0; w < words; ++w)
        c += static_cast<std::size_t>(
            __builtin_popcountll(masks[i * words + w] & uncovered[w]));
      if (c > best_cover) {
        best_cover = c;
        best = i;
      }
    }
    for (std::size_t w = 0; w < words; ++w) uncovered[w] &= ~masks[best * words + w];
    left -= best_cover;
    ++centers;
  }
  return centers;
}

struct DimensionFit {
  std::vector<std::array<double, 3>> rows;  // (replicate, epsilon|radius, N|mass)
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
  std::string mode;
};

namespace detail {

inline void validate_grid(const std::vector<double>& grid, const char* what) {
  if (grid.size() < 4)
    throw std::domain_error(std::string(what) + ": grid needs >= 4 points");
  const auto [mn, mx] = std::minmax_element(grid.begin(), grid.end());
  if (!(*mn > 0.0)) throw std::domain_error(std::string(what) + ": grid must be positive");
  if (*mx / *mn < 10.0)
    throw std::domain_error(std::string(what) + ": grid must span at least one decade");
}

inline void validate_floor(const std::vector<double>& grid, double floor,
                           const char* what) {
  if (floor <= 0.0) return;
  const double mn = *std::min_element(grid.begin(), grid.end());
  if (mn < 10.0 * floor)
    throw std::domain_error(
        std::string(what) + ": smallest grid value " + std::to_string(mn) +
        " is below the resolution band bound 10 x resolution_floor = " +
        std::to_string(10.0 * floor));
}

}  // namespace detail

// Per replicate: n_points mu-points on one trie, greedy covering N(eps) per
// grid value; pooled log N(eps) vs log 1/eps least squares.
inline DimensionFit minkowski_fit(const BranchLaw& law, int depth,
                                  std::size_t n_points,
                                  const std::vector<double>& eps_grid, int reps,
                                  std::uint64_t seed,
                                  const EngineOptions& opt = {}) {
  detail::validate_grid(eps_grid, "minkowski_fit");
  detail::validate_floor(eps_grid, opt.resolution_floor, "minkowski_fit");
  if (n_points < 1) throw std::domain_error("minkowski_fit: n_points >= 1");
  DimensionFit fit;
  fit.mode = "minkowski";
  const double eps_max = *std::max_element(eps_grid.begin(), eps_grid.end());
  std::vector<float> dist;
  for (int rep = 0; rep < reps; ++rep) {
    ThetaTrie trie(law, hash_combine(seed, 0xD1Aull + rep), opt);
    RngStream rng(seed, hash_combine(0x6d696e6bull, rep));
    std::vector<PointAddress> pts(n_points);
    for (auto& p : pts) p = trie.sample_point(depth, Measure::Mu, rng);
    dist.assign(n_points * n_points, 0.0f);
    double diam = 0.0;
    for (std::size_t i = 0; i < n_points; ++i)
      for (std::size_t j = i + 1; j < n_points; ++j) {
        const auto d =
            static_cast<float>(trie.pair_distance(pts[i], pts[j], depth));
        dist[i * n_points + j] = dist[j * n_points + i] = d;
        diam = std::max(diam, static_cast<double>(d));
      }
    if (rep == 0 && n_points > 1 && eps_max > diam / 2.0)
      throw std::domain_error(
          "minkowski_fit: largest grid value " + std::to_string(eps_max) +
          " exceeds diameter estimate / 2 = " + std::to_string(diam / 2.0));
    for (const double eps : eps_grid) {
      const auto n_cov = covering_number(dist, n_points, eps);
      fit.rows.push_back({static_cast<double>(rep), eps,
                          static_cast<double>(n_cov)});
    }
  }
  std::vector<double> xs, ys;
  for (const auto& r : fit.rows) {
    xs.push_back(std::log(1.0 / r[1]));
    ys.push_back(std::log(std::max(r[2], 1.0)));
  }
  const OlsFit f = ols(xs, ys);
  fit.slope = f.slope;
  fit.intercept = f.intercept;
  fit.r2 = f.r2;
  fit.slope_stderr = f.slope_stderr;
  return fit;
}

// For centers x ~ mu_bar, the empirical mass mu_bar(B_r(x)) is regressed on r
// in log-log; the median per-center slope probes the Hausdorff lower bound
// through the mass distribution principle.
inline DimensionFit hausdorff_probe(const BranchLaw& law, int depth,
                                    std::size_t n_centers,
                                    std::size_t n_mass_points,
                                    const std::vector<double>& radii, int reps,
                                    std::uint64_t seed,
                                    const EngineOptions& opt = {}) {
  detail::validate_grid(radii, "hausdorff_probe");
  detail::validate_floor(radii, opt.resolution_floor, "hausdorff_probe");
  if (n_centers < 1 || n_mass_points < 1)
    throw std::domain_error("hausdorff_probe: need centers and mass points");
  DimensionFit fit;
  fit.mode = "hausdorff_probe";
  std::vector<double> slopes;
  const double r_min = *std::min_element(radii.begin(), radii.end());
  std::size_t empty_at_rmin = 0;
  for (int rep = 0; rep < reps; ++rep) {
    ThetaTrie trie(law, hash_combine(seed, 0xAA05ull + rep), opt);
    RngStream rng(seed, hash_combine(0x68617573ull, rep));
    std::vector<PointAddress> centers(n_centers), mass(n_mass_points);
    for (auto& p : centers) p = trie.sample_point(depth, Measure::MuBar, rng);
    for (auto& p : mass) p = trie.sample_point(depth, Measure::MuBar, rng);
    for (std::size_t c = 0; c < n_centers; ++c) {
      std::vector<double> d(n_mass_points);
      for (std::size_t i = 0; i < n_mass_points; ++i)
        d[i] = trie.pair_distance(centers[c], mass[i], depth);
      std::vector<double> xs, ys;
      bool empty_min = false;
      for (const double r : radii) {
        std::size_t cnt = 0;
        for (const double di : d) cnt += di < r;
        const double frac = static_cast<double>(cnt) / static_cast<double>(n_mass_points);
        fit.rows.push_back({static_cast<double>(rep * n_centers + c), r, frac});
        if (cnt == 0) {
          if (r == r_min) empty_min = true;
          continue;
        }
        xs.push_back(std::log(r));
        ys.push_back(std::log(frac));
      }
      empty_at_rmin += empty_min;
      if (xs.size() >= 2) slopes.push_back(ols(xs, ys).slope);
    }
  }
  const std::size_t total_centers = static_cast<std::size_t>(reps) * n_centers;
  if (empty_at_rmin * 2 > total_centers)
    throw std::domain_error(
        "hausdorff_probe: smallest radius leaves empty balls at more than half "
        "of the centers; enlarge radii or n_mass_points");
  if (slopes.empty())
    throw std::domain_error("hausdorff_probe: no center produced a usable fit");
  fit.slope = median(slopes);
  std::vector<double> xs, ys;  // pooled fit, reported alongside the median
  for (const auto& r : fit.rows)
    if (r[2] > 0.0) {
      xs.push_back(std::log(r[1]));
      ys.push_back(std::log(r[2]));
    }
  const OlsFit f = ols(xs, ys);
  fit.intercept = f.intercept;
  fit.r2 = f.r2;
  fit.slope_stderr = f.slope_stderr;
  return fit;
}

struct ConvergenceProfile {
  std::vector<int> depths;
  std::vector<double> discrepancy;  // between consecutive depths
  std::vector<double> p_value;
  std::vector<double> mean_height;  // per depth
  std::vector<double> ratios;       // successive discrepancy ratios
  bool coupled = true;
};

// Matrix samples at increasing depths; coupled mode evaluates the same trie
// and the same addresses at every depth (the monotone coupling), fresh mode
// redraws tries per depth.
inline ConvergenceProfile convergence_profile(const BranchLaw& law,
                                              const std::vector<int>& depths,
                                              std::uint32_t k, int reps,
                                              std::uint64_t seed,
                                              const EngineOptions& opt = {},
                                              bool coupled = true,
                                              int permutations = 200) {
  if (depths.empty()) throw std::domain_error("convergence_profile: empty depths");
  for (std::size_t i = 1; i < depths.size(); ++i)
    if (depths[i] <= depths[i - 1])
      throw std::domain_error("convergence_profile: depths must increase");
  if (reps < 2) throw std::domain_error("convergence_profile: reps must be >= 2");
  const int max_depth = depths.back();
  ConvergenceProfile prof;
  prof.depths = depths;
  prof.coupled = coupled;
  // samples[d][rep] = flattened upper triangle (root row included)
  std::vector<std::vector<std::vector<double>>> samples(
      depths.size(), std::vector<std::vector<double>>(reps));
  std::vector<double> heights(depths.size(), 0.0);
  for (int rep = 0; rep < reps; ++rep) {
    if (coupled) {
      ThetaTrie trie(law, hash_combine(seed, 0xC0EDull + rep), opt);
      RngStream rng(seed, hash_combine(0x70726f66ull, rep));
      std::vector<PointAddress> pts(k);
      for (auto& p : pts) p = trie.sample_point(max_depth, Measure::Mu, rng);
      for (std::size_t di = 0; di < depths.size(); ++di) {
        auto& flat = samples[di][rep];
        for (std::uint32_t i = 0; i < k; ++i) {
          const double h = trie.root_distance(pts[i], depths[di]);
          flat.push_back(h);
          heights[di] += h;
        }
        for (std::uint32_t i = 0; i < k; ++i)
          for (std::uint32_t j = i + 1; j < k; ++j)
            flat.push_back(trie.pair_distance(pts[i], pts[j], depths[di]));
      }
    } else {
      for (std::size_t di = 0; di < depths.size(); ++di) {
        ThetaTrie trie(law, hash_combine(seed, 0xF8E5ull + rep * 1009 + di), opt);
        RngStream rng(seed, hash_combine(0x66726573ull, rep * 1009 + di));
        const auto m = trie.distance_matrix(k, depths[di], rng);
        auto& flat = samples[di][rep];
        for (std::uint32_t i = 0; i <= k; ++i)
          for (std::uint32_t j = i + 1; j <= k; ++j) flat.push_back(m.at(i, j));
        for (std::uint32_t i = 1; i <= k; ++i) heights[di] += m.at(0, i);
      }
    }
  }
  for (std::size_t di = 0; di < depths.size(); ++di)
    prof.mean_height.push_back(heights[di] / (static_cast<double>(reps) * k));
  RngStream prng(seed, 0x706572756d73ull);
  for (std::size_t di = 0; di + 1 < depths.size(); ++di) {
    const auto e =
        energy_distance(samples[di], samples[di + 1], permutations, prng);
    prof.discrepancy.push_back(e.statistic);
    prof.p_value.push_back(e.p_value);
  }
  for (std::size_t i = 0; i + 1 < prof.discrepancy.size(); ++i)
    prof.ratios.push_back(prof.discrepancy[i + 1] /
                          std::max(prof.discrepancy[i], 1e-300));
  return prof;
}

namespace detail {

// Core of the unbiased height sampler. Expands the distributional recursion
// for Y_m exactly while the branch scale stays above `floor_scale`; a branch
// dropping below survives with probability scale/floor and continues with
// its weight reset to floor. The mean is exact at bounded expected cost (the
// full coupled expansion is exponential in the floor level, since every
// level spawns exit-height side terms).
inline double height_mc(const BranchLaw& law, int depth, double scale,
                        double floor_scale, RngStream& rng) {
  if (depth <= 0) return 0.0;
  const BranchParams par = law.sample(rng);
  const std::uint32_t j = par.pick_s(rng);
  const bool j_rem = par.has_rem() && j == par.rem_slot();
  double acc = par.L(0, j);
  std::int32_t v = j_rem ? par.parent_of(j) : static_cast<std::int32_t>(j);
  for (; v >= 0; v = par.parent_of(static_cast<std::uint32_t>(v))) {
    const auto k = static_cast<std::uint32_t>(v);
    const double ra = par.r_alpha(k);
    const double child_scale = scale * ra;
    if (child_scale >= floor_scale) {
      acc += ra * height_mc(law, depth - 1, child_scale, floor_scale, rng);
    } else if (rng.uniform() * floor_scale < child_scale) {
      acc += (floor_scale / scale) *
             height_mc(law, depth - 1, floor_scale, floor_scale, rng);
    }
  }
  return acc;
}

}  // namespace detail

// One unbiased Monte Carlo draw of Y_m from the annealed law (independent
// copies at every node, not the coupled trie).
inline double sample_height_mc(const BranchLaw& law, int depth,
                               double floor_scale, RngStream& rng) {
  if (!(floor_scale > 0.0) || floor_scale > 1.0)
    throw std::domain_error("sample_height_mc: floor_scale must be in (0,1]");
  return detail::height_mc(law, depth, 1.0, floor_scale, rng);
}

// One unbiased draw of D_m (distance between two independent mu-points),
// same stochastic truncation.
inline double sample_pair_mc(const BranchLaw& law, int depth,
                             double floor_scale, RngStream& rng) {
  if (!(floor_scale > 0.0) || floor_scale > 1.0)
    throw std::domain_error("sample_pair_mc: floor_scale must be in (0,1]");
  struct Impl {
    const BranchLaw& law;
    double floor_scale;
    RngStream& rng;
    double run(int depth, double scale) {
      if (depth <= 0) return 0.0;
      const BranchParams par = law.sample(rng);
      const std::uint32_t i = par.pick_s(rng);
      const std::uint32_t j = par.pick_s(rng);
      const bool i_rem = par.has_rem() && i == par.rem_slot();
      const bool j_rem = par.has_rem() && j == par.rem_slot();
      if (i == j) {
        if (i_rem) return 0.0;
        const double ra = par.r_alpha(i);
        const double cs = scale * ra;
        if (cs >= floor_scale) return ra * run(depth - 1, cs);
        if (rng.uniform() * floor_scale < cs)
          return (floor_scale / scale) * run(depth - 1, floor_scale);
        return 0.0;
      }
      double acc = par.L(i, j);
      const std::uint32_t q = par.mrca_slot(i, j);
      // heights of the two continuations and of interior exit points; the
      // ancestor endpoint (if any) carries a pair term instead
      for (std::uint32_t e : {i, j}) {
        const bool e_rem = e == i ? i_rem : j_rem;
        if (e != q && !e_rem) acc += weighted_height(par, e, depth, scale);
        std::int32_t v = e == q ? -1 : par.parent_of(e);
        for (; v >= 0 && v != static_cast<std::int32_t>(q);
             v = par.parent_of(static_cast<std::uint32_t>(v)))
          acc += weighted_height(par, static_cast<std::uint32_t>(v), depth, scale);
      }
      if (q == i && !i_rem) acc += weighted_pair(par, i, depth, scale);
      if (q == j && !j_rem) acc += weighted_pair(par, j, depth, scale);
      return acc;
    }
    double weighted_height(const BranchParams& par, std::uint32_t k, int depth,
                           double scale) {
      const double ra = par.r_alpha(k);
      const double cs = scale * ra;
      if (cs >= floor_scale)
        return ra * detail::height_mc(law, depth - 1, cs, floor_scale, rng);
      if (rng.uniform() * floor_scale < cs)
        return (floor_scale / scale) *
               detail::height_mc(law, depth - 1, floor_scale, floor_scale, rng);
      return 0.0;
    }
    double weighted_pair(const BranchParams& par, std::uint32_t k, int depth,
                         double scale) {
      const double ra = par.r_alpha(k);
      const double cs = scale * ra;
      if (cs >= floor_scale) return ra * run(depth - 1, cs);
      if (rng.uniform() * floor_scale < cs)
        return (floor_scale / scale) * run(depth - 1, floor_scale);
      return 0.0;
    }
  };
  Impl impl{law, floor_scale, rng};
  return impl.run(depth, 1.0);
}

struct MomentEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  bool stable = false;
};

inline MomentEstimate moment_estimate(const std::vector<double>& samples,
                                      double p, RngStream& rng) {
  if (p < 1.0) throw std::domain_error("moment_estimate: p must be >= 1");
  if (samples.empty()) throw std::domain_error("moment_estimate: empty sample");
  std::vector<double> powed(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i)
    powed[i] = std::pow(samples[i], p);
  MomentEstimate out;
  out.estimate = mean(powed);
  out.std_error = bootstrap_moment_stderr(rng, samples, p);
  out.stable = detail::halves_stable(powed, 0.10);
  return out;
}

}  // namespace recmet
