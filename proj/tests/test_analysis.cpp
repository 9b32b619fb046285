#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "recmet/analysis.hpp"

using namespace recmet;

namespace {

constexpr double kRho = 1.5 * 0.574349177498517;

double demo_mean_height(int m) {
  double y = 0.0;
  for (int k = 0; k < m; ++k) y = kRho * y + 0.5;
  return y;
}

// exact minimum number of point-centered eps-balls covering all points,
// bitmask set-cover dynamic program (n <= 12)
std::uint32_t optimal_cover(const std::vector<float>& dist, std::size_t n,
                            double eps) {
  std::vector<std::uint32_t> ball(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (dist[i * n + j] <= eps) ball[i] |= 1u << j;
  const std::uint32_t full = (1u << n) - 1;
  std::vector<std::uint32_t> dp(full + 1, 1e9);
  dp[0] = 0;
  for (std::uint32_t mask = 0; mask <= full; ++mask) {
    if (dp[mask] > n) continue;
    for (std::size_t i = 0; i < n; ++i)
      dp[mask | ball[i]] = std::min(dp[mask | ball[i]], dp[mask] + 1);
  }
  return dp[full];
}

}  // namespace

TEST_CASE("energy distance basics") {
  RngStream rng(20, 0);
  std::vector<std::vector<double>> A;
  for (int i = 0; i < 40; ++i)
    A.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
  const auto same = energy_distance(A, A, 0, rng);
  CHECK(same.statistic == 0.0);

  std::vector<std::vector<double>> B;
  for (int i = 0; i < 30; ++i)
    B.push_back({rng.uniform() + 1.0, rng.uniform(), rng.uniform()});
  const auto ab = energy_distance(A, B, 0, rng);
  const auto ba = energy_distance(B, A, 0, rng);
  CHECK(ab.statistic == Catch::Approx(ba.statistic).epsilon(1e-12));
  CHECK(ab.statistic > 0.0);

  std::vector<std::vector<double>> bad = {{1.0, 2.0}};
  CHECK_THROWS_AS(energy_distance(A, bad, 0, rng), std::domain_error);
}

TEST_CASE("energy permutation test is calibrated under the null") {
  RngStream rng(21, 0);
  int ok = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    std::vector<std::vector<double>> A, B;
    for (int i = 0; i < 200; ++i) {
      A.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
      B.push_back({rng.uniform(), rng.uniform(), rng.uniform()});
    }
    ok += energy_distance(A, B, 99, rng).p_value > 0.01;
  }
  CHECK(ok >= 95);
}

TEST_CASE("energy test separates shallow from deep matrix samples") {
  const BranchLaw law = BranchLaw::finite_demo();
  EngineOptions opt;
  opt.resolution_floor = 1e-4;
  std::vector<std::vector<double>> shallow, deep;
  RngStream prng(22, 1);
  for (int rep = 0; rep < 200; ++rep) {
    ThetaTrie trie(law, 9000 + rep, opt);
    RngStream rng(22, rep);
    const PointAddress a = trie.sample_point(40, Measure::Mu, rng);
    const PointAddress b = trie.sample_point(40, Measure::Mu, rng);
    shallow.push_back({trie.root_distance(a, 2), trie.root_distance(b, 2),
                       trie.pair_distance(a, b, 2)});
    deep.push_back({trie.root_distance(a, 40), trie.root_distance(b, 40),
                    trie.pair_distance(a, b, 40)});
  }
  CHECK(energy_distance(shallow, deep, 199, prng).p_value < 0.01);
}

TEST_CASE("covering numbers on hand geometries") {
  {
    std::vector<float> one = {0.f};
    CHECK(covering_number(one, 1, 0.1) == 1);
    CHECK(covering_number(one, 1, 10.0) == 1);
  }
  {
    // three points pairwise distance 1
    std::vector<float> d = {0, 1, 1, 1, 0, 1, 1, 1, 0};
    CHECK(covering_number(d, 3, 0.4) == 3);
    CHECK(covering_number(d, 3, 1.5) == 1);
  }
}

TEST_CASE("covering numbers: monotonicity and extremes") {
  RngStream rng(23, 0);
  const std::size_t n = 60;
  std::vector<float> d(n * n, 0.f);
  double diam = 0.0;
  std::vector<std::array<double, 2>> pts(n);
  for (auto& p : pts) p = {rng.uniform(), rng.uniform()};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = pts[i][0] - pts[j][0], dy = pts[i][1] - pts[j][1];
      d[i * n + j] = static_cast<float>(std::sqrt(dx * dx + dy * dy));
      diam = std::max(diam, static_cast<double>(d[i * n + j]));
    }
  std::uint32_t prev = 0;
  for (double eps = 1e-6; eps < 2.0; eps *= 2.0) {
    const auto cur = covering_number(d, n, eps);
    if (prev) CHECK(cur <= prev);
    prev = cur;
  }
  CHECK(covering_number(d, n, diam) == 1);
  CHECK(covering_number(d, n, 1e-9) == n);  // all points distinct a.s.
}

TEST_CASE("greedy covering is within factor two of optimal on small instances") {
  const BranchLaw law = BranchLaw::looptree(1.5, {3e-2, 2000});
  EngineOptions opt;
  opt.resolution_floor = 1e-3;
  RngStream seeds(24, 0);
  for (int inst = 0; inst < 60; ++inst) {
    ThetaTrie trie(law, 400 + inst, opt);
    RngStream rng(24, inst + 1);
    const std::size_t n = 8 + rng.uniform_index(5);  // 8..12 points
    std::vector<PointAddress> pts(n);
    for (auto& p : pts) p = trie.sample_point(10, Measure::Mu, rng);
    std::vector<float> d(n * n, 0.f);
    double diam = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        d[i * n + j] = d[j * n + i] =
            static_cast<float>(trie.pair_distance(pts[i], pts[j], 10));
        diam = std::max(diam, static_cast<double>(d[i * n + j]));
      }
    for (const double f : {0.05, 0.15, 0.4}) {
      const double eps = f * diam;
      const auto greedy = covering_number(d, n, eps);
      const auto opt_n = optimal_cover(d, n, eps);
      REQUIRE(greedy >= opt_n);
      REQUIRE(greedy <= 2 * opt_n);
    }
  }
}

TEST_CASE("minkowski fit validation errors") {
  const BranchLaw law = BranchLaw::finite_demo();
  EngineOptions opt;
  CHECK_THROWS_WITH(minkowski_fit(law, 8, 50, {0.1, 0.2, 0.3}, 1, 1, opt),
                    Catch::Matchers::ContainsSubstring(">= 4 points"));
  CHECK_THROWS_WITH(minkowski_fit(law, 8, 50, {0.1, 0.2, 0.3, 0.5}, 1, 1, opt),
                    Catch::Matchers::ContainsSubstring("decade"));
  opt.resolution_floor = 0.05;
  CHECK_THROWS_WITH(
      minkowski_fit(law, 8, 50, {0.1, 0.3, 0.6, 1.2}, 1, 1, opt),
      Catch::Matchers::ContainsSubstring("resolution"));
  opt.resolution_floor = 0.0;
  CHECK_THROWS_WITH(
      minkowski_fit(law, 8, 50, {0.5, 1.5, 3.0, 6.0}, 1, 1, opt),
      Catch::Matchers::ContainsSubstring("diameter"));
}

TEST_CASE("minkowski fit runs on the demo model") {
  const BranchLaw law = BranchLaw::finite_demo();
  EngineOptions opt;
  opt.resolution_floor = 5e-3;
  const auto fit =
      minkowski_fit(law, 14, 200, {0.08, 0.16, 0.32, 0.64, 1.0}, 3, 33, opt);
  CHECK(std::isfinite(fit.slope));
  CHECK(fit.slope > 0.0);
  CHECK(fit.r2 >= 0.0);
  CHECK(fit.r2 <= 1.0);
  CHECK(fit.rows.size() == 15);
}

TEST_CASE("hausdorff probe on the demo model") {
  const BranchLaw law = BranchLaw::finite_demo();
  EngineOptions opt;
  opt.resolution_floor = 1e-3;
  const auto fit =
      hausdorff_probe(law, 16, 12, 600, {0.08, 0.16, 0.32, 0.64, 1.0}, 1, 44, opt);
  CHECK(std::isfinite(fit.slope));
  CHECK(fit.slope > 0.0);

  CHECK_THROWS_WITH(
      hausdorff_probe(law, 16, 12, 80, {1e-7, 1e-6, 1e-5, 1e-4, 2e-6}, 1, 45, opt),
      Catch::Matchers::ContainsSubstring("resolution") ||
          Catch::Matchers::ContainsSubstring("empty balls"));
}

TEST_CASE("CRT mass-scaling probe lands near dimension two") {
  const BranchLaw law = BranchLaw::brownian_crt({3e-3, 4000});
  EngineOptions opt;
  opt.resolution_floor = 2e-3;
  opt.max_depth = 40;
  const auto fit = hausdorff_probe(law, 28, 16, 1500,
                                   {0.05, 0.09, 0.16, 0.28, 0.5}, 1, 4646, opt);
  CHECK(fit.slope >= 1.5);
  CHECK(fit.slope <= 2.5);
}

TEST_CASE("convergence profile on the demo model") {
  const BranchLaw law = BranchLaw::finite_demo();
  EngineOptions opt;
  opt.resolution_floor = 1e-4;
  const std::vector<int> depths = {2, 4, 6, 8, 10};
  const auto prof = convergence_profile(law, depths, 2, 300, 55, opt, true, 50);
  REQUIRE(prof.mean_height.size() == depths.size());
  for (std::size_t i = 0; i < depths.size(); ++i) {
    CHECK(prof.mean_height[i] ==
          Catch::Approx(demo_mean_height(depths[i])).epsilon(0.05));
    if (i) CHECK(prof.mean_height[i] >= prof.mean_height[i - 1]);
  }
  for (const double d : prof.discrepancy) CHECK(d >= 0.0);

  CHECK_THROWS_AS(convergence_profile(law, {}, 2, 100, 1, opt),
                  std::domain_error);
  CHECK_THROWS_AS(convergence_profile(law, {4, 4}, 2, 100, 1, opt),
                  std::domain_error);
}

TEST_CASE("uncoupled profile agrees with the scalar recursion too") {
  const BranchLaw law = BranchLaw::finite_demo();
  EngineOptions opt;
  opt.resolution_floor = 1e-4;
  const auto prof =
      convergence_profile(law, {3, 6, 9}, 2, 300, 57, opt, false, 0);
  for (std::size_t i = 0; i < prof.depths.size(); ++i)
    CHECK(prof.mean_height[i] ==
          Catch::Approx(demo_mean_height(prof.depths[i])).epsilon(0.06));
  CHECK_FALSE(prof.coupled);
}

TEST_CASE("mean-height increments decay at the contraction rate") {
  const BranchLaw law = BranchLaw::finite_demo();
  EngineOptions opt;
  opt.resolution_floor = 1e-5;
  const std::vector<int> depths = {5, 6, 7, 8, 9, 10, 11, 12};
  const auto prof = convergence_profile(law, depths, 2, 500, 56, opt, true, 0);
  const double first = prof.mean_height[1] - prof.mean_height[0];
  const double last = prof.mean_height.back() -
                      prof.mean_height[prof.mean_height.size() - 2];
  const double ratio = std::pow(last / first, 1.0 / 6.0);
  CHECK(ratio == Catch::Approx(kRho).margin(0.05));
}

TEST_CASE("demo converges within the contraction-rate depth") {
  // 0.8615^m drops below 0.01 around m = 31; the mean height there sits
  // within about 1% of the fixpoint value
  int m_star = 0;
  double pow_rho = 1.0;
  while (pow_rho >= 0.01) {
    pow_rho *= kRho;
    ++m_star;
  }
  CHECK(m_star == 31);
  const BranchLaw law = BranchLaw::finite_demo();
  RngStream rng(25, 0);
  const int n = 60000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += sample_height_mc(law, m_star, 1e-2, rng);
  const double target = 0.5 / (1.0 - kRho);
  CHECK(acc / n == Catch::Approx(target).epsilon(0.02));
}

TEST_CASE("moment estimation") {
  RngStream rng(26, 0);
  const std::vector<double> constant(200, 1.7);
  const auto m = moment_estimate(constant, 3.0, rng);
  CHECK(m.estimate == Catch::Approx(std::pow(1.7, 3.0)).epsilon(1e-12));
  CHECK(m.stable);
  CHECK_THROWS_AS(moment_estimate({}, 1.0, rng), std::domain_error);
  CHECK_THROWS_AS(moment_estimate(constant, 0.5, rng), std::domain_error);

  // looptree heights have stable second moments
  const BranchLaw law = BranchLaw::looptree(1.5, {3e-2, 2000});
  std::vector<double> ys(3000);
  RngStream hrng(26, 1);
  for (auto& y : ys) y = sample_height_mc(law, 30, 5e-3, hrng);
  const auto m2 = moment_estimate(ys, 2.0, rng);
  CHECK(std::isfinite(m2.estimate));
  CHECK(m2.stable);
}

TEST_CASE("unbiased height and pair samplers hit the demo closed forms") {
  const BranchLaw law = BranchLaw::finite_demo();
  RngStream rng(27, 0);
  const int n = 30000;
  double acc = 0.0, acc2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double y = sample_height_mc(law, 60, 1e-2, rng);
    acc += y;
    acc2 += y * y;
  }
  const double mean_y = acc / n;
  const double se = std::sqrt((acc2 / n - mean_y * mean_y) / n);
  const double target = 0.5 / (1.0 - kRho);
  CHECK(mean_y == Catch::Approx(target).margin(4.0 * se));

  double accp = 0.0, accp2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = sample_pair_mc(law, 60, 1e-2, rng);
    accp += d;
    accp2 += d * d;
  }
  const double mean_d = accp / n;
  const double se_d = std::sqrt((accp2 / n - mean_d * mean_d) / n);
  // the pair fixpoint: d = ra*d + 0.5*(1 + ra*E[Y])
  const double ra = 0.574349177498517;
  const double target_d = 0.5 * (1.0 + ra * target) / (1.0 - ra);
  CHECK(mean_d == Catch::Approx(target_d).margin(4.0 * se_d));
}
