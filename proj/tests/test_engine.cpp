#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "recmet/engine.hpp"
#include "recmet/models.hpp"
#include "recmet/rng.hpp"

using namespace recmet;

namespace {

constexpr double kRho = 1.5 * 0.574349177498517;  // 1.5 * 2^-0.8
constexpr double kRa = 0.574349177498517;         // (1/2)^0.8

// scalar mean recursions for the demo model: E[Y_m] and E[D_m]
double demo_mean_height(int m) {
  double y = 0.0;
  for (int k = 0; k < m; ++k) y = kRho * y + 0.5;
  return y;
}
double demo_mean_pair(int m) {
  double d = 0.0;
  for (int k = 1; k <= m; ++k)
    d = kRa * d + 0.5 * (1.0 + kRa * demo_mean_height(k - 1));
  return d;
}

}  // namespace

TEST_CASE("depth zero gives zero distances") {
  const BranchLaw law = BranchLaw::finite_demo();
  ThetaTrie trie(law, 1, {});
  RngStream rng(1, 1);
  const PointAddress p = trie.sample_point(8, Measure::Mu, rng);
  CHECK(trie.root_distance(p, 0) == 0.0);
  const PointAddress q = trie.sample_point(8, Measure::Mu, rng);
  CHECK(trie.pair_distance(p, q, 0) == 0.0);
  CHECK(trie.pair_distance(p, p, 8) == 0.0);
  const PointAddress empty = trie.sample_point(0, Measure::Mu, rng);
  CHECK(empty.letters.empty());
}

TEST_CASE("demo mean height matches the scalar recursion") {
  const BranchLaw law = BranchLaw::finite_demo();
  const double exact = demo_mean_height(14);
  double acc = 0.0;
  const int tries = 500, pts = 20;
  for (int r = 0; r < tries; ++r) {
    ThetaTrie trie(law, 1000 + r, {});
    RngStream rng(7, r);
    for (int p = 0; p < pts; ++p)
      acc += trie.root_distance(trie.sample_point(14, Measure::Mu, rng), 14);
  }
  const double est = acc / (tries * pts);
  CHECK(est == Catch::Approx(exact).epsilon(0.03));
}

TEST_CASE("demo mean pair distance matches the linear recursion") {
  const BranchLaw law = BranchLaw::finite_demo();
  const double exact = demo_mean_pair(14);
  double acc = 0.0;
  const int tries = 600, pairs = 10;
  for (int r = 0; r < tries; ++r) {
    ThetaTrie trie(law, 5000 + r, {});
    RngStream rng(8, r);
    for (int p = 0; p < pairs; ++p) {
      const PointAddress a = trie.sample_point(14, Measure::Mu, rng);
      const PointAddress b = trie.sample_point(14, Measure::Mu, rng);
      acc += trie.pair_distance(a, b, 14);
    }
  }
  const double est = acc / (tries * pairs);
  CHECK(est == Catch::Approx(exact).epsilon(0.04));
}

TEST_CASE("monotone coupling in the depth") {
  EngineOptions opt;
  opt.resolution_floor = 1e-3;
  for (const auto& law : {BranchLaw::finite_demo(),
                          BranchLaw::looptree(1.5, {3e-2, 4000})}) {
    for (int r = 0; r < 20; ++r) {
      ThetaTrie trie(law, 99 + r, opt);
      RngStream rng(9, r);
      for (int p = 0; p < 5; ++p) {
        const PointAddress a = trie.sample_point(14, Measure::Mu, rng);
        const PointAddress b = trie.sample_point(14, Measure::Mu, rng);
        double prev_y = -1.0, prev_d = -1.0;
        for (int m = 0; m <= 14; ++m) {
          const double y = trie.root_distance(a, m);
          const double d = trie.pair_distance(a, b, m);
          REQUIRE(y >= prev_y);
          REQUIRE(d >= prev_d);
          prev_y = y;
          prev_d = d;
        }
      }
    }
  }
}

TEST_CASE("prefix stability: deep queries never change shallow values") {
  ThetaTrie trie(BranchLaw::looptree(1.5, {3e-2, 4000}), 4321, {});
  RngStream rng(10, 1);
  const PointAddress a = trie.sample_point(10, Measure::Mu, rng);
  const PointAddress b = trie.sample_point(10, Measure::Mu, rng);
  const double y5 = trie.root_distance(a, 5);
  const double d5 = trie.pair_distance(a, b, 5);
  trie.root_distance(a, 10);
  trie.pair_distance(a, b, 10);
  REQUIRE(trie.root_distance(a, 5) == y5);
  REQUIRE(trie.pair_distance(a, b, 5) == d5);
}

TEST_CASE("distance matrices are exact finite metrics") {
  EngineOptions opt;
  opt.resolution_floor = 1e-3;
  const BranchLaw law = BranchLaw::looptree(1.5, {3e-2, 4000});
  for (int rep = 0; rep < 50; ++rep) {
    ThetaTrie trie(law, 700 + rep, opt);
    RngStream rng(11, rep);
    const auto m = trie.distance_matrix(5, 12, rng);
    const std::uint32_t n = 6;
    for (std::uint32_t i = 0; i < n; ++i) {
      REQUIRE(m.at(i, i) == 0.0);
      for (std::uint32_t j = 0; j < n; ++j) REQUIRE(m.at(i, j) == m.at(j, i));
    }
    for (std::uint32_t i = 0; i < n; ++i)
      for (std::uint32_t j = 0; j < n; ++j)
        for (std::uint32_t k = 0; k < n; ++k)
          REQUIRE(m.at(i, j) <= m.at(i, k) + m.at(k, j) + 1e-9);
  }
}

TEST_CASE("identical seeds reproduce matrices bit for bit") {
  const BranchLaw law = BranchLaw::looptree(1.5, {3e-2, 4000});
  ThetaTrie t1(law, 31415, {});
  ThetaTrie t2(law, 31415, {});
  RngStream r1(12, 0), r2(12, 0);
  const auto m1 = t1.distance_matrix(4, 10, r1);
  const auto m2 = t2.distance_matrix(4, 10, r2);
  REQUIRE(m1.entries == m2.entries);

  ThetaTrie t3(law, 31416, {});
  RngStream r3(12, 0);
  const auto m3 = t3.distance_matrix(4, 10, r3);
  CHECK(m1.entries != m3.entries);
}

TEST_CASE("depth-1 sampling reproduces the block distances exactly") {
  const BranchLaw law = BranchLaw::looptree(1.5, {3e-2, 4000});
  ThetaTrie trie(law, 2718, {});
  RngStream rng(13, 0);
  const auto m = trie.distance_matrix(8, 1, rng);
  const BranchParams& par = trie.root_params();
  for (std::uint32_t i = 0; i < 8; ++i) {
    const std::uint32_t li = m.addresses[i].letters.at(0);
    REQUIRE(m.at(0, i + 1) == par.L(0, li));
    for (std::uint32_t j = 0; j < i; ++j)
      REQUIRE(m.at(i + 1, j + 1) == par.L(li, m.addresses[j].letters.at(0)));
  }
}

TEST_CASE("point sampling follows the requested measure") {
  const BranchLaw demo = BranchLaw::finite_demo();
  ThetaTrie trie(demo, 5, {});
  RngStream rng(14, 0);
  int first = 0;
  const int n = 4000;
  for (int i = 0; i < n; ++i)
    first += trie.sample_point(1, Measure::Mu, rng).letters[0] == 0;
  CHECK(std::abs(first / double(n) - 0.5) < 3.0 * std::sqrt(0.25 / n));

  // mu_bar frequencies track the r-weights of the realized root
  const BranchLaw lt = BranchLaw::looptree(1.5, {3e-2, 4000});
  ThetaTrie t2(lt, 6, {});
  const double r0 = t2.root_params().r(0);
  int hits = 0;
  for (int i = 0; i < n; ++i)
    hits += t2.sample_point(1, Measure::MuBar, rng).letters[0] == 0;
  CHECK(std::abs(hits / double(n) - r0) < 4.0 * std::sqrt(0.25 / n));
}

TEST_CASE("cut lines") {
  const BranchLaw demo = BranchLaw::finite_demo();
  ThetaTrie trie(demo, 77, {});

  SECTION("epsilon >= 1 stops at the first level") {
    const CutLine line = trie.cut_line(1.0, 100000);
    REQUIRE(line.nodes.size() == 2);
    for (const auto& w : line.nodes) CHECK(w.size() == 1);
  }
  SECTION("epsilon = 0.3 stops at the length-2 words") {
    const CutLine line = trie.cut_line(0.3, 100000);
    REQUIRE(line.nodes.size() == 4);
    double mass = 0.0;
    for (std::size_t i = 0; i < line.nodes.size(); ++i) {
      CHECK(line.nodes[i].size() == 2);
      CHECK(line.r_mass[i] == 0.25);
      mass += line.r_mass[i];
    }
    CHECK(mass == Catch::Approx(1.0).margin(1e-12));
  }
  SECTION("epsilon = 0.9 stops at the length-1 words") {
    const CutLine line = trie.cut_line(0.9, 100000);
    REQUIRE(line.nodes.size() == 2);
    for (const auto& w : line.nodes) CHECK(w.size() == 1);
  }
  SECTION("mass conservation with remainder atoms on the looptree") {
    ThetaTrie lt(BranchLaw::looptree(1.5, {3e-2, 4000}), 78, {});
    const CutLine line = lt.cut_line(0.05, 200000);
    REQUIRE_FALSE(line.budget_exhausted);
    double mass = 0.0;
    for (const double m : line.r_mass) mass += m;
    CHECK(mass == Catch::Approx(1.0).margin(1e-6));
  }
  SECTION("node budget exhaustion flags a partial result") {
    EngineOptions opt;
    opt.max_nodes = 8;
    ThetaTrie lt(BranchLaw::looptree(1.5, {3e-2, 4000}), 79, opt);
    const CutLine line = lt.cut_line(1e-4, 8);
    CHECK(line.budget_exhausted);
    double mass = 0.0;
    for (const double m : line.r_mass) mass += m;
    for (const double m : line.pending_r_mass) mass += m;
    CHECK(mass == Catch::Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("big subspace diagnostic") {
  EngineOptions opt;
  opt.height_depth = 12;
  ThetaTrie trie(BranchLaw::finite_demo(), 80, opt);
  RngStream rng(15, 0);
  const CutLine line = trie.cut_line(0.5, 100000);
  const auto big = trie.big_subspace_count(line, 0.5, 6, rng);
  CHECK(big > 0);  // scaled heights ~ 0.5^0.8 * Y with Y around 3.6

  RngStream rng2(15, 1);
  const auto near_diam = trie.big_subspace_count(line, 50.0, 6, rng2);
  CHECK(near_diam == 0);

  // monotone in epsilon on the same trie and cut line
  RngStream rng3(15, 2);
  const auto lo = trie.big_subspace_count(line, 0.3, 6, rng3);
  RngStream rng4(15, 2);
  const auto hi = trie.big_subspace_count(line, 0.8, 6, rng4);
  CHECK(lo >= hi);
}

TEST_CASE("resource limits") {
  EngineOptions opt;
  opt.max_depth = 6;
  ThetaTrie trie(BranchLaw::finite_demo(), 81, opt);
  RngStream rng(16, 0);
  const PointAddress p = trie.sample_point(6, Measure::Mu, rng);
  CHECK_THROWS_AS(trie.root_distance(p, 7), ResourceError);

  EngineOptions tight;
  tight.max_nodes = 3;
  ThetaTrie small(BranchLaw::finite_demo(), 82, tight);
  RngStream rng2(16, 1);
  const PointAddress q = small.sample_point(2, Measure::Mu, rng2);
  CHECK_THROWS_AS(small.root_distance(q, 12), ResourceError);
}
