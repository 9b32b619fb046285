#include <catch2/catch_amalgamated.hpp>

#include "recmet/rng.hpp"
#include "recmet/stats.hpp"

using namespace recmet;

TEST_CASE("regularized incomplete beta against reference values") {
  // frozen from an independent implementation
  struct Case {
    double a, b, x, val;
  };
  const Case cases[] = {
      {0.5, 1.0, 0.25, 0.5},
      {0.5, 1.0, 0.9, 0.9486832980505138},
      {2.0, 3.0, 0.5, 0.6875},
      {0.5, 1.0 / 3.0, 0.2, 0.22316279021804727},
      {0.5, 0.333, 0.7, 0.5015549293585781},
      {1.5, 2.5, 0.33, 0.46428986149332535},
      {3.0, 1.0, 0.5, 0.125},
      {1.0 / 3.0, 1.0, 0.001, 0.10000000000000002},
  };
  for (const auto& c : cases)
    CHECK(ibeta(c.a, c.b, c.x) == Catch::Approx(c.val).epsilon(1e-10));
  CHECK(ibeta(2, 2, 0.0) == 0.0);
  CHECK(ibeta(2, 2, 1.0) == 1.0);
}

TEST_CASE("Kolmogorov survival function") {
  CHECK(ks_q(0.5) == Catch::Approx(0.9639452436648751).epsilon(1e-9));
  CHECK(ks_q(1.0) == Catch::Approx(0.26999967167735456).epsilon(1e-9));
  CHECK(ks_q(1.36) == Catch::Approx(0.049485876755377876).epsilon(1e-9));
}

TEST_CASE("KS test calibration on the null") {
  RngStream rng(100, 1);
  int rejections = 0;
  const int trials = 200;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> xs(500);
    for (auto& x : xs) x = rng.uniform();
    if (ks_test(xs, [](double x) { return x; }).p_value < 0.05) ++rejections;
  }
  // ~5% expected; allow generous binomial slack
  CHECK(rejections < 25);
}

TEST_CASE("ols recovers a known line") {
  std::vector<double> x, y;
  for (int i = 0; i < 20; ++i) {
    x.push_back(i);
    y.push_back(3.0 * i - 2.0);
  }
  const OlsFit f = ols(x, y);
  CHECK(f.slope == Catch::Approx(3.0).epsilon(1e-12));
  CHECK(f.intercept == Catch::Approx(-2.0).margin(1e-10));
  CHECK(f.r2 == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(f.slope_stderr == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("median and moments") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(mean({1.0, 2.0, 3.0}) == Catch::Approx(2.0));
  CHECK(std_error({5.0, 5.0, 5.0}) == 0.0);
}
