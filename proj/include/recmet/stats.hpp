#pragma once

// Small numerics used by tests and analysis: regularized incomplete beta,
// one-sample Kolmogorov-Smirnov, least squares, bootstrap errors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "recmet/rng.hpp"

namespace recmet {

// Regularized incomplete beta I_x(a,b) by Lentz continued fractions.
inline double ibeta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  const auto cont_frac = [](double a_, double b_, double x_) {
    const double tiny = 1e-300;
    double c = 1.0, d = 1.0 - (a_ + b_) * x_ / (a_ + 1.0);
    if (std::abs(d) < tiny) d = tiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 400; ++m) {
      const double m2 = 2.0 * m;
      double num = m * (b_ - m) * x_ / ((a_ + m2 - 1.0) * (a_ + m2));
      d = 1.0 + num * d;
      if (std::abs(d) < tiny) d = tiny;
      c = 1.0 + num / c;
      if (std::abs(c) < tiny) c = tiny;
      d = 1.0 / d;
      h *= d * c;
      num = -(a_ + m) * (a_ + b_ + m) * x_ / ((a_ + m2) * (a_ + m2 + 1.0));
      d = 1.0 + num * d;
      if (std::abs(d) < tiny) d = tiny;
      c = 1.0 + num / c;
      if (std::abs(c) < tiny) c = tiny;
      d = 1.0 / d;
      const double del = d * c;
      h *= del;
      if (std::abs(del - 1.0) < 1e-15) break;
    }
    return h;
  };
  if (x < (a + 1.0) / (a + b + 2.0))
    return std::exp(ln_front) * cont_frac(a, b, x) / a;
  return 1.0 - std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                        b * std::log1p(-x) + a * std::log(x)) *
                   cont_frac(b, a, 1.0 - x) / b;
}

inline double beta_cdf(double a, double b, double x) { return ibeta(a, b, x); }

// Asymptotic Kolmogorov survival function Q(lambda).
inline double ks_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-12) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct KsResult {
  double d = 0.0;
  double p_value = 1.0;
};

// One-sample KS against a continuous CDF.
inline KsResult ks_test(std::vector<double> samples,
                        const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::domain_error("ks_test: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  const double sn = std::sqrt(n);
  return {d, ks_q((sn + 0.12 + 0.11 / sn) * d)};
}

inline double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double acc = 0.0;
  for (double x : v) acc += (x - m) * (x - m);
  return acc / static_cast<double>(v.size() - 1);
}

inline double std_error(const std::vector<double>& v) {
  return std::sqrt(sample_variance(v) / static_cast<double>(v.size()));
}

inline double median(std::vector<double> v) {
  if (v.empty()) throw std::domain_error("median: empty");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

struct OlsFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  double slope_stderr = 0.0;
};

inline OlsFit ols(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::domain_error("ols: need >= 2 paired points");
  const double n = static_cast<double>(x.size());
  const double mx = mean(x), my = mean(y);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::domain_error("ols: degenerate x grid");
  OlsFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  f.r2 = syy == 0.0 ? 1.0 : 1.0 - ss_res / syy;
  if (x.size() > 2) f.slope_stderr = std::sqrt(ss_res / (n - 2.0) / sxx);
  return f;
}

// Bootstrap standard error of the empirical p-th moment.
inline double bootstrap_moment_stderr(RngStream& rng,
                                      const std::vector<double>& samples,
                                      double p, int resamples = 200) {
  const std::size_t n = samples.size();
  std::vector<double> stats(resamples);
  for (int r = 0; r < resamples; ++r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      acc += std::pow(samples[rng.uniform_index(n)], p);
    stats[r] = acc / static_cast<double>(n);
  }
  return std::sqrt(sample_variance(stats));
}

}  // namespace recmet
