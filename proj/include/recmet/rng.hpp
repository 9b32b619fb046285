#pragma once

// Counter-based random streams: every draw is a pure function of
// (seed, stream_id, counter), so replicate-level parallelism and lazy
// expansion order cannot change any realization.

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace recmet {

namespace detail {

constexpr std::uint64_t kSkeinParity = 0x1BD11BDADA9FC1A5ull;

inline constexpr std::uint64_t rotl64(std::uint64_t x, unsigned r) {
  return (x << r) | (x >> (64u - r));
}

// Threefry2x64, 20 rounds (Salmon et al. block-cipher construction).
struct U128 {
  std::uint64_t lo, hi;
};

inline U128 threefry2x64(std::uint64_t k0, std::uint64_t k1, std::uint64_t c0,
                         std::uint64_t c1) {
  constexpr unsigned R[8] = {16, 42, 12, 31, 16, 32, 24, 21};
  const std::uint64_t ks[3] = {k0, k1, kSkeinParity ^ k0 ^ k1};
  std::uint64_t x0 = c0 + ks[0];
  std::uint64_t x1 = c1 + ks[1];
  for (unsigned r = 0; r < 20; ++r) {
    x0 += x1;
    x1 = rotl64(x1, R[r % 8]);
    x1 ^= x0;
    if (r % 4 == 3) {
      const unsigned j = r / 4 + 1;
      x0 += ks[j % 3];
      x1 += ks[(j + 1) % 3];
      x1 += j;
    }
  }
  return {x0, x1};
}

// splitmix64 finalizer, used for hashing addresses into stream ids.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return detail::mix64(h ^ (v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2)));
}

class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id)
      : seed_(seed), stream_(stream_id), ctr_(0), spare_(0), has_spare_(false) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

  // A fresh, statistically independent stream for a sub-task.
  RngStream derived(std::uint64_t substream) const {
    return RngStream(seed_, hash_combine(stream_, substream));
  }

  std::uint64_t next_u64() {
    if (have_buf_) {
      have_buf_ = false;
      return buf_;
    }
    const auto v = detail::threefry2x64(seed_, stream_, ctr_++, 0);
    buf_ = v.hi;
    have_buf_ = true;
    return v.lo;
  }

  // Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1); safe under log().
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Index in [0, n) without modulo bias worth caring about at n << 2^64.
  std::uint64_t uniform_index(std::uint64_t n) { return next_u64() % n; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // Marsaglia polar method.
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

  double exponential() { return -std::log(uniform_pos()); }

  // Marsaglia-Tsang for shape >= 1, boosted for shape < 1.
  double gamma(double shape) {
    if (!(shape > 0.0)) throw std::domain_error("gamma: shape must be > 0");
    if (shape < 1.0) {
      const double u = uniform_pos();
      return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t ctr_;
  std::uint64_t buf_ = 0;
  bool have_buf_ = false;
  double spare_;
  bool has_spare_;
};

}  // namespace recmet
