#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>

namespace stablelike {

// SplitMix64 (Steele, Lea & Flood). One 64-bit word of state, full-period,
// and cheap to split: substreams are derived by remixing the root seed with
// the stream index, so a batch of paths can be generated in any order, on
// any number of workers, and still reproduce bit-identical draws.
class Rng {
public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // Uniform on [0,1), 53 usable bits.
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform on the open interval (0,1); safe to invert or take logs of.
  double uniform_open01() {
    return (static_cast<double>((*this)() >> 12) + 0.5) * 0x1.0p-52;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // +1 or -1 with equal probability.
  double sign() { return ((*this)() & 1u) ? 1.0 : -1.0; }

  // Box-Muller pair of independent standard normals.
  void gaussian_pair(double& a, double& b) {
    const double two_pi = 6.283185307179586476925286766559;
    double u1 = uniform_open01();
    double u2 = uniform01();
    double m = std::sqrt(-2.0 * std::log(u1));
    a = m * std::cos(two_pi * u2);
    b = m * std::sin(two_pi * u2);
  }

  double gaussian() {
    double a, b;
    gaussian_pair(a, b);
    return a;
  }

  long long poisson(double mean) {
    std::poisson_distribution<long long> dist(mean);
    return dist(*this);
  }

private:
  std::uint64_t state_;
};

// Seed for the k-th substream of a root seed. Remixes (root, k) through the
// SplitMix64 output function twice so that nearby indices land far apart.
inline std::uint64_t substream_seed(std::uint64_t root, std::uint64_t k) {
  Rng g(root ^ (0xD1B54A32D192ED03ull * (k + 1)));
  g();
  return g();
}

// Uniform direction on S^{d-1}. d=1 gives +/-1; d>=2 normalizes a standard
// Gaussian vector.
inline void sample_direction(Rng& rng, int d, std::span<double> out) {
  if (d == 1) {
    out[0] = rng.sign();
    return;
  }
  for (;;) {
    double norm2 = 0.0;
    for (int i = 0; i < d; i += 2) {
      double a, b;
      rng.gaussian_pair(a, b);
      out[i] = a;
      if (i + 1 < d) out[i + 1] = b;
    }
    for (int i = 0; i < d; ++i) norm2 += out[i] * out[i];
    if (norm2 > 1e-300) {
      double inv = 1.0 / std::sqrt(norm2);
      for (int i = 0; i < d; ++i) out[i] *= inv;
      return;
    }
  }
}

}  // namespace stablelike
