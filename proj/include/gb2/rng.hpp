#pragma once

// Deterministic random number generation. Engine wraps std::mt19937_64; all
// variates are derived from raw 64-bit draws with fixed arithmetic so that
// streams are reproducible across platforms and thread counts. Independent
// substreams are obtained by mixing (seed, stream) through splitmix64.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace gb2::rng {

// splitmix64 finalizer: bijective 64-bit mix used to decorrelate substreams.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed) + 0x632be59bd9b4e019ULL * (stream + 1));
}

class Engine {
 public:
  explicit Engine(std::uint64_t seed) : gen_(seed) {}
  Engine(std::uint64_t seed, std::uint64_t stream) : gen_(mix_seed(seed, stream)) {}

  std::uint64_t next() { return gen_(); }

  // Uniform on (0,1), strictly excluding both endpoints: 53-bit mantissa with
  // a half-ulp offset so log(u) and log1p(-u) are always finite.
  double uniform01() {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Unbiased integer in [0, n) via rejection on the top bits.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::domain_error("rng: below(0)");
    const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

  // Standard normal via Box-Muller; caches the second variate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(angle);
    have_spare_ = true;
    return r * std::cos(angle);
  }

  // Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape < 1 handled with the
  // boost Gamma(a) = Gamma(a+1) * U^(1/a).
  double gamma(double shape) {
    if (!std::isfinite(shape) || !(shape > 0.0)) {
      throw std::domain_error("rng: gamma shape must be finite and > 0");
    }
    if (shape < 1.0) {
      const double u = uniform01();
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
      const double u = uniform01();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gb2::rng
