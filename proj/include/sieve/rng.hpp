#pragma once

// Seedable deterministic random streams. Samplers are hand-rolled on top of
// mt19937_64 so that identical (seed, stream) pairs reproduce identical draws
// regardless of the standard library's distribution implementations.
//
// binomial() uses the order-statistic split: the k-th smallest of n uniforms
// is Beta(k, n+1-k), so one beta draw halves n. poisson() uses the dual split
// through the Gamma arrival time of the m-th event. Both are exact and cost
// O(log n) gamma draws, which keeps large-state chain simulation cheap.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace sieve {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Well-separated seed for worker/path substreams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  std::uint64_t a = splitmix64_next(s);
  s = a ^ (stream * 0xbf58476d1ce4e5b9ULL + 0x94d049bb133111ebULL);
  return splitmix64_next(s);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng substream(std::uint64_t seed, std::uint64_t stream) {
    return Rng(derive_seed(seed, stream));
  }

  std::uint64_t raw() { return engine_(); }

  // uniform on the open interval (0,1)
  double uniform01() {
    for (;;) {
      double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  double exponential(double rate = 1.0) {
    if (!(rate > 0)) throw std::invalid_argument("exponential: rate must be positive");
    return -std::log(uniform01()) / rate;
  }

  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Marsaglia-Tsang for shape >= 1, boosted for shape < 1.
  double gamma(double shape, double scale = 1.0) {
    if (!(shape > 0) || !(scale > 0)) throw std::invalid_argument("gamma: parameters must be positive");
    if (shape < 1.0) {
      double u = uniform01();
      return gamma(shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    double d = shape - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      double u = uniform01();
      double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
  }

  double beta(double a, double b) {
    double x = gamma(a);
    double y = gamma(b);
    return x / (x + y);
  }

  // number of failures before the first success; success probability s
  long long geometric_failures(double s) {
    if (!(s > 0.0) || s > 1.0) throw std::invalid_argument("geometric_failures: s outside (0,1]");
    if (s >= 1.0) return 0;
    double r = std::floor(std::log(uniform01()) / std::log1p(-s));
    if (r > 9.0e18) return 9000000000000000000LL;
    return static_cast<long long>(r);
  }

  long long binomial(long long n, double p) {
    if (n < 0) throw std::invalid_argument("binomial: n < 0");
    long long acc = 0;
    while (n > 64) {
      if (p <= 0.0) return acc;
      if (p >= 1.0) return acc + n;
      long long k = n / 2 + 1;
      double x = beta(static_cast<double>(k), static_cast<double>(n - k + 1));
      if (x <= p) {
        acc += k;
        n -= k;
        p = (p - x) / (1.0 - x);
      } else {
        n = k - 1;
        p = p / x;
      }
    }
    if (p > 0.0) {
      if (p >= 1.0) return acc + n;
      for (long long i = 0; i < n; ++i)
        if (uniform01() < p) ++acc;
    }
    return acc;
  }

  long long poisson(double lambda) {
    if (lambda < 0 || !std::isfinite(lambda)) throw std::invalid_argument("poisson: bad lambda");
    if (lambda > 4.0e15) throw std::invalid_argument("poisson: lambda too large for exact sampling");
    long long acc = 0;
    while (lambda >= 30.0) {
      long long m = static_cast<long long>(std::floor(0.875 * lambda));
      double g = gamma(static_cast<double>(m));
      if (g <= lambda) {
        acc += m;
        lambda -= g;
      } else {
        return acc + binomial(m - 1, lambda / g);
      }
    }
    // multiplication method for the remainder
    if (lambda > 0.0) {
      double limit = std::exp(-lambda);
      double prod = uniform01();
      while (prod > limit) {
        ++acc;
        prod *= uniform01();
      }
    }
    return acc;
  }

  // number of failures before the m-th success; success probability s per trial
  long long negative_binomial(long long m, double s) {
    if (m < 0) throw std::invalid_argument("negative_binomial: m < 0");
    if (!(s > 0.0) || s > 1.0) throw std::invalid_argument("negative_binomial: s outside (0,1]");
    if (m == 0 || s >= 1.0) return 0;
    double mean = static_cast<double>(m) * (1.0 - s) / s;
    if (m <= 64 && mean < 1.0e9) {
      long long total = 0;
      for (long long i = 0; i < m; ++i) total += geometric_failures(s);
      return total;
    }
    // Gamma-Poisson mixture: NegBin(m,s) = Poisson(Gamma(m) * (1-s)/s)
    double lam = gamma(static_cast<double>(m)) * (1.0 - s) / s;
    if (lam > 4.0e15) throw std::invalid_argument("negative_binomial: value too large for exact sampling");
    return poisson(lam);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sieve
