#pragma once

// Exact limit laws of the reversed tail-count chain: entrance law, mixed
// negative binomial transitions, finite-dimensional count laws, zero-modified
// geometric gaps, means, and direct simulation of the limiting chain.
//
// Chain values are carried as doubles. Steps are sampled exactly (geometric
// convolution for small states, Gamma-Poisson negative binomial up to 1e12);
// past 1e12 the branching fluctuation is below double resolution and the step
// uses the conditional mean with CLT noise.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "hazard.hpp"
#include "numeric.hpp"
#include "rng.hpp"

namespace sieve {

class LimitLaw {
 public:
  explicit LimitLaw(HazardModel model) : model_(std::move(model)), mu_log_(mu_log(model_)) {
    if (!std::isfinite(mu_log_) || mu_log_ <= 0)
      throw std::domain_error("LimitLaw: requires finite positive mu_log");
  }

  const HazardModel& model() const { return model_; }
  double log_spacing_mean() const { return mu_log_; }

  // P(Q_0 = m) = mu_{m,0} / (m mu_log)
  double entrance_pmf(long long m) const {
    if (m < 1) throw std::invalid_argument("entrance_pmf: m must be >= 1");
    return mu_moment(model_, m, 0) / (static_cast<double>(m) * mu_log_);
  }

  // P(Q_0 > m); closed Pochhammer ratio for gem, complement sum otherwise
  double entrance_tail(long long m) const {
    if (m < 0) return 1.0;
    if (model_.kind() == HazardKind::gem) {
      double theta = model_.theta();
      double r = 1.0;
      for (long long t = 0; t < m; ++t)
        r *= (1.0 + static_cast<double>(t)) / (1.0 + theta + static_cast<double>(t));
      return r;
    }
    KahanSum cum;
    for (long long k = 1; k <= m; ++k) cum.add(entrance_pmf(k));
    return std::max(0.0, 1.0 - cum.value());
  }

  // p_{m,n} = C(n-1, m-1) mu_{n-m, m}, zero for n < m
  double transition_pmf(long long m, long long n) const {
    if (m < 1) throw std::invalid_argument("transition_pmf: m must be >= 1");
    if (n < m) return 0.0;
    return std::exp(log_binomial(static_cast<double>(n - 1), static_cast<double>(m - 1)) +
                    log_mu_moment(model_, n - m, m));
  }

  // sum_{n > N} p_{m,n} = E[ I_H(N+1-m, m) ]  (mixed Pascal tail)
  double transition_row_tail(long long m, long long N) const {
    if (m < 1 || N < m) throw std::invalid_argument("transition_row_tail: need N >= m >= 1");
    long long k = N + 1 - m;
    if (model_.kind() == HazardKind::atoms) {
      const auto& h = model_.atom_values();
      const auto& w = model_.atom_weights();
      double s = 0.0;
      for (std::size_t idx = 0; idx < h.size(); ++idx)
        s += w[idx] * reg_inc_beta(static_cast<double>(k), static_cast<double>(m), h[idx]);
      return s;
    }
    return integrate_halfline([this, k, m](double s) {
      return reg_inc_beta(static_cast<double>(k), static_cast<double>(m), -std::expm1(-s)) *
             model_.spacing_density(s);
    });
  }

  // P(N_i = n_i, 0 <= i <= k); zero unless n_0 > 0 and all n_i >= 0
  double fdd_counts_pmf(const std::vector<long long>& counts) const {
    if (counts.empty()) throw std::invalid_argument("fdd_counts_pmf: empty tuple");
    if (counts.front() <= 0) return 0.0;
    long long total = 0;
    for (long long c : counts) {
      if (c < 0) return 0.0;
      total += c;
    }
    KahanSum acc;
    acc.add(std::lgamma(static_cast<double>(total)));  // (total-1)!
    long long prefix = 0;
    for (long long c : counts) {
      acc.add(-std::lgamma(static_cast<double>(c) + 1.0));
      acc.add(log_mu_moment(model_, c, prefix));
      prefix += c;
    }
    return std::exp(acc.value()) / mu_log_;
  }

  // gap hitting probability h_j = P(G_j >= 1) = (1 - mu_{0,j})/(j mu_log)
  double gap_hitting(long long j) const {
    if (j < 1) throw std::invalid_argument("gap_hitting: j must be >= 1");
    return (1.0 - mu_moment(model_, 0, j)) / (static_cast<double>(j) * mu_log_);
  }

  // P(G_j >= k) = h_j mu_{0,j}^{k-1} for k >= 1
  double gap_tail(long long j, long long k) const {
    if (k < 1) throw std::invalid_argument("gap_tail: k must be >= 1");
    return gap_hitting(j) * std::pow(mu_moment(model_, 0, j), static_cast<double>(k - 1));
  }

  // E G_j = 1/(j mu_log)
  double mean_gap(long long j) const {
    if (j < 1) throw std::invalid_argument("mean_gap: j must be >= 1");
    return 1.0 / (static_cast<double>(j) * mu_log_);
  }

  // E Q_j = (mu_{0,-1} - 1) mu_{0,-1}^j / mu_log, infinite when mu_{0,-1} is
  double mean_tail_count(long long j) const {
    if (j < 0) throw std::invalid_argument("mean_tail_count: j must be >= 0");
    double m01 = mu_moment(model_, 0, -1);
    if (!std::isfinite(m01)) return kInf;
    return (m01 - 1.0) * std::pow(m01, static_cast<double>(j)) / mu_log_;
  }

  // P(N_0 > k) by quadrature of the delay-conditioned integral
  double n0_tail_integral(long long k) const {
    if (k < 0) throw std::invalid_argument("n0_tail_integral: k must be >= 0");
    if (k == 0) return 1.0;
    if (model_.kind() == HazardKind::atoms) {
      const auto& h = model_.atom_values();
      const auto& w = model_.atom_weights();
      double acc = 0.0;
      for (std::size_t idx = 0; idx < h.size(); ++idx) {
        double inner = -std::log1p(-h[idx]);
        double pw = 1.0;
        for (long long i = 1; i <= k; ++i) {
          pw *= h[idx];
          inner -= pw / static_cast<double>(i);
        }
        acc += w[idx] * inner;
      }
      return acc / mu_log_;
    }
    double integral = integrate_halfline([this, k](double s) {
      double u = -std::expm1(-s);
      return model_.spacing_survival(s) * std::pow(u, static_cast<double>(k));
    });
    return integral / mu_log_;
  }

  // gem closed form: P(N_0 > k) = (1)_k / (1+theta)_k
  static double n0_tail_gem(double theta, long long k) {
    if (k < 0) throw std::invalid_argument("n0_tail_gem: k must be >= 0");
    double r = 1.0;
    for (long long t = 0; t < k; ++t)
      r *= (1.0 + static_cast<double>(t)) / (1.0 + theta + static_cast<double>(t));
    return r;
  }

  // E K_j = 1/(j mu_log) for j >= 1
  double mean_small_count(long long j) const {
    if (j < 1) throw std::invalid_argument("mean_small_count: j must be >= 1");
    return 1.0 / (static_cast<double>(j) * mu_log_);
  }

  // E K_0 = E[-log H] / mu_log
  double mean_empty_count() const { return mu_log_h(model_) / mu_log_; }

  // exact draw from the entrance law by a lazy inverse-CDF walk
  long long sample_entrance(Rng& rng) const {
    double u = rng.uniform01();
    const bool beta_family = model_.kind() != HazardKind::atoms;
    const double a = model_.shape_a();
    const double b = model_.shape_b();
    std::vector<double> atom_pow;
    if (!beta_family) {
      atom_pow.assign(model_.atom_values().size(), 0.0);
      for (std::size_t k = 0; k < atom_pow.size(); ++k)
        atom_pow[k] = model_.atom_weights()[k] * model_.atom_values()[k];
    }
    double p = mu_moment(model_, 1, 0) / mu_log_;  // pmf at m = 1
    double cum = p;
    long long m = 1;
    while (cum < u && m < 100000000LL) {
      if (beta_family) {
        p *= ((a + static_cast<double>(m)) / (a + b + static_cast<double>(m))) *
             (static_cast<double>(m) / static_cast<double>(m + 1));
      } else {
        double mu = 0.0;
        for (std::size_t k = 0; k < atom_pow.size(); ++k) {
          atom_pow[k] *= model_.atom_values()[k];
          mu += atom_pow[k];
        }
        p = mu / (static_cast<double>(m + 1) * mu_log_);
      }
      ++m;
      cum += p;
    }
    return m;
  }

  // one increment of the chain given the current state and a fresh hazard draw
  double step(double q, double h, Rng& rng) const {
    const double ratio = h / (1.0 - h);
    if (q <= 64.0) {
      long long m = static_cast<long long>(std::llround(q));
      double inc = 0.0;
      for (long long i = 0; i < m; ++i)
        inc += static_cast<double>(rng.geometric_failures(1.0 - h));
      return q + inc;
    }
    // NegBin(q, 1-h) through its Gamma-Poisson mixture; the Gamma factor and
    // then the Poisson draw switch to CLT noise once fluctuations fall below
    // double resolution of the statistic
    double lam = (q <= 1.0e12) ? rng.gamma(q) * ratio
                               : std::max(0.0, ratio * (q + std::sqrt(q) * rng.normal()));
    if (lam < 1.0e12) return q + static_cast<double>(rng.poisson(lam));
    return q + lam + std::sqrt(lam) * rng.normal();
  }

  // Q_0..Q_steps
  std::vector<double> simulate_chain(long long steps, Rng& rng) const {
    if (steps < 0) throw std::invalid_argument("simulate_chain: steps must be >= 0");
    std::vector<double> q;
    q.reserve(static_cast<std::size_t>(steps) + 1);
    q.push_back(static_cast<double>(sample_entrance(rng)));
    for (long long k = 0; k < steps; ++k)
      q.push_back(step(q.back(), sample_hazard(model_, rng), rng));
    return q;
  }

  // run until the chain strictly exceeds `level` (finalizing all occupation
  // counts up to that level)
  std::vector<double> simulate_chain_past(long long level, Rng& rng,
                                          long long max_steps = 1000000) const {
    std::vector<double> q{static_cast<double>(sample_entrance(rng))};
    long long steps = 0;
    while (q.back() <= static_cast<double>(level)) {
      q.push_back(step(q.back(), sample_hazard(model_, rng), rng));
      if (++steps > max_steps) throw std::runtime_error("simulate_chain_past: step cap exceeded");
    }
    return q;
  }

 private:
  HazardModel model_;
  double mu_log_;
};

// G_j = visits of the path to state j, for j = 1..j_max; requires the path to
// have strictly exceeded j_max so every returned count is final
inline std::vector<long long> occupation_counts(const std::vector<double>& q_path, long long j_max) {
  if (q_path.empty() || !(q_path.back() > static_cast<double>(j_max)))
    throw std::invalid_argument("occupation_counts: path has not exceeded j_max");
  std::vector<long long> g(static_cast<std::size_t>(j_max), 0);
  for (double v : q_path) {
    if (v <= static_cast<double>(j_max))
      ++g[static_cast<std::size_t>(std::llround(v)) - 1];
  }
  return g;
}

// K_j = #{i : N_i = j} along a finite chain path, j = 0..j_max; entries are
// exact once the path has grown far enough that further small increments are
// negligible in expectation
inline std::vector<long long> small_count_occupation(const std::vector<double>& q_path,
                                                     long long j_max) {
  std::vector<long long> k(static_cast<std::size_t>(j_max) + 1, 0);
  if (q_path.empty()) return k;
  if (q_path.front() <= static_cast<double>(j_max))
    ++k[static_cast<std::size_t>(std::llround(q_path.front()))];  // N_0 = Q_0
  for (std::size_t i = 1; i < q_path.size(); ++i) {
    double inc = q_path[i] - q_path[i - 1];
    if (inc <= static_cast<double>(j_max) && q_path[i] < 9.0e15)
      ++k[static_cast<std::size_t>(std::llround(inc))];
  }
  return k;
}

namespace detail {

inline __float128 f128_abs(__float128 x) { return x < 0 ? -x : x; }

}  // namespace detail

// Max absolute residual of the n-step recursion satisfied by the moments
// mu_{0,k} exactly when consecutive-size first-gap probabilities agree; the
// unique-maximum decomposition behind it starts at sample size 2, so residuals
// are taken over n = 2..n_max. The alternating binomial sum cancels
// catastrophically in double, so the accumulation runs in __float128.
inline double recursion_residual(const HazardModel& model, long long n_max) {
  if (n_max < 2) throw std::invalid_argument("recursion_residual: n_max must be >= 2");
  // mu_{0,k} recomputed in quad precision; double-rounded moments would leak
  // through the ~1e10 binomial amplification
  std::vector<__float128> mu0(static_cast<std::size_t>(n_max) + 2);
  if (model.kind() == HazardKind::atoms) {
    const auto& h = model.atom_values();
    const auto& w = model.atom_weights();
    std::vector<__float128> pw(h.size(), static_cast<__float128>(1));
    for (long long k = 0; k <= n_max + 1; ++k) {
      __float128 s = 0;
      for (std::size_t idx = 0; idx < h.size(); ++idx) {
        s += static_cast<__float128>(w[idx]) * pw[idx];
        pw[idx] *= static_cast<__float128>(1) - static_cast<__float128>(h[idx]);
      }
      mu0[static_cast<std::size_t>(k)] = s;
    }
  } else {
    const __float128 a = model.shape_a();
    const __float128 b = model.shape_b();
    __float128 r = 1;
    for (long long k = 0; k <= n_max + 1; ++k) {
      mu0[static_cast<std::size_t>(k)] = r;
      r *= (b + static_cast<__float128>(k)) / (a + b + static_cast<__float128>(k));
    }
  }

  double worst = 0.0;
  std::vector<__float128> binom{static_cast<__float128>(1)};  // Pascal row for C(n, k)
  for (long long n = 1; n <= n_max; ++n) {
    std::vector<__float128> next(static_cast<std::size_t>(n) + 1, static_cast<__float128>(1));
    for (long long k = 1; k < n; ++k)
      next[static_cast<std::size_t>(k)] =
          binom[static_cast<std::size_t>(k - 1)] + binom[static_cast<std::size_t>(k)];
    binom = std::move(next);
    if (n < 2) continue;

    __float128 lhs = static_cast<__float128>(n + 1) / (static_cast<__float128>(1) - mu0[static_cast<std::size_t>(n + 1)]);
    __float128 rhs = static_cast<__float128>(0);
    for (long long k = 0; k <= n - 1; ++k) {
      __float128 term = binom[static_cast<std::size_t>(k)] * static_cast<__float128>(k + 1) /
                        (static_cast<__float128>(1) - mu0[static_cast<std::size_t>(k + 1)]);
      if ((n - k - 1) % 2 == 1) term = -term;
      rhs += term;
    }
    double resid = static_cast<double>(detail::f128_abs(lhs - rhs));
    worst = std::max(worst, resid);
  }
  return worst;
}

// Max absolute residual of the gem summation identity
// sum_{i<=m} (1)_{i-1} theta / (1+theta)_i = 1 - (1)_m / (1+theta)_m.
inline double gem_summation_residual(double theta, long long m_max) {
  if (!(theta > 0)) throw std::invalid_argument("gem_summation_residual: theta must be positive");
  double worst = 0.0;
  double term = theta / (1.0 + theta);  // i = 1
  KahanSum lhs;
  double ratio = 1.0 / (1.0 + theta);  // (1)_m / (1+theta)_m
  for (long long m = 1; m <= m_max; ++m) {
    lhs.add(term);
    worst = std::max(worst, std::abs(lhs.value() - (1.0 - ratio)));
    term *= static_cast<double>(m) / (1.0 + theta + static_cast<double>(m));
    ratio *= (1.0 + static_cast<double>(m)) / (1.0 + theta + static_cast<double>(m));
  }
  return worst;
}

// Residual battery for the gem model: the recursion and the summation identity.
inline double gem_recursion_check(double theta, long long n_max) {
  return std::max(recursion_residual(HazardModel::gem(theta), n_max),
                  gem_summation_residual(theta, n_max));
}

}  // namespace sieve
