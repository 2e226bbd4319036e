#pragma once

// Finite-sample machinery: draw a size-n sample from the stick-breaking model
// through its renewal representation, read off counts / gaps / reversed tail
// counts, evaluate exact configuration probabilities, and solve the tail-count
// chain's transition, decrement and potential quantities.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "hazard.hpp"
#include "numeric.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace sieve {

inline constexpr long long kBoxCap = 1000000;  // defect guard for lazy box extension

inline void validate_counts(const std::vector<long long>& counts, long long n) {
  if (counts.empty()) throw std::invalid_argument("counts: empty");
  long long total = 0;
  for (long long c : counts) {
    if (c < 0) throw std::invalid_argument("counts: negative entry");
    total += c;
  }
  if (counts.back() <= 0) throw std::invalid_argument("counts: last entry must be positive");
  if (total != n) throw std::invalid_argument("counts: entries must sum to n");
}

// reversed partial sums: Q_k = balls in the last k+1 occupied-or-not boxes,
// k = 0 .. m_max-1
inline std::vector<long long> tail_counts_from_counts(const std::vector<long long>& counts) {
  std::vector<long long> q(counts.size());
  long long acc = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    acc += counts[counts.size() - 1 - k];
    q[k] = acc;
  }
  return q;
}

// counts -> gaps between order statistics, read from the top down; the gap
// vector has length n, with the last entry counting boxes below the minimum
inline std::vector<long long> gaps_from_counts(const std::vector<long long>& counts, long long n) {
  validate_counts(counts, n);
  std::vector<long long> gaps(static_cast<std::size_t>(n), 0);
  long long acc = 0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    acc += counts[counts.size() - 1 - k];
    if (acc < n)
      ++gaps[static_cast<std::size_t>(acc) - 1];
    else
      ++gaps[static_cast<std::size_t>(n) - 1];  // visits at level n, one per box below the minimum +1
  }
  --gaps[static_cast<std::size_t>(n) - 1];
  return gaps;
}

// gaps -> counts; inverse of gaps_from_counts
inline std::vector<long long> counts_from_gaps(const std::vector<long long>& gaps, long long n) {
  if (static_cast<long long>(gaps.size()) != n)
    throw std::invalid_argument("gaps: vector must have length n");
  for (long long g : gaps)
    if (g < 0) throw std::invalid_argument("gaps: negative entry");
  std::vector<long long> tail;  // the nondecreasing tail count sequence
  for (long long j = 1; j < n; ++j)
    for (long long r = 0; r < gaps[static_cast<std::size_t>(j) - 1]; ++r) tail.push_back(j);
  for (long long r = 0; r <= gaps[static_cast<std::size_t>(n) - 1]; ++r) tail.push_back(n);
  const std::size_t m = tail.size();
  std::vector<long long> counts(m);
  for (std::size_t k = 0; k < m; ++k) {
    long long inc = tail[k] - (k == 0 ? 0 : tail[k - 1]);
    counts[m - 1 - k] = inc;
  }
  return counts;
}

struct Configuration {
  long long n = 0;
  std::vector<long long> counts;               // N_1 .. N_{m_max}, last > 0
  long long m_max = 0;                         // rightmost occupied box
  std::vector<long long> gaps;                 // length n
  std::vector<long long> reversed_tail_counts; // length m_max

  nlohmann::json to_json() const {
    return nlohmann::json{{"n", n}, {"counts", counts}, {"gaps", gaps}};
  }
};

inline Configuration make_configuration(long long n, std::vector<long long> counts) {
  validate_counts(counts, n);
  Configuration c;
  c.n = n;
  c.m_max = static_cast<long long>(counts.size());
  c.gaps = gaps_from_counts(counts, n);
  c.reversed_tail_counts = tail_counts_from_counts(counts);
  c.counts = std::move(counts);
  return c;
}

inline Configuration configuration_from_json(const nlohmann::json& j) {
  return make_configuration(j.at("n").get<long long>(),
                            j.at("counts").get<std::vector<long long>>());
}

// Sample n values by dropping n standard exponentials onto the renewal points
// S_j of the log-transformed stick; box of a ball is 1 + #points below it.
inline Configuration sample_configuration(const HazardModel& model, long long n, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_configuration: n must be >= 1");
  std::vector<double> eps(static_cast<std::size_t>(n));
  double top = 0.0;
  for (auto& e : eps) {
    e = rng.exponential();
    top = std::max(top, e);
  }
  std::vector<double> points;  // S_1 < S_2 < ... until past the sample maximum
  double s = 0.0;
  while (s <= top) {
    s += sample_log_spacing(model, rng);
    points.push_back(s);
    if (static_cast<long long>(points.size()) > kBoxCap)
      throw std::runtime_error("sample_configuration: box cap exceeded");
  }
  std::vector<long long> counts(points.size(), 0);
  for (double e : eps) {
    auto box = static_cast<std::size_t>(
        std::lower_bound(points.begin(), points.end(), e) - points.begin());
    ++counts[box];
  }
  while (!counts.empty() && counts.back() == 0) counts.pop_back();
  return make_configuration(n, std::move(counts));
}

inline double log_config_probability(const HazardModel& model, const std::vector<long long>& counts) {
  long long n = 0;
  for (long long c : counts) n += c;
  validate_counts(counts, n);
  KahanSum acc;
  acc.add(std::lgamma(static_cast<double>(n) + 1.0));
  long long tail = 0;
  for (std::size_t idx = counts.size(); idx-- > 0;) {
    long long c = counts[idx];
    acc.add(-std::lgamma(static_cast<double>(c) + 1.0));
    acc.add(log_mu_moment(model, c, tail));
    tail += c;
  }
  return acc.value();
}

// multinomial(n; counts) * prod_i mu_{n_i, n_{i+1}+...+n_k}
inline double exact_config_probability(const HazardModel& model,
                                       const std::vector<long long>& counts) {
  return std::exp(log_config_probability(model, counts));
}

// P(m of l balls survive one sieve step) = C(l,m) mu_{l-m, m}
inline double qstar_transition(const HazardModel& model, long long l, long long m) {
  if (m < 0 || m > l) throw std::invalid_argument("qstar_transition: need 0 <= m <= l");
  if (l == 0) return m == 0 ? 1.0 : 0.0;
  return std::exp(log_binomial(static_cast<double>(l), static_cast<double>(m)) +
                  log_mu_moment(model, l - m, m));
}

// the jump kernel of the tail-count chain watched only when it moves
inline double decrement_transition(const HazardModel& model, long long l, long long m) {
  if (m < 0 || m >= l) throw std::invalid_argument("decrement_transition: need 0 <= m < l");
  return qstar_transition(model, l, m) / (1.0 - mu_moment(model, 0, l));
}

// Expected visit counts g_{m:n} of the tail-count chain started at n, for all
// m = 1..n, by the backward recursion g_m = sum_{l>m} g_l q*(l,m) / (1-q*(m,m)).
// Inner sums advance q*(l,m) by division-free O(1) ratio updates and use
// compensated summation; positive terms allow a conservative early stop once
// term * (l-m) drops below rel_tol * partial sum. The recursion is O(n^2), so
// the inner loop stays lean.
inline std::vector<double> finite_potential_table(const HazardModel& model, long long n,
                                                  double rel_tol = 1e-9) {
  if (n < 1) throw std::invalid_argument("finite_potential_table: n must be >= 1");
  std::vector<double> g(static_cast<std::size_t>(n) + 1, 0.0);
  g[static_cast<std::size_t>(n)] = 1.0 / (1.0 - mu_moment(model, 0, n));

  const bool beta_family = model.kind() != HazardKind::atoms;
  const double a = model.shape_a();
  const double b = model.shape_b();
  const auto& atoms = model.kind() == HazardKind::atoms ? model.atom_values() : std::vector<double>{};
  const auto& weights = model.kind() == HazardKind::atoms ? model.atom_weights() : std::vector<double>{};

  // reciprocal tables keep the ratio update division-free
  std::vector<double> inv_int(static_cast<std::size_t>(n) + 2, 0.0);
  std::vector<double> inv_ab(beta_family ? static_cast<std::size_t>(n) + 2 : 0, 0.0);
  for (long long i = 1; i <= n + 1; ++i)
    inv_int[static_cast<std::size_t>(i)] = 1.0 / static_cast<double>(i);
  for (long long i = 0; beta_family && i <= n + 1; ++i)
    inv_ab[static_cast<std::size_t>(i)] = 1.0 / (a + b + static_cast<double>(i));

  std::vector<double> atom_pow;  // running h^(l-m) per atom, atoms kind only

  for (long long m = n - 1; m >= 1; --m) {
    double q = qstar_transition(model, m + 1, m);
    if (!beta_family) {
      atom_pow.assign(atoms.size(), 0.0);
      for (std::size_t k = 0; k < atoms.size(); ++k)
        atom_pow[k] = weights[k] * atoms[k] *
                      std::exp(static_cast<double>(m) * std::log1p(-atoms[k]));
    }
    KahanSum sum;
    sum.add(g[static_cast<std::size_t>(m) + 1] * q);
    int quiet = 0;
    double binom = static_cast<double>(m + 1);  // C(l, m) running value, atoms kind only
    const double* gp = g.data();
    for (long long l = m + 2; l <= n; ++l) {
      if (beta_family) {
        q *= static_cast<double>(l) * (a + static_cast<double>(l - 1 - m)) *
             inv_int[static_cast<std::size_t>(l - m)] * inv_ab[static_cast<std::size_t>(l - 1)];
      } else {
        binom *= static_cast<double>(l) * inv_int[static_cast<std::size_t>(l - m)];
        double mu = 0.0;
        for (std::size_t k = 0; k < atoms.size(); ++k) {
          atom_pow[k] *= atoms[k];
          mu += atom_pow[k];
        }
        q = binom * mu;
      }
      double term = gp[l] * q;
      sum.add(term);
      if (term * static_cast<double>(l - m) < rel_tol * sum.value() && l - m >= 32) {
        if (++quiet >= 8) break;
      } else {
        quiet = 0;
      }
    }
    g[static_cast<std::size_t>(m)] = sum.value() / (1.0 - mu_moment(model, 0, m));
  }
  return g;
}

inline double finite_potential(const HazardModel& model, long long n, long long m,
                               double rel_tol = 1e-9) {
  if (m < 1 || m > n) throw std::invalid_argument("finite_potential: need 1 <= m <= n");
  return finite_potential_table(model, n, rel_tol)[static_cast<std::size_t>(m)];
}

// time reversal of the tail-count chain: qhat_n(l, m) = g_m q*(m, l) / g_l
inline double reversed_transition(const HazardModel& model, const std::vector<double>& potential,
                                  long long l, long long m) {
  long long n = static_cast<long long>(potential.size()) - 1;
  if (l < 1 || l > n || m < 1 || m > n)
    throw std::invalid_argument("reversed_transition: states out of range");
  if (m < l) return 0.0;
  return potential[static_cast<std::size_t>(m)] * qstar_transition(model, m, l) /
         potential[static_cast<std::size_t>(l)];
}

struct SampleStatistics {
  long long ties_with_max = 0;              // L_n
  long long missing_values = 0;             // K_{0:n}, gap form
  std::vector<long long> small_counts;      // K_{j:n} for j = 1..max_j
};

inline SampleStatistics sample_statistics(const Configuration& c, long long max_j = 5) {
  SampleStatistics s;
  s.ties_with_max = c.counts.back();
  for (long long gp : c.gaps) s.missing_values += std::max(0LL, gp - 1);
  s.small_counts.assign(static_cast<std::size_t>(max_j), 0);
  for (long long cnt : c.counts)
    if (cnt >= 1 && cnt <= max_j) ++s.small_counts[static_cast<std::size_t>(cnt) - 1];
  return s;
}

// L_n read from the gaps instead of the counts; min over an empty set is n
inline long long ties_with_max_from_gaps(const std::vector<long long>& gaps) {
  for (std::size_t i = 0; i + 1 < gaps.size(); ++i)
    if (gaps[i] > 0) return static_cast<long long>(i) + 1;
  return static_cast<long long>(gaps.size());
}

// The tail-count chain itself: state = number of balls still to the right of
// the current box; one sieve step thins with a fresh hazard draw.
struct TailCountChain {
  HazardModel model;
  long long n = 0;

  TailCountChain(HazardModel m, long long n_) : model(std::move(m)), n(n_) {
    if (n < 1) throw std::invalid_argument("TailCountChain: n must be >= 1");
  }

  double qstar(long long l, long long m) const { return qstar_transition(model, l, m); }
  double decrement(long long l, long long m) const { return decrement_transition(model, l, m); }

  // forward path Q*_{0..k_max}, started at n (absorbing at 0)
  std::vector<long long> forward_path(long long k_max, Rng& rng) const {
    std::vector<long long> path{n};
    long long state = n;
    for (long long k = 0; k < k_max; ++k) {
      if (state > 0) state = rng.binomial(state, 1.0 - sample_hazard(model, rng));
      path.push_back(state);
    }
    return path;
  }

  // last values before absorption, reversed: Q^_0, Q^_1, ..., up to k_back;
  // shorter when the chain reaches 0 in fewer than k_back+1 steps
  std::vector<long long> reversed_tail_sample(long long k_back, Rng& rng) const {
    std::vector<long long> ring(static_cast<std::size_t>(k_back) + 1, -1);
    long long state = n;
    std::size_t pos = 0;
    long long steps = 0;
    while (state > 0) {
      ring[pos] = state;
      pos = (pos + 1) % ring.size();
      state = rng.binomial(state, 1.0 - sample_hazard(model, rng));
      if (++steps > kBoxCap) throw std::runtime_error("reversed_tail_sample: box cap exceeded");
    }
    std::vector<long long> out;
    for (std::size_t back = 0; back < ring.size(); ++back) {
      std::size_t idx = (pos + ring.size() - 1 - back) % ring.size();
      if (ring[idx] < 0) break;
      out.push_back(ring[idx]);
    }
    return out;
  }
};

// classical encoding: stars are balls, bars are box walls, terminated at the
// rightmost occupied box
inline std::string stars_and_bars(const std::vector<long long>& counts) {
  long long n = 0;
  for (long long c : counts) n += c;
  validate_counts(counts, n);
  std::string s;
  for (std::size_t b = 0; b < counts.size(); ++b) {
    s.append(static_cast<std::size_t>(counts[b]), '*');
    if (b + 1 < counts.size()) s.push_back('|');
  }
  return s;
}

inline std::vector<long long> counts_from_stars_and_bars(const std::string& s) {
  std::vector<long long> counts{0};
  for (char ch : s) {
    if (ch == '*')
      ++counts.back();
    else if (ch == '|')
      counts.push_back(0);
    else
      throw std::invalid_argument("counts_from_stars_and_bars: invalid symbol");
  }
  if (counts.back() == 0)
    throw std::invalid_argument("counts_from_stars_and_bars: trailing empty box");
  return counts;
}

}  // namespace sieve
