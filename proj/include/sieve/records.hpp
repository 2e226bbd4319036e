#pragma once

// Increasing Markov chains and record chains: weak/strict record transition
// kernels derived from an initial law, forward solvers for hitting
// probabilities and potentials (occupation-time laws are zero-modified
// geometric), and the converse reconstruction of a weakly increasing chain
// with independent occupation counts from its hitting probabilities and
// self-transition probabilities.

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <utility>
#include <vector>

#include "limitchain.hpp"
#include "numeric.hpp"
#include "rng.hpp"

namespace sieve {

// A probability mass function on {1, 2, ...} with a tail evaluator. When no
// exact tail is supplied, tails fall back to the complement of partial sums.
struct InitialLaw {
  std::function<double(long long)> pmf;
  std::function<double(long long)> tail;  // optional: T(i) = sum_{k >= i} pmf(k)
  long long horizon = 200000;

  double tail_at(long long i) const {
    if (i <= 1) return 1.0;
    if (tail) return tail(i);
    KahanSum head;
    for (long long k = 1; k < i; ++k) head.add(pmf(k));
    return std::max(0.0, 1.0 - head.value());
  }
};

// weak record kernel: p(i,j) = pmf(j) 1(i <= j) / T(i)
inline double weak_record_transition(const InitialLaw& law, long long i, long long j) {
  if (i < 1 || j < 1) throw std::invalid_argument("weak_record_transition: states start at 1");
  if (j < i) return 0.0;
  double t = law.tail_at(i);
  if (t <= 0.0) throw std::domain_error("weak_record_transition: zero tail denominator");
  return law.pmf(j) / t;
}

// strict record kernel: p(i,j) = pmf(j) 1(i < j) / T(i+1)
inline double strict_record_transition(const InitialLaw& law, long long i, long long j) {
  if (i < 1 || j < 1) throw std::invalid_argument("strict_record_transition: states start at 1");
  if (j <= i) return 0.0;
  double t = law.tail_at(i + 1);
  if (t <= 0.0) throw std::domain_error("strict_record_transition: zero tail denominator");
  return law.pmf(j) / t;
}

// A weakly increasing chain given by its initial law and transition kernel;
// transition(i, j) must vanish for j < i and have transition(j, j) < 1.
struct IncreasingChainSpec {
  std::function<double(long long)> initial;
  std::function<double(long long, long long)> transition;
};

inline IncreasingChainSpec limit_chain_spec(LimitLaw law) {
  auto shared = std::make_shared<LimitLaw>(std::move(law));
  return {[shared](long long j) { return shared->entrance_pmf(j); },
          [shared](long long i, long long j) { return shared->transition_pmf(i, j); }};
}

inline IncreasingChainSpec weak_record_spec(InitialLaw law) {
  auto shared = std::make_shared<InitialLaw>(std::move(law));
  return {[shared](long long j) { return shared->pmf(j); },
          [shared](long long i, long long j) { return weak_record_transition(*shared, i, j); }};
}

inline IncreasingChainSpec strict_record_spec(InitialLaw law) {
  auto shared = std::make_shared<InitialLaw>(std::move(law));
  return {[shared](long long j) { return shared->pmf(j); },
          [shared](long long i, long long j) { return strict_record_transition(*shared, i, j); }};
}

// hitting probabilities h_1..h_jmax by the forward recursion
// h_j = p_{0,j} + sum_{i<j} h_i p_{i,j} / (1 - p_{i,i})
inline std::vector<double> solve_hitting(const IncreasingChainSpec& spec, long long j_max) {
  if (j_max < 1) throw std::invalid_argument("solve_hitting: j_max must be >= 1");
  std::vector<double> h(static_cast<std::size_t>(j_max) + 1, 0.0);
  for (long long j = 1; j <= j_max; ++j) {
    KahanSum acc;
    acc.add(spec.initial(j));
    for (long long i = 1; i < j; ++i) {
      double stay = spec.transition(i, i);
      if (!(stay < 1.0)) throw std::domain_error("solve_hitting: absorbing state");
      acc.add(h[static_cast<std::size_t>(i)] * spec.transition(i, j) / (1.0 - stay));
    }
    h[static_cast<std::size_t>(j)] = acc.value();
  }
  h.erase(h.begin());
  return h;  // h[j-1] = h_j
}

// potential g_1..g_jmax by forward substitution of
// g_j (1 - p_{j,j}) = p_{0,j} + sum_{i<j} g_i p_{i,j}
inline std::vector<double> solve_potential(const IncreasingChainSpec& spec, long long j_max) {
  if (j_max < 1) throw std::invalid_argument("solve_potential: j_max must be >= 1");
  std::vector<double> g(static_cast<std::size_t>(j_max) + 1, 0.0);
  for (long long j = 1; j <= j_max; ++j) {
    KahanSum acc;
    acc.add(spec.initial(j));
    for (long long i = 1; i < j; ++i)
      acc.add(g[static_cast<std::size_t>(i)] * spec.transition(i, j));
    double stay = spec.transition(j, j);
    if (!(stay < 1.0)) throw std::domain_error("solve_potential: absorbing state");
    g[static_cast<std::size_t>(j)] = acc.value() / (1.0 - stay);
  }
  g.erase(g.begin());
  return g;
}

// occupation time of state j is zero-modified geometric(h_j, 1 - p_{j,j})
struct OccupationLaw {
  double hitting = 0.0;      // h_j = P(G_j >= 1)
  double stay = 0.0;         // p_{j,j}
  double mean = 0.0;         // g_j = h_j / (1 - p_{j,j})
  double tail(long long k) const {  // P(G_j >= k), k >= 1
    return hitting * std::pow(stay, static_cast<double>(k - 1));
  }
};

inline OccupationLaw occupation_law(const IncreasingChainSpec& spec, long long j) {
  auto h = solve_hitting(spec, j);
  OccupationLaw law;
  law.hitting = h[static_cast<std::size_t>(j) - 1];
  law.stay = spec.transition(j, j);
  law.mean = law.hitting / (1.0 - law.stay);
  return law;
}

// Converse reconstruction: a weakly increasing chain with independent
// occupation counts is pinned down by its hitting sequence h_j and arbitrary
// self-transition probabilities p_{j,j} < 1 via
//   p_{i,j} = 1(j=i) p_{i,i} + 1(j>i) (1-p_{i,i}) h_j prod_{i<k<j} (1-h_k).
struct ReconstructedChain {
  std::vector<double> hitting;   // h_1..h_J
  std::vector<double> diagonal;  // p_{1,1}..p_{J,J}
  double window_tail_product = 1.0;  // prod (1-h_j) over the window
  bool product_condition_ok = false; // diagnostic: product should vanish

  double operator()(long long i, long long j) const {
    auto J = static_cast<long long>(hitting.size());
    if (i < 1 || j < 1 || i > J || j > J)
      throw std::invalid_argument("ReconstructedChain: state outside the window");
    if (j < i) return 0.0;
    double pii = diagonal[static_cast<std::size_t>(i) - 1];
    if (j == i) return pii;
    double prod = 1.0;
    for (long long k = i + 1; k < j; ++k) prod *= 1.0 - hitting[static_cast<std::size_t>(k) - 1];
    return (1.0 - pii) * hitting[static_cast<std::size_t>(j) - 1] * prod;
  }

  // initial law consistent with the chain: p_{0,j} = h_j prod_{k<j} (1-h_k)
  double initial(long long j) const {
    auto J = static_cast<long long>(hitting.size());
    if (j < 1 || j > J) throw std::invalid_argument("ReconstructedChain: state outside the window");
    double prod = 1.0;
    for (long long k = 1; k < j; ++k) prod *= 1.0 - hitting[static_cast<std::size_t>(k) - 1];
    return hitting[static_cast<std::size_t>(j) - 1] * prod;
  }
};

inline ReconstructedChain reconstruct_transition(std::vector<double> hitting,
                                                 std::vector<double> diagonal) {
  if (hitting.empty() || hitting.size() != diagonal.size())
    throw std::invalid_argument("reconstruct_transition: size mismatch");
  double prod = 1.0;
  for (double h : hitting) {
    if (!(h > 0.0) || h > 1.0)
      throw std::invalid_argument("reconstruct_transition: hitting values must lie in (0,1]");
    prod *= 1.0 - h;
  }
  for (double d : diagonal)
    if (d < 0.0 || !(d < 1.0))
      throw std::invalid_argument("reconstruct_transition: diagonal must lie in [0,1)");
  ReconstructedChain c;
  c.hitting = std::move(hitting);
  c.diagonal = std::move(diagonal);
  c.window_tail_product = prod;
  c.product_condition_ok = prod < 1e-6;  // asymptotic condition, diagnostic only
  return c;
}

enum class RecordFlavor { weak, strict };

struct RecordSimResult {
  std::vector<long long> path;        // record values in order of appearance
  std::vector<long long> occupation;  // G_j for j = 1..j_max
  bool complete = false;              // records exceeded j_max, counts final
};

// filter an i.i.d. stream to its weak (>=) or strict (>) upper records
inline RecordSimResult simulate_record_chain(const std::function<long long(Rng&)>& draw,
                                             RecordFlavor flavor, long long max_draws,
                                             long long j_max, Rng& rng) {
  RecordSimResult out;
  out.occupation.assign(static_cast<std::size_t>(j_max), 0);
  long long current = 0;
  for (long long t = 0; t < max_draws; ++t) {
    long long v = draw(rng);
    bool is_record = (current == 0) || (flavor == RecordFlavor::weak ? v >= current : v > current);
    if (!is_record) continue;
    current = v;
    out.path.push_back(v);
    if (v <= j_max) ++out.occupation[static_cast<std::size_t>(v) - 1];
    if (v > j_max) {
      out.complete = true;
      break;
    }
  }
  return out;
}

}  // namespace sieve
