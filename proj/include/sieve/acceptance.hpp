#pragma once

// The verification experiments: exact identity batteries plus calibrated
// Monte Carlo comparisons between the finite-sample world, the limiting
// chain, and the point-process construction. Each suite returns a list of
// reports; `verify` aggregates them into a machine-readable manifest.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hazard.hpp"
#include "limitchain.hpp"
#include "numeric.hpp"
#include "parallel.hpp"
#include "pointproc.hpp"
#include "ram.hpp"
#include "records.hpp"
#include "rng.hpp"
#include "stats.hpp"

namespace sieve::acceptance {

struct SuiteResult {
  std::string suite;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::vector<GofReport> checks;
  bool pass = true;

  void add(GofReport r) {
    pass = pass && r.pass;
    checks.push_back(std::move(r));
  }
};

inline nlohmann::json to_json(const SuiteResult& s) {
  nlohmann::json j;
  j["suite"] = s.suite;
  j["seed"] = s.seed;
  j["workers"] = s.workers;
  j["pass"] = s.pass;
  j["checks"] = nlohmann::json::array();
  for (const auto& c : s.checks) j["checks"].push_back(to_json(c));
  return j;
}

namespace detail {

inline Outcome cap_tuple(const std::vector<long long>& v, std::size_t len, long long cap) {
  Outcome o(len, cap);
  for (std::size_t i = 0; i < v.size() && i < len; ++i) o[i] = std::min(v[i], cap);
  return o;
}

// every nondecreasing tuple 1 <= q_0 <= ... <= q_{len-1} < cap, in
// lexicographic order; the support must not depend on the sample
inline std::vector<Outcome> nondecreasing_tuples(long long cap, std::size_t len) {
  std::vector<Outcome> out;
  Outcome cur;
  auto rec = [&](auto&& self, long long lo) -> void {
    if (cur.size() == len) {
      out.push_back(cur);
      return;
    }
    for (long long v = lo; v < cap; ++v) {
      cur.push_back(v);
      self(self, v);
      cur.pop_back();
    }
  };
  rec(rec, 1);
  return out;
}

// all count vectors with sum n, at most max_boxes boxes, last entry positive
inline void enumerate_configs(long long n, long long max_boxes, std::vector<long long>& prefix,
                              std::vector<Outcome>& out) {
  long long used = 0;
  for (long long c : prefix) used += c;
  if (used == n) {
    if (!prefix.empty() && prefix.back() > 0) out.push_back(prefix);
    return;
  }
  if (static_cast<long long>(prefix.size()) == max_boxes) return;
  for (long long c = 0; c <= n - used; ++c) {
    prefix.push_back(c);
    enumerate_configs(n, max_boxes, prefix, out);
    prefix.pop_back();
  }
}

inline void enumerate_tuples(long long cap, long long maxlen, std::vector<long long>& prefix,
                             std::vector<std::vector<long long>>& out) {
  if (!prefix.empty()) out.push_back(prefix);
  if (static_cast<long long>(prefix.size()) == maxlen) return;
  long long used = 0;
  for (long long v : prefix) used += v;
  for (long long v = prefix.empty() ? 1 : 0; used + v <= cap; ++v) {
    prefix.push_back(v);
    enumerate_tuples(cap, maxlen, prefix, out);
    prefix.pop_back();
  }
}

inline std::string model_tag(const HazardModel& m) {
  switch (m.kind()) {
    case HazardKind::gem:
      return "gem(" + std::to_string(m.theta()) + ")";
    case HazardKind::beta:
      return "beta(" + std::to_string(m.beta_a()) + "," + std::to_string(m.beta_b()) + ")";
    case HazardKind::atoms:
      return "atoms";
  }
  return "?";
}

}  // namespace detail

// 1. gem gap exactness: empirical survival of the first four top gaps matches
// the geometric closed form within 4 standard errors at every sample size,
// and the first two gaps are independent.
inline SuiteResult run_gem_gaps(std::uint64_t seed, unsigned workers) {
  SuiteResult suite{"gem-gaps", seed, workers};
  struct Accum {
    long long tail[4][4] = {};
    EmpiricalDist pairs;
    std::uint64_t total = 0;
  };
  const std::uint64_t reps = 100000;
  int combo = 0;
  for (double theta : {0.5, 1.0, 2.0}) {
    for (long long n : {10LL, 100LL}) {
      auto model = HazardModel::gem(theta);
      auto parts = run_replicates<Accum>(
          reps, workers, seed + static_cast<std::uint64_t>(combo),
          [&model, n](Accum& acc, Rng& rng) {
            auto cfg = sample_configuration(model, n, rng);
            for (int i = 0; i < 4; ++i)
              for (int k = 0; k < 4; ++k)
                if (cfg.gaps[static_cast<std::size_t>(i)] >= k + 1) ++acc.tail[i][k];
            acc.pairs.add(Outcome{cfg.gaps[0], cfg.gaps[1]});
            ++acc.total;
          });
      Accum merged;
      for (auto& p : parts) {
        for (int i = 0; i < 4; ++i)
          for (int k = 0; k < 4; ++k) merged.tail[i][k] += p.tail[i][k];
        merged.pairs.merge(p.pairs);
        merged.total += p.total;
      }
      double worst_z = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) {
          double p = std::pow(theta / (theta + i + 1.0), static_cast<double>(k + 1));
          double se = std::sqrt(p * (1 - p) / static_cast<double>(merged.total));
          double emp = static_cast<double>(merged.tail[i][k]) / static_cast<double>(merged.total);
          worst_z = std::max(worst_z, std::abs(emp - p) / se);
        }
      std::string tag = "theta=" + std::to_string(theta) + "/n=" + std::to_string(n);
      suite.add(make_exact_report("gem-gaps/" + tag + "/survival-max-z", worst_z, 4.0, {reps},
                                  {seed + static_cast<std::uint64_t>(combo)}));
      suite.add(chi_square_independence("gem-gaps/" + tag + "/gap1-gap2-independence",
                                        merged.pairs, 0.001));
      ++combo;
    }
  }
  return suite;
}

// 2. finite-sample configuration frequencies match the exact law
inline SuiteResult run_exact_law(std::uint64_t seed, unsigned workers) {
  SuiteResult suite{"exact-law", seed, workers};
  const std::uint64_t reps = 1000000;
  const long long n = 3;
  struct Case {
    HazardModel model;
    long long max_boxes;
  };
  Case cases[] = {{HazardModel::gem(1.0), 30},
                  {HazardModel::atoms({0.3, 0.7}, {0.5, 0.5}, true), 44}};
  int idx = 0;
  for (const auto& c : cases) {
    auto parts = run_replicates<EmpiricalDist>(
        reps, workers, seed + 10 + static_cast<std::uint64_t>(idx),
        [&c, n](EmpiricalDist& acc, Rng& rng) {
          acc.add(sample_configuration(c.model, n, rng).counts);
        });
    EmpiricalDist emp;
    for (auto& p : parts) emp.merge(p);
    std::vector<Outcome> support;
    std::vector<long long> prefix;
    detail::enumerate_configs(n, c.max_boxes, prefix, support);
    std::sort(support.begin(), support.end());
    auto rep = chi_square_gof("exact-law/" + detail::model_tag(c.model) + "/n=3",
                              emp,
                              [&c](const Outcome& o) { return exact_config_probability(c.model, o); },
                              support, 0.001);
    suite.add(std::move(rep));
    ++idx;
  }
  return suite;
}

// 3. the laws of the first four tail counts agree between the mixed negative
// binomial chain, birth counting at renewal times, and the reversed
// finite-sample chain at n = 10^4, and each matches the closed-form law.
// Coordinates are capped at 50 before bucketing so the heavy tails and the
// finite-sample boundary live in one merged cell.
inline SuiteResult run_triple_equivalence(std::uint64_t seed, unsigned workers) {
  SuiteResult suite{"triple", seed, workers};
  const std::uint64_t reps = 100000;
  const long long cap = 50;
  const long long n_finite = 10000;
  const Outcome sentinel{-1};
  int idx = 0;
  for (const auto& model : {HazardModel::gem(1.0), HazardModel::beta(2, 3)}) {
    LimitLaw law(model);
    std::string tag = "triple/" + detail::model_tag(model);

    struct Accum {
      EmpiricalDist capped;
      EmpiricalDist raw;  // uncapped where resolvable, sentinel otherwise
    };
    auto record = [&](Accum& acc, const std::vector<long long>& q, bool resolved) {
      acc.capped.add(detail::cap_tuple(q, 4, cap));
      bool small = resolved && q.size() == 4;
      for (long long v : q) small = small && v < cap;
      if (small)
        acc.raw.add(Outcome(q.begin(), q.end()));
      else
        acc.raw.add(sentinel);
    };

    auto chain_parts = run_replicates<Accum>(
        reps, workers, seed + 20 + static_cast<std::uint64_t>(idx),
        [&law, &record](Accum& acc, Rng& rng) {
          auto qd = law.simulate_chain(3, rng);
          std::vector<long long> q;
          for (double v : qd) q.push_back(static_cast<long long>(std::min(v, 1.0e15)));
          record(acc, q, true);
        });
    auto point_parts = run_replicates<Accum>(
        reps, workers, seed + 30 + static_cast<std::uint64_t>(idx),
        [&model, &record](Accum& acc, Rng& rng) {
          std::vector<double> bars{sample_stationary_delay(model, rng)};
          for (int k = 0; k < 3; ++k) bars.push_back(bars.back() + sample_log_spacing(model, rng));
          auto q = yule_counts_at(bars, rng, 1000000);
          record(acc, q, true);
        });
    auto finite_parts = run_replicates<Accum>(
        reps, workers, seed + 40 + static_cast<std::uint64_t>(idx),
        [&model, &record, n_finite](Accum& acc, Rng& rng) {
          TailCountChain chain(model, n_finite);
          auto q = chain.reversed_tail_sample(3, rng);
          record(acc, q, q.size() == 4);
        });

    Accum chain_acc, point_acc, finite_acc;
    for (auto& p : chain_parts) {
      chain_acc.capped.merge(p.capped);
      chain_acc.raw.merge(p.raw);
    }
    for (auto& p : point_parts) {
      point_acc.capped.merge(p.capped);
      point_acc.raw.merge(p.raw);
    }
    for (auto& p : finite_parts) {
      finite_acc.capped.merge(p.capped);
      finite_acc.raw.merge(p.raw);
    }

    suite.add(chi_square_two_sample(tag + "/chain-vs-points", chain_acc.capped, point_acc.capped,
                                    0.001));
    suite.add(chi_square_two_sample(tag + "/chain-vs-finite", chain_acc.capped, finite_acc.capped,
                                    0.001));
    suite.add(chi_square_two_sample(tag + "/points-vs-finite", point_acc.capped, finite_acc.capped,
                                    0.001));

    auto fdd_pmf = [&law](const Outcome& o) {
      std::vector<long long> counts{o[0]};
      for (std::size_t i = 1; i < o.size(); ++i) {
        if (o[i] < o[i - 1]) return 0.0;
        counts.push_back(o[i] - o[i - 1]);
      }
      return law.fdd_counts_pmf(counts);
    };
    auto support = detail::nondecreasing_tuples(cap, 4);
    for (auto [name, acc] :
         {std::pair<const char*, Accum*>{"chain", &chain_acc}, {"points", &point_acc},
          {"finite", &finite_acc}}) {
      suite.add(chi_square_gof(tag + "/" + name + "-vs-exact", acc->raw, fdd_pmf, support, 0.001));
    }
    ++idx;
  }
  return suite;
}

// 4. the finite-sample potential converges to 1/(m mu_log)
inline SuiteResult run_potential_convergence() {
  SuiteResult suite{"potential", 0, 1};
  auto model = HazardModel::beta(2, 3);
  double ml = mu_log(model);
  // tight tolerance: the true convergence gap at n = 100 is already ~1e-9,
  // so the n = 1e5 recursion must resolve well below that
  auto g_small = finite_potential_table(model, 100, 1e-14);
  auto g_large = finite_potential_table(model, 100000, 1e-14);
  for (long long m = 1; m <= 5; ++m) {
    double limit = 1.0 / (static_cast<double>(m) * ml);
    double err_large = std::abs(g_large[static_cast<std::size_t>(m)] - limit) / limit;
    double err_small = std::abs(g_small[static_cast<std::size_t>(m)] - limit) / limit;
    suite.add(make_exact_report("potential/beta(2,3)/m=" + std::to_string(m) + "/rel-error",
                                err_large, 0.05));
    suite.add(make_exact_report(
        "potential/beta(2,3)/m=" + std::to_string(m) + "/error-shrinks",
        err_small > 0 ? err_large / err_small : kInf, 1.0));
  }
  return suite;
}

// 5. simulated means: gap occupations, tail counts, small-count occupations
inline SuiteResult run_moments(std::uint64_t seed, unsigned workers) {
  SuiteResult suite{"moments", seed, workers};

  // E G_j = 1/(j mu_log), j <= 5
  int idx = 0;
  for (const auto& model : {HazardModel::gem(2.0), HazardModel::beta(2, 3)}) {
    LimitLaw law(model);
    const std::uint64_t reps = 200000;
    auto parts = run_replicates<std::vector<std::vector<double>>>(
        reps, workers, seed + 50 + static_cast<std::uint64_t>(idx),
        [&law](std::vector<std::vector<double>>& acc, Rng& rng) {
          if (acc.empty()) acc.assign(5, {});
          auto q = law.simulate_chain_past(5, rng);
          auto g = occupation_counts(q, 5);
          for (int j = 0; j < 5; ++j) acc[static_cast<std::size_t>(j)].push_back(
              static_cast<double>(g[static_cast<std::size_t>(j)]));
        });
    for (long long j = 1; j <= 5; ++j) {
      std::vector<double> all;
      for (auto& p : parts)
        if (!p.empty())
          all.insert(all.end(), p[static_cast<std::size_t>(j - 1)].begin(),
                     p[static_cast<std::size_t>(j - 1)].end());
      suite.add(mean_ci_report("moments/" + detail::model_tag(model) + "/gap-mean/j=" +
                                   std::to_string(j),
                               all, 0.99, law.mean_gap(j)));
    }
    ++idx;
  }

  // E Q_j for gem(3), j <= 3
  {
    LimitLaw law(HazardModel::gem(3.0));
    const std::uint64_t reps = 200000;
    auto parts = run_replicates<std::vector<std::vector<double>>>(
        reps, workers, seed + 60,
        [&law](std::vector<std::vector<double>>& acc, Rng& rng) {
          if (acc.empty()) acc.assign(4, {});
          auto q = law.simulate_chain(3, rng);
          for (int j = 0; j <= 3; ++j) acc[static_cast<std::size_t>(j)].push_back(q[static_cast<std::size_t>(j)]);
        });
    for (long long j = 0; j <= 3; ++j) {
      std::vector<double> all;
      for (auto& p : parts)
        if (!p.empty())
          all.insert(all.end(), p[static_cast<std::size_t>(j)].begin(),
                     p[static_cast<std::size_t>(j)].end());
      suite.add(mean_ci_report("moments/gem(3)/tail-count-mean/j=" + std::to_string(j), all, 0.99,
                               law.mean_tail_count(j)));
    }
  }

  // E K_j = theta/j for gem(2), j <= 4, and E K_0 = E[-log H]/mu_log
  {
    LimitLaw law(HazardModel::gem(2.0));
    const std::uint64_t reps = 150000;
    auto parts = run_replicates<std::vector<std::vector<double>>>(
        reps, workers, seed + 70,
        [&law](std::vector<std::vector<double>>& acc, Rng& rng) {
          if (acc.empty()) acc.assign(5, {});
          auto q = law.simulate_chain_past(100000, rng);
          auto k = small_count_occupation(q, 4);
          for (int j = 0; j <= 4; ++j) acc[static_cast<std::size_t>(j)].push_back(
              static_cast<double>(k[static_cast<std::size_t>(j)]));
        });
    for (long long j = 0; j <= 4; ++j) {
      std::vector<double> all;
      for (auto& p : parts)
        if (!p.empty())
          all.insert(all.end(), p[static_cast<std::size_t>(j)].begin(),
                     p[static_cast<std::size_t>(j)].end());
      double target = j == 0 ? law.mean_empty_count() : law.mean_small_count(j);
      suite.add(mean_ci_report("moments/gem(2)/small-count-mean/j=" + std::to_string(j), all,
                               0.99, target));
    }
  }
  return suite;
}

// 6. almost-sure growth: the k-th root of the chain approaches e^{mu_log}
inline SuiteResult run_growth(std::uint64_t seed, unsigned workers) {
  SuiteResult suite{"growth", seed, workers};
  LimitLaw law(HazardModel::gem(1.0));
  const std::uint64_t paths = 1000;
  auto parts = run_replicates<std::vector<double>>(
      paths, workers, seed + 80, [&law](std::vector<double>& acc, Rng& rng) {
        auto q = law.simulate_chain(200, rng);
        acc.push_back(std::exp(std::log(q.back()) / 200.0));
      });
  std::vector<double> roots;
  for (auto& p : parts) roots.insert(roots.end(), p.begin(), p.end());
  std::nth_element(roots.begin(), roots.begin() + static_cast<std::ptrdiff_t>(roots.size() / 2),
                   roots.end());
  double median = roots[roots.size() / 2];
  suite.add(make_exact_report("growth/gem(1)/median-200th-root-vs-e",
                              std::abs(median / std::exp(1.0) - 1.0), 0.1, {paths}, {seed + 80}));
  return suite;
}

// 7. pure identities, no randomness
inline SuiteResult run_identities() {
  SuiteResult suite{"identities", 0, 1};
  for (double theta : {0.5, 1.0, 2.0, 5.0})
    suite.add(make_exact_report("identities/summation/theta=" + std::to_string(theta),
                                gem_summation_residual(theta, 50), 1e-10));

  for (const auto& model : {HazardModel::gem(1.0), HazardModel::beta(2, 3)}) {
    LimitLaw law(model);
    auto h = solve_hitting(limit_chain_spec(law), 30);
    double worst = 0.0;
    for (long long j = 1; j <= 30; ++j)
      worst = std::max(worst, std::abs(h[static_cast<std::size_t>(j) - 1] - law.gap_hitting(j)));
    suite.add(make_exact_report("identities/hitting-self-consistency/" + detail::model_tag(model),
                                worst, 1e-10));
  }

  for (double theta : {0.5, 1.0, 2.0, 5.0}) {
    LimitLaw law(HazardModel::gem(theta));
    double worst = 0.0;
    for (long long k = 0; k <= 10; ++k)
      worst = std::max(worst,
                       std::abs(law.n0_tail_integral(k) - LimitLaw::n0_tail_gem(theta, k)));
    suite.add(make_exact_report("identities/tie-tail-integral/theta=" + std::to_string(theta),
                                worst, 1e-8));
  }

  for (const auto& model : {HazardModel::gem(2.0), HazardModel::beta(2, 3)}) {
    LimitLaw law(model);
    std::vector<std::vector<long long>> tuples;
    std::vector<long long> prefix;
    detail::enumerate_tuples(6, 6, prefix, tuples);
    double worst = 0.0;
    for (const auto& t : tuples) {
      double direct = law.fdd_counts_pmf(t);
      double chain = law.entrance_pmf(t[0]);
      long long q = t[0];
      for (std::size_t i = 1; i < t.size(); ++i) {
        chain *= law.transition_pmf(q, q + t[i]);
        q += t[i];
      }
      worst = std::max(worst, std::abs(direct - chain) / std::max(direct, chain));
    }
    suite.add(make_exact_report("identities/fdd-factorization/" + detail::model_tag(model), worst,
                                1e-12));
  }
  return suite;
}

// 8. pure birth process characterizations
inline SuiteResult run_yule(std::uint64_t seed, unsigned workers) {
  SuiteResult suite{"yule", seed, workers};
  const std::uint64_t reps = 100000;
  const long long K = 5;
  YuleConstruction cs[] = {YuleConstruction::exponential_spacings,
                           YuleConstruction::order_statistics, YuleConstruction::log_gamma,
                           YuleConstruction::kendall};
  const char* names[] = {"spacings", "order-stats", "log-gamma", "kendall"};

  std::vector<std::vector<std::vector<double>>> draws(4);
  for (int c = 0; c < 4; ++c) {
    auto parts = run_replicates<std::vector<std::vector<double>>>(
        reps, workers, seed + 90 + static_cast<std::uint64_t>(c),
        [c, &cs, K](std::vector<std::vector<double>>& acc, Rng& rng) {
          if (acc.empty()) acc.assign(static_cast<std::size_t>(K), {});
          auto p = sample_yule(K, rng, cs[c], K);
          for (long long j = 1; j <= K; ++j)
            acc[static_cast<std::size_t>(j - 1)].push_back(
                p.birth_times[static_cast<std::size_t>(j)]);
        });
    draws[static_cast<std::size_t>(c)].assign(static_cast<std::size_t>(K), {});
    for (auto& p : parts)
      for (long long j = 0; j < K && !p.empty(); ++j)
        draws[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)].insert(
            draws[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)].end(),
            p[static_cast<std::size_t>(j)].begin(), p[static_cast<std::size_t>(j)].end());
  }
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      double min_p = 1.0;
      double worst_stat = 0.0;
      for (long long j = 0; j < K; ++j) {
        auto rep = ks_two_sample("tmp", draws[static_cast<std::size_t>(a)][static_cast<std::size_t>(j)],
                                 draws[static_cast<std::size_t>(b)][static_cast<std::size_t>(j)],
                                 0.001);
        if (rep.p_value < min_p) {
          min_p = rep.p_value;
          worst_stat = rep.statistic;
        }
      }
      suite.add(make_pvalue_report(std::string("yule/ks/") + names[a] + "-vs-" + names[b],
                                   worst_stat, 0, min_p, 0.001, {reps, reps}));
    }

  // E N_Y(1) = e
  {
    auto parts = run_replicates<std::pair<double, std::uint64_t>>(
        reps, workers, seed + 95, [](std::pair<double, std::uint64_t>& acc, Rng& rng) {
          auto c = yule_counts_at({1.0}, rng);
          acc.first += static_cast<double>(c[0]);
          ++acc.second;
        });
    double sum = 0.0;
    std::uint64_t total = 0;
    for (auto& p : parts) {
      sum += p.first;
      total += p.second;
    }
    double sd = std::sqrt(std::exp(2.0) - std::exp(1.0));
    suite.add(zscore_report("yule/mean-count-at-1", sum / static_cast<double>(total),
                            std::exp(1.0), sd / std::sqrt(static_cast<double>(total)), 3.0,
                            {total}, {seed + 95}));
  }

  // increments given the current count are negative binomial(m, e^{-t})
  {
    const double s = 0.7, t = 0.5;
    const long long m = 2;
    auto parts = run_replicates<EmpiricalDist>(
        4 * reps, workers, seed + 96, [s, t, m](EmpiricalDist& acc, Rng& rng) {
          auto counts = yule_counts_at({s, s + t}, rng);
          if (counts[0] == m) acc.add(counts[1] - counts[0]);
        });
    EmpiricalDist emp;
    for (auto& p : parts) emp.merge(p);
    double succ = std::exp(-t);
    std::vector<Outcome> support;
    for (long long d = 0; d <= 120; ++d) support.push_back({d});
    suite.add(chi_square_gof("yule/negbin-increment", emp,
                             [m, succ](const Outcome& o) {
                               return std::exp(log_binomial(static_cast<double>(m + o[0] - 1),
                                                            static_cast<double>(o[0])) +
                                               m * std::log(succ) + o[0] * std::log1p(-succ));
                             },
                             support, 0.001));
  }
  return suite;
}

// 9. for gem hazards the renewal process is Poisson: spacings and the
// stationary delay are both exponential
inline SuiteResult run_ignatov(std::uint64_t seed, unsigned workers) {
  SuiteResult suite{"ignatov", seed, workers};
  const std::uint64_t reps = 100000;
  int idx = 0;
  for (double theta : {1.0, 2.0}) {
    auto model = HazardModel::gem(theta);
    auto parts = run_replicates<std::pair<std::vector<double>, std::vector<double>>>(
        reps, workers, seed + 100 + static_cast<std::uint64_t>(idx),
        [&model](std::pair<std::vector<double>, std::vector<double>>& acc, Rng& rng) {
          acc.first.push_back(sample_stationary_delay(model, rng));
          acc.second.push_back(sample_log_spacing(model, rng));
        });
    std::vector<double> delays, spacings;
    for (auto& p : parts) {
      delays.insert(delays.end(), p.first.begin(), p.first.end());
      spacings.insert(spacings.end(), p.second.begin(), p.second.end());
    }
    auto cdf = [theta](double t) { return -std::expm1(-theta * t); };
    std::string tag = "ignatov/theta=" + std::to_string(theta);
    suite.add(ks_one_sample(tag + "/delay", delays, cdf, 0.001));
    suite.add(ks_one_sample(tag + "/spacing", spacings, cdf, 0.001));
    ++idx;
  }
  return suite;
}

// 10. record-chain battery: independence of occupation counts, the
// zero-modified geometric law, the converse reconstruction, and detection of
// dependence away from the gem family
inline SuiteResult run_records_suite(std::uint64_t seed, unsigned workers) {
  SuiteResult suite{"records", seed, workers};
  InitialLaw geom{[](long long j) { return 0.5 * std::pow(0.5, static_cast<double>(j - 1)); },
                  [](long long i) { return std::pow(0.5, static_cast<double>(i - 1)); }};
  auto draw = [](Rng& rng) { return 1 + rng.geometric_failures(0.5); };

  {
    const std::uint64_t reps = 100000;
    auto parts = run_replicates<std::vector<EmpiricalDist>>(
        reps, workers, seed + 110, [&draw](std::vector<EmpiricalDist>& acc, Rng& rng) {
          if (acc.empty()) acc.assign(3, {});
          auto res = simulate_record_chain(draw, RecordFlavor::weak, 1000000, 3, rng);
          acc[0].add(Outcome{res.occupation[0], res.occupation[1]});
          acc[1].add(Outcome{res.occupation[0], res.occupation[2]});
          acc[2].add(Outcome{res.occupation[1], res.occupation[2]});
        });
    const char* tags[] = {"g1-g2", "g1-g3", "g2-g3"};
    for (int t = 0; t < 3; ++t) {
      EmpiricalDist joint;
      for (auto& p : parts)
        if (!p.empty()) joint.merge(p[static_cast<std::size_t>(t)]);
      suite.add(chi_square_independence(std::string("records/independence/") + tags[t], joint,
                                        0.001));
    }
  }

  {
    const std::uint64_t reps = 200000;
    auto parts = run_replicates<EmpiricalDist>(
        reps, workers, seed + 111, [&draw](EmpiricalDist& acc, Rng& rng) {
          auto res = simulate_record_chain(draw, RecordFlavor::weak, 1000000, 2, rng);
          if (res.occupation[1] >= 1) acc.add(res.occupation[1]);
        });
    EmpiricalDist emp;
    for (auto& p : parts) emp.merge(p);
    double stay = weak_record_transition(geom, 2, 2);
    std::vector<Outcome> support;
    for (long long k = 1; k <= 60; ++k) support.push_back({k});
    suite.add(chi_square_gof("records/zero-modified-geometric", emp,
                             [stay](const Outcome& o) {
                               return std::pow(stay, static_cast<double>(o[0] - 1)) * (1.0 - stay);
                             },
                             support, 0.001));
  }

  {
    const long long J = 25;
    std::vector<double> h(static_cast<std::size_t>(J)), zero(static_cast<std::size_t>(J), 0.0);
    for (long long j = 1; j <= J; ++j)
      h[static_cast<std::size_t>(j) - 1] = weak_record_transition(geom, j, j);
    auto weak = reconstruct_transition(h, h);
    auto strict = reconstruct_transition(h, zero);
    double worst_weak = 0.0, worst_strict = 0.0;
    for (long long i = 1; i <= J; ++i)
      for (long long j = i; j <= J; ++j) {
        worst_weak = std::max(worst_weak, std::abs(weak(i, j) - weak_record_transition(geom, i, j)));
        if (j > i)
          worst_strict =
              std::max(worst_strict, std::abs(strict(i, j) - strict_record_transition(geom, i, j)));
      }
    suite.add(make_exact_report("records/reconstruction/weak-kernel", worst_weak, 1e-10));
    suite.add(make_exact_report("records/reconstruction/strict-kernel", worst_strict, 1e-10));

    const double theta = 2.0;
    LimitLaw law(HazardModel::gem(theta));
    std::vector<double> hg(static_cast<std::size_t>(J));
    for (long long j = 1; j <= J; ++j)
      hg[static_cast<std::size_t>(j) - 1] = theta / (static_cast<double>(j) + theta);
    auto chain = reconstruct_transition(hg, hg);
    double worst = 0.0;
    for (long long i = 1; i <= J; ++i)
      for (long long j = i; j <= J; ++j)
        worst = std::max(worst, std::abs(chain(i, j) - law.transition_pmf(i, j)));
    suite.add(make_exact_report("records/reconstruction/gem-limit-kernel", worst, 1e-10));
  }

  {
    const std::uint64_t reps = 1000000;
    LimitLaw law(HazardModel::beta(2, 3));
    auto parts = run_replicates<EmpiricalDist>(
        reps, workers, seed + 112, [&law](EmpiricalDist& acc, Rng& rng) {
          auto q = law.simulate_chain_past(2, rng);
          auto g = occupation_counts(q, 2);
          acc.add(Outcome{g[0], g[1]});
        });
    EmpiricalDist joint;
    for (auto& p : parts) joint.merge(p);
    auto rep = chi_square_independence("records/beta(2,3)-dependence-detected", joint, 0.001);
    // detection: the test must reject independence
    auto detect = make_exact_report(rep.name, rep.p_value, 0.001, rep.sample_sizes, {seed + 112});
    detect.statistic = rep.statistic;
    detect.dof = rep.dof;
    suite.add(std::move(detect));
  }
  return suite;
}

inline std::vector<std::string> suite_names() {
  return {"gem-gaps", "exact-law", "triple",  "potential", "moments",
          "growth",   "identities", "yule",   "ignatov",   "records"};
}

inline SuiteResult run_suite(const std::string& name, std::uint64_t seed, unsigned workers) {
  if (name == "gem-gaps") return run_gem_gaps(seed, workers);
  if (name == "exact-law") return run_exact_law(seed, workers);
  if (name == "triple") return run_triple_equivalence(seed, workers);
  if (name == "potential") return run_potential_convergence();
  if (name == "moments") return run_moments(seed, workers);
  if (name == "growth") return run_growth(seed, workers);
  if (name == "identities") return run_identities();
  if (name == "yule") return run_yule(seed, workers);
  if (name == "ignatov") return run_ignatov(seed, workers);
  if (name == "records") return run_records_suite(seed, workers);
  throw std::invalid_argument("unknown suite '" + name + "'");
}

inline std::vector<SuiteResult> run_all(std::uint64_t seed, unsigned workers) {
  std::vector<SuiteResult> out;
  for (const auto& name : suite_names()) out.push_back(run_suite(name, seed, workers));
  return out;
}

inline nlohmann::json manifest(const std::vector<SuiteResult>& results, std::uint64_t seed) {
  nlohmann::json j;
  j["seed"] = seed;
  bool all = true;
  j["suites"] = nlohmann::json::array();
  for (const auto& r : results) {
    all = all && r.pass;
    j["suites"].push_back(to_json(r));
  }
  j["pass"] = all;
  return j;
}

}  // namespace sieve::acceptance
