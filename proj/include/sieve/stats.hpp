#pragma once

// Verification toolkit: empirical distributions over integer-tuple outcomes,
// chi-square / Kolmogorov-Smirnov tests, total variation, and CI mean checks.
// Reports carry enough metadata (sizes, seeds) to replay any experiment.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "numeric.hpp"

namespace sieve {

using Outcome = std::vector<long long>;

struct OutcomeHash {
  std::size_t operator()(const Outcome& o) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL + o.size();
    for (long long v : o) {
      std::uint64_t x = static_cast<std::uint64_t>(v) + h;
      h = splitmix64_next(x) ^ (h << 1);
    }
    return static_cast<std::size_t>(h);
  }
};

class EmpiricalDist {
 public:
  void add(Outcome o, std::uint64_t weight = 1) {
    counts_[std::move(o)] += weight;
    total_ += weight;
  }
  void add(long long value, std::uint64_t weight = 1) { add(Outcome{value}, weight); }

  void merge(const EmpiricalDist& other) {
    for (const auto& [o, c] : other.counts_) {
      counts_[o] += c;
      total_ += c;
    }
    seeds_.insert(seeds_.end(), other.seeds_.begin(), other.seeds_.end());
  }

  std::uint64_t total() const { return total_; }
  std::uint64_t count(const Outcome& o) const {
    auto it = counts_.find(o);
    return it == counts_.end() ? 0 : it->second;
  }
  const std::unordered_map<Outcome, std::uint64_t, OutcomeHash>& counts() const { return counts_; }

  void note_seed(std::uint64_t s) { seeds_.push_back(s); }
  const std::vector<std::uint64_t>& seeds() const { return seeds_; }

 private:
  std::unordered_map<Outcome, std::uint64_t, OutcomeHash> counts_;
  std::uint64_t total_ = 0;
  std::vector<std::uint64_t> seeds_;
};

struct GofReport {
  std::string name;
  double statistic = 0.0;
  long long dof = 0;
  bool is_exact = false;   // abs-error check instead of a p-value test
  double p_value = kNaN;   // set when !is_exact
  double abs_error = kNaN; // set when is_exact
  double threshold = 0.0;  // pass <=> p_value >= threshold, or abs_error <= threshold
  bool pass = false;
  std::vector<std::uint64_t> sample_sizes;
  std::vector<std::uint64_t> seeds;
};

inline GofReport make_pvalue_report(std::string name, double statistic, long long dof,
                                    double p_value, double threshold,
                                    std::vector<std::uint64_t> sizes = {},
                                    std::vector<std::uint64_t> seeds = {}) {
  GofReport r;
  r.name = std::move(name);
  r.statistic = statistic;
  r.dof = dof;
  r.p_value = p_value;
  r.threshold = threshold;
  r.pass = p_value >= threshold;
  r.sample_sizes = std::move(sizes);
  r.seeds = std::move(seeds);
  return r;
}

inline GofReport make_exact_report(std::string name, double abs_error, double tolerance,
                                   std::vector<std::uint64_t> sizes = {},
                                   std::vector<std::uint64_t> seeds = {}) {
  GofReport r;
  r.name = std::move(name);
  r.statistic = abs_error;
  r.is_exact = true;
  r.abs_error = abs_error;
  r.threshold = tolerance;
  r.pass = abs_error <= tolerance;
  r.sample_sizes = std::move(sizes);
  r.seeds = std::move(seeds);
  return r;
}

inline nlohmann::json to_json(const GofReport& r) {
  nlohmann::json j;
  j["name"] = r.name;
  j["statistic"] = r.statistic;
  j["dof"] = r.dof;
  if (r.is_exact)
    j["abs_error"] = r.abs_error;
  else
    j["p_value"] = r.p_value;
  j["threshold"] = r.threshold;
  j["pass"] = r.pass;
  j["sample_sizes"] = r.sample_sizes;
  j["seeds"] = r.seeds;
  return j;
}

namespace detail {

struct Bucket {
  double observed = 0.0;
  double expected = 0.0;
  double observed2 = 0.0;  // second sample, two-sample tests only
  double expected2 = 0.0;
};

inline GofReport pearson_from_buckets(std::string name, const std::vector<Bucket>& buckets,
                                      bool two_sample, double threshold,
                                      std::vector<std::uint64_t> sizes,
                                      std::vector<std::uint64_t> seeds) {
  if (buckets.size() < 2)
    throw std::invalid_argument("chi-square: need at least two buckets with positive expected mass");
  double stat = 0.0;
  for (const auto& b : buckets) {
    stat += (b.observed - b.expected) * (b.observed - b.expected) / b.expected;
    if (two_sample) stat += (b.observed2 - b.expected2) * (b.observed2 - b.expected2) / b.expected2;
  }
  long long dof = static_cast<long long>(buckets.size()) - 1;
  double p = chi_square_survival(stat, static_cast<double>(dof));
  auto r = make_pvalue_report(std::move(name), stat, dof, p, threshold, std::move(sizes), std::move(seeds));
  return r;
}

}  // namespace detail

// Pearson goodness-of-fit of `emp` against the exact pmf, over `support`
// enumerated in adjacency order. Mass outside `support` (and any observed
// outcome not listed) goes to a trailing rest bucket. Adjacent outcomes are
// merged greedily until each bucket's expected count reaches `min_expected`.
inline GofReport chi_square_gof(std::string name, const EmpiricalDist& emp,
                                const std::function<double(const Outcome&)>& pmf,
                                const std::vector<Outcome>& support, double threshold,
                                double min_expected = 5.0) {
  if (emp.total() == 0) throw std::invalid_argument("chi_square_gof: empty sample");
  const double n = static_cast<double>(emp.total());

  std::unordered_set<Outcome, OutcomeHash> in_support(support.begin(), support.end());
  double mass_listed = 0.0;
  std::uint64_t observed_listed = 0;

  std::vector<detail::Bucket> buckets;
  detail::Bucket cur;
  for (const auto& o : support) {
    double p = pmf(o);
    if (p < 0) throw std::invalid_argument("chi_square_gof: negative pmf value");
    mass_listed += p;
    std::uint64_t c = emp.count(o);
    observed_listed += c;
    cur.observed += static_cast<double>(c);
    cur.expected += p * n;
    if (cur.expected >= min_expected) {
      buckets.push_back(cur);
      cur = detail::Bucket{};
    }
  }
  // rest bucket: unlisted mass and unlisted observations, plus any unfinished bucket
  double rest_expected = cur.expected + std::max(0.0, 1.0 - mass_listed) * n;
  double rest_observed = cur.observed + static_cast<double>(emp.total() - observed_listed);
  if (rest_expected >= min_expected || buckets.empty()) {
    buckets.push_back({rest_observed, rest_expected, 0.0, 0.0});
  } else {
    buckets.back().observed += rest_observed;
    buckets.back().expected += rest_expected;
  }
  return detail::pearson_from_buckets(std::move(name), buckets, false, threshold, {emp.total()},
                                      emp.seeds());
}

// Two-sample homogeneity chi-square over the union of observed outcomes.
inline GofReport chi_square_two_sample(std::string name, const EmpiricalDist& a,
                                       const EmpiricalDist& b, double threshold,
                                       double min_expected = 5.0) {
  if (a.total() == 0 || b.total() == 0) throw std::invalid_argument("chi_square_two_sample: empty sample");
  const double na = static_cast<double>(a.total());
  const double nb = static_cast<double>(b.total());

  std::unordered_map<Outcome, std::pair<std::uint64_t, std::uint64_t>, OutcomeHash> joint;
  for (const auto& [o, c] : a.counts()) joint[o].first = c;
  for (const auto& [o, c] : b.counts()) joint[o].second = c;
  std::vector<std::pair<Outcome, std::pair<std::uint64_t, std::uint64_t>>> rows(joint.begin(), joint.end());
  std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) { return x.first < y.first; });

  std::vector<detail::Bucket> buckets;
  detail::Bucket cur;
  for (const auto& [o, oc] : rows) {
    double pooled = static_cast<double>(oc.first + oc.second) / (na + nb);
    cur.observed += static_cast<double>(oc.first);
    cur.observed2 += static_cast<double>(oc.second);
    cur.expected += pooled * na;
    cur.expected2 += pooled * nb;
    if (cur.expected >= min_expected && cur.expected2 >= min_expected) {
      buckets.push_back(cur);
      cur = detail::Bucket{};
    }
  }
  if (cur.expected > 0.0) {
    if (!buckets.empty() && (cur.expected < min_expected || cur.expected2 < min_expected)) {
      buckets.back().observed += cur.observed;
      buckets.back().observed2 += cur.observed2;
      buckets.back().expected += cur.expected;
      buckets.back().expected2 += cur.expected2;
    } else {
      buckets.push_back(cur);
    }
  }
  auto seeds = a.seeds();
  seeds.insert(seeds.end(), b.seeds().begin(), b.seeds().end());
  return detail::pearson_from_buckets(std::move(name), buckets, true, threshold,
                                      {a.total(), b.total()}, seeds);
}

// Chi-square independence test on a joint sample of pairs. Rows and columns
// are merged greedily (in sorted order) until expected cell counts are valid.
inline GofReport chi_square_independence(std::string name, const EmpiricalDist& joint,
                                         double threshold, double min_expected = 5.0) {
  if (joint.total() == 0) throw std::invalid_argument("chi_square_independence: empty sample");
  std::vector<long long> xs, ys;
  for (const auto& [o, c] : joint.counts()) {
    if (o.size() != 2) throw std::invalid_argument("chi_square_independence: outcomes must be pairs");
    xs.push_back(o[0]);
    ys.push_back(o[1]);
  }
  auto uniq = [](std::vector<long long>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  uniq(xs);
  uniq(ys);
  const double n = static_cast<double>(joint.total());

  std::vector<std::vector<double>> table(xs.size(), std::vector<double>(ys.size(), 0.0));
  for (const auto& [o, c] : joint.counts()) {
    auto ix = std::lower_bound(xs.begin(), xs.end(), o[0]) - xs.begin();
    auto iy = std::lower_bound(ys.begin(), ys.end(), o[1]) - ys.begin();
    table[ix][iy] += static_cast<double>(c);
  }

  // merge adjacent rows/columns until min expected cell >= min_expected
  auto merge_rows = [&](std::vector<std::vector<double>>& t) {
    for (;;) {
      if (t.size() <= 2) break;
      std::vector<double> rowsum(t.size(), 0.0), colsum(t[0].size(), 0.0);
      for (std::size_t i = 0; i < t.size(); ++i)
        for (std::size_t j = 0; j < t[0].size(); ++j) {
          rowsum[i] += t[i][j];
          colsum[j] += t[i][j];
        }
      double mincol = *std::min_element(colsum.begin(), colsum.end());
      std::size_t worst = 0;
      double worstval = kInf;
      for (std::size_t i = 0; i < t.size(); ++i)
        if (rowsum[i] * mincol / n < worstval) {
          worstval = rowsum[i] * mincol / n;
          worst = i;
        }
      if (worstval >= min_expected) break;
      std::size_t into = (worst + 1 < t.size()) ? worst + 1 : worst - 1;
      for (std::size_t j = 0; j < t[0].size(); ++j) t[into][j] += t[worst][j];
      t.erase(t.begin() + static_cast<std::ptrdiff_t>(worst));
    }
  };
  auto transpose = [](const std::vector<std::vector<double>>& t) {
    std::vector<std::vector<double>> u(t[0].size(), std::vector<double>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i)
      for (std::size_t j = 0; j < t[0].size(); ++j) u[j][i] = t[i][j];
    return u;
  };
  merge_rows(table);
  table = transpose(table);
  merge_rows(table);
  table = transpose(table);

  std::size_t R = table.size(), C = table[0].size();
  if (R < 2 || C < 2) throw std::invalid_argument("chi_square_independence: degenerate table");
  std::vector<double> rowsum(R, 0.0), colsum(C, 0.0);
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) {
      rowsum[i] += table[i][j];
      colsum[j] += table[i][j];
    }
  double stat = 0.0;
  for (std::size_t i = 0; i < R; ++i)
    for (std::size_t j = 0; j < C; ++j) {
      double e = rowsum[i] * colsum[j] / n;
      stat += (table[i][j] - e) * (table[i][j] - e) / e;
    }
  long long dof = static_cast<long long>((R - 1) * (C - 1));
  double p = chi_square_survival(stat, static_cast<double>(dof));
  return make_pvalue_report(std::move(name), stat, dof, p, threshold, {joint.total()}, joint.seeds());
}

// Two-sample Kolmogorov-Smirnov; p-value from the asymptotic Kolmogorov
// distribution at sqrt(n_eff) * D with n_eff = na*nb/(na+nb).
inline GofReport ks_two_sample(std::string name, std::vector<double> a, std::vector<double> b,
                               double threshold) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  double neff = na * nb / (na + nb);
  double p = kolmogorov_survival(std::sqrt(neff) * d);
  return make_pvalue_report(std::move(name), d, 0, p, threshold,
                            {static_cast<std::uint64_t>(a.size()), static_cast<std::uint64_t>(b.size())});
}

// One-sample KS against a continuous CDF.
inline GofReport ks_one_sample(std::string name, std::vector<double> a,
                               const std::function<double(double)>& cdf, double threshold) {
  if (a.empty()) throw std::invalid_argument("ks_one_sample: empty sample");
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double f = cdf(a[i]);
    d = std::max(d, std::max(f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f));
  }
  double p = kolmogorov_survival(std::sqrt(n) * d);
  return make_pvalue_report(std::move(name), d, 0, p, threshold, {static_cast<std::uint64_t>(a.size())});
}

// Total variation distance between the empirical distribution and an exact
// pmf evaluated over `support`; exact mass outside (support U observed) counts
// in full.
inline double tv_distance(const EmpiricalDist& emp, const std::function<double(const Outcome&)>& pmf,
                          const std::vector<Outcome>& support) {
  if (emp.total() == 0) throw std::invalid_argument("tv_distance: empty sample");
  const double n = static_cast<double>(emp.total());
  std::unordered_set<Outcome, OutcomeHash> seen;
  double acc = 0.0;
  double mass = 0.0;
  for (const auto& o : support) {
    if (!seen.insert(o).second) continue;
    double p = pmf(o);
    mass += p;
    acc += std::abs(static_cast<double>(emp.count(o)) / n - p);
  }
  for (const auto& [o, c] : emp.counts()) {
    if (!seen.insert(o).second) continue;
    double p = pmf(o);
    mass += p;
    acc += std::abs(static_cast<double>(c) / n - p);
  }
  return 0.5 * acc + 0.5 * std::max(0.0, 1.0 - mass);
}

struct MeanCI {
  double mean = 0.0;
  double half_width = 0.0;
};

// normal-approximation confidence interval for the mean
inline MeanCI mean_ci(const std::vector<double>& samples, double level) {
  if (samples.empty()) throw std::invalid_argument("mean_ci: empty sample");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("mean_ci: level outside (0,1)");
  const double n = static_cast<double>(samples.size());
  double mean = 0.0;
  for (double x : samples) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);
  double sd = std::sqrt(ss / std::max(1.0, n - 1.0));
  double z = normal_quantile(0.5 + level / 2.0);
  return {mean, z * sd / std::sqrt(n)};
}

inline GofReport mean_ci_report(std::string name, const std::vector<double>& samples, double level,
                                double target) {
  MeanCI ci = mean_ci(samples, level);
  GofReport r = make_exact_report(std::move(name), std::abs(ci.mean - target), ci.half_width,
                                  {samples.size()});
  r.statistic = ci.mean;
  return r;
}

// |observed - expected| measured in standard errors
inline GofReport zscore_report(std::string name, double observed, double expected, double se,
                               double max_z, std::vector<std::uint64_t> sizes = {},
                               std::vector<std::uint64_t> seeds = {}) {
  double z = se > 0 ? std::abs(observed - expected) / se : (observed == expected ? 0.0 : kInf);
  return make_exact_report(std::move(name), z, max_z, std::move(sizes), std::move(seeds));
}

}  // namespace sieve
