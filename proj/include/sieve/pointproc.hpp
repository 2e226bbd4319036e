#pragma once

// The limiting picture: a pure birth process of "stars" started at time 0,
// an independent stationary renewal process of "bars" with spacings
// -log(1-H), their interleaving into a symbol trace, and the extraction of
// tail counts / counts / gaps with explicit censoring of the last count.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "hazard.hpp"
#include "numeric.hpp"
#include "rng.hpp"

namespace sieve {

inline constexpr long long kBirthCap = 1000000000;  // hard error cap for lazy birth extension

enum class YuleConstruction { exponential_spacings, order_statistics, log_gamma, kendall };

struct YulePath {
  std::vector<double> birth_times;  // Y_0 = 0 < Y_1 < ... < Y_k
  YuleConstruction construction = YuleConstruction::exponential_spacings;
};

// Birth times Y_0..Y_k by one of four equivalent constructions:
//  - exponential_spacings: Y_k = sum_{i<=k} eps_i / i
//  - order_statistics:     Y_j = eps_{n:n} - eps_{n-j:n} for n >= k
//  - log_gamma:            Y_k = log(gamma_{k+1} / gamma_1)
//  - kendall:              Poisson time change, Y_k = log1p(gamma_k / eps)
inline YulePath sample_yule(long long k, Rng& rng,
                            YuleConstruction construction = YuleConstruction::exponential_spacings,
                            long long order_stat_n = -1) {
  if (k < 0) throw std::invalid_argument("sample_yule: k must be >= 0");
  YulePath path;
  path.construction = construction;
  auto& y = path.birth_times;
  y.assign(1, 0.0);
  switch (construction) {
    case YuleConstruction::exponential_spacings: {
      double t = 0.0;
      for (long long i = 1; i <= k; ++i) {
        t += rng.exponential() / static_cast<double>(i);
        y.push_back(t);
      }
      break;
    }
    case YuleConstruction::order_statistics: {
      long long n = order_stat_n < 0 ? k : order_stat_n;
      if (n < k) throw std::invalid_argument("sample_yule: order statistics need n >= k");
      if (k == 0) break;
      std::vector<double> eps(static_cast<std::size_t>(n));
      for (auto& e : eps) e = rng.exponential();
      std::sort(eps.begin(), eps.end());
      double top = eps.back();
      for (long long j = 1; j <= k; ++j) {
        // Y_j = eps_{n:n} - eps_{n-j:n}, with eps_{0:n} = 0
        double below = (j == n) ? 0.0 : eps[static_cast<std::size_t>(n - j - 1)];
        y.push_back(top - below);
      }
      break;
    }
    case YuleConstruction::log_gamma: {
      double first = rng.exponential();
      double acc = first;
      for (long long i = 1; i <= k; ++i) {
        acc += rng.exponential();
        y.push_back(std::log(acc / first));
      }
      break;
    }
    case YuleConstruction::kendall: {
      double eps = rng.exponential();  // the almost-sure limit of e^{-t} N_Y(t)
      double arrival = 0.0;
      for (long long i = 1; i <= k; ++i) {
        arrival += rng.exponential();
        y.push_back(std::log1p(arrival / eps));
      }
      break;
    }
  }
  return path;
}

// Lazy pure birth process (exponential-spacings construction); single
// threaded, owns nothing: the caller keeps the stream alive.
class YuleProcess {
 public:
  explicit YuleProcess(Rng& rng) : rng_(&rng) {}

  // Y_k, extending the path as needed
  double birth_time(long long k) {
    if (k < 0) throw std::invalid_argument("YuleProcess::birth_time: k must be >= 0");
    extend_to_index(k);
    return times_[static_cast<std::size_t>(k)];
  }

  // N_Y(t) = 1 + #{k >= 1 : Y_k <= t}
  long long count_at(double t) {
    if (t < 0) throw std::invalid_argument("YuleProcess::count_at: t must be >= 0");
    extend_past_time(t);
    auto it = std::upper_bound(times_.begin(), times_.end(), t);
    return static_cast<long long>(it - times_.begin());
  }

  const std::vector<double>& times() const { return times_; }

 private:
  void extend_to_index(long long k) {
    while (static_cast<long long>(times_.size()) <= k) grow();
  }
  void extend_past_time(double t) {
    while (times_.back() <= t) grow();
  }
  void grow() {
    if (static_cast<long long>(times_.size()) > kBirthCap)
      throw std::runtime_error("YuleProcess: birth cap exceeded");
    double rate = static_cast<double>(times_.size());  // birth rate k in state k = size
    double next = times_.back() + rng_->exponential(rate);
    // tiny spacings can round onto the previous time; keep times strictly increasing
    if (next <= times_.back()) next = std::nextafter(times_.back(), kInf);
    times_.push_back(next);
  }

  std::vector<double> times_{0.0};
  Rng* rng_;
};

// N_Y evaluated at an increasing grid of times. Births are enumerated one by
// one up to `budget`; past the budget the count advances through the exact
// negative binomial increment law of the process.
inline std::vector<long long> yule_counts_at(const std::vector<double>& times, Rng& rng,
                                             long long budget = 1000000) {
  std::vector<long long> out;
  out.reserve(times.size());
  double tau = 0.0;
  long long m = 1;
  long long enumerated = 0;
  for (double t : times) {
    if (t < tau) throw std::invalid_argument("yule_counts_at: times must be nondecreasing");
    while (enumerated <= budget) {
      double wait = rng.exponential(static_cast<double>(m));
      if (tau + wait > t) {
        tau = t;  // no birth before t; memorylessness restarts the clock
        break;
      }
      tau += wait;
      ++m;
      ++enumerated;
    }
    if (enumerated > budget && tau < t) {
      m += rng.negative_binomial(m, std::exp(-(t - tau)));
      tau = t;
    }
    out.push_back(m);
  }
  return out;
}

enum class DelayMode { stationary, zero_delay };

// Lazy renewal process with spacings -log(1-H); either with the stationary
// delay for the first point or started fresh at zero.
class RenewalProcess {
 public:
  RenewalProcess(HazardModel model, DelayMode mode, Rng& rng)
      : model_(std::move(model)), mode_(mode), rng_(&rng) {}

  double point(long long i) {
    if (i < 0) throw std::invalid_argument("RenewalProcess::point: i must be >= 0");
    while (static_cast<long long>(points_.size()) <= i) grow();
    return points_[static_cast<std::size_t>(i)];
  }

  // N*_S(t) = #{i : S*_i <= t}
  long long count_at(double t) {
    if (t < 0) return 0;
    while (points_.empty() || points_.back() <= t) grow();
    auto it = std::upper_bound(points_.begin(), points_.end(), t);
    return static_cast<long long>(it - points_.begin());
  }

  DelayMode mode() const { return mode_; }

 private:
  void grow() {
    if (static_cast<long long>(points_.size()) > kBirthCap)
      throw std::runtime_error("RenewalProcess: point cap exceeded");
    if (points_.empty()) {
      points_.push_back(mode_ == DelayMode::stationary ? sample_stationary_delay(model_, *rng_)
                                                       : sample_log_spacing(model_, *rng_));
    } else {
      double next = points_.back() + sample_log_spacing(model_, *rng_);
      if (next <= points_.back()) next = std::nextafter(points_.back(), kInf);
      points_.push_back(next);
    }
  }

  std::vector<double> points_;
  HazardModel model_;
  DelayMode mode_;
  Rng* rng_;
};

// A finite window of the interleaving, as a symbol string over stars ('Y',
// births) and bars ('S', renewal points). The trailing count of stars after
// the last bar is always censored: the next bar is outside the window.
struct InterleavingTrace {
  std::string symbols;
  bool censored_last_count = true;
};

// counts of stars between consecutive bars: N_0 before the first bar, then
// one entry per bar-to-bar stretch (exact entries only)
inline std::vector<long long> trace_counts(const InterleavingTrace& trace) {
  std::vector<long long> n;
  long long run = 0;
  for (char c : trace.symbols) {
    if (c == 'Y') {
      ++run;
    } else if (c == 'S') {
      n.push_back(run);
      run = 0;
    } else {
      throw std::invalid_argument("trace_counts: invalid symbol");
    }
  }
  return n;
}

// stars after the last bar: the lower bound for the censored next count
inline long long trace_censored_tail(const InterleavingTrace& trace) {
  long long run = 0;
  for (char c : trace.symbols) {
    if (c == 'Y')
      ++run;
    else
      run = 0;
  }
  return run;
}

// bars between consecutive stars: G_j between the j-th and (j+1)-th star;
// bars after the final star are returned separately by trace_trailing_bars
inline std::vector<long long> trace_gaps(const InterleavingTrace& trace) {
  if (trace.symbols.empty() || trace.symbols.front() != 'Y')
    throw std::invalid_argument("trace_gaps: trace must begin with a star");
  std::vector<long long> g;
  long long run = 0;
  bool seen_star = false;
  for (char c : trace.symbols) {
    if (c == 'Y') {
      if (seen_star) g.push_back(run);
      run = 0;
      seen_star = true;
    } else if (c == 'S') {
      ++run;
    } else {
      throw std::invalid_argument("trace_gaps: invalid symbol");
    }
  }
  return g;
}

inline long long trace_trailing_bars(const InterleavingTrace& trace) {
  long long run = 0;
  for (char c : trace.symbols) {
    if (c == 'S')
      ++run;
    else
      run = 0;
  }
  return run;
}

inline std::string trace_from_counts(const std::vector<long long>& n, long long censored_tail) {
  std::string s;
  for (long long v : n) {
    s.append(static_cast<std::size_t>(v), 'Y');
    s.push_back('S');
  }
  s.append(static_cast<std::size_t>(censored_tail), 'Y');
  return s;
}

inline std::string trace_from_gaps(const std::vector<long long>& g, long long trailing_bars) {
  std::string s = "Y";
  for (long long v : g) {
    s.append(static_cast<std::size_t>(v), 'S');
    s.push_back('Y');
  }
  s.append(static_cast<std::size_t>(trailing_bars), 'S');
  return s;
}

struct LimitSequences {
  std::vector<long long> q;  // Q_0..Q_{k_bars}: stars up to each bar
  std::vector<long long> n;  // N_0..N_{k_bars}: exact count differences
  long long censored_tail = 0;  // stars seen after bar k_bars (next count >= this)
  std::vector<long long> g;  // G_1..G_{j_stars}
  InterleavingTrace trace;
};

// Read Q, N, G and the merged trace off the interleaving of the two
// processes. Both processes extend lazily; merged event times must be
// strictly distinct (ties have probability zero for continuous clocks).
inline LimitSequences build_limit_sequences(YuleProcess& yule, RenewalProcess& renewal,
                                            long long k_bars, long long j_stars) {
  if (k_bars < 0 || j_stars < 1)
    throw std::invalid_argument("build_limit_sequences: need k_bars >= 0 and j_stars >= 1");
  LimitSequences out;

  double last_bar = renewal.point(k_bars);
  for (long long k = 0; k <= k_bars; ++k)
    out.q.push_back(yule.count_at(renewal.point(k)));
  out.n.push_back(out.q.front());
  for (std::size_t k = 1; k < out.q.size(); ++k) out.n.push_back(out.q[k] - out.q[k - 1]);

  long long prev = 0;
  for (long long j = 1; j <= j_stars; ++j) {
    long long cum = renewal.count_at(yule.birth_time(j));
    out.g.push_back(cum - prev);
    prev = cum;
  }

  double horizon = std::max(last_bar, yule.birth_time(j_stars));
  std::vector<std::pair<double, char>> events;
  for (double t : yule.times()) {
    if (t > horizon) break;
    events.emplace_back(t, 'Y');
  }
  for (long long i = 0; renewal.point(i) <= horizon; ++i) events.emplace_back(renewal.point(i), 'S');
  std::sort(events.begin(), events.end());
  for (std::size_t i = 1; i < events.size(); ++i)
    if (events[i].first == events[i - 1].first)
      throw std::runtime_error("build_limit_sequences: tied event times");
  for (const auto& [t, c] : events) out.trace.symbols.push_back(c);
  if (out.trace.symbols.empty() || out.trace.symbols.front() != 'Y')
    throw std::logic_error("build_limit_sequences: trace must begin with the birth at zero");

  // stars strictly after bar k_bars inside the window
  long long stars_after = 0;
  for (double t : yule.times()) {
    if (t > horizon) break;
    if (t > last_bar) ++stars_after;
  }
  out.censored_tail = stars_after;
  out.trace.censored_last_count = true;
  return out;
}

}  // namespace sieve
