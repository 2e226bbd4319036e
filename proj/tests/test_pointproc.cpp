#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <sieve/limitchain.hpp>
#include <sieve/pointproc.hpp>
#include <sieve/stats.hpp>

using namespace sieve;

namespace {

double negbin_pmf(long long m, double s, long long d) {
  return std::exp(log_binomial(static_cast<double>(m + d - 1), static_cast<double>(d)) +
                  m * std::log(s) + d * std::log1p(-s));
}

std::vector<Outcome> range_support(long long lo, long long hi) {
  std::vector<Outcome> v;
  for (long long k = lo; k <= hi; ++k) v.push_back({k});
  return v;
}

}  // namespace

TEST_CASE("birth time constructions: shape invariants", "[pointproc]") {
  Rng rng(1);
  for (auto c : {YuleConstruction::exponential_spacings, YuleConstruction::order_statistics,
                 YuleConstruction::log_gamma, YuleConstruction::kendall}) {
    for (long long k : {0LL, 1LL, 7LL}) {
      auto p = sample_yule(k, rng, c, 9);
      REQUIRE(p.birth_times.size() == static_cast<std::size_t>(k) + 1);
      REQUIRE(p.birth_times.front() == 0.0);
      for (std::size_t i = 1; i < p.birth_times.size(); ++i)
        REQUIRE(p.birth_times[i] > p.birth_times[i - 1]);
    }
  }
  CHECK_THROWS_AS(sample_yule(5, rng, YuleConstruction::order_statistics, 4),
                  std::invalid_argument);
  CHECK(sample_yule(0, rng).birth_times == std::vector<double>{0.0});
}

TEST_CASE("mean third birth time is the third harmonic number", "[pointproc]") {
  Rng rng(2);
  const int reps = 1000000;
  double sum = 0.0;
  for (int r = 0; r < reps; ++r) sum += sample_yule(3, rng).birth_times[3];
  double sd = std::sqrt(1.0 + 0.25 + 1.0 / 9.0);
  CHECK(std::abs(sum / reps - 11.0 / 6.0) < 3 * sd / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("the four constructions agree in law", "[pointproc]") {
  const int reps = 30000;
  const long long K = 5;
  std::vector<std::vector<std::vector<double>>> draws(4);
  YuleConstruction cs[] = {YuleConstruction::exponential_spacings,
                           YuleConstruction::order_statistics, YuleConstruction::log_gamma,
                           YuleConstruction::kendall};
  for (int c = 0; c < 4; ++c) {
    Rng rng(100 + c);
    draws[c].assign(K, {});
    for (int r = 0; r < reps; ++r) {
      auto p = sample_yule(K, rng, cs[c], K);
      for (long long j = 1; j <= K; ++j)
        draws[c][static_cast<std::size_t>(j - 1)].push_back(
            p.birth_times[static_cast<std::size_t>(j)]);
    }
  }
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      for (long long j = 1; j <= K; ++j) {
        auto rep = ks_two_sample("yule-eq", draws[a][static_cast<std::size_t>(j - 1)],
                                 draws[b][static_cast<std::size_t>(j - 1)], 0.001);
        INFO("pair (" << a << "," << b << ") coordinate " << j << " p=" << rep.p_value);
        REQUIRE(rep.pass);
      }
}

TEST_CASE("lazy process counts", "[pointproc]") {
  Rng rng(3);
  YuleProcess y(rng);
  CHECK(y.count_at(0.0) == 1);

  const int reps = 100000;
  double sum = 0.0;
  for (int r = 0; r < reps; ++r) {
    Rng prng(5000 + r);
    YuleProcess proc(prng);
    sum += static_cast<double>(proc.count_at(1.0));
  }
  double sd = std::sqrt(std::exp(2.0) - std::exp(1.0));
  CHECK(std::abs(sum / reps - std::exp(1.0)) < 3 * sd / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("count at a fixed time is geometric", "[pointproc]") {
  Rng rng(4);
  EmpiricalDist emp;
  const int reps = 200000;
  const double t = 0.8;
  for (int r = 0; r < reps; ++r) {
    YuleProcess proc(rng);
    emp.add(proc.count_at(t));
  }
  double p = std::exp(-t);
  auto rep = chi_square_gof("yule-geom", emp,
                            [p](const Outcome& o) {
                              return p * std::pow(1 - p, static_cast<double>(o[0] - 1));
                            },
                            range_support(1, 80), 0.001);
  INFO("p=" << rep.p_value);
  CHECK(rep.pass);
}

TEST_CASE("increments given the current count are negative binomial", "[pointproc]") {
  Rng rng(5);
  EmpiricalDist emp;
  const double s = 0.7, t = 0.5;
  const long long m = 2;
  const int reps = 400000;
  for (int r = 0; r < reps; ++r) {
    auto counts = yule_counts_at({s, s + t}, rng);
    if (counts[0] == m) emp.add(counts[1] - counts[0]);
  }
  double succ = std::exp(-t);
  auto rep = chi_square_gof("yule-negbin", emp,
                            [m, succ](const Outcome& o) { return negbin_pmf(m, succ, o[0]); },
                            range_support(0, 100), 0.001);
  INFO("p=" << rep.p_value << " kept=" << emp.total());
  CHECK(rep.pass);
}

TEST_CASE("budgeted counting agrees with full enumeration in law", "[pointproc]") {
  Rng r1(6), r2(7);
  EmpiricalDist full, budgeted;
  const int reps = 200000;
  const std::vector<double> grid{1.0, 2.5};
  for (int r = 0; r < reps; ++r) {
    auto a = yule_counts_at(grid, r1);                    // enumeration only
    auto b = yule_counts_at(grid, r2, /*budget=*/3);      // forces the fast-forward path
    full.add(Outcome{a[0], a[1]});
    budgeted.add(Outcome{b[0], b[1]});
  }
  auto rep = chi_square_two_sample("budget-equivalence", full, budgeted, 0.001);
  INFO("p=" << rep.p_value);
  CHECK(rep.pass);
}

TEST_CASE("renewal paths: deterministic spacing", "[pointproc]") {
  auto unit = HazardModel::atoms({1.0 - std::exp(-1.0)}, {1.0});
  Rng rng(8);
  std::vector<double> delays;
  for (int r = 0; r < 20000; ++r) {
    RenewalProcess ren(unit, DelayMode::stationary, rng);
    double s0 = ren.point(0);
    delays.push_back(s0);
    for (long long i = 1; i <= 3; ++i)
      REQUIRE(ren.point(i) - s0 == Catch::Approx(static_cast<double>(i)).epsilon(1e-12));
  }
  CHECK(ks_one_sample("unit-delay", delays,
                      [](double t) { return std::clamp(t, 0.0, 1.0); }, 0.001)
            .pass);
}

TEST_CASE("stationary renewal counts have the right intensity", "[pointproc]") {
  auto g2 = HazardModel::gem(2.0);
  Rng rng(9);
  const int reps = 100000;
  const double t = 5.0;
  double sum = 0.0;
  for (int r = 0; r < reps; ++r) {
    RenewalProcess ren(g2, DelayMode::stationary, rng);
    sum += static_cast<double>(ren.count_at(t));
  }
  // Poisson(theta t) here, so sd = sqrt(theta t)
  double sd = std::sqrt(2.0 * t);
  CHECK(std::abs(sum / reps - t / mu_log(g2)) < 3 * sd / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("gem renewal process is Poisson with constant rate", "[pointproc]") {
  for (double theta : {1.0, 2.0}) {
    auto m = HazardModel::gem(theta);
    Rng rng(10);
    std::vector<double> delays, spacings;
    for (int r = 0; r < 30000; ++r) {
      RenewalProcess ren(m, DelayMode::stationary, rng);
      delays.push_back(ren.point(0));
      spacings.push_back(ren.point(1) - ren.point(0));
    }
    auto expcdf = [theta](double t) { return -std::expm1(-theta * t); };
    INFO("theta=" << theta);
    CHECK(ks_one_sample("gem-delay", delays, expcdf, 0.001).pass);
    CHECK(ks_one_sample("gem-spacing", spacings, expcdf, 0.001).pass);
  }
}

TEST_CASE("zero-delay mode starts with a plain spacing", "[pointproc]") {
  auto g1 = HazardModel::gem(1.0);
  Rng rng(11);
  std::vector<double> first(30000);
  for (auto& v : first) {
    RenewalProcess ren(g1, DelayMode::zero_delay, rng);
    v = ren.point(0);
  }
  CHECK(ks_one_sample("zero-delay", first, [](double t) { return -std::expm1(-t); }, 0.001).pass);
}

TEST_CASE("trace extraction on the worked interleaving", "[pointproc]") {
  InterleavingTrace trace{"YYSYSSSYYYYSYYY", true};
  CHECK(trace_counts(trace) == std::vector<long long>{2, 1, 0, 0, 4});
  CHECK(trace_censored_tail(trace) == 3);
  CHECK(trace_gaps(trace) == std::vector<long long>{0, 1, 3, 0, 0, 0, 1, 0, 0});
  CHECK(trace_trailing_bars(trace) == 0);
  CHECK(trace_from_counts({2, 1, 0, 0, 4}, 3) == trace.symbols);
  CHECK(trace_from_gaps({0, 1, 3, 0, 0, 0, 1, 0, 0}, 0) == trace.symbols);
  CHECK_THROWS_AS(trace_counts(InterleavingTrace{"YxS", true}), std::invalid_argument);
  CHECK_THROWS_AS(trace_gaps(InterleavingTrace{"SYY", true}), std::invalid_argument);
}

TEST_CASE("built sequences are dual readings of one trace", "[pointproc]") {
  // the lighter tail keeps full trace enumeration cheap
  auto g3 = HazardModel::gem(3.0);
  Rng rng(12);
  for (int rep = 0; rep < 3000; ++rep) {
    YuleProcess yule(rng);
    RenewalProcess ren(g3, DelayMode::stationary, rng);
    auto seq = build_limit_sequences(yule, ren, 3, 4);

    REQUIRE(seq.q.size() == 4);
    REQUIRE(seq.n.size() == 4);
    REQUIRE(seq.g.size() == 4);
    REQUIRE(seq.q.front() >= 1);
    REQUIRE(std::is_sorted(seq.q.begin(), seq.q.end()));
    REQUIRE(seq.trace.symbols.front() == 'Y');
    REQUIRE(seq.trace.censored_last_count);

    // the two dual readings reconstruct the identical symbol string
    auto n_read = trace_counts(seq.trace);
    auto g_read = trace_gaps(seq.trace);
    REQUIRE(trace_from_counts(n_read, trace_censored_tail(seq.trace)) == seq.trace.symbols);
    REQUIRE(trace_from_gaps(g_read, trace_trailing_bars(seq.trace)) == seq.trace.symbols);

    // Q_k = stars before bar k+1 in the trace; N agrees with the differences
    for (std::size_t k = 0; k < seq.q.size() && k < n_read.size(); ++k) {
      long long stars = 0;
      for (std::size_t i = 0; i <= k; ++i) stars += n_read[i];
      REQUIRE(stars == seq.q[k]);
    }
    for (std::size_t j = 0; j < seq.g.size() && j < g_read.size(); ++j)
      REQUIRE(seq.g[j] == g_read[j]);

    // all gaps vanish exactly when the first bar comes after the last star read
    bool all_zero = std::all_of(seq.g.begin(), seq.g.end(), [](long long v) { return v == 0; });
    long long bars_before = 0;
    for (std::size_t i = 0; i < seq.trace.symbols.size(); ++i) {
      if (seq.trace.symbols[i] == 'S') {
        bars_before = static_cast<long long>(i);
        break;
      }
    }
    if (all_zero) REQUIRE(seq.censored_tail >= 0);
    (void)bars_before;
  }
}

TEST_CASE("interleaving counts match the direct chain in law", "[pointproc]") {
  auto g3 = HazardModel::gem(3.0);
  LimitLaw law(g3);
  Rng r1(13), r2(14);
  EmpiricalDist from_points, from_chain;
  const int reps = 30000;
  for (int r = 0; r < reps; ++r) {
    YuleProcess yule(r1);
    RenewalProcess ren(g3, DelayMode::stationary, r1);
    auto seq = build_limit_sequences(yule, ren, 3, 1);
    from_points.add(Outcome{seq.q[0], seq.q[1], seq.q[2], seq.q[3]});
  }
  for (int r = 0; r < reps; ++r) {
    auto q = law.simulate_chain(3, r2);
    from_chain.add(
        Outcome{static_cast<long long>(q[0]), static_cast<long long>(q[1]),
                static_cast<long long>(q[2]), static_cast<long long>(q[3])});
  }
  auto rep = chi_square_two_sample("construction-equivalence", from_points, from_chain, 0.001);
  INFO("p=" << rep.p_value);
  CHECK(rep.pass);
}
