#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <sieve/numeric.hpp>
#include <sieve/rng.hpp>
#include <sieve/stats.hpp>

using namespace sieve;

namespace {

std::vector<Outcome> range_support(long long lo, long long hi) {
  std::vector<Outcome> v;
  for (long long k = lo; k <= hi; ++k) v.push_back({k});
  return v;
}

double geom_pmf(double s, long long k) { return s * std::pow(1.0 - s, static_cast<double>(k)); }

}  // namespace

TEST_CASE("special function reference values", "[stats]") {
  CHECK(std::abs(chi_square_survival(3.841458820694124, 1.0) - 0.05) < 1e-9);
  CHECK(std::abs(chi_square_survival(10.827566170662733, 1.0) - 0.001) < 1e-9);
  CHECK(std::abs(normal_quantile(0.975) - 1.959963984540054) < 1e-12);
  CHECK(std::abs(kolmogorov_survival(1.3581015157406195) - 0.05) < 1e-3);
  CHECK(kolmogorov_survival(0.0) == 1.0);
}

TEST_CASE("chi-square gof is calibrated under the null", "[stats]") {
  // sampling from the exact pmf: p-values should rarely fall below 0.01
  const double s = 0.5;
  int low = 0;
  const int runs = 200;
  for (int run = 0; run < runs; ++run) {
    Rng rng(10000 + run);
    EmpiricalDist emp;
    for (int r = 0; r < 100000; ++r) emp.add(rng.geometric_failures(s));
    auto rep = chi_square_gof("calib", emp,
                              [s](const Outcome& o) { return geom_pmf(s, o[0]); },
                              range_support(0, 64), 0.001);
    if (rep.p_value < 0.01) ++low;
  }
  CHECK(low <= 10);  // 5% of 200
}

TEST_CASE("chi-square gof has power against a wrong law", "[stats]") {
  Rng rng(77);
  EmpiricalDist emp;
  for (int r = 0; r < 10000; ++r) emp.add(rng.geometric_failures(0.5));
  auto rep = chi_square_gof("power", emp,
                            [](const Outcome& o) { return geom_pmf(1.0 / 3.0, o[0]); },
                            range_support(0, 64), 0.001);
  CHECK(rep.p_value < 1e-6);
  CHECK_FALSE(rep.pass);
}

TEST_CASE("degenerate single-bucket input is rejected", "[stats]") {
  EmpiricalDist emp;
  emp.add(0LL, 1000);
  auto pmf = [](const Outcome& o) { return o[0] == 0 ? 1.0 : 0.0; };
  REQUIRE_THROWS_AS(chi_square_gof("one", emp, pmf, range_support(0, 0), 0.001),
                    std::invalid_argument);
  EmpiricalDist empty;
  REQUIRE_THROWS_AS(chi_square_gof("empty", empty, pmf, range_support(0, 0), 0.001),
                    std::invalid_argument);
}

TEST_CASE("merged accumulators reproduce the concatenated stream", "[stats]") {
  Rng rng(5150);
  EmpiricalDist whole, part1, part2;
  for (int r = 0; r < 20000; ++r) {
    long long v = rng.geometric_failures(0.3);
    whole.add(v);
    (r % 2 == 0 ? part1 : part2).add(v);
  }
  EmpiricalDist merged;
  merged.merge(part2);
  merged.merge(part1);
  REQUIRE(merged.total() == whole.total());
  for (const auto& [o, c] : whole.counts()) REQUIRE(merged.count(o) == c);

  auto pmf = [](const Outcome& o) { return geom_pmf(0.3, o[0]); };
  auto ra = chi_square_gof("merged", merged, pmf, range_support(0, 80), 0.001);
  auto rb = chi_square_gof("whole", whole, pmf, range_support(0, 80), 0.001);
  REQUIRE(ra.statistic == rb.statistic);
  REQUIRE(ra.dof == rb.dof);
  REQUIRE(ra.p_value == rb.p_value);
}

TEST_CASE("independence test calibration and power", "[stats]") {
  // false positives on a genuine product law
  int fp = 0;
  const int runs = 200;
  for (int run = 0; run < runs; ++run) {
    Rng rng(20000 + run);
    EmpiricalDist joint;
    for (int r = 0; r < 20000; ++r)
      joint.add(Outcome{rng.geometric_failures(0.5), rng.geometric_failures(0.4)});
    auto rep = chi_square_independence("indep", joint, 0.01);
    if (rep.p_value < 0.01) ++fp;
  }
  CHECK(fp <= 10);

  // dependence is detected
  Rng rng(999);
  EmpiricalDist joint;
  for (int r = 0; r < 20000; ++r) {
    long long x = rng.geometric_failures(0.5);
    long long y = rng.geometric_failures(0.4) + (x > 0 ? 1 : 0);
    joint.add(Outcome{x, y});
  }
  auto rep = chi_square_independence("dep", joint, 0.001);
  CHECK(rep.p_value < 1e-6);
}

TEST_CASE("two-sample chi-square separates equal from unequal laws", "[stats]") {
  Rng rng(31);
  EmpiricalDist a, b, c;
  for (int r = 0; r < 50000; ++r) {
    a.add(rng.geometric_failures(0.5));
    b.add(rng.geometric_failures(0.5));
    c.add(rng.geometric_failures(0.45));
  }
  CHECK(chi_square_two_sample("same", a, b, 0.001).pass);
  CHECK_FALSE(chi_square_two_sample("diff", a, c, 0.001).pass);
}

TEST_CASE("two-sample KS separates equal from unequal laws", "[stats]") {
  Rng rng(32);
  std::vector<double> a(20000), b(20000), c(20000);
  for (auto& v : a) v = rng.exponential();
  for (auto& v : b) v = rng.exponential();
  for (auto& v : c) v = rng.exponential(1.1);
  CHECK(ks_two_sample("same", a, b, 0.001).pass);
  CHECK_FALSE(ks_two_sample("diff", a, c, 0.001).pass);
}

TEST_CASE("tv distance of a sample against itself is zero", "[stats]") {
  Rng rng(33);
  EmpiricalDist emp;
  for (int r = 0; r < 1000; ++r) emp.add(rng.geometric_failures(0.5));
  double n = static_cast<double>(emp.total());
  auto self_pmf = [&emp, n](const Outcome& o) { return static_cast<double>(emp.count(o)) / n; };
  CHECK(tv_distance(emp, self_pmf, {}) == 0.0);
}

TEST_CASE("mean CI covers the truth at the stated level", "[stats]") {
  int covered = 0;
  const int runs = 200;
  for (int run = 0; run < runs; ++run) {
    Rng rng(40000 + run);
    std::vector<double> x(1000000);
    for (auto& v : x) v = rng.exponential();
    MeanCI ci = mean_ci(x, 0.99);
    if (std::abs(ci.mean - 1.0) <= ci.half_width) ++covered;
  }
  CHECK(covered >= 190);  // >= 95% of 200 runs at the 99% level
  REQUIRE_THROWS_AS(mean_ci({}, 0.99), std::invalid_argument);
}

TEST_CASE("report invariants", "[stats]") {
  auto r1 = make_pvalue_report("a", 1.0, 3, 0.01, 0.001);
  CHECK(r1.pass);
  auto r2 = make_pvalue_report("b", 1.0, 3, 0.0001, 0.001);
  CHECK_FALSE(r2.pass);
  auto r3 = make_exact_report("c", 1e-12, 1e-10);
  CHECK(r3.pass);
  auto j = to_json(r3);
  CHECK(j["pass"] == true);
  CHECK(j.contains("abs_error"));
}
