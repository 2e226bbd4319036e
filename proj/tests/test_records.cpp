#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include <sieve/records.hpp>
#include <sieve/stats.hpp>

using namespace sieve;

namespace {

InitialLaw geometric_initial(double s) {
  // pmf(j) = s (1-s)^{j-1} on {1,2,...}, tail T(i) = (1-s)^{i-1}
  return {[s](long long j) { return s * std::pow(1.0 - s, static_cast<double>(j - 1)); },
          [s](long long i) { return std::pow(1.0 - s, static_cast<double>(i - 1)); }};
}

}  // namespace

TEST_CASE("record kernels from an initial law", "[records]") {
  auto geom = geometric_initial(0.5);
  for (long long i = 1; i <= 10; ++i) {
    CHECK(weak_record_transition(geom, i, i) == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(strict_record_transition(geom, i, i) == 0.0);
  }
  // full tail at the bottom state
  for (const auto& law : {geometric_initial(0.5), geometric_initial(0.25)})
    CHECK(weak_record_transition(law, 1, 1) == Catch::Approx(law.pmf(1)).epsilon(1e-12));

  // rows are probability vectors
  for (long long i : {1LL, 3LL, 7LL}) {
    KahanSum wrow, srow;
    for (long long j = i; j <= 400; ++j) wrow.add(weak_record_transition(geom, i, j));
    for (long long j = i + 1; j <= 400; ++j) srow.add(strict_record_transition(geom, i, j));
    CHECK(std::abs(wrow.value() - 1.0) < 1e-12);
    CHECK(std::abs(srow.value() - 1.0) < 1e-12);
  }

  // finite support: tail denominator vanishes above it
  InitialLaw finite{[](long long j) { return j >= 1 && j <= 5 ? 0.2 : 0.0; },
                    [](long long i) { return i <= 5 ? 0.2 * static_cast<double>(6 - i) : 0.0; }};
  CHECK_THROWS_AS(weak_record_transition(finite, 6, 7), std::domain_error);
  CHECK_THROWS_AS(strict_record_transition(finite, 5, 7), std::domain_error);

  // complement-sum fallback agrees with the exact tail
  InitialLaw no_tail{geom.pmf, nullptr};
  for (long long i = 1; i <= 12; ++i)
    CHECK(no_tail.tail_at(i) == Catch::Approx(geom.tail(i)).epsilon(1e-10));
}

TEST_CASE("hitting probabilities reproduce the limit-chain closed form", "[records]") {
  for (const auto& model : {HazardModel::gem(1.0), HazardModel::beta(2, 3)}) {
    LimitLaw law(model);
    auto spec = limit_chain_spec(law);
    auto h = solve_hitting(spec, 30);
    for (long long j = 1; j <= 30; ++j) {
      INFO("j=" << j);
      REQUIRE(std::abs(h[static_cast<std::size_t>(j) - 1] - law.gap_hitting(j)) < 1e-10);
    }
  }
}

TEST_CASE("potentials: closed form, consistency, and equation residuals", "[records]") {
  LimitLaw g1(HazardModel::gem(1.0));
  auto spec = limit_chain_spec(g1);
  auto g = solve_potential(spec, 30);
  for (long long j = 1; j <= 30; ++j) {
    INFO("j=" << j);
    REQUIRE(std::abs(g[static_cast<std::size_t>(j) - 1] - 1.0 / static_cast<double>(j)) < 1e-10);
  }

  auto geom = geometric_initial(0.5);
  auto wspec = weak_record_spec(geom);
  auto wh = solve_hitting(wspec, 40);
  auto wg = solve_potential(wspec, 40);
  for (long long j = 1; j <= 40; ++j) {
    double stay = weak_record_transition(geom, j, j);
    CHECK(wg[static_cast<std::size_t>(j) - 1] ==
          Catch::Approx(wh[static_cast<std::size_t>(j) - 1] / (1.0 - stay)).epsilon(1e-10));
    CHECK(wg[static_cast<std::size_t>(j) - 1] >= wh[static_cast<std::size_t>(j) - 1]);
  }

  // potential equation residuals for both specs
  for (const auto& s : {spec, wspec}) {
    auto pot = solve_potential(s, 50);
    for (long long j = 1; j <= 50; ++j) {
      KahanSum rhs;
      rhs.add(s.initial(j));
      for (long long i = 1; i <= j; ++i)
        rhs.add(pot[static_cast<std::size_t>(i) - 1] * s.transition(i, j));
      INFO("j=" << j);
      REQUIRE(std::abs(pot[static_cast<std::size_t>(j) - 1] - rhs.value()) < 1e-10);
    }
  }
}

TEST_CASE("occupation law parameters", "[records]") {
  auto geom = geometric_initial(0.5);
  auto strict = strict_record_spec(geom);
  auto occ = occupation_law(strict, 4);
  CHECK(occ.stay == 0.0);  // strict records visit each state at most once
  CHECK(occ.mean == Catch::Approx(occ.hitting).epsilon(1e-12));

  LimitLaw g1(HazardModel::gem(1.0));
  auto occ1 = occupation_law(limit_chain_spec(g1), 1);
  CHECK(occ1.hitting == Catch::Approx(0.5).epsilon(1e-10));
  CHECK(occ1.stay == Catch::Approx(0.5).epsilon(1e-10));
  CHECK(occ1.tail(2) == Catch::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("reconstruction recovers the record kernels", "[records]") {
  auto geom = geometric_initial(0.5);
  const long long J = 25;
  std::vector<double> h(J), zero(J, 0.0);
  for (long long j = 1; j <= J; ++j)
    h[static_cast<std::size_t>(j) - 1] = weak_record_transition(geom, j, j);

  auto weak = reconstruct_transition(h, h);  // p_{ii} = h_i
  auto strict = reconstruct_transition(h, zero);
  CHECK(weak.product_condition_ok);
  for (long long i = 1; i <= J; ++i)
    for (long long j = i; j <= J; ++j) {
      INFO("i=" << i << " j=" << j);
      REQUIRE(std::abs(weak(i, j) - weak_record_transition(geom, i, j)) < 1e-12);
      if (j > i) REQUIRE(std::abs(strict(i, j) - strict_record_transition(geom, i, j)) < 1e-12);
    }

  // the implied initial law is the generating pmf
  for (long long j = 1; j <= J; ++j)
    CHECK(weak.initial(j) == Catch::Approx(geom.pmf(j)).epsilon(1e-12));

  CHECK_THROWS_AS(reconstruct_transition({0.0, 0.5}, {0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(reconstruct_transition({0.5}, {1.0}), std::invalid_argument);
  CHECK_THROWS_AS(reconstruct_transition({0.5, 0.5}, {0.0}), std::invalid_argument);

  // slowly decaying hitting values leave visible mass above the window
  std::vector<double> slow(J), diag(J, 0.5);
  for (long long j = 1; j <= J; ++j)
    slow[static_cast<std::size_t>(j) - 1] = 1.0 / ((j + 3.0) * (j + 3.0));
  CHECK_FALSE(reconstruct_transition(slow, diag).product_condition_ok);
}

TEST_CASE("reconstruction reproduces the gem limit kernel", "[records]") {
  const double theta = 2.0;
  LimitLaw law(HazardModel::gem(theta));
  const long long J = 20;
  std::vector<double> h(J);
  for (long long j = 1; j <= J; ++j)
    h[static_cast<std::size_t>(j) - 1] = theta / (static_cast<double>(j) + theta);
  auto chain = reconstruct_transition(h, h);  // for gem, p_{jj} = mu_{0,j} = h_j
  for (long long i = 1; i <= J; ++i)
    for (long long j = i; j <= J; ++j) {
      INFO("i=" << i << " j=" << j);
      REQUIRE(std::abs(chain(i, j) - law.transition_pmf(i, j)) < 1e-10);
    }
}

TEST_CASE("simulated record chains", "[records]") {
  auto geom = geometric_initial(0.5);
  auto draw = [](Rng& rng) { return 1 + rng.geometric_failures(0.5); };

  SECTION("strict records visit each level at most once") {
    Rng rng(42);
    for (int rep = 0; rep < 2000; ++rep) {
      auto res = simulate_record_chain(draw, RecordFlavor::strict, 100000, 6, rng);
      REQUIRE(res.complete);
      for (long long v : res.occupation) REQUIRE((v == 0 || v == 1));
      for (std::size_t k = 1; k < res.path.size(); ++k) REQUIRE(res.path[k] > res.path[k - 1]);
    }
  }

  SECTION("weak record occupation counts are independent across levels") {
    Rng rng(43);
    EmpiricalDist j12, j13, j23;
    const int reps = 100000;
    for (int rep = 0; rep < reps; ++rep) {
      auto res = simulate_record_chain(draw, RecordFlavor::weak, 100000, 3, rng);
      REQUIRE(res.complete);
      j12.add(Outcome{res.occupation[0], res.occupation[1]});
      j13.add(Outcome{res.occupation[0], res.occupation[2]});
      j23.add(Outcome{res.occupation[1], res.occupation[2]});
    }
    CHECK(chi_square_independence("g1-g2", j12, 0.001).pass);
    CHECK(chi_square_independence("g1-g3", j13, 0.001).pass);
    CHECK(chi_square_independence("g2-g3", j23, 0.001).pass);
  }

  SECTION("positive weak occupation counts are geometric") {
    Rng rng(44);
    EmpiricalDist emp;
    const int reps = 200000;
    for (int rep = 0; rep < reps; ++rep) {
      auto res = simulate_record_chain(draw, RecordFlavor::weak, 100000, 2, rng);
      if (res.occupation[1] >= 1) emp.add(res.occupation[1]);
    }
    double stay = weak_record_transition(geom, 2, 2);
    std::vector<Outcome> support;
    for (long long k = 1; k <= 60; ++k) support.push_back({k});
    auto rep = chi_square_gof(
        "weak-occ", emp,
        [stay](const Outcome& o) {
          return std::pow(stay, static_cast<double>(o[0] - 1)) * (1.0 - stay);
        },
        support, 0.001);
    INFO("p=" << rep.p_value);
    CHECK(rep.pass);
  }

  SECTION("weak record path transitions match the kernel") {
    Rng rng(45);
    const int reps = 200000;
    std::vector<long long> from2(12, 0);
    long long total = 0;
    for (int rep = 0; rep < reps; ++rep) {
      auto res = simulate_record_chain(draw, RecordFlavor::weak, 100000, 8, rng);
      for (std::size_t k = 0; k + 1 < res.path.size(); ++k)
        if (res.path[k] == 2 && res.path[k + 1] <= 11) {
          ++total;
          ++from2[static_cast<std::size_t>(res.path[k + 1])];
        }
    }
    for (long long j = 2; j <= 8; ++j) {
      double p = weak_record_transition(geom, 2, j);
      double emp = static_cast<double>(from2[static_cast<std::size_t>(j)]) / total;
      double se = std::sqrt(p * (1 - p) / total);
      INFO("j=" << j);
      REQUIRE(std::abs(emp - p) < 4 * se);
    }
  }
}

TEST_CASE("a reconstructed chain watched at state changes is the strict record chain",
          "[records]") {
  auto geom = geometric_initial(0.5);
  const long long J = 30;
  std::vector<double> h(J), diag(J, 0.3);  // arbitrary self-transitions
  for (long long j = 1; j <= J; ++j)
    h[static_cast<std::size_t>(j) - 1] = weak_record_transition(geom, j, j);
  auto chain = reconstruct_transition(h, diag);

  auto step = [&chain, J](long long i, Rng& rng) {
    double u = rng.uniform01();
    double cum = 0.0;
    for (long long j = i; j <= J; ++j) {
      cum += chain(i, j);
      if (u <= cum) return j;
    }
    return J + 1;  // beyond the window; treated as an exit
  };

  Rng rng(4242);
  const int reps = 300000;
  std::vector<long long> jumps_from2(12, 0);
  long long total = 0;
  for (int rep = 0; rep < reps; ++rep) {
    long long state = 2;  // start the watched segment at a fixed state
    long long next = state;
    while (next == state) next = step(state, rng);
    if (next <= 11) {
      ++total;
      ++jumps_from2[static_cast<std::size_t>(next)];
    }
  }
  for (long long j = 3; j <= 9; ++j) {
    double p = strict_record_transition(geom, 2, j);
    double emp = static_cast<double>(jumps_from2[static_cast<std::size_t>(j)]) / total;
    double se = std::sqrt(p * (1 - p) / total);
    INFO("j=" << j << " emp=" << emp << " exact=" << p);
    REQUIRE(std::abs(emp - p) < 4 * se);
  }
}

TEST_CASE("limit-chain occupation counts are dependent away from the gem family",
          "[records]") {
  LimitLaw beta_law(HazardModel::beta(2, 3));
  Rng rng(777);
  EmpiricalDist joint;
  const int reps = 200000;
  for (int rep = 0; rep < reps; ++rep) {
    auto q = beta_law.simulate_chain_past(2, rng);
    auto g = occupation_counts(q, 2);
    joint.add(Outcome{g[0], g[1]});
  }
  auto rep = chi_square_independence("beta-dependence", joint, 0.001);
  INFO("p=" << rep.p_value);
  CHECK(rep.p_value < 0.001);

  // and the gem chain's counts are independent
  LimitLaw gem_law(HazardModel::gem(1.0));
  EmpiricalDist gjoint;
  for (int rep2 = 0; rep2 < reps; ++rep2) {
    auto q = gem_law.simulate_chain_past(2, rng);
    auto g = occupation_counts(q, 2);
    gjoint.add(Outcome{g[0], g[1]});
  }
  auto grep = chi_square_independence("gem-independence", gjoint, 0.001);
  INFO("p=" << grep.p_value);
  CHECK(grep.pass);
}
