#include "doctest.h"

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>

#include "walklab/errors.hpp"
#include "walklab/step_law.hpp"
#include "walklab/trajectory.hpp"

using namespace walklab;

TEST_CASE("lazy walk table") {
  const StepLaw law = lazy_srw(1, 0.5);
  REQUIRE(law.support().size() == 3);
  CHECK(law.support()[0].site[0] == -1);
  CHECK(law.support()[0].prob == 0.25);
  CHECK(law.support()[1].prob == 0.5);
  CHECK(law.support()[2].prob == 0.25);
  CHECK(law.drift()[0] == 0.0);
  CHECK(law.alpha() == 2.0);
  CHECK(law.covariance()[0][0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(law.symmetric());
}

TEST_CASE("product lazy walk in d=2 has diagonal covariance") {
  const StepLaw law = product_lazy(2, 0.5);
  CHECK(law.support().size() == 9);
  CHECK(law.covariance()[0][0] == doctest::Approx(0.5));
  CHECK(law.covariance()[1][1] == doctest::Approx(0.5));
  CHECK(std::fabs(law.covariance()[0][1]) < 1e-15);
  CHECK(law.symmetric());
}

TEST_CASE("symmetric stable lattice law") {
  const StepLaw law = sym_stable_lattice(1.5, 1'000'000);
  CHECK(law.heavy_tailed());
  CHECK_FALSE(law.kernel_capable());
  CHECK(law.drift()[0] == 0.0);
  CHECK(law.symmetric());
  // P(+-k) proportional to k^{-5/2}.
  const auto atoms = law.support();
  auto prob_of = [&](std::int64_t k) {
    for (const auto& a : atoms)
      if (a.site[0] == k) return a.prob;
    return 0.0;
  };
  CHECK(prob_of(2) / prob_of(1) == doctest::Approx(std::pow(2.0, -2.5)).epsilon(1e-12));
  CHECK(prob_of(-1000) / prob_of(10) == doctest::Approx(std::pow(100.0, -2.5)).epsilon(1e-10));
}

TEST_CASE("drift_pareto drift matches a 50-digit evaluation of the defining series") {
  using Big = boost::multiprecision::cpp_bin_float_50;
  const double v = 0.5;
  const std::int64_t k_max = 100'000;
  const StepLaw law = drift_pareto(v, 2.0, k_max);

  // Oracle: tau = (3/2 - v) / (3/2 + sum k^-2 / sum k^-3), mean = 3/2 (1 - tau) - tau sum k^-2 / sum k^-3.
  Big z = 0, first = 0;
  for (std::int64_t k = k_max; k >= 1; --k) {
    const Big kk = k;
    z += 1 / (kk * kk * kk);
    first += 1 / (kk * kk);
  }
  const Big ratio = first / z;
  const Big tau = (Big(1.5) - v) / (Big(1.5) + ratio);
  const Big mean = Big(1.5) * (1 - tau) - tau * ratio;
  CHECK(std::fabs(law.drift()[0] - mean.convert_to<double>()) < 1e-9);
  CHECK(std::fabs(law.drift()[0] - v) < 1e-9);
  CHECK(law.tail_cutoff() == k_max);
}

TEST_CASE("hypothesis violations are rejected with a named diagnostic") {
  SUBCASE("alpha = 1") {
    StepLawParams p;
    p.numbers = {{"alpha", 1.0}, {"k_max", 100}};
    CHECK_THROWS_WITH_AS(make_step_law("sym_stable_lattice", p), doctest::Contains("alpha = 1"), HypothesisError);
  }
  SUBCASE("periodic simple walk") {
    CHECK_THROWS_WITH_AS(table_law(1, {{Site{-1}, 0.5}, {Site{1}, 0.5}}), doctest::Contains("aperiodicity"),
                         HypothesisError);
    CHECK_THROWS_WITH_AS(lazy_srw(1, 0.0), doctest::Contains("aperiodicity"), HypothesisError);
  }
  SUBCASE("degenerate support") {
    CHECK_THROWS_WITH_AS(table_law(1, {{Site{0}, 0.5}, {Site{2}, 0.5}}), doctest::Contains("non-degeneracy"),
                         HypothesisError);
    CHECK_THROWS_WITH_AS(table_law(2, {{Site{0, 0}, 0.5}, {Site{1, 0}, 0.5}}), doctest::Contains("non-degeneracy"),
                         HypothesisError);
  }
  SUBCASE("normalisation") {
    CHECK_THROWS_WITH_AS(table_law(1, {{Site{-1}, 0.3}, {Site{0}, 0.3}, {Site{1}, 0.3}}), doctest::Contains("sum to"),
                         HypothesisError);
    CHECK_THROWS_AS(table_law(1, {{Site{-1}, -0.1}, {Site{0}, 0.6}, {Site{1}, 0.5}}), HypothesisError);
  }
  SUBCASE("zero mean required") {
    CHECK_THROWS_WITH_AS(zero_mean_table(1, {{Site{0}, 0.5}, {Site{1}, 0.5}}), doctest::Contains("mean"),
                         HypothesisError);
  }
  SUBCASE("unknown preset") { CHECK_THROWS_AS(make_step_law("nope", {}), HypothesisError); }
}

TEST_CASE("lattice generation") {
  const std::vector<Site> unit{{1, 0}, {0, 1}};
  CHECK(generates_lattice(unit, 2));
  const std::vector<Site> diag{{1, 1}, {1, -1}};
  CHECK_FALSE(generates_lattice(diag, 2));
  const std::vector<Site> skew{{2, 1}, {1, 1}};
  CHECK(generates_lattice(skew, 2));
  const std::vector<Site> coprime{{6}, {10}, {15}};
  CHECK(generates_lattice(coprime, 1));
  const std::vector<Site> even{{4}, {6}};
  CHECK_FALSE(generates_lattice(even, 1));
}

TEST_CASE("make_step_law by name") {
  StepLawParams p;
  p.numbers = {{"d", 1}, {"hold", 0.5}};
  const StepLaw law = make_step_law("lazy_srw", p);
  CHECK(law.support().size() == 3);
  p.numbers = {{"v", 0.5}, {"beta", 2.0}, {"k_max", 1000}};
  CHECK(make_step_law("drift_pareto", p).drift()[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("sample_path basics") {
  const StepLaw lazy = lazy_srw(1, 0.5);
  SUBCASE("N = 0 stays at the origin") {
    const auto t = sample_path(lazy, 5, 0);
    CHECK(t.final_position == Site{});
    CHECK(t.min_position == Site{});
    CHECK(t.max_position == Site{});
  }
  SUBCASE("deterministic given the seed") {
    const auto a = sample_path(lazy, 77, 1000, true);
    const auto b = sample_path(lazy, 77, 1000, true);
    CHECK(a.positions == b.positions);
    CHECK(a.positions.size() == 1001);
    CHECK(a.positions.front() == Site{});
    for (std::size_t n = 1; n < a.positions.size(); ++n) CHECK(std::llabs(a.positions[n][0] - a.positions[n - 1][0]) <= 1);
  }
  SUBCASE("lazy walk empirical mean step within 4 sigma of 0") {
    const std::uint64_t n = 10'000;
    const auto t = sample_path(lazy, 2024, n);
    const double mean = static_cast<double>(t.final_position[0]) / n;
    CHECK(std::fabs(mean) < 4.0 * std::sqrt(0.5 / n));
  }
  SUBCASE("drift_pareto mean within 5 standard errors of v") {
    const StepLaw law = drift_pareto(0.5, 2.0, 100'000);
    const std::uint64_t n = 10'000;
    const auto t = sample_path(law, 11, n);
    const double se = std::sqrt(law.covariance()[0][0] / n);
    CHECK(std::fabs(static_cast<double>(t.final_position[0]) / n - 0.5) < 5.0 * se);
  }
}
