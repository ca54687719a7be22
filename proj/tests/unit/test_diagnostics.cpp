#include "doctest.h"

#include <cmath>
#include <numbers>

#include "walklab/diagnostics.hpp"
#include "walklab/errors.hpp"

using namespace walklab;

namespace {

// P(|S_n| > r) for the lazy walk, from S_n = Y - n with Y ~ Binomial(2n, 1/2).
double lazy_tail_oracle(std::int64_t n, double r) {
  double total = 0.0;
  for (std::int64_t x = -n; x <= n; ++x) {
    if (std::fabs(static_cast<double>(x)) <= r) continue;
    const double log_p = std::lgamma(2.0 * n + 1) - std::lgamma(static_cast<double>(n + x) + 1) -
                         std::lgamma(static_cast<double>(n - x) + 1) - 2.0 * n * std::log(2.0);
    total += std::exp(log_p);
  }
  return total;
}

}  // namespace

TEST_CASE("llt_report at n = 1 equals the closed form") {
  const std::vector<std::uint64_t> ns{1};
  const auto rows = llt_report(lazy_srw(1, 0.5), ns);
  REQUIRE(rows.size() == 1);
  auto g = [](double x) { return std::exp(-x * x) / std::sqrt(std::numbers::pi); };  // variance 1/2
  const double expected =
      std::max({std::fabs(0.25 - g(-1)), std::fabs(0.5 - g(0)), std::fabs(0.25 - g(1))});
  CHECK(rows[0].sup_error == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("llt error decays for lazy walks") {
  const std::vector<std::uint64_t> ns{100, 400};
  const auto one = llt_report(lazy_srw(1, 0.5), ns);
  CHECK(one[1].sup_error < one[0].sup_error);
  CHECK(one[1].sup_error < 0.01);
  const auto two = llt_report(product_lazy(2, 0.5), ns);
  CHECK(two[1].sup_error < two[0].sup_error);
  CHECK(std::isfinite(two[0].sup_error));
}

TEST_CASE("llt_report rejects alpha < 2") {
  const std::vector<std::uint64_t> ns{10};
  CHECK_THROWS_WITH_AS(llt_report(sym_stable_lattice(1.5, 100), ns), doctest::Contains("alpha = 2"), HypothesisError);
}

TEST_CASE("gaussian density normalisation in d = 2") {
  Matrix cov{};
  cov[0][0] = 2.0;
  cov[1][1] = 0.5;
  cov[0][1] = cov[1][0] = 0.3;
  // Midpoint quadrature over a wide box.
  double sum = 0.0;
  const double h = 0.05;
  for (double x = -12; x < 12; x += h)
    for (double y = -8; y < 8; y += h) sum += gaussian_density(cov, 2, Vector{x + h / 2, y + h / 2}) * h * h;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("tail_report") {
  const StepLaw lazy = lazy_srw(1, 0.5);
  SUBCASE("support radius 1 at n = 1") { CHECK(tail_report(lazy, 1, 1.0).mass == 0.0); }
  SUBCASE("binomial oracle at n = 10^4") {
    const auto k = kernel_at(lazy, 10'000);
    for (double eta : {0.05, 0.1, 0.2}) {
      const auto r = tail_report(k, eta);
      const double oracle = lazy_tail_oracle(10'000, r.radius);
      CHECK(r.mass == doctest::Approx(oracle).epsilon(1e-8));
    }
    // Radius 10^{2.4} is about 3.55 standard deviations: the tail is ~4e-4.
    CHECK(tail_report(k, 0.1).mass > 1e-4);
    CHECK(tail_report(k, 0.2).mass < 1e-6);
  }
  SUBCASE("nonincreasing in eta") {
    const auto k = kernel_at(lazy, 2'000);
    double prev = 2.0;
    for (double eta = 0.0; eta <= 0.5; eta += 0.02) {
      const double m = tail_report(k, eta).mass;
      CHECK(m <= prev);
      prev = m;
    }
  }
}

TEST_CASE("min_tail_report") {
  SUBCASE("m = 0 has probability one") {
    const std::vector<std::int64_t> ms{0};
    const auto rep = min_tail_report(drift_pareto(0.5, 2.0, 10'000), ms, 200, 3);
    CHECK(rep.rows[0].probability == 1.0);
  }
  SUBCASE("deterministic +1 walk never goes negative") {
    const std::vector<std::int64_t> ms{0, 1, 5, 50};
    const auto rep = min_tail_report(shift_law(1, Site{1}), ms, 100, 3);
    CHECK(rep.rows[0].probability == 1.0);
    for (std::size_t i = 1; i < rep.rows.size(); ++i) CHECK(rep.rows[i].probability == 0.0);
  }
  SUBCASE("drift_pareto: strictly decreasing in m") {
    const std::vector<std::int64_t> ms{4, 16, 64};
    const auto rep = min_tail_report(drift_pareto(0.5, 2.0, 100'000), ms, 10'000, 17);
    for (std::size_t i = 1; i < rep.rows.size(); ++i) {
      const auto& a = rep.rows[i - 1];
      const auto& b = rep.rows[i];
      CHECK(b.probability < a.probability);
      CHECK(a.probability - b.probability > -3.0 * std::hypot(a.std_error, b.std_error));
    }
    CHECK(rep.slope_available);
    CHECK(rep.loglog_slope < 0.0);
    CHECK(rep.censored == 0);
  }
  SUBCASE("zero drift is a precondition violation") {
    const std::vector<std::int64_t> ms{1};
    CHECK_THROWS_AS(min_tail_report(lazy_srw(1, 0.5), ms, 10, 1), HypothesisError);
  }
}
