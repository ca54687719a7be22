#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "walklab/enumerate.hpp"
#include "walklab/errors.hpp"
#include "walklab/moments.hpp"

using namespace walklab;

namespace {

bool close(double a, double b, double tol = 1e-12) { return std::fabs(a - b) <= tol * std::max(1.0, std::fabs(b)); }

Observable random_table(std::size_t dim, std::uint64_t seed, std::int64_t radius, bool even = false) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::map<Site, double> values;
  if (dim == 1) {
    for (std::int64_t x = -radius; x <= radius; ++x) {
      if (even && x < 0) continue;
      const double v = u(gen);
      values[Site{x}] = v;
      if (even) values[Site{-x}] = v;
    }
  } else {
    for (std::int64_t x = -radius; x <= radius; ++x)
      for (std::int64_t y = -radius; y <= radius; ++y) values[Site{x, y}] = u(gen);
  }
  return make_table(dim, std::move(values), 0.25);
}

MomentPlan plan_for(const StepLaw& law, const Observable& f, std::uint64_t n, Site start = {}) {
  return MomentPlan{.law = law, .f = f, .horizon = n, .start = start};
}

void check_against_enumeration(const StepLaw& law, const Observable& f, std::size_t n, Site start) {
  CAPTURE(n);
  CAPTURE(f.descriptor());
  const auto en = enumerate_paths(law, [&](const Site& x) { return f(x); }, n, start);
  const auto plan = plan_for(law, f, n, start);

  const auto mean = exact_mean_T(plan);
  CHECK(close(mean.mean, en.mean_t));
  for (std::size_t k = 0; k < n; ++k) CHECK(close(mean.per_step[k], en.mean_f[k]));

  PairMomentEngine engine(plan);
  const auto table = engine.pair_table();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) CHECK(close(table[i][j], en.pair[i][j]));
  CHECK(close(engine.second_moment(), en.second_t));
  CHECK(close(exact_pair_moment(plan, 1, n), en.pair[0][n - 1]));

  const auto rows = exact_second_moment(plan);
  REQUIRE(rows.size() == n);
  CHECK(close(rows.back().mean, en.mean_t));
  CHECK(close(rows.back().second, en.second_t));
  CHECK(close(rows.back().variance, en.second_t - en.mean_t * en.mean_t));
}

}  // namespace

TEST_CASE("constant observable") {
  const auto law = lazy_srw(1, 0.5);
  const auto f = make_constant(1, 2.5);
  const auto plan = plan_for(law, f, 50);
  CHECK(close(exact_mean_T(plan).mean, 125.0));
  for (const auto& r : exact_second_moment(plan)) CHECK(r.variance == 0.0);
  const auto one = make_constant(1, 1.0);
  PairMomentEngine engine(plan_for(law, one, 10));
  for (std::uint64_t a = 0; a <= 10; ++a)
    for (std::uint64_t b = 0; b <= 10; ++b) CHECK(close(engine.pair(a, b), 1.0));
}

TEST_CASE("diagonal pair of a +-1 observable is 1") {
  const auto f = make_scenery(1, 11);
  PairMomentEngine engine(plan_for(lazy_srw(1, 0.5), f, 12, Site{3}));
  for (std::uint64_t n = 0; n <= 12; ++n) CHECK(close(engine.pair(n, n), 1.0));
}

TEST_CASE("parity means match enumeration up to N = 8") {
  for (double hold : {0.5, 0.3}) {
    const auto law = lazy_srw(1, hold);
    const auto f = make_parity(1);
    for (std::size_t n = 1; n <= 8; ++n) {
      const auto en = enumerate_paths(law, [&](const Site& x) { return f(x); }, n);
      CHECK(close(exact_mean_T(plan_for(law, f, n)).mean, en.mean_t));
    }
    // E(-1)^{S_n} = (2 hold - 1)^n.
    const auto m = exact_mean_T(plan_for(law, f, 8));
    for (int n = 1; n <= 8; ++n) CHECK(close(m.per_step[n - 1], std::pow(2.0 * hold - 1.0, n)));
  }
}

TEST_CASE("parity pair (2, 4) matches enumeration over 3^4 paths") {
  const auto law = lazy_srw(1, 0.3);
  const auto f = make_parity(1);
  const auto en = enumerate_paths(law, [&](const Site& x) { return f(x); }, 4);
  CHECK(close(exact_pair_moment(plan_for(law, f, 4), 2, 4), en.pair[1][3]));
  CHECK(close(exact_pair_moment(plan_for(law, f, 4), 4, 2), en.pair[1][3]));
}

TEST_CASE("heaviside mean approaches 1/2") {
  const auto m = exact_mean_T(plan_for(lazy_srw(1, 0.5), make_heaviside(), 10000));
  CHECK(std::fabs(m.per_step.back() - 0.5) < 0.02);
  CHECK(m.error_bound <= 1e-9 * 10000);
}

TEST_CASE("enumeration equivalence for N <= 6") {
  const auto lazy = lazy_srw(1, 0.5);
  const std::vector<Observable> fs{random_table(1, 1, 8), make_scenery(1, 5),
                                   make_periodic(1, Site{3}, {1.0, -0.5, 0.25})};
  for (const auto& f : fs)
    for (std::size_t n = 1; n <= 6; ++n) {
      check_against_enumeration(lazy, f, n, Site{});
      check_against_enumeration(lazy, f, n, Site{-2});
    }
  const auto skew = table_law(1, {{Site{-1}, 0.2}, {Site{0}, 0.1}, {Site{2}, 0.4}, {Site{3}, 0.3}});
  for (std::size_t n = 1; n <= 5; ++n) check_against_enumeration(skew, fs[0], n, Site{1});
  const auto plane = product_lazy(2, 0.5);
  for (std::size_t n = 1; n <= 4; ++n) check_against_enumeration(plane, random_table(2, 9, 4), n, Site{1, -1});
}

TEST_CASE("symmetric law and even observable give E(x0) = E(-x0)") {
  const auto law = lazy_srw(1, 0.4);
  const auto f = random_table(1, 3, 20, true);
  for (std::int64_t x0 : {1, 4, 7}) {
    PairMomentEngine plus(plan_for(law, f, 12, Site{x0}));
    PairMomentEngine minus(plan_for(law, f, 12, Site{-x0}));
    for (std::uint64_t a = 1; a <= 12; a += 3)
      for (std::uint64_t b = a; b <= 12; b += 2) CHECK(close(plus.pair(a, b), minus.pair(a, b), 1e-13));
  }
}

TEST_CASE("Cauchy-Schwarz on the pair table") {
  PairMomentEngine engine(plan_for(lazy_srw(1, 0.5), make_scenery(1, 21), 40, Site{2}));
  const auto t = engine.pair_table();
  for (std::size_t i = 0; i < t.size(); ++i)
    for (std::size_t j = 0; j < t.size(); ++j) CHECK(t[i][j] * t[i][j] <= t[i][i] * t[j][j] * (1 + 1e-12));
}

TEST_CASE("truncation error is accounted for") {
  const auto law = lazy_srw(1, 0.5);
  const auto f = make_scenery(1, 2);
  auto coarse = plan_for(law, f, 400);
  coarse.kernel.trim_below = 1e-8;
  coarse.kernel.max_truncated = 1e-6;
  auto fine = coarse;
  fine.kernel.max_truncated = 5e-7;
  const auto a = exact_mean_T(coarse), b = exact_mean_T(fine);
  CHECK(a.truncated_mass > 0.0);
  CHECK(std::fabs(a.mean - b.mean) <= a.error_bound + b.error_bound);
  PairMomentEngine ea(coarse), eb(fine);
  for (std::uint64_t n1 : {10u, 200u, 390u})
    CHECK(std::fabs(ea.pair(n1, 400) - eb.pair(n1, 400)) <= ea.error_bound(n1, 400) + eb.error_bound(n1, 400));
}

TEST_CASE("weak law: E T_N^2 / N^2 falls for a mean-zero quasi-periodic observable") {
  const auto f = make_quasiperiodic(golden_cos_spec(1, 0.1L));
  const auto rows = exact_second_moment(plan_for(lazy_srw(1, 0.5), f, 4096));
  const double early = rows[255].second / (256.0 * 256.0), late = rows[4095].second / (4096.0 * 4096.0);
  MESSAGE("E T^2/N^2: " << early << " -> " << late);
  CHECK(late < early);
}

TEST_CASE("backward recursion agrees with the pair double sum") {
  const auto plan = plan_for(lazy_srw(1, 0.5), make_scenery(1, 8), 60, Site{5});
  const auto rows = exact_second_moment(plan);
  CHECK(close(rows.back().second, second_moment_by_pairs(plan), 1e-11));
  CHECK(close(rows.back().mean, exact_mean_T(plan).mean, 1e-11));
}

TEST_CASE("thread count does not change results") {
  auto plan = plan_for(product_lazy(2, 0.5), make_scenery(2, 4), 48);
  const auto one = exact_second_moment(plan);
  plan.threads = 4;
  const auto four = exact_second_moment(plan);
  for (std::size_t k = 0; k < one.size(); ++k) {
    CHECK(one[k].mean == four[k].mean);
    CHECK(one[k].second == four[k].second);
  }
  auto small = plan_for(lazy_srw(1, 0.5), make_scenery(1, 4), 30);
  const auto t1 = PairMomentEngine(small).pair_table();
  small.threads = 4;
  CHECK(PairMomentEngine(small).pair_table() == t1);
}

TEST_CASE("variance exponent scan") {
  const auto law = lazy_srw(1, 0.5);
  const std::vector<std::uint64_t> ns{64, 128, 256, 512, 1024, 2048, 4096};

  std::vector<Observable> sceneries;
  for (std::uint64_t r = 0; r < 16; ++r) sceneries.push_back(make_scenery(1, 1000 + r));
  const auto sc = variance_exponent_scan(law, sceneries, ns);
  MESSAGE("scenery slope " << sc.slope);
  CHECK_FALSE(sc.degenerate);
  CHECK(sc.slope >= 1.35);
  CHECK(sc.slope <= 1.65);

  const std::vector<Observable> parity{make_parity(1)};
  const auto par = variance_exponent_scan(law, parity, ns);
  // Increments of the lazy walk decorrelate the parity at once: Var T_N = N.
  for (const auto& row : par.rows) CHECK(close(row.variance, static_cast<double>(row.n), 1e-10));
  CHECK(par.slope == doctest::Approx(1.0).epsilon(1e-10));

  const std::vector<Observable> square{make_periodic(1, Site{4}, {1.0, 1.0, -1.0, -1.0})};
  const auto sq = variance_exponent_scan(law, square, ns);
  MESSAGE("period-4 slope " << sq.slope);
  CHECK(sq.slope >= 0.8);
  CHECK(sq.slope <= 1.2);

  const std::vector<Observable> zero{make_constant(1, 0.0)};
  const auto z = variance_exponent_scan(law, zero, ns);
  CHECK(z.degenerate);
  CHECK(std::isnan(z.slope));

  const std::vector<std::uint64_t> two{64, 128};
  CHECK_THROWS_AS(variance_exponent_scan(law, parity, two), HypothesisError);
}

TEST_CASE("heavy tails and oversized horizons are refused") {
  const auto f = make_constant(1, 1.0);
  CHECK_THROWS_AS(exact_mean_T(plan_for(sym_stable_lattice(1.5, 1000), f, 4)), HypothesisError);
  CHECK_THROWS_AS(exact_second_moment(plan_for(sym_stable_lattice(1.5, 1000), f, 4)), HypothesisError);
  CHECK_THROWS_AS(exact_second_moment(plan_for(lazy_srw(1, 0.5), f, 10'000'000)), BudgetError);
  CHECK_THROWS_AS(exact_mean_T(plan_for(lazy_srw(2, 0.5), f, 4)), HypothesisError);
}

TEST_CASE("kernel derivatives decay") {
  const std::vector<std::uint64_t> ns{100, 400};
  for (int order : {1, 2}) {
    const auto rows = kernel_derivative_table(lazy_srw(1, 0.5), ns, order);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].sup < rows[0].sup);
    CHECK(rows[1].scaled == doctest::Approx(rows[0].scaled).epsilon(0.05));
  }
}

TEST_CASE("moment CSV layout") {
  std::ostringstream a;
  const std::vector<MomentRow> rows{{1, 0.5, 0.5, 0.25}, {2, 1.0, 1.5, 0.5}};
  write_moment_rows_csv(a, rows, {{"law", "lazy"}});
  CHECK(a.str() == "# law=lazy\nN,mean,second,var\n1,0.5,0.5,0.25\n2,1,1.5,0.5\n");
  std::ostringstream b;
  write_pair_table_csv(b, {{1.0, 0.5}, {0.5, 1.0}}, {});
  CHECK(b.str() == "n1,n2,E\n1,1,1\n1,2,0.5\n2,1,0.5\n2,2,1\n");
}
