#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "walklab/errors.hpp"
#include "walklab/rng.hpp"
#include "walklab/statlab.hpp"

using namespace walklab;

namespace {

constexpr std::uint64_t kSeed = 777;

}  // namespace

TEST_CASE("arcsine cdf values") {
  CHECK(arcsine_cdf(0.0) == 0.0);
  CHECK(arcsine_cdf(1.0) == 1.0);
  CHECK(arcsine_cdf(0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(arcsine_cdf(0.25) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK_THROWS_AS(arcsine_cdf(-0.01), HypothesisError);
  CHECK_THROWS_AS(arcsine_cdf(1.5), HypothesisError);
  double prev = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double z = i / 1000.0, c = arcsine_cdf(z);
    CHECK(c >= prev);
    CHECK(arcsine_quantile(c) == doctest::Approx(z).epsilon(1e-12));
    prev = c;
  }
}

TEST_CASE("ks distance") {
  const std::size_t m = 400;
  std::vector<double> exact;
  for (std::size_t i = 1; i <= m; ++i) exact.push_back(arcsine_quantile((i - 0.5) / m));
  CHECK(ks_distance(exact, arcsine_cdf) <= 0.5 / m + 1e-12);

  const std::vector<double> half{0.5};
  CHECK(ks_distance(half, arcsine_cdf) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(ks_distance(std::vector<double>{}, arcsine_cdf), HypothesisError);

  RandomStream rng(kSeed, 0, streams::kOracle);
  std::vector<double> sample;
  for (int i = 0; i < 2000; ++i) sample.push_back(arcsine_quantile(rng.uniform()));
  const double d = ks_distance(sample, arcsine_cdf);
  CHECK(d < 0.05);
  std::vector<double> shuffled = sample;
  std::reverse(shuffled.begin(), shuffled.end());
  std::rotate(shuffled.begin(), shuffled.begin() + 700, shuffled.end());
  CHECK(ks_distance(shuffled, arcsine_cdf) == d);
}

TEST_CASE("affine reduction") {
  const auto h = AffineReduction::for_observable(make_heaviside());
  CHECK(h.reduce(37.0, 100) == doctest::Approx(0.37).epsilon(1e-15));
  const auto g = AffineReduction::for_observable(affine(make_heaviside(), 2.0, 3.0));
  CHECK(g.reduce(300.0, 100) == doctest::Approx(0.0));
  CHECK(g.reduce(500.0, 100) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(AffineReduction(1.0, 1.0), HypothesisError);
  CHECK_THROWS_AS(AffineReduction::for_observable(make_constant(1, 2.0)), HypothesisError);
  RandomStream rng(kSeed, 1, streams::kOracle);
  for (int i = 0; i < 1000; ++i) {
    const double t = (rng.uniform() - 0.3) * 1e4;
    CHECK(g.expand(g.reduce(t, 4096), 4096) == doctest::Approx(t).epsilon(1e-12));
  }
}

TEST_CASE("growth exponent on synthetic data") {
  const std::vector<std::uint64_t> ns{16, 64, 256, 1024, 4096};
  std::vector<std::vector<double>> linear, power;
  for (auto n : ns) {
    linear.push_back({3.0 * n, -3.0 * n, 3.0 * n});
    power.push_back({0.7 * std::pow(n, 0.63), -0.7 * std::pow(n, 0.63)});
  }
  for (auto stat : {GrowthStatistic::rms, GrowthStatistic::mean_abs, GrowthStatistic::quantile}) {
    CHECK(std::fabs(growth_exponent(ns, linear, stat).slope - 1.0) < 1e-9);
    CHECK(std::fabs(growth_exponent(ns, power, stat).slope - 0.63) < 1e-9);
  }
  CHECK(growth_exponent(ns, linear).warning.empty());
  const std::vector<std::uint64_t> three{16, 32, 64};
  const std::vector<std::vector<double>> s3{{1.0}, {2.0}, {3.0}};
  CHECK_FALSE(growth_exponent(three, s3).warning.empty());
  const std::vector<std::uint64_t> two{16, 32};
  const std::vector<std::vector<double>> s2{{1.0}, {2.0}};
  CHECK_THROWS_AS(growth_exponent(two, s2), HypothesisError);
  CHECK(parse_growth_statistic("mean-abs") == GrowthStatistic::mean_abs);
  CHECK_THROWS_AS(parse_growth_statistic("median"), HypothesisError);
}

TEST_CASE("constant observable grows linearly") {
  const auto cp = dyadic_checkpoints(4, 12);
  const auto e = run_ensemble(lazy_srw(1, 0.5), make_constant(1, 1.0), kSeed, 20, cp);
  CHECK(std::fabs(growth_exponent(e).slope - 1.0) < 1e-9);
}

TEST_CASE("growth exponents of scenery and periodic sums") {
  const auto law = lazy_srw(1, 0.5);
  const auto cp = dyadic_checkpoints(10, 18);
  const auto scenery = run_ensemble(law, make_scenery(1, 99), kSeed, 500, cp, 4);
  const double s = growth_exponent(scenery).slope;
  MESSAGE("scenery slope " << s);
  CHECK(s >= 0.70);
  CHECK(s <= 0.80);
  const auto periodic = run_ensemble(law, make_periodic(1, Site{4}, {1.0, 1.0, -1.0, -1.0}), kSeed, 500, cp, 4);
  const double p = growth_exponent(periodic).slope;
  MESSAGE("periodic slope " << p);
  CHECK(p >= 0.45);
  CHECK(p <= 0.55);
}

TEST_CASE("rho and gamma") {
  CHECK(rho_exponent(1, 0.5) == 0.75);
  CHECK(rho_exponent(2, 0.5) == 0.5);
  CHECK(rho_exponent(2, 0.75) == 0.75);
  CHECK(rho_exponent(1, 0.0) == 0.5);
  CHECK(gamma_threshold(1, 0.5, 0.3) == 4.0);
  CHECK(gamma_threshold(2, 0.9, 0.1) == doctest::Approx(10.0).epsilon(1e-15));
  for (std::size_t d = 1; d <= 4; ++d) {
    const double b = (static_cast<double>(d) - 1.0) / static_cast<double>(d);
    const double upper = static_cast<double>(d) / 2.0 * (b - 1.0) + 1.0;
    CHECK(std::fabs(rho_exponent(d, b) - upper) <= 1e-15);
    CHECK(std::fabs(rho_exponent(d, std::nextafter(b, 1.0)) - rho_exponent(d, b)) <= 1e-15);
  }
  CHECK_THROWS_AS(rho_exponent(1, 1.0), HypothesisError);
  CHECK_THROWS_AS(rho_exponent(1, -0.1), HypothesisError);
  CHECK_THROWS_AS(gamma_threshold(2, 0.5, 0.0), HypothesisError);
}

TEST_CASE("ensemble merge") {
  const auto law = lazy_srw(1, 0.5);
  const auto f = make_scenery(1, 1);
  const auto cp = geometric_checkpoints(2000, 1.25, 10);
  const auto whole = run_ensemble(law, f, kSeed, 90, cp, 3);
  const auto a = run_ensemble(law, f, kSeed, 30, cp, 1, 0);
  const auto b = run_ensemble(law, f, kSeed, 30, cp, 2, 30);
  const auto c = run_ensemble(law, f, kSeed, 30, cp, 1, 60);
  CHECK_FALSE(b.complete());
  const auto left = merge(merge(a, b), c), right = merge(a, merge(c, b));
  CHECK(left.complete());
  for (std::size_t k = 0; k < cp.size(); ++k) {
    CHECK(left.values_at(k) == whole.values_at(k));
    CHECK(right.values_at(k) == whole.values_at(k));
  }
  CHECK(growth_exponent(left).slope == growth_exponent(whole).slope);
  std::ostringstream x, y;
  write_ensemble_csv(x, left, 1);
  write_ensemble_csv(y, whole, 1);
  CHECK(x.str() == y.str());
  CHECK_THROWS_AS(merge(a, a), HypothesisError);
  CHECK_THROWS_AS(merge(a, run_ensemble(law, f, kSeed + 1, 5, cp, 1, 30)), HypothesisError);
}

TEST_CASE("ensemble CSV layout") {
  const std::vector<std::uint64_t> cp{1, 2};
  const auto e = run_ensemble(shift_law(1, Site{1}), make_heaviside(), 5, 1, cp);
  std::ostringstream out;
  write_ensemble_csv(out, e, 1);
  CHECK(out.str().find("trial,n,T,x1\n0,1,1,1\n0,2,2,2\n") != std::string::npos);
  CHECK(out.str().rfind("# law=", 0) == 0);
}

TEST_CASE("weak law exceedance") {
  const auto law = lazy_srw(1, 0.5);
  const std::vector<std::uint64_t> cp{1024, 65536};

  const auto flat = run_ensemble(law, make_constant(1, 0.5), kSeed, 100, cp);
  for (const auto& r : weak_lln_check(flat, 0.5, 0.2)) CHECK(r.exceed == 0);

  const auto ocean = make_ocean(std::make_shared<OceanSchedule>(2.0, 3, "log"));
  const auto oe = run_ensemble(law, ocean, kSeed, 500, cp, 4);
  const auto rows = weak_lln_check(oe, 0.5, 0.2);
  MESSAGE("ocean exceedance " << rows[0].frequency << " -> " << rows[1].frequency);
  CHECK(rows[1].frequency <= rows[0].frequency + 3.0 * rows[0].std_error);

  const auto he = run_ensemble(law, make_heaviside(), kSeed, 500, cp, 4);
  const auto hr = weak_lln_check(he, 0.5, 0.2);
  MESSAGE("heaviside exceedance " << hr[1].frequency);
  CHECK(hr[1].frequency > 0.3);
}
