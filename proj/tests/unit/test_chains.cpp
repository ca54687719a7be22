#include "doctest.h"

#include <cmath>
#include <sstream>

#include "walklab/birkhoff.hpp"
#include "walklab/chains.hpp"
#include "walklab/errors.hpp"

using namespace walklab;

namespace {

constexpr std::uint64_t kSeed = 4242;

ThreeStateChain make_chain(double p1, double q1, double eta1, double q2, double p2, double eta2,
                           std::array<double, 3> pi = {1.0, 0.0, 0.0}) {
  return ThreeStateChain{p1, q1, eta1, q2, p2, eta2, pi};
}

// sum_{k >= 1} k (1 - p) p^{k-1}, summed term by term.
double geometric_mean_by_series(double p) {
  double s = 0.0, term = 1.0 - p;
  for (int k = 1; k < 100000 && term > 0.0; ++k, term *= p) s += k * term;
  return s;
}

void check_monte_carlo(const ThreeStateChain& c, std::uint64_t trials, std::uint64_t seed) {
  const auto exact = exact_occupation_moments(c);
  const auto mc = monte_carlo_moments(c, trials, seed);
  CAPTURE(c.q1);
  CAPTURE(c.eta1);
  CAPTURE(c.q2);
  CHECK(std::fabs(mc.value.mean1 - exact.mean1) <= 4.0 * mc.std_error.mean1);
  CHECK(std::fabs(mc.value.mean2 - exact.mean2) <= 4.0 * mc.std_error.mean2);
  CHECK(std::fabs(mc.value.cross - exact.cross) <= 4.0 * mc.std_error.cross);
  CHECK(std::fabs(mc.value.covariance - exact.covariance) <= 4.0 * mc.std_error.covariance);
}

}  // namespace

TEST_CASE("validation") {
  CHECK_THROWS_AS(make_chain(0.5, 0.6, -0.1, 0.1, 0.4, 0.5).validate(), HypothesisError);
  CHECK_THROWS_AS(make_chain(0.5, 0.3, 0.3, 0.1, 0.4, 0.5).validate(), HypothesisError);
  CHECK_THROWS_AS(make_chain(0.5, 0.3, 0.2, 0.1, 0.4, 0.5, {0.5, 0.5, 0.1}).validate(), HypothesisError);
  // Both transient states closed: spectral radius 1.
  CHECK_THROWS_AS(exact_occupation_moments(make_chain(0.5, 0.5, 0.0, 0.5, 0.5, 0.0)), HypothesisError);
  CHECK(make_chain(0.5, 0.3, 0.2, 0.1, 0.4, 0.5).satisfies_ellipticity(0.1));
  CHECK_FALSE(make_chain(0.5, 0.3, 0.2, 0.1, 0.8, 0.1).satisfies_ellipticity(0.1));
}

TEST_CASE("absorbed start has zero moments") {
  const auto m = exact_occupation_moments(make_chain(0.5, 0.3, 0.2, 0.1, 0.4, 0.5, {0.0, 0.0, 1.0}));
  CHECK(m.mean1 == 0.0);
  CHECK(m.mean2 == 0.0);
  CHECK(m.cross == 0.0);
  CHECK(m.covariance == 0.0);
}

TEST_CASE("unreachable state 2") {
  for (double p1 : {0.0, 0.3, 0.9}) {
    const auto m = exact_occupation_moments(make_chain(p1, 0.0, 1.0 - p1, 0.2, 0.3, 0.5));
    CHECK(m.mean1 == doctest::Approx(1.0 / (1.0 - p1)).epsilon(1e-14));
    CHECK(m.mean2 == 0.0);
    CHECK(m.covariance == 0.0);
  }
}

TEST_CASE("q1 = 0 family against geometric series") {
  for (double p1 : {0.1, 0.5, 0.8})
    for (double p2 : {0.2, 0.6})
      for (double pi1 : {1.0, 0.4}) {
        const double q2 = (1.0 - p2) / 3.0, eta2 = 1.0 - p2 - q2;
        const auto c = make_chain(p1, 0.0, 1.0 - p1, q2, p2, eta2, {pi1, 1.0 - pi1 - 0.1 * (pi1 < 1), 0.1 * (pi1 < 1)});
        const auto m = exact_occupation_moments(c);
        const double g1 = geometric_mean_by_series(p1), g2 = geometric_mean_by_series(p2);
        const double to1 = q2 / (q2 + eta2);
        CHECK(std::fabs(m.mean1 - (c.pi[0] + c.pi[1] * to1) * g1) < 1e-12);
        CHECK(std::fabs(m.mean2 - c.pi[1] * g2) < 1e-12);
        // From 2: l2 is geometric, then l1 is independent of it.
        CHECK(std::fabs(m.cross - c.pi[1] * g2 * to1 * g1) < 1e-12);
      }
}

TEST_CASE("exact moments match Monte Carlo") {
  check_monte_carlo(make_chain(0.5, 0.3, 0.2, 0.1, 0.4, 0.5), 1'000'000, kSeed);
  check_monte_carlo(make_chain(0.2, 0.5, 0.3, 0.3, 0.3, 0.4, {0.3, 0.5, 0.2}), 200'000, kSeed + 1);
  check_monte_carlo(make_chain(0.7, 0.25, 0.05, 0.45, 0.4, 0.15, {0.0, 1.0, 0.0}), 200'000, kSeed + 2);
}

TEST_CASE("bracket arithmetic") {
  const auto special = make_chain(0.6, 0.4, 0.0, 0.2, 0.3, 0.5);
  CHECK(special.bracket() == doctest::Approx(0.2).epsilon(1e-15));
  const auto row = lemma_bound_check(special, 3.0);
  CHECK(row.bound == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(row.ratio == doctest::Approx(std::fabs(row.covariance) / 0.2).epsilon(1e-14));

  auto c = make_chain(0.2, 0.5, 0.3, 0.15, 0.35, 0.5);
  const double reach = 0.5 / 0.8;
  c.pi = {0.4, reach * 0.6, 1.0 - 0.4 - reach * 0.6};
  CHECK(c.bracket() == doctest::Approx(0.15).epsilon(1e-14));

  // A negative bracket with nonzero covariance is flagged, not clipped.
  auto bad = make_chain(0.2, 0.5, 0.3, 0.0, 0.5, 0.5, {0.0, 1.0, 0.0});
  bad.q2 = 0.05;
  bad.p2 = 0.45;
  const auto flagged = lemma_bound_check(bad, 1.0);
  CHECK(flagged.bracket < 0.0);
  CHECK(std::fabs(flagged.covariance) > kCovarianceZero);
  CHECK(flagged.flagged);
  CHECK(std::isinf(flagged.ratio));
}

TEST_CASE("sweep with delta = 0.1") {
  const auto sweep = chain_sweep({});
  CHECK(sweep.rows.size() == 1000);
  CHECK(sweep.flagged == 0);
  CHECK(std::isfinite(sweep.max_ratio));
  CHECK(sweep.max_ratio > 0.0);
  for (const auto& r : sweep.rows) {
    CHECK(r.chain.satisfies_ellipticity(0.1));
    CHECK(std::fabs(r.covariance) <= sweep.max_ratio * r.bracket + kCovarianceZero);
  }
  MESSAGE("empirical C(0.1) = " << sweep.max_ratio);
  std::ostringstream out;
  write_chain_sweep_csv(out, sweep, {{"delta", "0.1"}});
  CHECK(out.str().rfind("# delta=0.1\np1,q1,eta1,q2,p2,eta2,pi1,pi2,cov,bracket,ratio,flagged\n", 0) == 0);

  ChainSweepOptions spread;
  spread.pi = {0.2, 0.7, 0.1};
  const auto other = chain_sweep(spread);
  MESSAGE("rows flagged with pi = (0.2, 0.7, 0.1): " << other.flagged);
  CHECK(other.flagged > 0);
}

TEST_CASE("walk to chain: shift walk") {
  const auto e = walk_to_chain(shift_law(1, Site{1}), 10, 20, 50, kSeed, 8);
  CHECK(e.chain.pi[0] == 1.0);
  CHECK(e.chain.q1 == 1.0);
  CHECK(e.chain.eta2 == 1.0);
  CHECK(exact_occupation_moments(e.chain).covariance == 0.0);
  CHECK(e.warnings.empty());
}

TEST_CASE("walk to chain: drift walk") {
  const auto law = drift_pareto(0.5, 2.5);
  const std::int64_t h = 512;
  CHECK_THROWS_AS(walk_to_chain(law, 100, 100, 10, kSeed, h), HypothesisError);
  CHECK_THROWS_AS(walk_to_chain(lazy_srw(1, 0.5), 1, 2, 10, kSeed, h), HypothesisError);

  const auto near = walk_to_chain(law, 100, 110, 10000, kSeed, h);
  const auto far = walk_to_chain(law, 100, 200, 10000, kSeed + 1, h);
  MESSAGE("q2 " << near.chain.q2 << " (gap 10), " << far.chain.q2 << " (gap 100)");
  CHECK(far.chain.q2 < near.chain.q2);

  const auto small = walk_to_chain(law, 100, 200, 1000, kSeed + 2, h);
  for (std::size_t k : {1u, 2u, 6u}) {
    const double ratio = small.std_error[k] / far.std_error[k];
    CHECK(ratio > std::sqrt(10.0) / 2.0);
    CHECK(ratio < std::sqrt(10.0) * 2.0);
  }

  const auto model = exact_occupation_moments(far.chain);
  const auto direct = occupation_covariance(law, 100, 200, 10000, kSeed + 3, h);
  MESSAGE("chain-model cov " << model.covariance << ", direct " << direct.covariance << " +- " << direct.std_error);
  CHECK(std::fabs(model.covariance - direct.covariance) <= 4.0 * direct.std_error);
  CHECK(std::fabs(model.mean1 - direct.mean1) <= 0.05 * direct.mean1);
}
