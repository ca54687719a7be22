#include "doctest.h"

#include <cmath>
#include <sstream>

#include "walklab/enumerate.hpp"
#include "walklab/errors.hpp"
#include "walklab/kernel.hpp"
#include "walklab/rng.hpp"

using namespace walklab;

namespace {

// Random finite table with support in [-2, 2]^d, always containing 0 and +-e_1
// so that the hypothesis checks pass.
StepLaw random_table(std::uint64_t seed, std::size_t d, std::size_t extra) {
  RandomStream rng(seed, 0, 99);
  std::vector<StepAtom> atoms;
  Site e{};
  atoms.push_back({e, 1.0});
  for (std::size_t i = 0; i < d; ++i) {
    Site u{};
    u[i] = 1;
    atoms.push_back({u, 1.0});
    atoms.push_back({negate(u), 1.0});
  }
  for (std::size_t k = 0; k < extra; ++k) {
    Site s{};
    for (std::size_t i = 0; i < d; ++i) s[i] = static_cast<std::int64_t>(rng.below(5)) - 2;
    atoms.push_back({s, 0.0});
  }
  double total = 0;
  for (auto& a : atoms) total += (a.prob = 0.1 + rng.uniform());
  double acc = 0;
  for (std::size_t k = 0; k + 1 < atoms.size(); ++k) acc += (atoms[k].prob /= total);
  atoms.back().prob = 1.0 - acc;
  return table_law(d, atoms);
}

}  // namespace

TEST_CASE("one step of the lazy walk") {
  const StepLaw law = lazy_srw(1, 0.5);
  const LatticeKernel k = advance_kernel(LatticeKernel::delta(1), law);
  CHECK(k.time() == 1);
  CHECK(k.at(Site{-1}) == 0.25);
  CHECK(k.at(Site{0}) == 0.5);
  CHECK(k.at(Site{1}) == 0.25);
  CHECK(k.at(Site{2}) == 0.0);
}

TEST_CASE("H(4,0) for the lazy walk") {
  const StepLaw law = lazy_srw(1, 0.5);
  const LatticeKernel k = kernel_at(law, 4);
  // Lazy walk = simple walk of 2n half-steps: H(n,x) = C(2n, n+x) / 4^n.
  CHECK(k.at(Site{0}) == doctest::Approx(70.0 / 256.0).epsilon(1e-15));
  const auto paths = enumerate_paths(law, [](const Site&) { return 0.0; }, 4);
  CHECK(std::fabs(k.at(Site{0}) - paths.endpoint.at(Site{0})) < 1e-15);
}

TEST_CASE("exactness against path enumeration for random tables, n <= 8") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const std::size_t d = seed % 2 == 0 ? 2 : 1;
    const StepLaw law = random_table(seed, d, d == 1 ? 1 : 0);
    const std::size_t n_max = law.support().size() <= 4 ? 8 : 6;
    LatticeKernel k = LatticeKernel::delta(d);
    for (std::size_t n = 1; n <= n_max; ++n) {
      k = advance_kernel(k, law);
      const auto e = enumerate_paths(law, [](const Site&) { return 0.0; }, n);
      double worst = 0.0;
      for (const auto& [site, p] : e.endpoint) worst = std::max(worst, std::fabs(k.at(site) - p));
      // Every window site outside the enumerated support must carry no mass.
      k.for_each([&](const Site& x, double v) {
        if (!e.endpoint.contains(x)) worst = std::max(worst, std::fabs(v));
      });
      CHECK_MESSAGE(worst < 1e-12, "seed=" << seed << " n=" << n);
    }
  }
}

TEST_CASE("conservation with trimming active") {
  const StepLaw law = lazy_srw(1, 0.5);
  KernelOptions opt;
  opt.trim_below = 1e-20;
  opt.max_truncated = 1e-9;
  LatticeKernel k = LatticeKernel::delta(1);
  double prev_trunc = 0.0;
  for (int n = 1; n <= 3000; ++n) {
    k = advance_kernel(k, law, opt);
    REQUIRE(std::fabs(k.total_mass() + k.truncated_mass() - 1.0) < 1e-10);
    REQUIRE(k.truncated_mass() >= prev_trunc);
    REQUIRE(k.truncated_mass() <= 1e-9);
    prev_trunc = k.truncated_mass();
  }
  // Trimming kept the window well inside the full support [-3000, 3000].
  CHECK(k.extent(0) < 2000);
  CHECK(k.truncated_mass() > 0.0);
  for (double v : k.values()) CHECK(v >= 0.0);
}

TEST_CASE("window grows by at most the support radius") {
  const StepLaw law = product_lazy(2, 0.5);
  LatticeKernel k = LatticeKernel::delta(2);
  for (int n = 1; n <= 20; ++n) {
    const auto next = advance_kernel(k, law);
    for (std::size_t i = 0; i < 2; ++i) {
      CHECK(next.lo()[i] >= k.lo()[i] - 1);
      CHECK(next.hi()[i] <= k.hi()[i] + 1);
    }
    k = next;
  }
}

TEST_CASE("symmetric laws give symmetric kernels") {
  for (const StepLaw& law : {lazy_srw(1, 0.5), product_lazy(2, 0.5), lazy_srw(2, 0.2)}) {
    const LatticeKernel k = kernel_at(law, 60);
    double asym = 0.0;
    k.for_each([&](const Site& x, double v) { asym = std::max(asym, std::fabs(v - k.at(negate(x)))); });
    CHECK(asym < 1e-14);
  }
}

TEST_CASE("parallel advancement is bit-identical to serial") {
  const StepLaw law = product_lazy(2, 0.5);
  KernelOptions serial, threaded;
  threaded.threads = 8;
  const auto a = kernel_at(law, 40, serial);
  const auto b = kernel_at(law, 40, threaded);
  CHECK(a.values() == b.values());
  const auto c = kernel_at(lazy_srw(1, 0.5), 5000, threaded);
  const auto e = kernel_at(lazy_srw(1, 0.5), 5000, serial);
  CHECK(c.values() == e.values());
}

TEST_CASE("window overflow and heavy-tail refusal") {
  KernelOptions tiny;
  tiny.max_sites = 10;
  CHECK_THROWS_AS(kernel_at(lazy_srw(1, 0.5), 20, tiny), WindowOverflow);
  CHECK_THROWS_AS(kernel_at(sym_stable_lattice(1.5, 1000), 1), HypothesisError);
}

TEST_CASE("kernel CSV snapshot") {
  std::ostringstream out;
  write_kernel_csv(out, kernel_at(lazy_srw(1, 0.5), 1));
  CHECK(out.str() == "# n=1\n# truncated_mass=0\nx1,mass\n-1,0.25\n0,0.5\n1,0.25\n");
}
