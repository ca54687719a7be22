#include "walklab/chains.hpp"

#include <cmath>
#include <limits>
#include <ostream>

#include "walklab/birkhoff.hpp"
#include "walklab/errors.hpp"
#include "walklab/format.hpp"
#include "walklab/parallel.hpp"
#include "walklab/rng.hpp"
#include "walklab/summation.hpp"
#include "walklab/trajectory.hpp"

namespace walklab {

namespace {

void require_distribution(std::initializer_list<double> v, const char* what) {
  double s = 0;
  for (double x : v) {
    if (!(x >= 0.0)) throw HypothesisError(std::string("chain: negative probability in ") + what);
    s += x;
  }
  if (std::fabs(s - 1.0) > 1e-12) throw HypothesisError(std::string("chain: ") + what + " does not sum to 1");
}

}  // namespace

void ThreeStateChain::validate() const {
  require_distribution({p1, q1, eta1}, "row 1");
  require_distribution({q2, p2, eta2}, "row 2");
  require_distribution({pi[0], pi[1], pi[2]}, "initial distribution");
}

double ThreeStateChain::bracket() const noexcept {
  const double reach = q1 + eta1 > 0 ? q1 / (q1 + eta1) : 0.0;
  return reach * (1.0 - pi[0]) - pi[1] + q2;
}

OccupationMoments exact_occupation_moments(const ThreeStateChain& c) {
  c.validate();
  // Spectral radius of Q = [[p1, q1], [q2, p2]] from its characteristic polynomial.
  const double tr = c.p1 + c.p2, det = c.p1 * c.p2 - c.q1 * c.q2;
  const double disc = tr * tr - 4.0 * det;
  const double radius = disc >= 0 ? (std::fabs(tr) + std::sqrt(disc)) / 2.0 : std::sqrt(std::fabs(det));
  if (!(radius < 1.0))
    throw HypothesisError("exact_occupation_moments: chain is not transient (spectral radius " +
                          format_double(radius) + ")");
  const double a = 1.0 - c.p1, b = -c.q1, cc = -c.q2, d = 1.0 - c.p2;
  const double inv = 1.0 / (a * d - b * cc);
  const double n11 = d * inv, n12 = -b * inv, n21 = -cc * inv, n22 = a * inv;
  OccupationMoments m;
  m.mean1 = c.pi[0] * n11 + c.pi[1] * n21;
  m.mean2 = c.pi[0] * n12 + c.pi[1] * n22;
  m.cross = c.pi[0] * (n11 * n12 + n12 * n21) + c.pi[1] * (n21 * n12 + n22 * n21);
  m.covariance = m.cross - m.mean1 * m.mean2;
  return m;
}

MonteCarloMoments monte_carlo_moments(const ThreeStateChain& c, std::uint64_t trials, std::uint64_t seed,
                                      unsigned threads) {
  c.validate();
  if (trials < 3) throw HypothesisError("monte_carlo_moments: need at least 3 trials");
  std::vector<double> l1(trials), l2(trials);
  parallel_for(trials, threads, [&](std::size_t t) {
    RandomStream rng(seed, t, streams::kChain);
    auto draw = [&](double a, double b) {
      const double u = rng.uniform();
      return u < a ? 0 : u < a + b ? 1 : 2;
    };
    int state = draw(c.pi[0], c.pi[1]);
    std::uint64_t v1 = 0, v2 = 0;
    while (state != 2) {
      if (state == 0) {
        ++v1;
        state = draw(c.p1, c.q1);
      } else {
        ++v2;
        state = draw(c.q2, c.p2);
      }
    }
    l1[t] = static_cast<double>(v1);
    l2[t] = static_cast<double>(v2);
  });
  MonteCarloMoments out;
  out.trials = trials;
  const auto m = static_cast<double>(trials);
  auto mean_se = [&](auto&& value) {
    CompensatedSum s, s2;
    for (std::size_t t = 0; t < trials; ++t) {
      const double v = value(t);
      s.add(v);
      s2.add(v * v);
    }
    const double mean = s.value() / m;
    return std::pair{mean, std::sqrt(std::max(0.0, (s2.value() / m - mean * mean) / (m - 1)))};
  };
  std::tie(out.value.mean1, out.std_error.mean1) = mean_se([&](std::size_t t) { return l1[t]; });
  std::tie(out.value.mean2, out.std_error.mean2) = mean_se([&](std::size_t t) { return l2[t]; });
  std::tie(out.value.cross, out.std_error.cross) = mean_se([&](std::size_t t) { return l1[t] * l2[t]; });
  std::tie(out.value.covariance, out.std_error.covariance) = covariance_jackknife(l1, l2);
  return out;
}

LemmaBoundRow lemma_bound_check(const ThreeStateChain& chain, double c_hat) {
  LemmaBoundRow r;
  r.chain = chain;
  r.covariance = exact_occupation_moments(chain).covariance;
  r.bracket = chain.bracket();
  r.bound = c_hat * r.bracket;
  const double cov = std::fabs(r.covariance);
  if (r.bracket > 0) {
    r.ratio = cov / r.bracket;
  } else if (cov <= kCovarianceZero) {
    r.ratio = 0.0;
  } else {
    r.ratio = std::numeric_limits<double>::infinity();
    r.flagged = true;
  }
  return r;
}

ChainSweep chain_sweep(const ChainSweepOptions& o) {
  if (o.grid < 2) throw HypothesisError("chain_sweep: grid needs at least 2 points per axis");
  if (!(o.delta > 0.0 && o.delta < 0.3)) throw HypothesisError("chain_sweep: delta must lie in (0, 0.3)");
  const auto g = static_cast<double>(o.grid);
  ChainSweep sweep;
  for (std::size_t i = 1; i <= o.grid; ++i)
    for (std::size_t j = 0; j < o.grid; ++j)
      for (std::size_t k = 0; k < o.grid; ++k) {
        ThreeStateChain c;
        c.q1 = o.delta + (1.0 - o.delta) * static_cast<double>(i) / g;
        const double rest = 1.0 - c.q1;
        c.eta1 = rest * static_cast<double>(j) / (g - 1.0);
        c.p1 = rest - c.eta1;
        c.q2 = 0.7 * static_cast<double>(k) / g;
        c.eta2 = (1.0 - c.q2) / 2.0;
        c.p2 = 1.0 - c.q2 - c.eta2;
        c.pi = o.pi;
        auto row = lemma_bound_check(c, 1.0);
        if (row.flagged)
          ++sweep.flagged;
        else
          sweep.max_ratio = std::max(sweep.max_ratio, row.ratio);
        sweep.rows.push_back(row);
      }
  return sweep;
}

void write_chain_sweep_csv(std::ostream& out, const ChainSweep& sweep, const CsvMeta& meta) {
  write_csv_meta(out, meta);
  write_csv_header(out, {"p1", "q1", "eta1", "q2", "p2", "eta2", "pi1", "pi2", "cov", "bracket", "ratio", "flagged"});
  for (const auto& r : sweep.rows) {
    const auto& c = r.chain;
    for (double v : {c.p1, c.q1, c.eta1, c.q2, c.p2, c.eta2, c.pi[0], c.pi[1], r.covariance, r.bracket, r.ratio})
      out << format_double(v) << ',';
    out << (r.flagged ? 1 : 0) << '\n';
  }
}

ChainEstimate walk_to_chain(const StepLaw& law, std::int64_t n1, std::int64_t n2, std::uint64_t trials,
                            std::uint64_t seed, std::int64_t exit_margin, unsigned threads) {
  if (law.dimension() != 1 || !(law.drift()[0] > 0.0))
    throw HypothesisError("walk_to_chain: precondition violated, needs a d = 1 walk with positive drift");
  if (!(0 < n1 && n1 < n2)) throw HypothesisError("walk_to_chain: need 0 < n1 < n2");
  if (trials < 1) throw HypothesisError("walk_to_chain: need at least one trial");
  if (exit_margin < 1) throw HypothesisError("walk_to_chain: exit margin must be positive");
  const std::int64_t exit_level = n2 + exit_margin;
  const auto cap = static_cast<std::uint64_t>(20.0 * static_cast<double>(exit_level) / law.drift()[0]) + 100'000;

  // counts[from][to], from/to in {0: n1, 1: n2, 2: never}; start row is index 3.
  using Counts = std::array<std::array<std::uint64_t, 3>, 4>;
  std::vector<Counts> per_trial(trials);
  parallel_for(trials, threads, [&](std::size_t t) {
    Counts c{};
    Walker w(law, seed, t);
    int last = 3;
    for (std::uint64_t k = 0; k < cap; ++k) {
      const std::int64_t s = w.step()[0];
      if (s > exit_level) break;
      if (s == n1 || s == n2) {
        const int now = s == n1 ? 0 : 1;
        ++c[last][now];
        last = now;
      }
    }
    ++c[last][2];
    per_trial[t] = c;
  });
  Counts total{};
  for (const auto& c : per_trial)
    for (std::size_t i = 0; i < 4; ++i)
      for (std::size_t j = 0; j < 3; ++j) total[i][j] += c[i][j];

  ChainEstimate e;
  auto row = [&](std::size_t from, double& a, double& b, double& c3, std::size_t se0, const char* name) {
    const std::uint64_t n = total[from][0] + total[from][1] + total[from][2];
    if (n < 30)
      e.warnings.push_back(std::string("walk_to_chain: only ") + std::to_string(n) + " observations for " + name);
    if (n == 0) {
      // No information; report an absorbing row.
      a = b = 0.0;
      c3 = 1.0;
      return n;
    }
    const double m = static_cast<double>(n);
    a = static_cast<double>(total[from][0]) / m;
    b = static_cast<double>(total[from][1]) / m;
    c3 = static_cast<double>(total[from][2]) / m;
    const double ps[3]{a, b, c3};
    for (std::size_t k = 0; k < 3; ++k) e.std_error[se0 + k] = std::sqrt(ps[k] * (1.0 - ps[k]) / m);
    return n;
  };
  e.from1 = row(0, e.chain.p1, e.chain.q1, e.chain.eta1, 0, "state 1");
  double to1 = 0, to2 = 0, to3 = 0;
  e.from2 = row(1, to1, to2, to3, 3, "state 2");
  e.chain.q2 = to1;
  e.chain.p2 = to2;
  e.chain.eta2 = to3;
  e.starts = row(3, e.chain.pi[0], e.chain.pi[1], e.chain.pi[2], 6, "the initial state");
  return e;
}

}  // namespace walklab
