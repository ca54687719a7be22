#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "walklab/csv.hpp"
#include "walklab/step_law.hpp"

namespace walklab {

/// Absorbing chain on {1, 2, 3} with rows (p1, q1, eta1), (q2, p2, eta2), (0, 0, 1).
struct ThreeStateChain {
  double p1 = 0, q1 = 0, eta1 = 0;
  double q2 = 0, p2 = 0, eta2 = 0;
  std::array<double, 3> pi{1.0, 0.0, 0.0};

  /// Throws HypothesisError unless rows and pi are probability vectors (1e-12).
  void validate() const;
  /// q1 > delta and eta2 > delta.
  bool satisfies_ellipticity(double delta) const noexcept { return q1 > delta && eta2 > delta; }
  /// q1 / (q1 + eta1) (1 - pi1) - pi2 + q2.
  double bracket() const noexcept;
};

/// Occupation times l_j = #{k >= 0 : X_k = j}, j = 1, 2.
struct OccupationMoments {
  double mean1 = 0, mean2 = 0;
  double cross = 0;
  double covariance = 0;
};

/// N = (I - Q)^{-1}; E_i l_j = N_ij and E_i l_1 l_2 = N_i1 N_12 + N_i2 N_21.
OccupationMoments exact_occupation_moments(const ThreeStateChain& chain);

struct MonteCarloMoments {
  OccupationMoments value;
  OccupationMoments std_error;
  std::uint64_t trials = 0;
};

MonteCarloMoments monte_carlo_moments(const ThreeStateChain& chain, std::uint64_t trials, std::uint64_t seed,
                                      unsigned threads = 1);

struct LemmaBoundRow {
  ThreeStateChain chain;
  double covariance = 0;
  double bracket = 0;
  /// C * bracket.
  double bound = 0;
  /// |Cov| / bracket; 0 when both vanish, infinity for flagged rows.
  double ratio = 0;
  /// bracket <= 0 while |Cov| > kCovarianceZero.
  bool flagged = false;
};

/// |Cov| below this counts as zero when the bracket vanishes.
inline constexpr double kCovarianceZero = 1e-12;

LemmaBoundRow lemma_bound_check(const ThreeStateChain& chain, double c_hat);

struct ChainSweepOptions {
  double delta = 0.1;
  /// Points per axis (q1, eta1 share, q2).
  std::size_t grid = 10;
  std::array<double, 3> pi{1.0, 0.0, 0.0};
};

struct ChainSweep {
  std::vector<LemmaBoundRow> rows;
  /// Empirical C(delta): max ratio over unflagged rows.
  double max_ratio = 0;
  std::size_t flagged = 0;
};

/// Grid: q1 = delta + (1 - delta) i / g, i = 1..g; eta1 = (j / (g - 1)) (1 - q1), p1 the rest;
/// q2 = 0.7 k / g, k = 0..g-1, eta2 = p2 = (1 - q2) / 2. Every chain satisfies q1, eta2 > delta.
ChainSweep chain_sweep(const ChainSweepOptions& options);

void write_chain_sweep_csv(std::ostream& out, const ChainSweep& sweep, const CsvMeta& meta);

struct ChainEstimate {
  ThreeStateChain chain;
  /// Binomial standard errors of (p1, q1, eta1, q2, p2, eta2, pi1, pi2, pi3).
  std::array<double, 9> std_error{};
  /// Observations behind each row and behind pi.
  std::uint64_t from1 = 0, from2 = 0, starts = 0;
  /// One message per row with fewer than 30 observations.
  std::vector<std::string> warnings;
};

/// Chain of successive visits of the walk to {n1, n2} (state 3 once it never returns),
/// followed until S > n2 + exit_margin.
ChainEstimate walk_to_chain(const StepLaw& law, std::int64_t n1, std::int64_t n2, std::uint64_t trials,
                            std::uint64_t seed, std::int64_t exit_margin, unsigned threads = 1);

}  // namespace walklab
