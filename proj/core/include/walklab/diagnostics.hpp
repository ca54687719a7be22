#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "walklab/kernel.hpp"
#include "walklab/step_law.hpp"

namespace walklab {

struct LltRow {
  std::uint64_t n = 0;
  /// sup over the window of |n^{d/2} H(n,l) - g((l - n v)/sqrt n)|.
  double sup_error = 0.0;
  Site argmax{};
  double truncated_mass = 0.0;
};

/// Local limit theorem diagnostic for finite-variance (alpha = 2) laws; g is
/// the Gaussian density with the table's exact covariance.
std::vector<LltRow> llt_report(const StepLaw& law, std::span<const std::uint64_t> n_list,
                               const KernelOptions& options = {});

/// Centered Gaussian density with covariance `cov` (d x d) at x.
double gaussian_density(const Matrix& cov, std::size_t d, const Vector& x);

struct TailReport {
  double radius = 0.0;
  /// Sum of H(n, x) over |x| > radius inside the window.
  double mass = 0.0;
  /// Window truncation; the true tail lies in [mass, mass + truncated_mass].
  double truncated_mass = 0.0;
};

TailReport tail_report(const StepLaw& law, std::uint64_t n, double eta, const KernelOptions& options = {});
/// Same, reusing an already computed kernel.
TailReport tail_report(const LatticeKernel& kernel, double eta);

struct MinTailRow {
  std::int64_t m = 0;
  double probability = 0.0;
  double std_error = 0.0;
};

struct MinTailReport {
  std::vector<MinTailRow> rows;
  /// Least-squares slope of log P against log m over rows with m > 0, P > 0.
  double loglog_slope = 0.0;
  bool slope_available = false;
  /// Trials stopped by the step cap before certifying escape.
  std::uint64_t censored = 0;
};

struct MinTailOptions {
  /// Trial stops once S_n > m_max + safety(m_max), safety(m) = safety_factor*m + safety_floor.
  double safety_factor = 16.0;
  std::int64_t safety_floor = 256;
  unsigned threads = 1;
};

/// Empirical P(min_n S_n <= -m) for a walk with positive drift (d = 1).
MinTailReport min_tail_report(const StepLaw& law, std::span<const std::int64_t> m_list, std::uint64_t trials,
                              std::uint64_t seed, const MinTailOptions& options = {});

}  // namespace walklab
