#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "walklab/birkhoff.hpp"
#include "walklab/csv.hpp"
#include "walklab/observable.hpp"
#include "walklab/step_law.hpp"

namespace walklab {

// ---- reference laws and distances ------------------------------------------

/// (2 / pi) arcsin(sqrt z) on [0, 1].
double arcsine_cdf(double z);
/// Inverse of arcsine_cdf: sin^2(pi u / 2).
double arcsine_quantile(double u);

/// One-sample Kolmogorov-Smirnov statistic sup |F_M - cdf| against the
/// right-continuous empirical CDF (both one-sided sups).
double ks_distance(std::span<const double> sample, const std::function<double(double)>& cdf);

/// x -> (x - mean_minus) / (mean_plus - mean_minus), applied to T_N / N.
class AffineReduction {
 public:
  AffineReduction(double mean_minus, double mean_plus);
  /// From the declared half-line means of F.
  static AffineReduction for_observable(const Observable& f);

  double reduce(double t, std::uint64_t n) const noexcept {
    return (t / static_cast<double>(n) - mean_minus_) / (mean_plus_ - mean_minus_);
  }
  /// Inverse of reduce: the T_N giving reduced value r.
  double expand(double r, std::uint64_t n) const noexcept {
    return (r * (mean_plus_ - mean_minus_) + mean_minus_) * static_cast<double>(n);
  }
  std::vector<double> reduce(std::span<const double> ts, std::uint64_t n) const;
  double mean_minus() const noexcept { return mean_minus_; }
  double mean_plus() const noexcept { return mean_plus_; }

 private:
  double mean_minus_, mean_plus_;
};

// ---- ensembles ---------------------------------------------------------------

/// Checkpoint records of many trials, keyed by trial index.
struct TrialEnsemble {
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> checkpoints;
  CsvMeta metadata;
  std::map<std::uint64_t, std::vector<BirkhoffRecord>> records;

  std::size_t size() const noexcept { return records.size(); }
  /// Trial indices are exactly 0..size()-1.
  bool complete() const noexcept;
  /// T at checkpoint index k for every trial, in trial order.
  std::vector<double> values_at(std::size_t k) const;
};

/// Trials [first, first + count) of run_birkhoff, in parallel.
TrialEnsemble run_ensemble(const StepLaw& law, const Observable& f, std::uint64_t seed, std::uint64_t count,
                           std::span<const std::uint64_t> checkpoints, unsigned threads = 1, std::uint64_t first = 0);

/// Union of two ensembles with the same seed, checkpoints and metadata and
/// disjoint trial indices.
TrialEnsemble merge(const TrialEnsemble& a, const TrialEnsemble& b);

/// (trial, n, T, x1..xd) rows.
void write_ensemble_csv(std::ostream& out, const TrialEnsemble& ensemble, std::size_t dim);

// ---- growth exponents --------------------------------------------------------

enum class GrowthStatistic { rms, mean_abs, quantile };
GrowthStatistic parse_growth_statistic(const std::string& name);

struct GrowthPoint {
  std::uint64_t n = 0;
  double value = 0.0;
  double std_error = 0.0;
};

struct GrowthFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;
  std::vector<GrowthPoint> points;
  /// Non-empty when fewer than 4 checkpoints or less than two decades are used.
  std::string warning;
};

/// Weighted least squares of log stat(T_N) against log N, weights from the
/// per-checkpoint standard errors (ordinary LS when some error is zero).
/// samples[k] holds T at checkpoint ns[k] for every trial.
GrowthFit growth_exponent(std::span<const std::uint64_t> ns, const std::vector<std::vector<double>>& samples,
                          GrowthStatistic statistic = GrowthStatistic::rms, double q = 0.5);
GrowthFit growth_exponent(const TrialEnsemble& ensemble, GrowthStatistic statistic = GrowthStatistic::rms,
                          double q = 0.5);

/// 1/2 for beta <= (d-1)/d, else (d/2)(beta - 1) + 1.
double rho_exponent(std::size_t d, double beta);
/// 2 / beta for d = 1, 1 / eps for d >= 2.
double gamma_threshold(std::size_t d, double beta, double eps);

// ---- weak law ----------------------------------------------------------------

struct ExceedanceRow {
  std::uint64_t n = 0;
  std::uint64_t exceed = 0;
  std::uint64_t trials = 0;
  double frequency = 0.0;
  double std_error = 0.0;
};

/// Empirical P(|T_N / N - mean| > delta) at every checkpoint, with binomial errors.
std::vector<ExceedanceRow> weak_lln_check(const TrialEnsemble& ensemble, double mean, double delta);

}  // namespace walklab
