#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "walklab/observable.hpp"
#include "walklab/step_law.hpp"

namespace walklab {

/// floor(theta^k) for k = 0, 1, ..., deduplicated, restricted to [n_min, n_max];
/// n_max is always the last entry.
std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t n_max, double theta = 1.25, std::uint64_t n_min = 1);
/// 2^k_min, ..., 2^k_max.
std::vector<std::uint64_t> dyadic_checkpoints(unsigned k_min, unsigned k_max);

struct BirkhoffRecord {
  std::uint64_t n = 0;
  double sum = 0.0;
  Site position{};
};

/// Streaming T_n = sum_{k=1}^n F(S_k) with values kept only at checkpoints.
class BirkhoffAccumulator {
 public:
  explicit BirkhoffAccumulator(std::span<const std::uint64_t> checkpoints);

  /// Feed F(S_{n+1}) and S_{n+1}.
  void push(double value, const Site& position) noexcept {
    const double t = sum_ + value;
    comp_ += std::fabs(sum_) >= std::fabs(value) ? (sum_ - t) + value : (value - t) + sum_;
    sum_ = t;
    ++n_;
    if (next_ < checkpoints_.size() && checkpoints_[next_] == n_) {
      records_.push_back({n_, sum_ + comp_, position});
      ++next_;
    }
  }

  double sum() const noexcept { return sum_ + comp_; }
  std::uint64_t steps() const noexcept { return n_; }
  bool done() const noexcept { return next_ == checkpoints_.size(); }
  std::uint64_t horizon() const noexcept { return checkpoints_.empty() ? 0 : checkpoints_.back(); }
  const std::vector<BirkhoffRecord>& records() const noexcept { return records_; }
  std::vector<BirkhoffRecord> take_records() noexcept { return std::move(records_); }

 private:
  std::vector<std::uint64_t> checkpoints_;
  std::vector<BirkhoffRecord> records_;
  std::size_t next_ = 0;
  std::uint64_t n_ = 0;
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct BirkhoffRun {
  std::uint64_t trial = 0;
  std::vector<BirkhoffRecord> records;
  /// max_k |F(S_k)|, i.e. the largest increment of T.
  double max_increment = 0.0;
};

BirkhoffRun run_birkhoff(const StepLaw& law, const Observable& f, std::uint64_t seed,
                         std::span<const std::uint64_t> checkpoints, std::uint64_t trial = 0);

// ---- occupation times ----------------------------------------------------

/// Visit counts l(x) = #{k in [0, horizon) : S_k = x} on a window [lo, hi];
/// visits below lo are pooled into `below`.
class OccupationTally {
 public:
  explicit OccupationTally(std::int64_t lo = -1024) : lo_(lo) {}

  void visit(std::int64_t x) {
    ++horizon_;
    if (x < lo_) {
      ++below_;
      return;
    }
    const auto idx = static_cast<std::size_t>(x - lo_);
    if (idx >= counts_.size()) counts_.resize(std::max(idx + 1, counts_.size() * 2), 0);
    ++counts_[idx];
  }

  std::uint64_t at(std::int64_t x) const noexcept;
  std::uint64_t horizon() const noexcept { return horizon_; }
  std::int64_t lo() const noexcept { return lo_; }
  /// Largest site with a slot (possibly zero count).
  std::int64_t hi() const noexcept { return lo_ + static_cast<std::int64_t>(counts_.size()) - 1; }
  std::uint64_t below() const noexcept { return below_; }
  /// sum_{x=1}^{n} l(x).
  std::uint64_t positive_total(std::int64_t n) const noexcept;
  /// sum_{x <= 0} l(x).
  std::uint64_t nonpositive_total() const noexcept;
  /// Sum of l over every site; equals horizon().
  std::uint64_t total() const noexcept;

 private:
  std::int64_t lo_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t below_ = 0;
  std::uint64_t horizon_ = 0;
};

struct ExitMargin {
  std::int64_t margin = 0;
  /// Empirical P(min_n S_n <= -margin) with its binomial standard error.
  double return_probability = 0.0;
  double std_error = 0.0;
};

/// Smallest H in {16, 32, ...} with empirical P(min S <= -H) below `tolerance`.
ExitMargin calibrate_exit_margin(const StepLaw& law, std::uint64_t seed, double tolerance = 1e-3,
                                 std::uint64_t trials = 4000, unsigned threads = 1);

struct OccupationOptions {
  double epsilon = 0.05;
  /// Exit margin H; the walk is followed until S > top + H. 0 means calibrate.
  std::int64_t exit_margin = 0;
  double return_tolerance = 1e-3;
  std::int64_t window_lo = -1024;
};

struct OccupationResult {
  std::uint64_t trial = 0;
  std::uint64_t n = 0;
  /// T_N = sum_{k=1}^N F(S_k).
  double birkhoff = 0.0;
  /// sum_{x=1}^N l(x) F(x).
  double reduced = 0.0;
  /// sum_{x=1}^{M} l(x) F(x) with M = floor(N v (1 - eps)).
  double reduced_lower = 0.0;
  /// L_N = sum_{x=1}^N l(x).
  std::uint64_t local_time = 0;
  /// Total time on x <= 0.
  std::uint64_t negative_time = 0;
  /// |T_N - reduced_lower| and its bound ||F|| (L^- + L_{ceil(Nv(1+eps))} - L_{floor(Nv(1-eps))}).
  double gap = 0.0;
  double gap_bound = 0.0;
  /// Premises of the comparison: max_{k <= N} S_k <= Nv(1+eps) and min_{k > N} S_k > Nv(1-eps).
  bool premises_hold = false;
  bool censored = false;
  std::uint64_t steps = 0;
  OccupationTally tally;
};

/// Walks until S exceeds max(N, Nv(1+eps)) + H, tallying visits, so l is
/// l_infinity on the certified sites up to the residual return probability.
OccupationResult run_occupation(const StepLaw& law, const Observable& f, std::uint64_t seed, std::uint64_t n,
                                const OccupationOptions& options, std::uint64_t trial = 0);

struct LocalTimeSample {
  std::int64_t site = 0;
  std::vector<std::uint64_t> values;
  double mean = 0.0;
  double std_error = 0.0;
  /// Empirical P(l(x) = 0) and its standard error.
  double p_zero = 0.0;
  double p_zero_std_error = 0.0;
};

/// l_infinity(x) over independent trials (walk stopped once S > x + H).
LocalTimeSample sample_local_time(const StepLaw& law, std::int64_t x, std::uint64_t trials, std::uint64_t seed,
                                  std::int64_t exit_margin, unsigned threads = 1);

struct OccupationCovariance {
  std::int64_t n1 = 0, n2 = 0;
  std::uint64_t trials = 0;
  double mean1 = 0.0, mean2 = 0.0;
  double covariance = 0.0;
  /// Jackknife standard error.
  double std_error = 0.0;
  /// Same statistic after a random re-pairing of trials (a null reference).
  double shuffled_covariance = 0.0;
  double shuffled_std_error = 0.0;
  std::vector<std::uint64_t> l1, l2;
};

/// Sample covariance with leave-one-out jackknife error.
std::pair<double, double> covariance_jackknife(std::span<const double> a, std::span<const double> b);

OccupationCovariance occupation_covariance(const StepLaw& law, std::int64_t n1, std::int64_t n2, std::uint64_t trials,
                                           std::uint64_t seed, std::int64_t exit_margin, unsigned threads = 1);

// ---- counterexample events -----------------------------------------------

struct EventCheck {
  std::size_t n = 0;
  std::uint64_t t = 0;
  /// A_n: S_k in I_n (x [-w, w]^{d-1}) for every k in [t_n, 3 t_n].
  bool event = false;
  /// T_{3t} >= 2t for even n, T_{3t} <= t for odd n; checked only when event holds.
  bool implication_checked = false;
  bool implication_holds = false;
  double birkhoff = 0.0;
};

/// positions[k] = S_k for k = 0..3 t_n at least.
EventCheck ocean_event_check(const OceanSchedule& schedule, const Observable& f, std::size_t n,
                             std::span<const Site> positions);

/// The constant and tube builders throw HypothesisError when I_n holds no lattice site.
/// Zero up to t_n - 1, then parked at floor(c_n) through 3 t_n.
std::vector<Site> constant_event_path(const OceanSchedule& schedule, std::size_t n, std::size_t dim);
/// Like the constant path, but one time in [t_n, 3 t_n] sits just outside I_n.
std::vector<Site> exit_event_path(const OceanSchedule& schedule, std::size_t n, std::size_t dim, std::uint64_t seed);
/// Free walk for k < t_n, then a walk reflected inside I_n from floor(c_n).
std::vector<Site> tube_event_path(const StepLaw& law, const OceanSchedule& schedule, std::size_t n, std::uint64_t seed,
                                  std::uint64_t trial);
/// Unconstrained walk S_0..S_{3 t_n}.
std::vector<Site> free_event_path(const StepLaw& law, const OceanSchedule& schedule, std::size_t n, std::uint64_t seed,
                                  std::uint64_t trial);

}  // namespace walklab
