#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "walklab/csv.hpp"
#include "walklab/kernel.hpp"
#include "walklab/observable.hpp"
#include "walklab/step_law.hpp"

namespace walklab {

/// What to compute exactly: T_N = sum_{n=1}^N F(S_n) for the walk started at x0.
struct MomentPlan {
  StepLaw law;
  Observable f;
  std::uint64_t horizon = 0;
  Site start{};
  KernelOptions kernel{};
  /// Cap on box sites times steps times support atoms for the backward recursion.
  double max_work = 4e10;
  unsigned threads = 1;
};

struct MeanResult {
  double mean = 0.0;
  /// E F(S_n) for n = 1..N (index n - 1).
  std::vector<double> per_step;
  /// Largest kernel truncation over the horizon.
  double truncated_mass = 0.0;
  /// ||F|| * sum of truncated masses, a bound on the truncation error of `mean`.
  double error_bound = 0.0;
};

/// Forward kernels: E F(S_n) = sum_x H(n, x) F(x0 + x).
MeanResult exact_mean_T(const MomentPlan& plan);

/// E F(S_n1) F(S_n2) for 0 <= n1, n2 <= N, as
/// sum_{x1} H(n1, x1 - x0) F(x1) g_{|n2 - n1|}(x1), g_k(x1) = sum_y H(k, y) F(x1 + y).
/// Kernels H(0..N) are built once; g_k is computed once per lag and cached.
class PairMomentEngine {
 public:
  explicit PairMomentEngine(MomentPlan plan);

  double pair(std::uint64_t n1, std::uint64_t n2);
  /// Full table E_{n1,n2}, n1, n2 = 1..N (indices n - 1), rows in parallel.
  std::vector<std::vector<double>> pair_table();
  /// sum_{1 <= n1 <= n2 <= N} c_{n1,n2} E_{n1,n2}, c = 1 on the diagonal and 2 off it.
  double second_moment();
  /// (sum of kernel truncations) * ||F||^2 bound on any single pair value.
  double error_bound(std::uint64_t n1, std::uint64_t n2) const;
  const MomentPlan& plan() const noexcept { return plan_; }

 private:
  const std::vector<double>& lag(std::uint64_t k);
  double contract(std::uint64_t n1, const std::vector<double>& g) const;

  MomentPlan plan_;
  std::vector<LatticeKernel> kernels_;
  /// Box covering x0 + window(H(N)) shifted by every kernel window.
  Site box_lo_{}, box_hi_{};
  std::vector<std::size_t> strides_;
  std::map<std::uint64_t, std::vector<double>> lags_;
};

double exact_pair_moment(const MomentPlan& plan, std::uint64_t n1, std::uint64_t n2);

/// |Var| at or below this fraction of E T^2 is cancellation noise and reported as 0.
inline constexpr double kVarianceRounding = 1e-11;

struct MomentRow {
  std::uint64_t n = 0;
  double mean = 0.0;
  double second = 0.0;
  double variance = 0.0;
};

/// Backward recursion on the box x0 + N [smin, smax]:
///   u_m = P(F + u_{m-1}),  w_m = P(F^2 + 2 F u_{m-1} + w_{m-1}),
/// with u_m(x0) = E T_m and w_m(x0) = E T_m^2. No truncation, one row per m = 1..N.
std::vector<MomentRow> exact_second_moment(const MomentPlan& plan);

/// Same quantity from the pair double sum (cost O(N^2 window)); a cross-check.
double second_moment_by_pairs(const MomentPlan& plan);

struct VarianceScanRow {
  std::uint64_t n = 0;
  /// Var(T_N) averaged over the supplied observables (e.g. scenery replicas).
  double variance = 0.0;
  std::vector<double> replica_variance;
};

struct VarianceScan {
  std::vector<VarianceScanRow> rows;
  /// Least-squares slope of log Var against log N; NaN when degenerate.
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;
  /// Some Var(T_N) is zero (after the kVarianceRounding rule), so no slope exists.
  bool degenerate = false;
};

/// Needs at least 3 strictly increasing N; one backward recursion per observable.
VarianceScan variance_exponent_scan(const StepLaw& law, std::span<const Observable> observables,
                                    std::span<const std::uint64_t> n_list, Site start = {}, unsigned threads = 1);

struct KernelDerivativeRow {
  std::uint64_t n = 0;
  /// sup_x |nabla^k H(n, x)| along the first axis.
  double sup = 0.0;
  /// sup * n^{(d + k) / 2}; bounded for diffusive walks.
  double scaled = 0.0;
};

/// Finite differences of the kernel: k = 1 gives H(x + e1) - H(x), k = 2 gives
/// H(x + e1) - 2 H(x) + H(x - e1).
std::vector<KernelDerivativeRow> kernel_derivative_table(const StepLaw& law, std::span<const std::uint64_t> n_list,
                                                         int order, const KernelOptions& options = {});

void write_pair_table_csv(std::ostream& out, const std::vector<std::vector<double>>& table, const CsvMeta& meta);
void write_moment_rows_csv(std::ostream& out, std::span<const MomentRow> rows, const CsvMeta& meta);

}  // namespace walklab
