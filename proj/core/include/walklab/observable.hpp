#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "walklab/regression.hpp"
#include "walklab/site.hpp"

namespace walklab {

enum class ObservableKind { periodic, quasiperiodic, scenery, heaviside, ocean, ocean_multidim, table };

std::string_view to_string(ObservableKind kind) noexcept;

class ObservableImpl {
 public:
  virtual ~ObservableImpl() = default;
  virtual double eval(const Site& x) const = 0;
  /// Exact sum over the box [lo, hi] when a closed form exists.
  virtual std::optional<long double> box_sum(const Site& lo, const Site& hi) const;
};

struct ObservableInfo {
  std::size_t dimension = 1;
  ObservableKind kind = ObservableKind::table;
  double bound = 0.0;
  std::optional<double> mean;
  /// One-sided means on Z (d = 1 only): limits of averages over [0, v] and [-v, 0].
  std::optional<double> mean_plus;
  std::optional<double> mean_minus;
  std::string descriptor;
};

/// A bounded deterministic map Z^d -> R. Cheap to copy; the evaluator is
/// shared and immutable.
class Observable {
 public:
  Observable(std::shared_ptr<const ObservableImpl> impl, ObservableInfo info)
      : impl_(std::move(impl)), info_(std::move(info)) {}

  double operator()(const Site& x) const { return impl_->eval(x); }

  std::size_t dimension() const noexcept { return info_.dimension; }
  ObservableKind kind() const noexcept { return info_.kind; }
  double bound() const noexcept { return info_.bound; }
  const std::optional<double>& nominal_mean() const noexcept { return info_.mean; }
  const std::optional<double>& mean_plus() const noexcept { return info_.mean_plus; }
  const std::optional<double>& mean_minus() const noexcept { return info_.mean_minus; }
  const std::string& descriptor() const noexcept { return info_.descriptor; }
  const ObservableInfo& info() const noexcept { return info_; }
  const ObservableImpl& impl() const noexcept { return *impl_; }

  Observable with_descriptor(std::string descriptor) const {
    Observable copy = *this;
    copy.info_.descriptor = std::move(descriptor);
    return copy;
  }

 private:
  std::shared_ptr<const ObservableImpl> impl_;
  ObservableInfo info_;
};

// ---- periodic ------------------------------------------------------------

/// F(x) = table[x mod period], table in row-major order over the period box.
Observable make_periodic(std::size_t dim, const Site& period, std::vector<double> table);
Observable make_constant(std::size_t dim, double c);
/// (-1)^{x_1 + ... + x_d}.
Observable make_parity(std::size_t dim);

// ---- quasi-periodic ------------------------------------------------------

/// One term a cos(2 pi <m, theta>) + b sin(2 pi <m, theta>) of a torus profile.
struct TrigTerm {
  std::array<std::int64_t, kMaxDim> m{};
  double cos_coef = 0.0;
  double sin_coef = 0.0;
};

struct QuasiPeriodicSpec {
  std::size_t dim = 1;
  std::vector<TrigTerm> profile;
  /// rotation[j] is the torus vector attached to lattice coordinate j.
  std::array<std::array<long double, kMaxDim>, kMaxDim> rotation{};
  std::array<long double, kMaxDim> phase{};
};

/// F(x) = profile(phase + sum_j x_j rotation[j]) on the torus T^d.
Observable make_quasiperiodic(const QuasiPeriodicSpec& spec);
/// cos(2 pi theta_1) with the golden rotation (d = 1) or square roots of
/// primes (d >= 2); phase omega on every torus coordinate.
QuasiPeriodicSpec golden_cos_spec(std::size_t dim, long double omega = 0.0L);

/// min over 0 < |m| <= M (Euclidean, m in Z^r) of |e^{2 pi i <m, alpha>} - 1| |m|^sigma.
double diophantine_quality(std::span<const long double> alpha, std::int64_t max_norm, double sigma);

// ---- scenery -------------------------------------------------------------

/// iid Rademacher field from a stateless keyed hash.
Observable make_scenery(std::size_t dim, std::uint64_t seed);

// ---- heaviside -----------------------------------------------------------

Observable make_heaviside();

/// a F + c, keeping the kind of F.
Observable affine(const Observable& f, double a, double c);

// ---- ocean ---------------------------------------------------------------

/// Block schedule b_{n+1} = b_n + floor(b_n / a_n), n = 1, 2, ...
/// Materialized eagerly up to the 64-bit range.
class OceanSchedule {
 public:
  static constexpr std::uint64_t kSaturated = ~std::uint64_t{0};

  OceanSchedule(double alpha, std::int64_t b1, std::string a_rule);

  double alpha() const noexcept { return alpha_; }
  const std::string& a_rule() const noexcept { return a_rule_; }
  /// Number of complete blocks [b_n, b_{n+1}).
  std::size_t blocks() const noexcept { return b_.size() - 1; }

  std::int64_t a(std::size_t n) const { return a_.at(n - 1); }
  std::int64_t b(std::size_t n) const { return b_.at(n - 1); }
  /// 2 c_n = b_n + b_{n+1}; c_n may be a half-integer.
  std::int64_t twice_c(std::size_t n) const { return b(n) + b(n + 1); }
  double c(std::size_t n) const { return static_cast<double>(twice_c(n)) / 2.0; }
  /// floor(b_n / 4 a_n).
  std::int64_t half_width(std::size_t n) const { return b(n) / (4 * a(n)); }
  /// Integer hull of I_n = [c_n - w, c_n + w].
  std::int64_t interval_lo(std::size_t n) const;
  std::int64_t interval_hi(std::size_t n) const;
  /// floor(c_n^alpha), or kSaturated beyond 2^63.
  std::uint64_t t(std::size_t n) const;
  /// a_n <= n < b_n < b_{n+1} and b_n < 2^{n+1}.
  bool bounds_hold(std::size_t n) const;

  /// Index n with b_n <= x < b_{n+1}; 0 for 1 <= x < b_1. Requires x >= 1.
  std::size_t block_of(std::int64_t x) const;
  /// F(x) on x >= 0; throws BudgetError past the materialized range.
  double value(std::int64_t x) const;
  /// sum_{y=1}^{x} F(y) for x >= 0.
  std::uint64_t prefix_ones(std::int64_t x) const;
  /// Largest |x| that can be evaluated.
  std::int64_t max_abs() const noexcept { return b_.back() - 1; }

 private:
  double alpha_;
  std::string a_rule_;
  std::vector<std::int64_t> a_;
  std::vector<std::int64_t> b_;
  /// ones_[n] = number of x in [1, b_n) with F(x) = 1; ones_[0] unused.
  std::vector<std::uint64_t> ones_;
};

/// F(0) = 0, F = 1 on [b_{2k}, b_{2k+1}), 0 on [b_{2k+1}, b_{2k+2}),
/// mirrored to x < 0. On [1, b_1) F = 1.
Observable make_ocean(std::shared_ptr<const OceanSchedule> schedule);
/// F(x_1) when |x_i| <= |x_1| for all i >= 2, else 1/2.
Observable make_ocean_multidim(std::size_t dim, std::shared_ptr<const OceanSchedule> schedule);

// ---- table ---------------------------------------------------------------

Observable make_table(std::size_t dim, std::map<Site, double> values, double fallback = 0.0);
/// Rows "x1,...,xd,value"; comment lines (#) and one non-numeric header are skipped.
std::map<Site, double> read_table_csv(std::istream& in, std::size_t dim);

// ---- cube averages -------------------------------------------------------

struct CubeSpec {
  std::size_t dim = 1;
  std::array<double, kMaxDim> a{};
  std::array<double, kMaxDim> b{};
  double scale = 1.0;
  Site center{};

  /// Integer box z + [ceil(a L), floor(b L)] per coordinate.
  std::pair<Site, Site> box() const;
};

inline constexpr std::uint64_t kDefaultCubeBudget = 200'000'000;

/// Number of sites in [lo, hi]; 0 when empty.
long double box_volume(std::size_t dim, const Site& lo, const Site& hi);
/// Compensated direct summation over the box.
long double box_sum_direct(const Observable& f, const Site& lo, const Site& hi,
                           std::uint64_t budget = kDefaultCubeBudget);
/// Mean over [lo, hi] using the closed form when available.
double box_average(const Observable& f, const Site& lo, const Site& hi, std::uint64_t budget = kDefaultCubeBudget);
double cube_average(const Observable& f, const CubeSpec& cube, std::uint64_t budget = kDefaultCubeBudget);

struct BetaFitRow {
  double scale = 0.0;
  double max_error = 0.0;
  Site worst_center{};
};

struct BetaFit {
  double beta_hat = 0.0;
  double c_hat = 0.0;
  /// All errors zero: beta_hat is -inf.
  bool degenerate = false;
  std::size_t points_used = 0;
  std::vector<BetaFitRow> rows;
  std::vector<double> residuals;
};

struct BetaFitOptions {
  std::array<double, kMaxDim> a{};
  std::array<double, kMaxDim> b{1.0, 1.0, 1.0, 1.0};
  std::size_t center_samples = 64;
  std::uint64_t seed = 0;
  std::uint64_t budget = kDefaultCubeBudget;
};

/// err(L) = max over sampled |z| < L^gamma of |mean over z + V(aL, bL) - mean|,
/// then log err ~ log C + d (beta - 1) log L. The origin is always sampled.
BetaFit beta_fit(const Observable& f, double mean, double gamma, std::span<const double> scales,
                 const BetaFitOptions& options = {});

}  // namespace walklab
