#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "walklab/step_law.hpp"

namespace walklab {

struct KernelOptions {
  /// Upper bound on the total probability dropped from the window.
  double max_truncated = 1e-9;
  /// Boundary slices lighter than this are dropped (budget permitting).
  double trim_below = 1e-25;
  /// Hard cap on the number of window sites.
  std::size_t max_sites = 100'000'000;
  unsigned threads = 1;
};

/// H(n, .) = P(S_n = .) on a box window of Z^d.
class LatticeKernel {
 public:
  /// H(0, .) = delta at the origin.
  static LatticeKernel delta(std::size_t dim);

  std::uint64_t time() const noexcept { return time_; }
  std::size_t dimension() const noexcept { return dim_; }
  const Site& lo() const noexcept { return lo_; }
  const Site& hi() const noexcept { return hi_; }
  std::size_t extent(std::size_t axis) const noexcept { return static_cast<std::size_t>(hi_[axis] - lo_[axis] + 1); }
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<double>& values() const noexcept { return values_; }
  double truncated_mass() const noexcept { return truncated_; }

  /// Mass at x; zero outside the window.
  double at(const Site& x) const noexcept;
  bool contains(const Site& x) const noexcept;
  Site site_of(std::size_t index) const noexcept;
  std::size_t index_of(const Site& x) const noexcept;
  /// Compensated sum of the window values.
  double total_mass() const noexcept;

  template <typename Fn>
  void for_each(Fn&& fn) const {
    Site x = lo_;
    for (std::size_t k = 0; k < values_.size(); ++k) {
      fn(static_cast<const Site&>(x), values_[k]);
      for (std::size_t axis = dim_; axis-- > 0;) {
        if (x[axis] < hi_[axis]) {
          ++x[axis];
          break;
        }
        x[axis] = lo_[axis];
      }
    }
  }

 private:
  friend LatticeKernel advance_kernel(const LatticeKernel&, const StepLaw&, const KernelOptions&);
  std::uint64_t time_ = 0;
  std::size_t dim_ = 1;
  Site lo_{};
  Site hi_{};
  std::vector<double> values_;
  double truncated_ = 0.0;
};

/// One exact convolution step H(n+1) = H(n) * law, then boundary trimming
/// within the truncation budget. Throws WindowOverflow when the window
/// would exceed max_sites or mass cannot be kept within budget.
LatticeKernel advance_kernel(const LatticeKernel& kernel, const StepLaw& law, const KernelOptions& options = {});

/// H(n, .) from the delta by n convolutions.
LatticeKernel kernel_at(const StepLaw& law, std::uint64_t n, const KernelOptions& options = {});

/// Calls fn(kernel) for every time 0..n_max.
template <typename Fn>
void evolve_kernel(const StepLaw& law, std::uint64_t n_max, const KernelOptions& options, Fn&& fn) {
  LatticeKernel k = LatticeKernel::delta(law.dimension());
  fn(static_cast<const LatticeKernel&>(k));
  for (std::uint64_t n = 0; n < n_max; ++n) {
    k = advance_kernel(k, law, options);
    fn(static_cast<const LatticeKernel&>(k));
  }
}

/// CSV snapshot: comment lines carrying n and truncated_mass, then
/// (x1..xd, mass) rows.
void write_kernel_csv(std::ostream& out, const LatticeKernel& kernel);

}  // namespace walklab
