#include "walklab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "walklab/errors.hpp"
#include "walklab/format.hpp"
#include "walklab/parallel.hpp"

namespace walklab {

LatticeKernel LatticeKernel::delta(std::size_t dim) {
  if (dim == 0 || dim > kMaxDim) throw HypothesisError("kernel: unsupported dimension");
  LatticeKernel k;
  k.dim_ = dim;
  k.values_.assign(1, 1.0);
  return k;
}

bool LatticeKernel::contains(const Site& x) const noexcept {
  for (std::size_t i = 0; i < dim_; ++i)
    if (x[i] < lo_[i] || x[i] > hi_[i]) return false;
  return true;
}

std::size_t LatticeKernel::index_of(const Site& x) const noexcept {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < dim_; ++i) idx = idx * extent(i) + static_cast<std::size_t>(x[i] - lo_[i]);
  return idx;
}

Site LatticeKernel::site_of(std::size_t index) const noexcept {
  Site x{};
  for (std::size_t i = dim_; i-- > 0;) {
    const std::size_t e = extent(i);
    x[i] = lo_[i] + static_cast<std::int64_t>(index % e);
    index /= e;
  }
  return x;
}

double LatticeKernel::at(const Site& x) const noexcept { return contains(x) ? values_[index_of(x)] : 0.0; }

double LatticeKernel::total_mass() const noexcept {
  double sum = 0.0, comp = 0.0;
  for (double v : values_) {
    const double t = sum + v;
    comp += std::fabs(sum) >= std::fabs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

namespace {

constexpr std::size_t kTile = 4096;

struct Box {
  std::size_t dim;
  Site lo, hi;
  std::size_t extent(std::size_t i) const { return static_cast<std::size_t>(hi[i] - lo[i] + 1); }
  std::size_t volume() const {
    std::size_t v = 1;
    for (std::size_t i = 0; i < dim; ++i) v *= extent(i);
    return v;
  }
};

// Mass of the slice {x in sub : x[axis] == coord}; values are laid out over `storage`.
double slice_mass(const std::vector<double>& values, const Box& storage, const Box& sub, std::size_t axis,
                  std::int64_t coord) {
  double mass = 0.0;
  Box slice = sub;
  slice.lo[axis] = slice.hi[axis] = coord;
  Site x = slice.lo;
  const std::size_t n = slice.volume();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < storage.dim; ++i)
      idx = idx * storage.extent(i) + static_cast<std::size_t>(x[i] - storage.lo[i]);
    mass += values[idx];
    for (std::size_t i = storage.dim; i-- > 0;) {
      if (x[i] < slice.hi[i]) {
        ++x[i];
        break;
      }
      x[i] = slice.lo[i];
    }
  }
  return mass;
}

}  // namespace

LatticeKernel advance_kernel(const LatticeKernel& kernel, const StepLaw& law, const KernelOptions& options) {
  if (!law.kernel_capable())
    throw HypothesisError("kernel: exact convolution is disabled for heavy-tailed or very wide step laws");
  if (law.dimension() != kernel.dimension()) throw HypothesisError("kernel: dimension mismatch with step law");
  const std::size_t d = kernel.dimension();

  Box in{d, kernel.lo(), kernel.hi()};
  Box out{d, kernel.lo() + law.support_min(), kernel.hi() + law.support_max()};
  long double volume = 1.0L;
  for (std::size_t i = 0; i < d; ++i) volume *= static_cast<long double>(out.extent(i));
  if (volume > static_cast<long double>(options.max_sites))
    throw WindowOverflow("kernel window of " + format_double(static_cast<double>(volume)) +
                         " sites exceeds the budget of " + std::to_string(options.max_sites));

  std::vector<double> next(out.volume(), 0.0);
  const std::size_t last = d - 1;
  const std::size_t row_len = out.extent(last);
  const std::size_t rows = next.size() / row_len;
  const std::size_t tiles_per_row = (row_len + kTile - 1) / kTile;
  const auto& src = kernel.values();
  const auto atoms = law.support();

  parallel_for(rows * tiles_per_row, options.threads, [&](std::size_t tile) {
    const std::size_t row = tile / tiles_per_row;
    const std::size_t col0 = (tile % tiles_per_row) * kTile;
    const std::size_t col1 = std::min(row_len, col0 + kTile);
    // Coordinates of this output row in all but the last axis.
    Site y{};
    std::size_t rest = row;
    for (std::size_t i = last; i-- > 0;) {
      y[i] = out.lo[i] + static_cast<std::int64_t>(rest % out.extent(i));
      rest /= out.extent(i);
    }
    double* dst = next.data() + row * row_len;
    for (const auto& atom : atoms) {
      std::size_t in_row = 0;
      bool inside = true;
      for (std::size_t i = 0; i < last; ++i) {
        const std::int64_t xi = y[i] - atom.site[i];
        if (xi < in.lo[i] || xi > in.hi[i]) {
          inside = false;
          break;
        }
        in_row = in_row * in.extent(i) + static_cast<std::size_t>(xi - in.lo[i]);
      }
      if (!inside) continue;
      // Output column j <-> absolute out.lo+j; input absolute = that - s.
      const std::int64_t shift = out.lo[last] - atom.site[last] - in.lo[last];
      const std::int64_t j_lo = std::max<std::int64_t>(static_cast<std::int64_t>(col0), -shift);
      const std::int64_t j_hi =
          std::min<std::int64_t>(static_cast<std::int64_t>(col1), static_cast<std::int64_t>(in.extent(last)) - shift);
      const double* s = src.data() + in_row * in.extent(last);
      const double p = atom.prob;
      for (std::int64_t j = j_lo; j < j_hi; ++j) dst[j] += p * s[j + shift];
    }
  });

  // Trim light boundary slices while the truncation budget allows.
  double truncated = kernel.truncated_mass();
  Box keep = out;
  for (bool trimmed = true; trimmed;) {
    trimmed = false;
    for (std::size_t axis = 0; axis < d; ++axis) {
      for (int side = 0; side < 2; ++side) {
        if (keep.lo[axis] >= keep.hi[axis]) continue;
        const std::int64_t coord = side == 0 ? keep.lo[axis] : keep.hi[axis];
        const double m = slice_mass(next, out, keep, axis, coord);
        if (m <= options.trim_below && truncated + m <= options.max_truncated) {
          truncated += m;
          if (side == 0)
            ++keep.lo[axis];
          else
            --keep.hi[axis];
          trimmed = true;
        }
      }
    }
  }
  if (keep.lo != out.lo || keep.hi != out.hi) {
    std::vector<double> packed(keep.volume());
    Site x = keep.lo;
    for (std::size_t k = 0; k < packed.size(); ++k) {
      std::size_t idx = 0;
      for (std::size_t i = 0; i < d; ++i) idx = idx * out.extent(i) + static_cast<std::size_t>(x[i] - out.lo[i]);
      packed[k] = next[idx];
      for (std::size_t i = d; i-- > 0;) {
        if (x[i] < keep.hi[i]) {
          ++x[i];
          break;
        }
        x[i] = keep.lo[i];
      }
    }
    next.swap(packed);
    out = keep;
  }

  LatticeKernel result;
  result.time_ = kernel.time() + 1;
  result.dim_ = d;
  result.lo_ = out.lo;
  result.hi_ = out.hi;
  result.values_ = std::move(next);
  result.truncated_ = truncated;
  return result;
}

LatticeKernel kernel_at(const StepLaw& law, std::uint64_t n, const KernelOptions& options) {
  LatticeKernel k = LatticeKernel::delta(law.dimension());
  for (std::uint64_t step = 0; step < n; ++step) k = advance_kernel(k, law, options);
  return k;
}

void write_kernel_csv(std::ostream& out, const LatticeKernel& kernel) {
  out << "# n=" << kernel.time() << "\n# truncated_mass=" << format_double(kernel.truncated_mass()) << "\n";
  for (std::size_t i = 0; i < kernel.dimension(); ++i) out << 'x' << (i + 1) << ',';
  out << "mass\n";
  kernel.for_each([&](const Site& x, double v) {
    for (std::size_t i = 0; i < kernel.dimension(); ++i) out << x[i] << ',';
    out << format_double(v) << '\n';
  });
}

}  // namespace walklab
