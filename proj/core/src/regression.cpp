#include "walklab/regression.hpp"

#include "walklab/errors.hpp"

namespace walklab {

LinearFit fit_line(std::span<const double> xs, std::span<const double> ys, std::span<const double> weights) {
  const std::size_t n = xs.size();
  if (n != ys.size() || (!weights.empty() && weights.size() != n))
    throw HypothesisError("fit_line: mismatched input lengths");
  if (n < 2) throw HypothesisError("fit_line: need at least two points");
  // Centered two-pass sums for stability.
  long double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long double w = weights.empty() ? 1.0L : weights[i];
    sw += w;
    sx += w * xs[i];
    sy += w * ys[i];
  }
  const long double mx = sx / sw, my = sy / sw;
  long double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long double w = weights.empty() ? 1.0L : weights[i];
    sxx += w * (xs[i] - mx) * (xs[i] - mx);
    sxy += w * (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0) throw HypothesisError("fit_line: x values are all equal");
  LinearFit fit;
  fit.slope = static_cast<double>(sxy / sxx);
  fit.intercept = static_cast<double>(my - (sxy / sxx) * mx);
  fit.residuals.resize(n);
  for (std::size_t i = 0; i < n; ++i) fit.residuals[i] = ys[i] - (fit.intercept + fit.slope * xs[i]);
  return fit;
}

}  // namespace walklab
