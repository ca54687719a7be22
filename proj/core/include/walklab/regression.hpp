#pragma once

#include <span>
#include <vector>

namespace walklab {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// y_i - (intercept + slope x_i), in input order.
  std::vector<double> residuals;
};

/// (Weighted) least squares line through (x_i, y_i). Empty weights means
/// ordinary least squares. Requires at least two distinct x values.
LinearFit fit_line(std::span<const double> xs, std::span<const double> ys, std::span<const double> weights = {});

}  // namespace walklab
