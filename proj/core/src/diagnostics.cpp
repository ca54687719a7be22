#include "walklab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "walklab/errors.hpp"
#include "walklab/parallel.hpp"
#include "walklab/regression.hpp"
#include "walklab/trajectory.hpp"

namespace walklab {

double gaussian_density(const Matrix& cov, std::size_t d, const Vector& x) {
  // Cholesky cov = L L^T.
  Matrix l{};
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = cov[i][j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i][k] * l[j][k];
      if (i == j) {
        if (!(s > 0.0)) throw HypothesisError("gaussian_density: covariance is not positive definite");
        l[i][i] = std::sqrt(s);
      } else {
        l[i][j] = s / l[j][j];
      }
    }
  }
  Vector y{};
  double quad = 0.0, log_det = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double s = x[i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i][k] * y[k];
    y[i] = s / l[i][i];
    quad += y[i] * y[i];
    log_det += 2.0 * std::log(l[i][i]);
  }
  return std::exp(-0.5 * quad - 0.5 * log_det - 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi));
}

std::vector<LltRow> llt_report(const StepLaw& law, std::span<const std::uint64_t> n_list,
                               const KernelOptions& options) {
  if (law.alpha() != 2.0 || law.heavy_tailed())
    throw HypothesisError("llt_report: only alpha = 2 laws are supported (no stable density for alpha < 2)");
  if (!std::is_sorted(n_list.begin(), n_list.end()) ||
      std::adjacent_find(n_list.begin(), n_list.end()) != n_list.end())
    throw HypothesisError("llt_report: n_list must be strictly increasing");
  const std::size_t d = law.dimension();
  std::vector<LltRow> rows;
  if (n_list.empty()) return rows;
  std::size_t next = 0;
  evolve_kernel(law, n_list.back(), options, [&](const LatticeKernel& k) {
    if (next >= n_list.size() || k.time() != n_list[next]) return;
    const double n = static_cast<double>(k.time());
    LltRow row;
    row.n = k.time();
    row.truncated_mass = k.truncated_mass();
    if (k.time() == 0) {
      rows.push_back(row);
      ++next;
      return;
    }
    const double scale = std::pow(n, 0.5 * static_cast<double>(d));
    const double root = std::sqrt(n);
    k.for_each([&](const Site& l, double h) {
      Vector u{};
      for (std::size_t i = 0; i < d; ++i) u[i] = (static_cast<double>(l[i]) - n * law.drift()[i]) / root;
      const double err = std::fabs(scale * h - gaussian_density(law.covariance(), d, u));
      if (err > row.sup_error) {
        row.sup_error = err;
        row.argmax = l;
      }
    });
    rows.push_back(row);
    ++next;
  });
  return rows;
}

TailReport tail_report(const LatticeKernel& kernel, double eta) {
  TailReport r;
  r.radius = std::pow(static_cast<double>(kernel.time()), 0.5 + eta);
  r.truncated_mass = kernel.truncated_mass();
  const double r2 = r.radius * r.radius;
  double comp = 0.0;
  kernel.for_each([&](const Site& x, double h) {
    double norm2 = 0.0;
    for (std::size_t i = 0; i < kernel.dimension(); ++i) norm2 += static_cast<double>(x[i]) * static_cast<double>(x[i]);
    if (norm2 > r2) {
      const double t = r.mass + h;
      comp += r.mass >= h ? (r.mass - t) + h : (h - t) + r.mass;
      r.mass = t;
    }
  });
  r.mass += comp;
  return r;
}

TailReport tail_report(const StepLaw& law, std::uint64_t n, double eta, const KernelOptions& options) {
  if (law.alpha() != 2.0) throw HypothesisError("tail_report: only alpha = 2 laws are supported");
  return tail_report(kernel_at(law, n, options), eta);
}

MinTailReport min_tail_report(const StepLaw& law, std::span<const std::int64_t> m_list, std::uint64_t trials,
                              std::uint64_t seed, const MinTailOptions& options) {
  if (law.dimension() != 1) throw HypothesisError("min_tail_report: d = 1 only");
  const double v = law.drift()[0];
  if (!(v > 0.0)) throw HypothesisError("min_tail_report: precondition violated, drift must be strictly positive");
  if (trials == 0) throw HypothesisError("min_tail_report: need at least one trial");
  std::int64_t m_max = 0;
  for (auto m : m_list) {
    if (m < 0) throw HypothesisError("min_tail_report: m must be nonnegative");
    m_max = std::max(m_max, m);
  }
  const auto safety = static_cast<std::int64_t>(options.safety_factor * static_cast<double>(m_max)) +
                      options.safety_floor;
  const std::int64_t exit_level = m_max + safety;
  const auto step_cap = static_cast<std::uint64_t>(20.0 * static_cast<double>(exit_level) / v) + 10'000;

  std::vector<std::int64_t> minima(trials);
  std::vector<char> censored(trials, 0);
  parallel_for(trials, options.threads, [&](std::size_t t) {
    Walker w(law, seed, t);
    std::int64_t lowest = 0;
    std::uint64_t n = 0;
    while (w.position()[0] <= exit_level) {
      if (++n > step_cap) {
        censored[t] = 1;
        break;
      }
      lowest = std::min(lowest, w.step()[0]);
    }
    minima[t] = lowest;
  });

  MinTailReport report;
  report.censored = static_cast<std::uint64_t>(std::count(censored.begin(), censored.end(), 1));
  std::vector<double> lx, ly;
  for (auto m : m_list) {
    const auto hits = std::count_if(minima.begin(), minima.end(), [m](std::int64_t lo) { return lo <= -m; });
    const double p = static_cast<double>(hits) / static_cast<double>(trials);
    report.rows.push_back({m, p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials))});
    if (m > 0 && p > 0.0) {
      lx.push_back(std::log(static_cast<double>(m)));
      ly.push_back(std::log(p));
    }
  }
  if (lx.size() >= 2) {
    report.loglog_slope = fit_line(lx, ly).slope;
    report.slope_available = true;
  }
  return report;
}

}  // namespace walklab
