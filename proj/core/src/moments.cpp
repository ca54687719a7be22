#include "walklab/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "walklab/errors.hpp"
#include "walklab/format.hpp"
#include "walklab/parallel.hpp"
#include "walklab/regression.hpp"
#include "walklab/summation.hpp"

namespace walklab {

namespace {

void require_kernel_path(const MomentPlan& plan) {
  if (!plan.law.kernel_capable())
    throw HypothesisError("moments: exact computation needs a finite-support law (" + plan.law.descriptor() + ")");
  if (plan.law.dimension() != plan.f.dimension()) throw HypothesisError("moments: dimension mismatch");
}

// Row-major box with the last axis fastest, matching LatticeKernel::for_each.
struct Box {
  std::size_t dim = 1;
  Site lo{}, hi{};
  std::vector<std::size_t> strides;
  std::size_t volume = 1;

  Box(std::size_t d, const Site& l, const Site& h) : dim(d), lo(l), hi(h), strides(d) {
    for (std::size_t a = d; a-- > 0;) {
      strides[a] = volume;
      volume *= static_cast<std::size_t>(hi[a] - lo[a] + 1);
    }
  }
  std::size_t index(const Site& x) const noexcept {
    std::size_t idx = 0;
    for (std::size_t a = 0; a < dim; ++a) idx += static_cast<std::size_t>(x[a] - lo[a]) * strides[a];
    return idx;
  }
  Site site(std::size_t idx) const noexcept {
    Site x{};
    for (std::size_t a = 0; a < dim; ++a) {
      x[a] = lo[a] + static_cast<std::int64_t>(idx / strides[a]);
      idx %= strides[a];
    }
    return x;
  }
  std::ptrdiff_t offset(const Site& s) const noexcept {
    std::ptrdiff_t off = 0;
    for (std::size_t a = 0; a < dim; ++a) off += static_cast<std::ptrdiff_t>(s[a]) * static_cast<std::ptrdiff_t>(strides[a]);
    return off;
  }
};

}  // namespace

MeanResult exact_mean_T(const MomentPlan& plan) {
  require_kernel_path(plan);
  MeanResult r;
  r.per_step.reserve(plan.horizon);
  CompensatedSum total;
  double truncated_sum = 0.0;
  evolve_kernel(plan.law, plan.horizon, plan.kernel, [&](const LatticeKernel& h) {
    if (h.time() == 0) return;
    CompensatedSum s;
    h.for_each([&](const Site& x, double mass) {
      if (mass != 0.0) s.add(mass * plan.f(x + plan.start));
    });
    r.per_step.push_back(s.value());
    total.add(s.value());
    r.truncated_mass = std::max(r.truncated_mass, h.truncated_mass());
    truncated_sum += h.truncated_mass();
  });
  r.mean = total.value();
  r.error_bound = plan.f.bound() * truncated_sum;
  return r;
}

PairMomentEngine::PairMomentEngine(MomentPlan plan) : plan_(std::move(plan)) {
  require_kernel_path(plan_);
  const std::size_t d = plan_.law.dimension();
  std::size_t stored = 0;
  evolve_kernel(plan_.law, plan_.horizon, plan_.kernel, [&](const LatticeKernel& h) {
    stored += h.size();
    if (stored > plan_.kernel.max_sites) throw BudgetError("pair moments: stored kernels exceed max_sites");
    kernels_.push_back(h);
  });
  box_lo_ = box_hi_ = plan_.start;
  for (const auto& h : kernels_)
    for (std::size_t a = 0; a < d; ++a) {
      box_lo_[a] = std::min(box_lo_[a], plan_.start[a] + h.lo()[a]);
      box_hi_[a] = std::max(box_hi_[a], plan_.start[a] + h.hi()[a]);
    }
}

const std::vector<double>& PairMomentEngine::lag(std::uint64_t k) {
  if (auto it = lags_.find(k); it != lags_.end()) return it->second;
  const Box box(plan_.law.dimension(), box_lo_, box_hi_);
  const LatticeKernel& hk = kernels_.at(k);
  std::vector<double> g(box.volume);
  parallel_for(box.volume, plan_.threads, [&](std::size_t i) {
    const Site x1 = box.site(i);
    CompensatedSum s;
    hk.for_each([&](const Site& y, double mass) {
      if (mass != 0.0) s.add(mass * plan_.f(x1 + y));
    });
    g[i] = s.value();
  });
  return lags_.emplace(k, std::move(g)).first->second;
}

double PairMomentEngine::contract(std::uint64_t n1, const std::vector<double>& g) const {
  const Box box(plan_.law.dimension(), box_lo_, box_hi_);
  CompensatedSum s;
  kernels_.at(n1).for_each([&](const Site& x, double mass) {
    if (mass == 0.0) return;
    const Site x1 = x + plan_.start;
    s.add(mass * plan_.f(x1) * g[box.index(x1)]);
  });
  return s.value();
}

double PairMomentEngine::pair(std::uint64_t n1, std::uint64_t n2) {
  if (n1 > n2) std::swap(n1, n2);
  if (n2 > plan_.horizon) throw HypothesisError("pair moments: time beyond the planned horizon");
  return contract(n1, lag(n2 - n1));
}

std::vector<std::vector<double>> PairMomentEngine::pair_table() {
  const std::uint64_t n = plan_.horizon;
  for (std::uint64_t k = 0; k < n; ++k) lag(k);
  std::vector<std::vector<double>> table(n, std::vector<double>(n));
  parallel_for(n, plan_.threads, [&](std::size_t i) {
    for (std::uint64_t j = i; j < n; ++j) table[i][j] = contract(i + 1, lags_.at(j - i));
  });
  for (std::uint64_t i = 0; i < n; ++i)
    for (std::uint64_t j = 0; j < i; ++j) table[i][j] = table[j][i];
  return table;
}

double PairMomentEngine::second_moment() {
  const auto table = pair_table();
  CompensatedSum s;
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = i; j < table.size(); ++j) s.add((i == j ? 1.0 : 2.0) * table[i][j]);
  return s.value();
}

double PairMomentEngine::error_bound(std::uint64_t n1, std::uint64_t n2) const {
  if (n1 > n2) std::swap(n1, n2);
  const double b = plan_.f.bound();
  return (kernels_.at(n1).truncated_mass() + kernels_.at(n2 - n1).truncated_mass()) * b * b;
}

double exact_pair_moment(const MomentPlan& plan, std::uint64_t n1, std::uint64_t n2) {
  MomentPlan p = plan;
  p.horizon = std::max(n1, n2);
  PairMomentEngine engine(std::move(p));
  return engine.pair(n1, n2);
}

double second_moment_by_pairs(const MomentPlan& plan) {
  PairMomentEngine engine(plan);
  return engine.second_moment();
}

std::vector<MomentRow> exact_second_moment(const MomentPlan& plan) {
  require_kernel_path(plan);
  const std::size_t d = plan.law.dimension();
  const auto n = static_cast<std::int64_t>(plan.horizon);
  Site lo{}, hi{};
  for (std::size_t a = 0; a < d; ++a) {
    lo[a] = plan.start[a] + n * plan.law.support_min()[a];
    hi[a] = plan.start[a] + n * plan.law.support_max()[a];
  }
  const Box box(d, lo, hi);
  const auto atoms = plan.law.support();
  const double work = static_cast<double>(box.volume) * static_cast<double>(plan.horizon) * atoms.size();
  if (work > plan.max_work)
    throw BudgetError("exact_second_moment: horizon budget exceeded (work " + format_double(work) + " > " +
                      format_double(plan.max_work) + ")");

  std::vector<double> fv(box.volume);
  for (std::size_t i = 0; i < box.volume; ++i) fv[i] = plan.f(box.site(i));
  std::vector<std::ptrdiff_t> offsets;
  for (const auto& atom : atoms) offsets.push_back(box.offset(atom.site));
  const auto size = static_cast<std::ptrdiff_t>(box.volume);
  const std::size_t origin = box.index(plan.start);

  // Points whose neighbours leave the box hold garbage, but they never feed
  // the shrinking region that contains x0 at the remaining steps.
  std::vector<double> u(box.volume, 0.0), w(box.volume, 0.0), a(box.volume), b(box.volume);
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (box.volume + kChunk - 1) / kChunk;
  std::vector<MomentRow> rows;
  rows.reserve(plan.horizon);
  for (std::uint64_t m = 1; m <= plan.horizon; ++m) {
    for (std::size_t i = 0; i < box.volume; ++i) {
      a[i] = fv[i] + u[i];
      b[i] = fv[i] * fv[i] + 2.0 * fv[i] * u[i] + w[i];
    }
    parallel_for(chunks, plan.threads, [&](std::size_t c) {
      const std::size_t end = std::min(box.volume, (c + 1) * kChunk);
      for (std::size_t i = c * kChunk; i < end; ++i) {
        double su = 0.0, sw = 0.0;
        for (std::size_t k = 0; k < offsets.size(); ++k) {
          const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + offsets[k];
          if (j < 0 || j >= size) continue;
          su += atoms[k].prob * a[static_cast<std::size_t>(j)];
          sw += atoms[k].prob * b[static_cast<std::size_t>(j)];
        }
        u[i] = su;
        w[i] = sw;
      }
    });
    const double mean = u[origin], second = w[origin];
    double var = second - mean * mean;
    if (std::fabs(var) <= kVarianceRounding * std::fabs(second)) var = 0.0;
    rows.push_back({m, mean, second, var});
  }
  return rows;
}

VarianceScan variance_exponent_scan(const StepLaw& law, std::span<const Observable> observables,
                                    std::span<const std::uint64_t> n_list, Site start, unsigned threads) {
  if (n_list.size() < 3) throw HypothesisError("variance_exponent_scan: fewer than 3 points");
  if (observables.empty()) throw HypothesisError("variance_exponent_scan: no observables");
  for (std::size_t k = 0; k < n_list.size(); ++k)
    if (n_list[k] == 0 || (k > 0 && n_list[k] <= n_list[k - 1]))
      throw HypothesisError("variance_exponent_scan: N list must be positive and increasing");
  VarianceScan scan;
  scan.rows.resize(n_list.size());
  for (std::size_t k = 0; k < n_list.size(); ++k) scan.rows[k].n = n_list[k];
  for (const auto& f : observables) {
    MomentPlan plan{.law = law, .f = f, .horizon = n_list.back(), .start = start, .threads = threads};
    const auto rows = exact_second_moment(plan);
    for (std::size_t k = 0; k < n_list.size(); ++k) {
      const MomentRow& r = rows[n_list[k] - 1];
      scan.rows[k].replica_variance.push_back(r.variance);
    }
  }
  std::vector<double> xs, ys;
  for (auto& row : scan.rows) {
    CompensatedSum s;
    for (double v : row.replica_variance) s.add(v);
    row.variance = s.value() / static_cast<double>(observables.size());
    if (!(row.variance > 0.0)) scan.degenerate = true;
    xs.push_back(std::log(static_cast<double>(row.n)));
    ys.push_back(std::log(row.variance));
  }
  if (scan.degenerate) {
    scan.slope = scan.intercept = std::numeric_limits<double>::quiet_NaN();
    return scan;
  }
  const auto fit = fit_line(xs, ys);
  scan.slope = fit.slope;
  scan.intercept = fit.intercept;
  scan.residuals = fit.residuals;
  return scan;
}

std::vector<KernelDerivativeRow> kernel_derivative_table(const StepLaw& law, std::span<const std::uint64_t> n_list,
                                                         int order, const KernelOptions& options) {
  if (order != 1 && order != 2) throw HypothesisError("kernel_derivative_table: order must be 1 or 2");
  if (n_list.empty()) return {};
  const std::uint64_t n_max = *std::max_element(n_list.begin(), n_list.end());
  const double d = static_cast<double>(law.dimension());
  Site e1{};
  e1[0] = 1;
  std::vector<KernelDerivativeRow> rows;
  evolve_kernel(law, n_max, options, [&](const LatticeKernel& h) {
    if (std::find(n_list.begin(), n_list.end(), h.time()) == n_list.end()) return;
    double sup = 0.0;
    auto diff = [&](const Site& x) {
      return order == 1 ? h.at(x + e1) - h.at(x) : h.at(x + e1) - 2.0 * h.at(x) + h.at(x - e1);
    };
    h.for_each([&](const Site& x, double) {
      sup = std::max({sup, std::fabs(diff(x)), std::fabs(diff(x - e1)), std::fabs(diff(x + e1))});
    });
    const double scale = std::pow(static_cast<double>(std::max<std::uint64_t>(h.time(), 1)), (d + order) / 2.0);
    rows.push_back({h.time(), sup, sup * scale});
  });
  return rows;
}

void write_pair_table_csv(std::ostream& out, const std::vector<std::vector<double>>& table, const CsvMeta& meta) {
  write_csv_meta(out, meta);
  write_csv_header(out, {"n1", "n2", "E"});
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < table[i].size(); ++j)
      out << i + 1 << ',' << j + 1 << ',' << format_double(table[i][j]) << '\n';
}

void write_moment_rows_csv(std::ostream& out, std::span<const MomentRow> rows, const CsvMeta& meta) {
  write_csv_meta(out, meta);
  write_csv_header(out, {"N", "mean", "second", "var"});
  for (const auto& r : rows)
    out << r.n << ',' << format_double(r.mean) << ',' << format_double(r.second) << ',' << format_double(r.variance)
        << '\n';
}

}  // namespace walklab
