#include "walklab/statlab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "walklab/errors.hpp"
#include "walklab/format.hpp"
#include "walklab/parallel.hpp"
#include "walklab/regression.hpp"
#include "walklab/summation.hpp"

namespace walklab {

double arcsine_cdf(double z) {
  if (!(z >= 0.0 && z <= 1.0)) throw HypothesisError("arcsine_cdf: z = " + format_double(z) + " outside [0, 1]");
  if (z == 1.0) return 1.0;
  return 2.0 / std::numbers::pi * std::asin(std::sqrt(z));
}

double arcsine_quantile(double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw HypothesisError("arcsine_quantile: u outside [0, 1]");
  const double s = std::sin(std::numbers::pi * u / 2.0);
  return s * s;
}

double ks_distance(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw HypothesisError("ks_distance: empty sample");
  std::vector<double> xs(sample.begin(), sample.end());
  std::sort(xs.begin(), xs.end());
  const auto m = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
  }
  return d;
}

AffineReduction::AffineReduction(double mean_minus, double mean_plus) : mean_minus_(mean_minus), mean_plus_(mean_plus) {
  if (!(mean_plus != mean_minus) || !std::isfinite(mean_plus) || !std::isfinite(mean_minus))
    throw HypothesisError("affine_reduce: needs mean_plus != mean_minus; use the weak-law check instead");
}

AffineReduction AffineReduction::for_observable(const Observable& f) {
  if (!f.mean_plus() || !f.mean_minus())
    throw HypothesisError("affine_reduce: observable declares no half-line means (" + f.descriptor() + ")");
  return {*f.mean_minus(), *f.mean_plus()};
}

std::vector<double> AffineReduction::reduce(std::span<const double> ts, std::uint64_t n) const {
  std::vector<double> out;
  out.reserve(ts.size());
  for (double t : ts) out.push_back(reduce(t, n));
  return out;
}

bool TrialEnsemble::complete() const noexcept {
  return records.empty() || (records.begin()->first == 0 && records.rbegin()->first == records.size() - 1);
}

std::vector<double> TrialEnsemble::values_at(std::size_t k) const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& [trial, recs] : records) out.push_back(recs.at(k).sum);
  return out;
}

TrialEnsemble run_ensemble(const StepLaw& law, const Observable& f, std::uint64_t seed, std::uint64_t count,
                           std::span<const std::uint64_t> checkpoints, unsigned threads, std::uint64_t first) {
  std::vector<BirkhoffRun> runs(count);
  parallel_for(count, threads, [&](std::size_t i) { runs[i] = run_birkhoff(law, f, seed, checkpoints, first + i); });
  TrialEnsemble e;
  e.seed = seed;
  e.checkpoints.assign(checkpoints.begin(), checkpoints.end());
  e.metadata = {{"law", law.descriptor()}, {"observable", f.descriptor()}, {"seed", std::to_string(seed)}};
  for (auto& r : runs) e.records.emplace(r.trial, std::move(r.records));
  return e;
}

TrialEnsemble merge(const TrialEnsemble& a, const TrialEnsemble& b) {
  if (a.seed != b.seed || a.checkpoints != b.checkpoints || a.metadata != b.metadata)
    throw HypothesisError("merge: ensembles differ in seed, checkpoints or metadata");
  TrialEnsemble out = a;
  for (const auto& [trial, recs] : b.records)
    if (!out.records.emplace(trial, recs).second)
      throw HypothesisError("merge: trial " + std::to_string(trial) + " present in both ensembles");
  return out;
}

void write_ensemble_csv(std::ostream& out, const TrialEnsemble& ensemble, std::size_t dim) {
  write_csv_meta(out, ensemble.metadata);
  out << "trial,n,T";
  for (std::size_t i = 0; i < dim; ++i) out << ",x" << (i + 1);
  out << '\n';
  for (const auto& [trial, recs] : ensemble.records)
    for (const auto& r : recs) {
      out << trial << ',' << r.n << ',' << format_double(r.sum);
      for (std::size_t i = 0; i < dim; ++i) out << ',' << r.position[i];
      out << '\n';
    }
}

GrowthStatistic parse_growth_statistic(const std::string& name) {
  if (name == "rms") return GrowthStatistic::rms;
  if (name == "mean-abs" || name == "mean_abs") return GrowthStatistic::mean_abs;
  if (name == "quantile") return GrowthStatistic::quantile;
  throw HypothesisError("unknown growth statistic '" + name + "' (rms, mean-abs, quantile)");
}

namespace {

GrowthPoint growth_point(std::uint64_t n, std::span<const double> values, GrowthStatistic statistic, double q) {
  const auto m = static_cast<double>(values.size());
  GrowthPoint p{.n = n};
  if (statistic == GrowthStatistic::quantile) {
    std::vector<double> a;
    a.reserve(values.size());
    for (double v : values) a.push_back(std::fabs(v));
    std::sort(a.begin(), a.end());
    auto at = [&](double r) {
      const auto idx = static_cast<std::size_t>(std::clamp(std::ceil(r * m) - 1.0, 0.0, m - 1.0));
      return a[idx];
    };
    p.value = at(q);
    // Half the width of the order-statistic band q +- sqrt(q(1-q)/M).
    const double h = std::sqrt(q * (1.0 - q) / m);
    p.std_error = (at(std::min(1.0, q + h)) - at(std::max(0.0, q - h))) / 2.0;
    return p;
  }
  CompensatedSum s1, s2;
  for (double v : values) {
    const double x = statistic == GrowthStatistic::rms ? v * v : std::fabs(v);
    s1.add(x);
    s2.add(x * x);
  }
  const double mean = s1.value() / m;
  const double var = m > 1 ? std::max(0.0, (s2.value() - m * mean * mean) / (m - 1)) : 0.0;
  const double se = std::sqrt(var / m);
  if (statistic == GrowthStatistic::rms) {
    p.value = std::sqrt(mean);
    p.std_error = p.value > 0 ? se / (2.0 * p.value) : 0.0;
  } else {
    p.value = mean;
    p.std_error = se;
  }
  return p;
}

}  // namespace

GrowthFit growth_exponent(std::span<const std::uint64_t> ns, const std::vector<std::vector<double>>& samples,
                          GrowthStatistic statistic, double q) {
  if (ns.size() < 3) throw HypothesisError("growth_exponent: fewer than 3 checkpoints");
  if (samples.size() != ns.size()) throw HypothesisError("growth_exponent: one sample per checkpoint required");
  if (statistic == GrowthStatistic::quantile && !(q > 0.0 && q < 1.0))
    throw HypothesisError("growth_exponent: quantile level must lie in (0, 1)");
  GrowthFit fit;
  std::vector<double> xs, ys, ws;
  bool any_zero_error = false;
  for (std::size_t k = 0; k < ns.size(); ++k) {
    if (samples[k].empty()) throw HypothesisError("growth_exponent: empty sample");
    const auto p = growth_point(ns[k], samples[k], statistic, q);
    if (!(p.value > 0.0)) throw HypothesisError("growth_exponent: statistic is zero at N = " + std::to_string(ns[k]));
    fit.points.push_back(p);
    xs.push_back(std::log(static_cast<double>(p.n)));
    ys.push_back(std::log(p.value));
    const double rel = p.std_error / p.value;
    any_zero_error = any_zero_error || !(rel > 0.0);
    ws.push_back(rel > 0.0 ? 1.0 / (rel * rel) : 0.0);
  }
  if (any_zero_error) ws.clear();
  const auto line = fit_line(xs, ys, ws);
  fit.slope = line.slope;
  fit.intercept = line.intercept;
  fit.residuals = line.residuals;
  if (ns.size() < 4 || static_cast<double>(ns.back()) < 100.0 * static_cast<double>(ns.front()))
    fit.warning = "fewer than 4 checkpoints or less than two decades of N";
  return fit;
}

GrowthFit growth_exponent(const TrialEnsemble& ensemble, GrowthStatistic statistic, double q) {
  if (!ensemble.complete()) throw HypothesisError("growth_exponent: ensemble has missing trials");
  std::vector<std::vector<double>> samples;
  for (std::size_t k = 0; k < ensemble.checkpoints.size(); ++k) samples.push_back(ensemble.values_at(k));
  return growth_exponent(ensemble.checkpoints, samples, statistic, q);
}

double rho_exponent(std::size_t d, double beta) {
  if (d < 1) throw HypothesisError("rho_exponent: d >= 1");
  if (!(beta >= 0.0 && beta < 1.0)) throw HypothesisError("rho_exponent: beta outside [0, 1)");
  const double dd = static_cast<double>(d);
  if (beta <= (dd - 1.0) / dd) return 0.5;
  return dd / 2.0 * (beta - 1.0) + 1.0;
}

double gamma_threshold(std::size_t d, double beta, double eps) {
  if (d < 1) throw HypothesisError("gamma_threshold: d >= 1");
  if (!(beta >= 0.0 && beta < 1.0)) throw HypothesisError("gamma_threshold: beta outside [0, 1)");
  if (!(eps > 0.0)) throw HypothesisError("gamma_threshold: eps > 0");
  return d == 1 ? 2.0 / beta : 1.0 / eps;
}

std::vector<ExceedanceRow> weak_lln_check(const TrialEnsemble& ensemble, double mean, double delta) {
  std::vector<ExceedanceRow> rows;
  for (std::size_t k = 0; k < ensemble.checkpoints.size(); ++k) {
    ExceedanceRow r{.n = ensemble.checkpoints[k], .trials = ensemble.size()};
    for (double t : ensemble.values_at(k))
      r.exceed += std::fabs(t / static_cast<double>(r.n) - mean) > delta;
    if (r.trials > 0) {
      r.frequency = static_cast<double>(r.exceed) / static_cast<double>(r.trials);
      r.std_error = std::sqrt(r.frequency * (1.0 - r.frequency) / static_cast<double>(r.trials));
    }
    rows.push_back(r);
  }
  return rows;
}

}  // namespace walklab
