#include "walklab/birkhoff.hpp"

#include <numeric>

#include "walklab/diagnostics.hpp"
#include "walklab/errors.hpp"
#include "walklab/parallel.hpp"
#include "walklab/trajectory.hpp"

namespace walklab {

std::vector<std::uint64_t> geometric_checkpoints(std::uint64_t n_max, double theta, std::uint64_t n_min) {
  if (!(theta > 1.0)) throw HypothesisError("checkpoints: theta must exceed 1");
  if (n_max < 1 || n_min > n_max) throw HypothesisError("checkpoints: empty range");
  std::vector<std::uint64_t> out;
  for (int k = 0;; ++k) {
    const double v = std::floor(std::pow(theta, k));
    if (v > static_cast<double>(n_max)) break;
    const auto n = static_cast<std::uint64_t>(v);
    if (n >= n_min && (out.empty() || out.back() != n)) out.push_back(n);
  }
  if (out.empty() || out.back() != n_max) out.push_back(n_max);
  return out;
}

std::vector<std::uint64_t> dyadic_checkpoints(unsigned k_min, unsigned k_max) {
  if (k_min > k_max || k_max > 62) throw HypothesisError("checkpoints: bad dyadic range");
  std::vector<std::uint64_t> out;
  for (unsigned k = k_min; k <= k_max; ++k) out.push_back(std::uint64_t{1} << k);
  return out;
}

BirkhoffAccumulator::BirkhoffAccumulator(std::span<const std::uint64_t> checkpoints)
    : checkpoints_(checkpoints.begin(), checkpoints.end()) {
  for (std::size_t k = 0; k < checkpoints_.size(); ++k)
    if (checkpoints_[k] == 0 || (k > 0 && checkpoints_[k] <= checkpoints_[k - 1]))
      throw HypothesisError("checkpoints must be positive and strictly increasing");
  records_.reserve(checkpoints_.size());
}

BirkhoffRun run_birkhoff(const StepLaw& law, const Observable& f, std::uint64_t seed,
                         std::span<const std::uint64_t> checkpoints, std::uint64_t trial) {
  if (law.dimension() != f.dimension())
    throw HypothesisError("run_birkhoff: dimension mismatch (law d=" + std::to_string(law.dimension()) +
                          ", observable d=" + std::to_string(f.dimension()) + ")");
  BirkhoffAccumulator acc(checkpoints);
  BirkhoffRun run;
  run.trial = trial;
  Walker w(law, seed, trial);
  while (!acc.done()) {
    const Site& x = w.step();
    const double v = f(x);
    run.max_increment = std::max(run.max_increment, std::fabs(v));
    acc.push(v, x);
  }
  run.records = acc.take_records();
  return run;
}

// ---- occupation ----

std::uint64_t OccupationTally::at(std::int64_t x) const noexcept {
  if (x < lo_) return 0;
  const auto idx = static_cast<std::size_t>(x - lo_);
  return idx < counts_.size() ? counts_[idx] : 0;
}

std::uint64_t OccupationTally::positive_total(std::int64_t n) const noexcept {
  std::uint64_t s = 0;
  const std::int64_t from = std::max<std::int64_t>(1, lo_);
  const std::int64_t to = std::min(n, hi());
  for (std::int64_t x = from; x <= to; ++x) s += counts_[static_cast<std::size_t>(x - lo_)];
  return s;
}

std::uint64_t OccupationTally::nonpositive_total() const noexcept {
  std::uint64_t s = below_;
  for (std::int64_t x = lo_; x <= std::min<std::int64_t>(0, hi()); ++x) s += counts_[static_cast<std::size_t>(x - lo_)];
  return s;
}

std::uint64_t OccupationTally::total() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), below_);
}

namespace {

void require_positive_drift(const StepLaw& law, const char* who) {
  if (law.dimension() != 1) throw HypothesisError(std::string(who) + ": d = 1 only");
  if (!(law.drift()[0] > 0.0))
    throw HypothesisError(std::string(who) + ": precondition violated, drift must be strictly positive");
}

std::uint64_t step_cap_for(std::int64_t level, double v) {
  return static_cast<std::uint64_t>(20.0 * static_cast<double>(std::max<std::int64_t>(level, 1)) / v) + 100'000;
}

}  // namespace

ExitMargin calibrate_exit_margin(const StepLaw& law, std::uint64_t seed, double tolerance, std::uint64_t trials,
                                 unsigned threads) {
  require_positive_drift(law, "calibrate_exit_margin");
  MinTailOptions opt;
  opt.safety_factor = 2.0;
  opt.threads = threads;
  for (std::int64_t m = 16; m <= (std::int64_t{1} << 24); m *= 2) {
    const std::vector<std::int64_t> ms{m};
    const auto rep = min_tail_report(law, ms, trials, seed, opt);
    if (rep.rows[0].probability < tolerance) return {m, rep.rows[0].probability, rep.rows[0].std_error};
  }
  throw BudgetError("calibrate_exit_margin: return probability stays above tolerance up to H = 2^24");
}

OccupationResult run_occupation(const StepLaw& law, const Observable& f, std::uint64_t seed, std::uint64_t n,
                                const OccupationOptions& options, std::uint64_t trial) {
  require_positive_drift(law, "run_occupation");
  if (f.dimension() != 1) throw HypothesisError("run_occupation: observable must be one-dimensional");
  if (!(options.epsilon > 0.0 && options.epsilon < 1.0)) throw HypothesisError("run_occupation: epsilon in (0, 1)");
  const double v = law.drift()[0];
  const std::int64_t margin =
      options.exit_margin > 0 ? options.exit_margin : calibrate_exit_margin(law, seed, options.return_tolerance).margin;
  const double nv = static_cast<double>(n) * v;
  const auto lower = static_cast<std::int64_t>(std::floor(nv * (1.0 - options.epsilon)));
  const auto upper = static_cast<std::int64_t>(std::ceil(nv * (1.0 + options.epsilon)));
  const std::int64_t top = std::max(static_cast<std::int64_t>(n), upper);
  const std::int64_t exit_level = top + margin;
  const std::uint64_t cap = n + step_cap_for(exit_level, v);

  OccupationResult r{.trial = trial, .n = n, .tally = OccupationTally(options.window_lo)};
  Walker w(law, seed, trial);
  r.tally.visit(0);
  double t = 0.0, comp = 0.0;
  std::int64_t max_before = 0;
  std::int64_t min_after = std::numeric_limits<std::int64_t>::max();
  for (std::uint64_t k = 1;; ++k) {
    const std::int64_t x = w.step()[0];
    if (k <= n) {
      const double fx = f(Site{x});
      const double s = t + fx;
      comp += std::fabs(t) >= std::fabs(fx) ? (t - s) + fx : (fx - s) + t;
      t = s;
      max_before = std::max(max_before, x);
    } else {
      min_after = std::min(min_after, x);
    }
    if (k >= n && x > exit_level) break;
    if (k >= cap) {
      r.censored = true;
      break;
    }
    r.tally.visit(x);
  }
  r.steps = w.time();
  r.birkhoff = t + comp;

  long double red = 0.0L, red_lower = 0.0L;
  for (std::int64_t x = 1; x <= static_cast<std::int64_t>(n) || x <= lower; ++x) {
    const auto l = r.tally.at(x);
    if (l == 0) continue;
    const long double term = static_cast<long double>(l) * f(Site{x});
    if (x <= static_cast<std::int64_t>(n)) red += term;
    if (x <= lower) red_lower += term;
  }
  r.reduced = static_cast<double>(red);
  r.reduced_lower = static_cast<double>(red_lower);
  r.local_time = r.tally.positive_total(static_cast<std::int64_t>(n));
  r.negative_time = r.tally.nonpositive_total();
  r.gap = std::fabs(r.birkhoff - r.reduced_lower);
  r.gap_bound = f.bound() * static_cast<double>(r.negative_time + r.tally.positive_total(upper) -
                                                r.tally.positive_total(lower));
  r.premises_hold = !r.censored && max_before <= upper && min_after > lower;
  return r;
}

LocalTimeSample sample_local_time(const StepLaw& law, std::int64_t x, std::uint64_t trials, std::uint64_t seed,
                                  std::int64_t exit_margin, unsigned threads) {
  require_positive_drift(law, "sample_local_time");
  if (trials < 2) throw HypothesisError("sample_local_time: need at least two trials");
  if (exit_margin < 1) throw HypothesisError("sample_local_time: exit margin must be positive");
  const double v = law.drift()[0];
  const std::int64_t exit_level = std::max<std::int64_t>(x, 0) + exit_margin;
  const std::uint64_t cap = step_cap_for(exit_level, v);
  LocalTimeSample out;
  out.site = x;
  out.values.assign(trials, 0);
  parallel_for(trials, threads, [&](std::size_t t) {
    Walker w(law, seed, t);
    std::uint64_t count = x == 0 ? 1 : 0;
    for (std::uint64_t k = 0; k < cap; ++k) {
      const std::int64_t s = w.step()[0];
      if (s > exit_level) break;
      count += s == x;
    }
    out.values[t] = count;
  });
  long double sum = 0, sum2 = 0;
  std::uint64_t zeros = 0;
  for (auto l : out.values) {
    sum += l;
    sum2 += static_cast<long double>(l) * l;
    zeros += l == 0;
  }
  const auto m = static_cast<long double>(trials);
  out.mean = static_cast<double>(sum / m);
  const long double var = (sum2 - sum * sum / m) / (m - 1);
  out.std_error = static_cast<double>(std::sqrt(std::max(var, 0.0L) / m));
  out.p_zero = static_cast<double>(zeros) / static_cast<double>(trials);
  out.p_zero_std_error = std::sqrt(out.p_zero * (1.0 - out.p_zero) / static_cast<double>(trials));
  return out;
}

std::pair<double, double> covariance_jackknife(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  if (n != b.size() || n < 3) throw HypothesisError("covariance: need two samples of equal size >= 3");
  long double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  // Centered sums keep the leave-one-out updates free of cancellation.
  long double sa = 0, sb = 0, sab = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long double x = a[i] - ma, y = b[i] - mb;
    sa += x;
    sb += y;
    sab += x * y;
  }
  const auto nn = static_cast<long double>(n);
  const long double cov = (sab - sa * sb / nn) / (nn - 1);
  std::vector<long double> loo(n);
  long double loo_mean = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long double x = a[i] - ma, y = b[i] - mb;
    loo[i] = ((sab - x * y) - (sa - x) * (sb - y) / (nn - 1)) / (nn - 2);
    loo_mean += loo[i];
  }
  loo_mean /= nn;
  long double ss = 0;
  for (auto c : loo) ss += (c - loo_mean) * (c - loo_mean);
  return {static_cast<double>(cov), static_cast<double>(std::sqrt((nn - 1) / nn * ss))};
}

OccupationCovariance occupation_covariance(const StepLaw& law, std::int64_t n1, std::int64_t n2, std::uint64_t trials,
                                           std::uint64_t seed, std::int64_t exit_margin, unsigned threads) {
  require_positive_drift(law, "occupation_covariance");
  if (!(0 < n1 && n1 < n2)) throw HypothesisError("occupation_covariance: need 0 < n1 < n2");
  if (trials < 1000) throw HypothesisError("occupation_covariance: need at least 1000 trials");
  if (exit_margin < 1) throw HypothesisError("occupation_covariance: exit margin must be positive");
  const double v = law.drift()[0];
  const std::int64_t exit_level = n2 + exit_margin;
  const std::uint64_t cap = step_cap_for(exit_level, v);
  OccupationCovariance out;
  out.n1 = n1;
  out.n2 = n2;
  out.trials = trials;
  out.l1.assign(trials, 0);
  out.l2.assign(trials, 0);
  parallel_for(trials, threads, [&](std::size_t t) {
    Walker w(law, seed, t);
    std::uint64_t c1 = 0, c2 = 0;
    for (std::uint64_t k = 0; k < cap; ++k) {
      const std::int64_t s = w.step()[0];
      if (s > exit_level) break;
      c1 += s == n1;
      c2 += s == n2;
    }
    out.l1[t] = c1;
    out.l2[t] = c2;
  });
  std::vector<double> a(out.l1.begin(), out.l1.end()), b(out.l2.begin(), out.l2.end());
  out.mean1 = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(trials);
  out.mean2 = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(trials);
  std::tie(out.covariance, out.std_error) = covariance_jackknife(a, b);
  RandomStream rng(seed, 0, streams::kShuffle);
  for (std::size_t i = b.size(); i > 1; --i) std::swap(b[i - 1], b[rng.below(i)]);
  std::tie(out.shuffled_covariance, out.shuffled_std_error) = covariance_jackknife(a, b);
  return out;
}

// ---- events ----

EventCheck ocean_event_check(const OceanSchedule& schedule, const Observable& f, std::size_t n,
                             std::span<const Site> positions) {
  if (n < 1 || n > schedule.blocks()) throw HypothesisError("ocean_event_check: n outside the schedule");
  EventCheck out;
  out.n = n;
  out.t = schedule.t(n);
  if (out.t == OceanSchedule::kSaturated || positions.size() < 3 * out.t + 1)
    throw HypothesisError("ocean_event_check: incomplete segment, need positions S_0..S_{3t} with t = " +
                          std::to_string(out.t));
  const std::size_t d = f.dimension();
  const std::int64_t lo = schedule.interval_lo(n), hi = schedule.interval_hi(n), w = schedule.half_width(n);
  out.event = true;
  for (std::uint64_t k = out.t; k <= 3 * out.t && out.event; ++k) {
    const Site& x = positions[k];
    out.event = x[0] >= lo && x[0] <= hi;
    for (std::size_t i = 1; i < d && out.event; ++i) out.event = x[i] >= -w && x[i] <= w;
  }
  long double sum = 0.0L;
  for (std::uint64_t k = 1; k <= 3 * out.t; ++k) sum += f(positions[k]);
  out.birkhoff = static_cast<double>(sum);
  if (out.event) {
    out.implication_checked = true;
    const auto t = static_cast<double>(out.t);
    out.implication_holds = n % 2 == 0 ? out.birkhoff >= 2.0 * t : out.birkhoff <= t;
  }
  return out;
}

namespace {

std::uint64_t event_time(const OceanSchedule& schedule, std::size_t n) {
  const std::uint64_t t = schedule.t(n);
  if (t == OceanSchedule::kSaturated || t > 50'000'000)
    throw BudgetError("event path: t_n = " + std::to_string(t) + " is too long to materialize");
  return t;
}

void require_nonempty_interval(const OceanSchedule& schedule, std::size_t n) {
  if (schedule.interval_lo(n) > schedule.interval_hi(n))
    throw HypothesisError("event path: I_" + std::to_string(n) + " contains no lattice site");
}

}  // namespace

std::vector<Site> constant_event_path(const OceanSchedule& schedule, std::size_t n, std::size_t dim) {
  const std::uint64_t t = event_time(schedule, n);
  require_nonempty_interval(schedule, n);
  std::vector<Site> path(3 * t + 1);
  (void)dim;
  for (std::uint64_t k = t; k <= 3 * t; ++k) path[k][0] = schedule.twice_c(n) / 2;
  return path;
}

std::vector<Site> exit_event_path(const OceanSchedule& schedule, std::size_t n, std::size_t dim, std::uint64_t seed) {
  auto path = constant_event_path(schedule, n, dim);
  const std::uint64_t t = schedule.t(n);
  RandomStream rng(seed, n, streams::kEvents);
  path[t + rng.below(2 * t + 1)][0] = schedule.interval_hi(n) + 1;
  return path;
}

std::vector<Site> tube_event_path(const StepLaw& law, const OceanSchedule& schedule, std::size_t n, std::uint64_t seed,
                                  std::uint64_t trial) {
  const std::uint64_t t = event_time(schedule, n);
  require_nonempty_interval(schedule, n);
  const std::size_t d = law.dimension();
  const std::int64_t lo = schedule.interval_lo(n), hi = schedule.interval_hi(n), w = schedule.half_width(n);
  std::vector<Site> path(3 * t + 1);
  Walker walker(law, seed, trial);
  for (std::uint64_t k = 1; k < t; ++k) path[k] = walker.step();
  RandomStream rng(seed, trial, streams::kEvents);
  Site x{};
  x[0] = schedule.twice_c(n) / 2;
  for (std::uint64_t k = t; k <= 3 * t; ++k) {
    if (k > t) {
      const Site y = x + law.sample(rng);
      bool inside = y[0] >= lo && y[0] <= hi;
      for (std::size_t i = 1; i < d && inside; ++i) inside = y[i] >= -w && y[i] <= w;
      if (inside) x = y;
    }
    path[k] = x;
  }
  return path;
}

std::vector<Site> free_event_path(const StepLaw& law, const OceanSchedule& schedule, std::size_t n, std::uint64_t seed,
                                  std::uint64_t trial) {
  const std::uint64_t t = event_time(schedule, n);
  std::vector<Site> path(3 * t + 1);
  Walker walker(law, seed, trial);
  for (std::uint64_t k = 1; k <= 3 * t; ++k) path[k] = walker.step();
  return path;
}

}  // namespace walklab
