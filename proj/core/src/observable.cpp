#include "walklab/observable.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <sstream>

#include "walklab/errors.hpp"
#include "walklab/format.hpp"
#include "walklab/rng.hpp"

namespace walklab {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
  const std::int64_t q = a / b;
  return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

std::int64_t floor_mod(std::int64_t a, std::int64_t b) noexcept { return a - floor_div(a, b) * b; }

// Neumaier summation in long double.
struct CompensatedSum {
  long double sum = 0.0L;
  long double comp = 0.0L;
  void add(long double v) noexcept {
    const long double t = sum + v;
    comp += std::fabs(sum) >= std::fabs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  long double value() const noexcept { return sum + comp; }
};

void require_dim(std::size_t dim) {
  if (dim < 1 || dim > kMaxDim)
    throw HypothesisError("observable dimension must lie in [1, " + std::to_string(kMaxDim) + "]");
}

// ---- periodic ----

class PeriodicImpl final : public ObservableImpl {
 public:
  PeriodicImpl(std::size_t dim, const Site& period, std::vector<double> table)
      : dim_(dim), period_(period), table_(std::move(table)) {}

  double eval(const Site& x) const override { return table_[index(x)]; }

  std::optional<long double> box_sum(const Site& lo, const Site& hi) const override {
    // Count the sites of each residue class per axis, then weight the table.
    std::array<std::vector<long double>, kMaxDim> counts;
    for (std::size_t i = 0; i < dim_; ++i) {
      counts[i].resize(static_cast<std::size_t>(period_[i]));
      for (std::int64_t r = 0; r < period_[i]; ++r)
        counts[i][r] = static_cast<long double>(floor_div(hi[i] - r, period_[i]) - floor_div(lo[i] - 1 - r, period_[i]));
    }
    CompensatedSum acc;
    std::array<std::size_t, kMaxDim> r{};
    for (std::size_t k = 0; k < table_.size(); ++k) {
      long double w = table_[k];
      for (std::size_t i = 0; i < dim_; ++i) w *= counts[i][r[i]];
      acc.add(w);
      for (std::size_t i = dim_; i-- > 0;) {
        if (++r[i] < static_cast<std::size_t>(period_[i])) break;
        r[i] = 0;
      }
    }
    return acc.value();
  }

 private:
  std::size_t index(const Site& x) const noexcept {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < dim_; ++i)
      idx = idx * static_cast<std::size_t>(period_[i]) + static_cast<std::size_t>(floor_mod(x[i], period_[i]));
    return idx;
  }

  std::size_t dim_;
  Site period_;
  std::vector<double> table_;
};

// ---- quasi-periodic ----

class QuasiPeriodicImpl final : public ObservableImpl {
 public:
  explicit QuasiPeriodicImpl(QuasiPeriodicSpec spec) : spec_(std::move(spec)) {}

  double eval(const Site& x) const override {
    std::array<long double, kMaxDim> theta = spec_.phase;
    for (std::size_t j = 0; j < spec_.dim; ++j)
      for (std::size_t k = 0; k < spec_.dim; ++k) theta[k] += static_cast<long double>(x[j]) * spec_.rotation[j][k];
    double out = 0.0;
    for (const auto& term : spec_.profile) {
      long double s = 0.0L;
      for (std::size_t k = 0; k < spec_.dim; ++k) s += static_cast<long double>(term.m[k]) * theta[k];
      s -= std::floor(s);
      const double angle = static_cast<double>(2.0L * std::numbers::pi_v<long double> * s);
      out += term.cos_coef * std::cos(angle) + term.sin_coef * std::sin(angle);
    }
    return out;
  }

 private:
  QuasiPeriodicSpec spec_;
};

// ---- scenery ----

class SceneryImpl final : public ObservableImpl {
 public:
  SceneryImpl(std::size_t dim, std::uint64_t seed) : dim_(dim), key_(splitmix64(seed ^ 0x5CE4E7F1E1DULL)) {}

  double eval(const Site& x) const override {
    std::uint64_t h = key_;
    for (std::size_t i = 0; i < dim_; ++i) h = splitmix64(h ^ static_cast<std::uint64_t>(x[i]));
    return (h >> 63) ? 1.0 : -1.0;
  }

 private:
  std::size_t dim_;
  std::uint64_t key_;
};

// ---- heaviside ----

class HeavisideImpl final : public ObservableImpl {
 public:
  double eval(const Site& x) const override { return x[0] > 0 ? 1.0 : 0.0; }
  std::optional<long double> box_sum(const Site& lo, const Site& hi) const override {
    const std::int64_t from = std::max<std::int64_t>(lo[0], 1);
    return hi[0] >= from ? static_cast<long double>(hi[0] - from + 1) : 0.0L;
  }
};

class AffineImpl final : public ObservableImpl {
 public:
  AffineImpl(Observable inner, double a, double c) : inner_(std::move(inner)), a_(a), c_(c) {}
  double eval(const Site& x) const override { return a_ * inner_(x) + c_; }
  std::optional<long double> box_sum(const Site& lo, const Site& hi) const override {
    const auto s = inner_.impl().box_sum(lo, hi);
    if (!s) return std::nullopt;
    return a_ * *s + c_ * box_volume(inner_.dimension(), lo, hi);
  }

 private:
  Observable inner_;
  double a_, c_;
};

// ---- ocean ----

class OceanImpl final : public ObservableImpl {
 public:
  explicit OceanImpl(std::shared_ptr<const OceanSchedule> s) : s_(std::move(s)) {}
  double eval(const Site& x) const override { return s_->value(x[0] < 0 ? -x[0] : x[0]); }
  std::optional<long double> box_sum(const Site& lo, const Site& hi) const override {
    const std::int64_t a = lo[0], b = hi[0];
    if (a > b) return 0.0L;
    std::uint64_t ones;
    if (a > 0)
      ones = s_->prefix_ones(b) - s_->prefix_ones(a - 1);
    else if (b < 0)
      ones = s_->prefix_ones(-a) - s_->prefix_ones(-b - 1);
    else
      ones = s_->prefix_ones(b) + s_->prefix_ones(-a);
    return static_cast<long double>(ones);
  }

 private:
  std::shared_ptr<const OceanSchedule> s_;
};

class OceanMultiImpl final : public ObservableImpl {
 public:
  OceanMultiImpl(std::size_t dim, std::shared_ptr<const OceanSchedule> s) : dim_(dim), s_(std::move(s)) {}
  double eval(const Site& x) const override {
    const std::int64_t r = x[0] < 0 ? -x[0] : x[0];
    for (std::size_t i = 1; i < dim_; ++i)
      if ((x[i] < 0 ? -x[i] : x[i]) > r) return 0.5;
    return s_->value(r);
  }

 private:
  std::size_t dim_;
  std::shared_ptr<const OceanSchedule> s_;
};

// ---- table ----

class TableImpl final : public ObservableImpl {
 public:
  TableImpl(std::map<Site, double> values, double fallback) : values_(std::move(values)), fallback_(fallback) {}
  double eval(const Site& x) const override {
    const auto it = values_.find(x);
    return it == values_.end() ? fallback_ : it->second;
  }

 private:
  std::map<Site, double> values_;
  double fallback_;
};

std::int64_t a_rule_value(const std::string& rule, std::int64_t n) {
  if (rule == "log") {
    std::int64_t lg = 0;
    while ((std::int64_t{2} << lg) <= n + 1) ++lg;
    return std::min<std::int64_t>(n, 1 + lg);
  }
  if (rule == "sqrt") {
    auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return std::max<std::int64_t>(1, r);
  }
  throw HypothesisError("ocean: unknown a_rule '" + rule + "' (expected log or sqrt)");
}

}  // namespace

std::optional<long double> ObservableImpl::box_sum(const Site&, const Site&) const { return std::nullopt; }

std::string_view to_string(ObservableKind kind) noexcept {
  switch (kind) {
    case ObservableKind::periodic: return "periodic";
    case ObservableKind::quasiperiodic: return "quasiperiodic";
    case ObservableKind::scenery: return "scenery";
    case ObservableKind::heaviside: return "heaviside";
    case ObservableKind::ocean: return "ocean";
    case ObservableKind::ocean_multidim: return "ocean_multidim";
    case ObservableKind::table: return "table";
  }
  return "unknown";
}

Observable make_periodic(std::size_t dim, const Site& period, std::vector<double> table) {
  require_dim(dim);
  std::size_t cells = 1;
  for (std::size_t i = 0; i < dim; ++i) {
    if (period[i] < 1) throw HypothesisError("periodic: empty period");
    cells *= static_cast<std::size_t>(period[i]);
  }
  if (table.size() != cells)
    throw HypothesisError("periodic: table has " + std::to_string(table.size()) + " entries, period box has " +
                          std::to_string(cells));
  Site p{};
  for (std::size_t i = 0; i < dim; ++i) p[i] = period[i];
  ObservableInfo info;
  info.dimension = dim;
  info.kind = ObservableKind::periodic;
  CompensatedSum mean;
  std::string desc = "periodic(period=" + to_string(p, dim) + ",table=[";
  for (std::size_t k = 0; k < table.size(); ++k) {
    info.bound = std::max(info.bound, std::fabs(table[k]));
    mean.add(table[k]);
    desc += (k ? "," : "") + format_double(table[k]);
  }
  info.mean = static_cast<double>(mean.value() / static_cast<long double>(cells));
  if (dim == 1) info.mean_plus = info.mean_minus = info.mean;
  info.descriptor = desc + "])";
  return Observable(std::make_shared<PeriodicImpl>(dim, p, std::move(table)), std::move(info));
}

Observable make_constant(std::size_t dim, double c) {
  Site ones{};
  for (std::size_t i = 0; i < dim; ++i) ones[i] = 1;
  return make_periodic(dim, ones, {c}).with_descriptor("constant(" + format_double(c) + ")");
}

Observable make_parity(std::size_t dim) {
  require_dim(dim);
  Site period{};
  for (std::size_t i = 0; i < dim; ++i) period[i] = 2;
  std::vector<double> table(std::size_t{1} << dim);
  for (std::size_t k = 0; k < table.size(); ++k) table[k] = (std::popcount(k) % 2) ? -1.0 : 1.0;
  return make_periodic(dim, period, std::move(table)).with_descriptor("parity(d=" + std::to_string(dim) + ")");
}

Observable make_quasiperiodic(const QuasiPeriodicSpec& spec) {
  require_dim(spec.dim);
  if (spec.profile.empty()) throw HypothesisError("quasiperiodic: empty profile");
  ObservableInfo info;
  info.dimension = spec.dim;
  info.kind = ObservableKind::quasiperiodic;
  info.mean = 0.0;
  std::string desc = "quasiperiodic(profile=[";
  for (std::size_t t = 0; t < spec.profile.size(); ++t) {
    const auto& term = spec.profile[t];
    bool zero = true;
    for (std::size_t k = 0; k < kMaxDim; ++k) {
      if (k >= spec.dim && term.m[k] != 0) throw HypothesisError("quasiperiodic: frequency outside the torus");
      zero = zero && term.m[k] == 0;
    }
    if (zero) throw HypothesisError("quasiperiodic: profile must have no constant term");
    info.bound += std::hypot(term.cos_coef, term.sin_coef);
    desc += (t ? ";" : "") + to_string(term.m, spec.dim) + ":" + format_double(term.cos_coef) + "," +
            format_double(term.sin_coef);
  }
  desc += "],rotation=[";
  for (std::size_t j = 0; j < spec.dim; ++j)
    for (std::size_t k = 0; k < spec.dim; ++k)
      desc += (j || k ? "," : "") + format_double(static_cast<double>(spec.rotation[j][k]));
  desc += "],phase=[";
  for (std::size_t k = 0; k < spec.dim; ++k) desc += (k ? "," : "") + format_double(static_cast<double>(spec.phase[k]));
  info.descriptor = desc + "])";
  if (spec.dim == 1) info.mean_plus = info.mean_minus = 0.0;
  return Observable(std::make_shared<QuasiPeriodicImpl>(spec), std::move(info));
}

QuasiPeriodicSpec golden_cos_spec(std::size_t dim, long double omega) {
  require_dim(dim);
  QuasiPeriodicSpec spec;
  spec.dim = dim;
  TrigTerm term;
  term.m[0] = 1;
  term.cos_coef = 1.0;
  spec.profile.push_back(term);
  if (dim == 1) {
    spec.rotation[0][0] = (std::sqrt(5.0L) - 1.0L) / 2.0L;
  } else {
    static constexpr int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
    for (std::size_t j = 0; j < dim; ++j)
      for (std::size_t k = 0; k < dim; ++k) {
        const long double r = std::sqrt(static_cast<long double>(primes[j * dim + k]));
        spec.rotation[j][k] = r - std::floor(r);
      }
  }
  for (std::size_t k = 0; k < dim; ++k) spec.phase[k] = omega;
  return spec;
}

double diophantine_quality(std::span<const long double> alpha, std::int64_t max_norm, double sigma) {
  const std::size_t r = alpha.size();
  if (r < 1 || r > kMaxDim) throw HypothesisError("diophantine_quality: vector length must lie in [1, 4]");
  if (max_norm < 1) throw HypothesisError("diophantine_quality: M must be at least 1");
  const long double side = 2.0L * max_norm + 1.0L;
  if (std::pow(side, static_cast<long double>(r)) > 4e9L)
    throw BudgetError("diophantine_quality: lattice ball too large for an exhaustive scan");
  const long double m2max = static_cast<long double>(max_norm) * max_norm;
  double best = std::numeric_limits<double>::infinity();
  std::array<std::int64_t, kMaxDim> m{};
  for (std::size_t k = 0; k < r; ++k) m[k] = -max_norm;
  for (;;) {
    long double norm2 = 0.0L;
    for (std::size_t k = 0; k < r; ++k) norm2 += static_cast<long double>(m[k]) * m[k];
    if (norm2 > 0 && norm2 <= m2max) {
      long double s = 0.0L;
      for (std::size_t k = 0; k < r; ++k) s += static_cast<long double>(m[k]) * alpha[k];
      s -= std::floor(s);
      const double gap = static_cast<double>(2.0L * std::fabs(std::sin(std::numbers::pi_v<long double> * s)));
      best = std::min(best, gap * std::pow(static_cast<double>(std::sqrt(norm2)), sigma));
    }
    std::size_t k = r;
    while (k-- > 0) {
      if (++m[k] <= max_norm) break;
      m[k] = -max_norm;
    }
    if (k == static_cast<std::size_t>(-1)) break;
  }
  return best;
}

Observable make_scenery(std::size_t dim, std::uint64_t seed) {
  require_dim(dim);
  ObservableInfo info;
  info.dimension = dim;
  info.kind = ObservableKind::scenery;
  info.bound = 1.0;
  info.mean = 0.0;
  if (dim == 1) info.mean_plus = info.mean_minus = 0.0;
  info.descriptor = "scenery(d=" + std::to_string(dim) + ",seed=" + std::to_string(seed) + ")";
  return Observable(std::make_shared<SceneryImpl>(dim, seed), std::move(info));
}

Observable make_heaviside() {
  ObservableInfo info;
  info.dimension = 1;
  info.kind = ObservableKind::heaviside;
  info.bound = 1.0;
  info.mean_plus = 1.0;
  info.mean_minus = 0.0;
  info.descriptor = "heaviside";
  return Observable(std::make_shared<HeavisideImpl>(), std::move(info));
}

Observable affine(const Observable& f, double a, double c) {
  ObservableInfo info = f.info();
  info.bound = std::fabs(a) * f.bound() + std::fabs(c);
  auto map = [&](const std::optional<double>& m) -> std::optional<double> {
    if (!m) return std::nullopt;
    return a * *m + c;
  };
  info.mean = map(f.nominal_mean());
  info.mean_plus = map(f.mean_plus());
  info.mean_minus = map(f.mean_minus());
  info.descriptor = format_double(a) + "*" + f.descriptor() + "+" + format_double(c);
  return Observable(std::make_shared<AffineImpl>(f, a, c), std::move(info));
}

// ---- ocean schedule ----

OceanSchedule::OceanSchedule(double alpha, std::int64_t b1, std::string a_rule) : alpha_(alpha), a_rule_(std::move(a_rule)) {
  if (!(alpha > 0.0 && alpha <= 2.0) || alpha == 1.0)
    throw HypothesisError("ocean: alpha must lie in (0, 2] with alpha = 1 excluded");
  if (b1 < 2) throw HypothesisError("ocean: b1 must be at least 2");
  // b_{n+1} stays below 2^62 so that b_n + b_{n+1} never overflows.
  constexpr std::int64_t limit = std::int64_t{1} << 62;
  if (b1 >= limit) throw BudgetError("ocean: b1 beyond the 64-bit schedule");
  b_.push_back(b1);
  ones_ = {0, static_cast<std::uint64_t>(b1 - 1)};
  for (std::int64_t n = 1;; ++n) {
    const std::int64_t an = a_rule_value(a_rule_, n);
    if (an < 1) throw HypothesisError("ocean: a_rule produced a_n < 1");
    if (!a_.empty() && an - a_.back() != 0 && an - a_.back() != 1)
      throw HypothesisError("ocean: a_rule increments must lie in {0, 1}");
    const std::int64_t bn = b_.back();
    const std::int64_t step = bn / an;
    if (step < 1) throw HypothesisError("ocean: schedule stalls (b_n < a_n)");
    if (bn > limit - step) break;
    a_.push_back(an);
    b_.push_back(bn + step);
    ones_.push_back(ones_.back() + (n % 2 == 0 ? static_cast<std::uint64_t>(step) : 0));
  }
  if (a_.empty()) throw BudgetError("ocean: no complete block fits in 64 bits");
}

std::int64_t OceanSchedule::interval_lo(std::size_t n) const { return (twice_c(n) - 2 * half_width(n) + 1) / 2; }

std::int64_t OceanSchedule::interval_hi(std::size_t n) const { return (twice_c(n) + 2 * half_width(n)) / 2; }

std::uint64_t OceanSchedule::t(std::size_t n) const {
  const long double v = std::floor(std::pow(static_cast<long double>(twice_c(n)) / 2.0L, static_cast<long double>(alpha_)));
  if (v >= 0x1.0p63L) return kSaturated;
  return static_cast<std::uint64_t>(v);
}

bool OceanSchedule::bounds_hold(std::size_t n) const {
  const auto nn = static_cast<std::int64_t>(n);
  const bool pow_ok = n + 1 >= 63 || b(n) < (std::int64_t{1} << (n + 1));
  return a(n) <= nn && nn < b(n) && b(n) < b(n + 1) && pow_ok;
}

std::size_t OceanSchedule::block_of(std::int64_t x) const {
  if (x < 1) throw HypothesisError("ocean: block_of needs x >= 1");
  if (x > max_abs())
    throw BudgetError("ocean: |x| = " + std::to_string(x) + " needs b_n beyond the 64-bit schedule (max " +
                      std::to_string(max_abs()) + ")");
  return static_cast<std::size_t>(std::upper_bound(b_.begin(), b_.end(), x) - b_.begin());
}

double OceanSchedule::value(std::int64_t x) const {
  if (x == 0) return 0.0;
  return block_of(x) % 2 == 0 ? 1.0 : 0.0;
}

std::uint64_t OceanSchedule::prefix_ones(std::int64_t x) const {
  if (x <= 0) return 0;
  const std::size_t n = block_of(x);
  if (n == 0) return static_cast<std::uint64_t>(x);
  return ones_[n] + (n % 2 == 0 ? static_cast<std::uint64_t>(x - b(n) + 1) : 0);
}

Observable make_ocean(std::shared_ptr<const OceanSchedule> schedule) {
  ObservableInfo info;
  info.dimension = 1;
  info.kind = ObservableKind::ocean;
  info.bound = 1.0;
  info.mean = info.mean_plus = info.mean_minus = 0.5;
  info.descriptor = "ocean(alpha=" + format_double(schedule->alpha()) + ",b1=" + std::to_string(schedule->b(1)) +
                    ",a_rule=" + schedule->a_rule() + ")";
  return Observable(std::make_shared<OceanImpl>(std::move(schedule)), std::move(info));
}

Observable make_ocean_multidim(std::size_t dim, std::shared_ptr<const OceanSchedule> schedule) {
  if (dim < 2 || dim > kMaxDim) throw HypothesisError("ocean_multidim: d must lie in [2, 4]");
  ObservableInfo info;
  info.dimension = dim;
  info.kind = ObservableKind::ocean_multidim;
  info.bound = 1.0;
  info.mean = 0.5;
  info.descriptor = "ocean_multidim(d=" + std::to_string(dim) + ",alpha=" + format_double(schedule->alpha()) +
                    ",b1=" + std::to_string(schedule->b(1)) + ",a_rule=" + schedule->a_rule() + ")";
  return Observable(std::make_shared<OceanMultiImpl>(dim, std::move(schedule)), std::move(info));
}

// ---- table ----

Observable make_table(std::size_t dim, std::map<Site, double> values, double fallback) {
  require_dim(dim);
  ObservableInfo info;
  info.dimension = dim;
  info.kind = ObservableKind::table;
  info.bound = std::fabs(fallback);
  for (const auto& [x, v] : values) {
    for (std::size_t i = dim; i < kMaxDim; ++i)
      if (x[i] != 0) throw HypothesisError("table: site " + to_string(x, kMaxDim) + " has too many coordinates");
    if (!std::isfinite(v)) throw HypothesisError("table: non-finite value at " + to_string(x, dim));
    info.bound = std::max(info.bound, std::fabs(v));
  }
  info.descriptor = "table(d=" + std::to_string(dim) + ",sites=" + std::to_string(values.size()) +
                    ",fallback=" + format_double(fallback) + ")";
  return Observable(std::make_shared<TableImpl>(std::move(values), fallback), std::move(info));
}

std::map<Site, double> read_table_csv(std::istream& in, std::size_t dim) {
  require_dim(dim);
  std::map<Site, double> out;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    auto parse_error = [&] { return HypothesisError("table csv line " + std::to_string(line_no) + ": expected " +
                                                    std::to_string(dim) + " integers and a value"); };
    if (cells.size() != dim + 1) throw parse_error();
    Site x{};
    bool ok = true;
    for (std::size_t i = 0; i < dim && ok; ++i) {
      const auto* b = cells[i].data();
      const auto res = std::from_chars(b, b + cells[i].size(), x[i]);
      ok = res.ec == std::errc{} && res.ptr == b + cells[i].size();
    }
    double v = 0.0;
    if (ok) {
      const auto* b = cells[dim].data();
      const auto res = std::from_chars(b, b + cells[dim].size(), v);
      ok = res.ec == std::errc{} && res.ptr == b + cells[dim].size();
    }
    if (!ok) {
      if (!header_seen && out.empty()) {
        header_seen = true;
        continue;
      }
      throw parse_error();
    }
    if (!out.emplace(x, v).second) throw HypothesisError("table csv: duplicate site " + to_string(x, dim));
  }
  return out;
}

// ---- cube averages ----

std::pair<Site, Site> CubeSpec::box() const {
  Site lo{}, hi{};
  for (std::size_t i = 0; i < dim; ++i) {
    if (a[i] > b[i]) throw HypothesisError("cube: a_i > b_i on axis " + std::to_string(i));
    lo[i] = center[i] + static_cast<std::int64_t>(std::ceil(a[i] * scale));
    hi[i] = center[i] + static_cast<std::int64_t>(std::floor(b[i] * scale));
  }
  return {lo, hi};
}

long double box_volume(std::size_t dim, const Site& lo, const Site& hi) {
  long double v = 1.0L;
  for (std::size_t i = 0; i < dim; ++i) {
    if (hi[i] < lo[i]) return 0.0L;
    v *= static_cast<long double>(hi[i] - lo[i]) + 1.0L;
  }
  return v;
}

long double box_sum_direct(const Observable& f, const Site& lo, const Site& hi, std::uint64_t budget) {
  const std::size_t d = f.dimension();
  const long double volume = box_volume(d, lo, hi);
  if (volume > static_cast<long double>(budget))
    throw BudgetError("cube average: |V| = " + format_double(static_cast<double>(volume)) +
                      " exceeds the evaluation budget " + std::to_string(budget));
  CompensatedSum acc;
  if (volume == 0.0L) return 0.0L;
  Site x = lo;
  for (;;) {
    acc.add(f(x));
    std::size_t i = d;
    while (i-- > 0) {
      if (x[i] < hi[i]) {
        ++x[i];
        break;
      }
      x[i] = lo[i];
    }
    if (i == static_cast<std::size_t>(-1)) break;
  }
  return acc.value();
}

double box_average(const Observable& f, const Site& lo, const Site& hi, std::uint64_t budget) {
  const long double volume = box_volume(f.dimension(), lo, hi);
  if (volume == 0.0L) throw HypothesisError("cube average: empty box");
  if (const auto s = f.impl().box_sum(lo, hi)) return static_cast<double>(*s / volume);
  return static_cast<double>(box_sum_direct(f, lo, hi, budget) / volume);
}

double cube_average(const Observable& f, const CubeSpec& cube, std::uint64_t budget) {
  if (cube.dim != f.dimension()) throw HypothesisError("cube average: dimension mismatch");
  const auto [lo, hi] = cube.box();
  return box_average(f, lo, hi, budget);
}

BetaFit beta_fit(const Observable& f, double mean, double gamma, std::span<const double> scales,
                 const BetaFitOptions& options) {
  if (scales.empty()) throw HypothesisError("beta_fit: empty scale list");
  for (std::size_t k = 1; k < scales.size(); ++k)
    if (!(scales[k] > scales[k - 1])) throw HypothesisError("beta_fit: scales must increase");
  if (options.center_samples < 1) throw HypothesisError("beta_fit: need at least one center sample");
  const std::size_t d = f.dimension();
  BetaFit out;
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < scales.size(); ++k) {
    const double scale = scales[k];
    const double radius = std::min(std::pow(scale, gamma), 0x1.0p61);
    const auto span = static_cast<std::uint64_t>(std::ceil(radius)) * 2 - 1;
    RandomStream rng(options.seed, k, streams::kBoxCenters);
    BetaFitRow row;
    row.scale = scale;
    for (std::size_t s = 0; s < options.center_samples; ++s) {
      Site z{};
      if (s > 0) {
        for (;;) {
          long double norm2 = 0.0L;
          for (std::size_t i = 0; i < d; ++i) {
            z[i] = static_cast<std::int64_t>(rng.below(span)) - static_cast<std::int64_t>(span / 2);
            norm2 += static_cast<long double>(z[i]) * z[i];
          }
          if (std::sqrt(norm2) < radius) break;
        }
      }
      CubeSpec cube;
      cube.dim = d;
      cube.a = options.a;
      cube.b = options.b;
      cube.scale = scale;
      cube.center = z;
      const double err = std::fabs(cube_average(f, cube, options.budget) - mean);
      if (s == 0 || err > row.max_error) {
        row.max_error = err;
        row.worst_center = z;
      }
    }
    out.rows.push_back(row);
    if (row.max_error > 0.0) {
      xs.push_back(std::log(scale));
      ys.push_back(std::log(row.max_error));
    }
  }
  out.points_used = xs.size();
  if (xs.size() < 2) {
    out.degenerate = true;
    out.beta_hat = -std::numeric_limits<double>::infinity();
    out.c_hat = 0.0;
    return out;
  }
  const LinearFit fit = fit_line(xs, ys);
  out.beta_hat = 1.0 + fit.slope / static_cast<double>(d);
  out.c_hat = std::exp(fit.intercept);
  out.residuals = fit.residuals;
  return out;
}

}  // namespace walklab
