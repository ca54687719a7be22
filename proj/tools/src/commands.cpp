#include "walklab_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>

#include "walklab/birkhoff.hpp"
#include "walklab/chains.hpp"
#include "walklab/csv.hpp"
#include "walklab/diagnostics.hpp"
#include "walklab/enumerate.hpp"
#include "walklab/format.hpp"
#include "walklab/kernel.hpp"
#include "walklab/moments.hpp"
#include "walklab/parallel.hpp"
#include "walklab/statlab.hpp"
#include "walklab_cli/factories.hpp"

#ifndef WALKLAB_VERSION
#define WALKLAB_VERSION "0.0.0"
#endif

namespace walklab::cli {

namespace fs = std::filesystem;

std::string version_string() { return std::string("walklab ") + WALKLAB_VERSION; }

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate", "exact", "ocean-demo", "chain-sweep", "llt-report", "beta-fit"};
  return names;
}

namespace {

using Row = std::vector<std::string>;

std::string fmt(double v) { return format_double(v); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt(std::int64_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

/// NaN and infinities become null.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

class Context {
 public:
  Context(const RunConfig& config, fs::path out, unsigned threads)
      : config(config), out_(std::move(out)), threads(threads), hash_(config.hash()),
        options_(config.options.is_null() ? json::object() : config.options) {
    summary["command"] = config.command;
    summary["config_hash"] = hash_;
    summary["seed"] = config.seed;
    summary["version"] = version_string();
  }

  const RunConfig& config;
  unsigned threads;
  json summary;

  ConfigNode options() const { return ConfigNode(options_, "options"); }

  void describe(const std::string& key, const std::string& value) { extra_.emplace_back(key, value); }

  CsvMeta meta() const {
    CsvMeta m{{"config_hash", hash_},
              {"seed", std::to_string(config.seed)},
              {"version", version_string()},
              {"command", config.command}};
    m.insert(m.end(), extra_.begin(), extra_.end());
    return m;
  }

  std::ofstream open(const std::string& name) const {
    std::ofstream f(out_ / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + (out_ / name).string());
    return f;
  }

  /// Metadata, header and rows in one go.
  void write_table(const std::string& name, const Row& header, const std::vector<Row>& rows) const {
    auto f = open(name);
    write_csv_meta(f, meta());
    write_row(f, header);
    for (const auto& r : rows) write_row(f, r);
  }

  void write_summary() const {
    auto f = open("summary.json");
    json s = summary;
    json cfg = config.to_json();
    cfg.erase("out");
    cfg.erase("threads");
    s["config"] = cfg;
    f << s.dump(2) << '\n';
  }

 private:
  static void write_row(std::ostream& out, const Row& r) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << '\n';
  }

  fs::path out_;
  std::string hash_;
  json options_;
  CsvMeta extra_;
};

void allow_tolerances(const RunConfig& config, std::initializer_list<std::string> allowed) {
  const std::set<std::string> ok(allowed);
  for (const auto& [key, value] : config.tolerances)
    if (!ok.contains(key)) throw ConfigError("config: unknown tolerance '" + key + "' for " + config.command);
}

void forbid(const RunConfig& config, bool present, const std::string& field) {
  if (present) throw ConfigError("config: " + field + " is not used by " + config.command);
}

Row site_cells(const Site& s, std::size_t dim) {
  Row r;
  for (std::size_t i = 0; i < dim; ++i) r.push_back(fmt(s[i]));
  return r;
}

Row coordinate_header(const std::string& prefix, std::size_t dim) {
  Row r;
  for (std::size_t i = 1; i <= dim; ++i) r.push_back(prefix + std::to_string(i));
  return r;
}

std::array<double, kMaxDim> corner(const json& j, const std::string& what, std::size_t dim, double fill) {
  std::array<double, kMaxDim> c{};
  c.fill(fill);
  if (j.is_null()) return c;
  if (!j.is_array() || j.size() != dim) throw ConfigError("config: " + what + " needs " + std::to_string(dim) + " entries");
  for (std::size_t i = 0; i < dim; ++i) c[i] = j[i].get<double>();
  return c;
}

// ---- simulate ------------------------------------------------------------------

void cmd_simulate(Context& ctx) {
  const auto& cfg = ctx.config;
  allow_tolerances(cfg, {"ks_max"});
  const StepLaw law = law_from_config(cfg.law);
  const Observable f = observable_from_config(cfg.observable, law.dimension());
  if (f.dimension() != law.dimension()) throw ConfigError("config: observable and law dimensions differ");
  const auto cps = checkpoints_from_config(cfg.checkpoints);
  if (cfg.trials == 0) throw ConfigError("config: simulate needs trials >= 1");

  auto opts = ctx.options();
  const auto statistic_name = opts.get<std::string>("statistic", "rms");
  const auto statistic = parse_growth_statistic(statistic_name);
  const double q = opts.get<double>("q", 0.5);
  const auto reference = opts.get<std::string>("reference", "none");
  const auto fit_min_n = opts.get<std::uint64_t>("fit_min_n", 0);
  const double lln_delta = opts.get<double>("lln_delta", 0.2);
  std::optional<double> lln_mean = f.nominal_mean();
  if (opts.has("lln_mean")) lln_mean = opts.get<double>("lln_mean");
  opts.reject_unknown();
  if (reference != "none" && reference != "arcsine")
    throw ConfigError("config: options.reference must be 'none' or 'arcsine'");

  ctx.describe("law", law.descriptor());
  ctx.describe("observable", f.descriptor());

  auto ensemble = run_ensemble(law, f, cfg.seed, cfg.trials, cps, ctx.threads);
  ensemble.metadata = ctx.meta();
  {
    auto out = ctx.open("ensemble.csv");
    write_ensemble_csv(out, ensemble, law.dimension());
  }

  std::vector<std::uint64_t> ns;
  std::vector<std::vector<double>> samples;
  for (std::size_t k = 0; k < cps.size(); ++k)
    if (cps[k] >= fit_min_n) {
      ns.push_back(cps[k]);
      samples.push_back(ensemble.values_at(k));
    }
  if (ns.size() < 2) throw ConfigError("config: fewer than 2 checkpoints at or above fit_min_n");
  const auto fit = growth_exponent(ns, samples, statistic, q);
  std::vector<Row> rows;
  for (std::size_t k = 0; k < fit.points.size(); ++k)
    rows.push_back({fmt(fit.points[k].n), fmt(fit.points[k].value), fmt(fit.points[k].std_error),
                    fmt(k < fit.residuals.size() ? fit.residuals[k] : 0.0)});
  ctx.write_table("growth.csv", {"n", "value", "std_error", "residual"}, rows);
  ctx.summary["trials"] = cfg.trials;
  ctx.summary["growth"] = {{"statistic", statistic_name},
                           {"slope", number(fit.slope)},
                           {"intercept", number(fit.intercept)},
                           {"points", fit.points.size()},
                           {"warning", fit.warning}};

  if (reference == "arcsine") {
    const auto reduction = AffineReduction::for_observable(f);
    const std::uint64_t n = cps.back();
    const auto ts = ensemble.values_at(cps.size() - 1);
    const auto reduced = reduction.reduce(ts, n);
    const double ks = ks_distance(reduced, [](double z) { return arcsine_cdf(std::clamp(z, 0.0, 1.0)); });
    rows.clear();
    for (std::size_t i = 0; i < ts.size(); ++i) rows.push_back({fmt(std::uint64_t{i}), fmt(ts[i]), fmt(reduced[i])});
    ctx.write_table("reduced.csv", {"trial", "T", "reduced"}, rows);
    const double tol = tolerance(cfg, "ks_max", 0.05);
    ctx.summary["reference"] = "arcsine";
    ctx.summary["n"] = n;
    ctx.summary["ks_distance"] = number(ks);
    ctx.summary["ks_tolerance"] = tol;
    ctx.summary["ks_pass"] = ks < tol;
  }

  if (lln_mean) {
    const auto exceed = weak_lln_check(ensemble, *lln_mean, lln_delta);
    rows.clear();
    for (const auto& r : exceed)
      rows.push_back({fmt(r.n), fmt(r.exceed), fmt(r.trials), fmt(r.frequency), fmt(r.std_error)});
    ctx.write_table("weak_lln.csv", {"n", "exceed", "trials", "frequency", "std_error"}, rows);
    ctx.summary["weak_lln"] = {{"mean", *lln_mean}, {"delta", lln_delta}};
  }
}

// ---- exact ---------------------------------------------------------------------

void cmd_exact(Context& ctx) {
  const auto& cfg = ctx.config;
  allow_tolerances(cfg, {"oracle", "max_truncated"});
  forbid(cfg, !cfg.checkpoints.is_null(), "checkpoints");
  const StepLaw law = law_from_config(cfg.law);
  const Observable f = observable_from_config(cfg.observable, law.dimension());
  if (f.dimension() != law.dimension()) throw ConfigError("config: observable and law dimensions differ");

  auto opts = ctx.options();
  MomentPlan plan{law, f};
  plan.horizon = opts.get<std::uint64_t>("horizon");
  if (plan.horizon == 0) throw ConfigError("config: options.horizon must be >= 1");
  if (opts.has("start")) plan.start = site_from_json(opts.raw("start"), "options.start");
  const bool pairs = opts.get<bool>("pairs", false);
  const bool enumerate_check = opts.get<bool>("enumerate_check", false);
  plan.max_work = opts.get<double>("max_work", plan.max_work);
  opts.reject_unknown();
  plan.kernel.max_truncated = tolerance(cfg, "max_truncated", plan.kernel.max_truncated);
  plan.kernel.threads = ctx.threads;
  plan.threads = ctx.threads;
  if (enumerate_check && plan.horizon > 10) throw ConfigError("config: enumerate_check needs horizon <= 10");
  if (pairs && plan.horizon > 4096) throw BudgetError("pair table beyond horizon 4096");

  ctx.describe("law", law.descriptor());
  ctx.describe("observable", f.descriptor());

  // The recursion carries the budget check, so it runs first.
  const auto rows = exact_second_moment(plan);
  {
    auto out = ctx.open("moments.csv");
    write_moment_rows_csv(out, rows, ctx.meta());
  }
  const auto mean = exact_mean_T(plan);
  std::vector<Row> table;
  for (std::size_t k = 0; k < mean.per_step.size(); ++k) table.push_back({fmt(std::uint64_t{k + 1}), fmt(mean.per_step[k])});
  ctx.write_table("per_step.csv", {"n", "mean_f"}, table);

  std::vector<std::vector<double>> pair_table;
  if (pairs) {
    PairMomentEngine engine(plan);
    pair_table = engine.pair_table();
    auto out = ctx.open("pairs.csv");
    write_pair_table_csv(out, pair_table, ctx.meta());
  }

  const auto& last = rows.back();
  ctx.summary["horizon"] = plan.horizon;
  ctx.summary["mean"] = number(last.mean);
  ctx.summary["second_moment"] = number(last.second);
  ctx.summary["variance"] = number(last.variance);
  ctx.summary["kernel_mean"] = number(mean.mean);
  ctx.summary["kernel_error_bound"] = number(mean.error_bound);
  ctx.summary["truncated_mass"] = number(mean.truncated_mass);

  if (enumerate_check) {
    const double tol = tolerance(cfg, "oracle", 1e-12);
    double worst = 0.0;
    bool match = true;
    auto compare = [&](double value, double reference) {
      const double diff = std::fabs(value - reference);
      worst = std::max(worst, diff);
      if (!(diff <= tol * std::max(1.0, std::fabs(reference)))) match = false;
    };
    for (std::size_t m = 1; m <= plan.horizon; ++m) {
      const auto e = enumerate_paths(law, f, m, plan.start);
      compare(rows[m - 1].mean, e.mean_t);
      compare(rows[m - 1].second, e.second_t);
      if (m == plan.horizon) {
        compare(mean.mean, e.mean_t);
        for (std::size_t k = 0; k < m; ++k) compare(mean.per_step[k], e.mean_f[k]);
        for (std::size_t i = 0; i < pair_table.size(); ++i)
          for (std::size_t j = 0; j < m; ++j) compare(pair_table[i][j], e.pair[i][j]);
      }
    }
    ctx.summary["oracle_match"] = match;
    ctx.summary["oracle_max_diff"] = worst;
    ctx.summary["oracle_tolerance"] = tol;
  }
}

// ---- ocean-demo ----------------------------------------------------------------

void cmd_ocean_demo(Context& ctx) {
  const auto& cfg = ctx.config;
  allow_tolerances(cfg, {"oscillation"});
  forbid(cfg, !cfg.observable.is_null(), "observable (the ocean observable is built from options)");
  forbid(cfg, !cfg.checkpoints.is_null(), "checkpoints");
  const StepLaw law =
      law_from_config(cfg.law.is_null() ? json{{"preset", "lazy_srw"}, {"d", 1}, {"hold", 0.5}} : cfg.law);
  const std::size_t d = law.dimension();

  auto opts = ctx.options();
  auto schedule = std::make_shared<OceanSchedule>(opts.get<double>("alpha", 2.0), opts.get<std::int64_t>("b1", 3),
                                                  opts.get<std::string>("a_rule", "log"));
  const auto t_max = opts.get<std::uint64_t>("event_t_max", 10'000);
  const auto event_trials = opts.get<std::uint64_t>("event_trials", 20);
  const auto tail_rows = opts.get<std::size_t>("tail_rows", 10);
  opts.reject_unknown();
  if (tail_rows == 0) throw ConfigError("config: options.tail_rows must be >= 1");
  const Observable f = d == 1 ? make_ocean(schedule) : make_ocean_multidim(d, schedule);
  const Observable line = make_ocean(schedule);
  ctx.describe("law", law.descriptor());
  ctx.describe("observable", f.descriptor());

  const std::size_t blocks = schedule->blocks();
  std::vector<Row> rows;
  bool all_bounds = true;
  for (std::size_t n = 1; n < blocks; ++n) {
    const bool ok = schedule->bounds_hold(n);
    all_bounds = all_bounds && ok;
    rows.push_back({fmt(std::uint64_t{n}), fmt(schedule->a(n)), fmt(schedule->b(n)), fmt(schedule->twice_c(n)),
                    fmt(schedule->t(n)), fmt(schedule->interval_lo(n)), fmt(schedule->interval_hi(n)),
                    fmt(schedule->half_width(n)), fmt(ok)});
  }
  ctx.write_table("schedule.csv", {"n", "a", "b", "twice_c", "t", "I_lo", "I_hi", "w", "bounds_hold"}, rows);
  ctx.summary["schedule"] = {{"rows", rows.size()}, {"bounds_all_hold", all_bounds}};

  // Averages of F over [0, b_n], the block ends being where the deviation peaks.
  std::vector<double> dev;
  rows.clear();
  for (std::size_t n = 1; n < blocks; ++n) {
    const Site lo{};
    Site hi{};
    hi[0] = schedule->b(n);
    const double avg = box_average(line, lo, hi);
    dev.push_back(avg - 0.5);
    rows.push_back({fmt(std::uint64_t{n}), fmt(schedule->b(n)), fmt(avg), fmt(avg - 0.5)});
  }
  ctx.write_table("trace.csv", {"n", "L", "average", "deviation"}, rows);
  const double tol = tolerance(cfg, "oscillation", 0.05);
  std::optional<std::size_t> settle;
  double tail_max = 0.0;
  for (std::size_t k = dev.size(); k-- > 0;) {
    tail_max = std::max(tail_max, std::fabs(dev[k]));
    if (tail_max < tol) settle = k + 1;
    else break;
  }
  double amplitude = 0.0;
  for (std::size_t k = dev.size() - std::min(dev.size(), tail_rows); k < dev.size(); ++k)
    amplitude = std::max(amplitude, std::fabs(dev[k]));
  ctx.summary["trace"] = {{"rows", dev.size()},
                          {"final_oscillation", amplitude},
                          {"tail_rows", tail_rows},
                          {"tolerance", tol},
                          {"settles_from_n", settle ? json(*settle) : json(nullptr)},
                          {"pass", amplitude < tol}};

  struct EventRow {
    std::size_t n;
    std::string kind;
    std::uint64_t trial;
    EventCheck check;
  };
  std::vector<EventRow> events;
  for (std::size_t n = 1; n < blocks && schedule->t(n) <= t_max; ++n) {
    const std::uint64_t seed_n = splitmix64(cfg.seed ^ (0x9e3779b97f4a7c15ULL * n));
    const bool nonempty = schedule->interval_lo(n) <= schedule->interval_hi(n);
    if (nonempty) {
      events.push_back({n, "constant", 0, ocean_event_check(*schedule, f, n, constant_event_path(*schedule, n, d))});
      events.push_back({n, "exit", 0, ocean_event_check(*schedule, f, n, exit_event_path(*schedule, n, d, seed_n))});
    }
    for (const std::string kind : {"tube", "free"}) {
      if (kind == "tube" && !nonempty) continue;
      std::vector<EventCheck> checks(event_trials);
      parallel_for(event_trials, ctx.threads, [&](std::size_t i) {
        const auto path = kind == "tube" ? tube_event_path(law, *schedule, n, seed_n, i)
                                         : free_event_path(law, *schedule, n, seed_n, i);
        checks[i] = ocean_event_check(*schedule, f, n, path);
      });
      for (std::uint64_t i = 0; i < event_trials; ++i) events.push_back({n, kind, i, checks[i]});
    }
  }
  rows.clear();
  std::uint64_t realized = 0, checked = 0, failures = 0;
  for (const auto& e : events) {
    realized += e.check.event;
    checked += e.check.implication_checked;
    failures += e.check.implication_checked && !e.check.implication_holds;
    rows.push_back({fmt(std::uint64_t{e.n}), e.kind, fmt(e.trial), fmt(e.check.t), fmt(e.check.event),
                    fmt(e.check.implication_checked), fmt(e.check.implication_holds), fmt(e.check.birkhoff)});
  }
  ctx.write_table("events.csv",
                  {"n", "kind", "trial", "t", "event", "implication_checked", "implication_holds", "birkhoff"}, rows);
  ctx.summary["events"] = {{"rows", events.size()},
                           {"realized", realized},
                           {"implication_checked", checked},
                           {"implication_failures", failures},
                           {"implication_all_hold", failures == 0}};
}

// ---- chain-sweep ---------------------------------------------------------------

std::array<double, 3> probability_triple(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("config: " + what + " must have 3 entries");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

ThreeStateChain chain_from(const ConfigNode& node) {
  ThreeStateChain c;
  c.p1 = node.get<double>("p1");
  c.q1 = node.get<double>("q1");
  c.eta1 = node.get<double>("eta1");
  c.q2 = node.get<double>("q2");
  c.p2 = node.get<double>("p2");
  c.eta2 = node.get<double>("eta2");
  if (node.has("pi")) c.pi = probability_triple(node.raw("pi"), node.path() + ".pi");
  c.validate();
  return c;
}

Row chain_cells(const ThreeStateChain& c) {
  return {fmt(c.p1), fmt(c.q1), fmt(c.eta1), fmt(c.q2), fmt(c.p2), fmt(c.eta2), fmt(c.pi[0]), fmt(c.pi[1]), fmt(c.pi[2])};
}

const Row kChainColumns{"p1", "q1", "eta1", "q2", "p2", "eta2", "pi1", "pi2", "pi3"};

void cmd_chain_sweep(Context& ctx) {
  const auto& cfg = ctx.config;
  allow_tolerances(cfg, {"spot_sigma"});
  forbid(cfg, !cfg.law.is_null(), "law");
  forbid(cfg, !cfg.observable.is_null(), "observable");
  forbid(cfg, !cfg.checkpoints.is_null(), "checkpoints");

  auto opts = ctx.options();
  ChainSweepOptions so;
  so.delta = opts.get<double>("delta", so.delta);
  so.grid = opts.get<std::size_t>("grid", so.grid);
  if (opts.has("pi")) so.pi = probability_triple(opts.raw("pi"), "options.pi");
  const auto every = opts.get<std::size_t>("spot_check_every", 50);
  const auto spot_trials = opts.get<std::uint64_t>("spot_trials", 100'000);
  std::vector<ThreeStateChain> chains;
  if (opts.has("chains"))
    for (const auto& node : opts.children("chains")) chains.push_back(chain_from(node));
  std::optional<double> c_hat;
  if (opts.has("c_hat")) c_hat = opts.get<double>("c_hat");
  opts.reject_unknown();
  if (so.grid < 2) throw ConfigError("config: options.grid must be >= 2");
  if (every == 0 || spot_trials == 0) throw ConfigError("config: spot checks need positive spacing and trials");
  ctx.describe("delta", fmt(so.delta));
  ctx.describe("grid", std::to_string(so.grid));

  const auto sweep = chain_sweep(so);
  {
    auto out = ctx.open("sweep.csv");
    write_chain_sweep_csv(out, sweep, ctx.meta());
  }
  const double c = c_hat.value_or(sweep.max_ratio);

  const double sigma = tolerance(cfg, "spot_sigma", 4.0);
  std::vector<std::size_t> picks;
  for (std::size_t i = 0; i < sweep.rows.size(); i += every) picks.push_back(i);
  std::vector<Row> rows;
  bool spot_pass = true;
  for (const std::size_t i : picks) {
    const auto& chain = sweep.rows[i].chain;
    const auto exact = exact_occupation_moments(chain);
    const auto mc = monte_carlo_moments(chain, spot_trials, splitmix64(cfg.seed + i), ctx.threads);
    const std::array<std::tuple<const char*, double, double, double>, 4> q{{
        {"mean1", exact.mean1, mc.value.mean1, mc.std_error.mean1},
        {"mean2", exact.mean2, mc.value.mean2, mc.std_error.mean2},
        {"cross", exact.cross, mc.value.cross, mc.std_error.cross},
        {"covariance", exact.covariance, mc.value.covariance, mc.std_error.covariance},
    }};
    for (const auto& [name, ex, est, se] : q) {
      const double z = se > 0 ? (est - ex) / se : (est == ex ? 0.0 : std::numeric_limits<double>::infinity());
      const bool ok = std::fabs(z) <= sigma;
      spot_pass = spot_pass && ok;
      rows.push_back({fmt(std::uint64_t{i}), name, fmt(ex), fmt(est), fmt(se), fmt(z), fmt(ok)});
    }
  }
  ctx.write_table("spot.csv", {"row", "quantity", "exact", "monte_carlo", "std_error", "z", "pass"}, rows);

  rows.clear();
  bool absorbed_zero = true;
  std::size_t absorbed = 0;
  for (std::size_t i = 0; i < chains.size(); ++i) {
    const auto m = exact_occupation_moments(chains[i]);
    const auto b = lemma_bound_check(chains[i], c);
    if (chains[i].pi[2] == 1.0) {
      ++absorbed;
      absorbed_zero = absorbed_zero && m.mean1 == 0 && m.mean2 == 0 && m.cross == 0 && m.covariance == 0;
    }
    Row r{fmt(std::uint64_t{i})};
    for (auto& cell : chain_cells(chains[i])) r.push_back(cell);
    for (const double v : {m.mean1, m.mean2, m.cross, m.covariance, b.bracket, b.bound, b.ratio}) r.push_back(fmt(v));
    r.push_back(fmt(b.flagged));
    r.push_back(fmt(!b.flagged && std::fabs(m.covariance) <= b.bound));
    rows.push_back(std::move(r));
  }
  Row header{"index"};
  header.insert(header.end(), kChainColumns.begin(), kChainColumns.end());
  for (const char* h : {"mean1", "mean2", "cross", "covariance", "bracket", "bound", "ratio", "flagged", "within_bound"})
    header.push_back(h);
  ctx.write_table("chains.csv", header, rows);

  ctx.summary["sweep"] = {{"rows", sweep.rows.size()},
                          {"delta", so.delta},
                          {"max_ratio", number(sweep.max_ratio)},
                          {"flagged", sweep.flagged}};
  ctx.summary["spot"] = {{"rows", picks.size()}, {"trials", spot_trials}, {"sigma", sigma}, {"all_pass", spot_pass}};
  ctx.summary["chains"] = {{"rows", chains.size()},
                           {"c_hat", number(c)},
                           {"absorbed_start_rows", absorbed},
                           {"absorbed_start_all_zero", absorbed_zero}};
}

// ---- llt-report ----------------------------------------------------------------

void cmd_llt_report(Context& ctx) {
  const auto& cfg = ctx.config;
  allow_tolerances(cfg, {"max_truncated"});
  forbid(cfg, !cfg.observable.is_null(), "observable");
  forbid(cfg, !cfg.checkpoints.is_null(), "checkpoints");
  const StepLaw law = law_from_config(cfg.law);
  const std::size_t d = law.dimension();

  auto opts = ctx.options();
  const auto n_list = opts.get<std::vector<std::uint64_t>>("n_list", {100, 400});
  std::optional<std::uint64_t> snapshot;
  if (opts.has("snapshot_n")) snapshot = opts.get<std::uint64_t>("snapshot_n");
  opts.reject_unknown();
  if (n_list.empty()) throw ConfigError("config: options.n_list is empty");
  KernelOptions kopts;
  kopts.max_truncated = tolerance(cfg, "max_truncated", kopts.max_truncated);
  kopts.threads = ctx.threads;
  ctx.describe("law", law.descriptor());

  const auto report = llt_report(law, n_list, kopts);
  std::vector<Row> rows;
  for (const auto& r : report) {
    Row row{fmt(r.n), fmt(r.sup_error)};
    for (auto& c : site_cells(r.argmax, d)) row.push_back(c);
    row.push_back(fmt(r.truncated_mass));
    rows.push_back(std::move(row));
  }
  Row header{"n", "sup_error"};
  for (auto& c : coordinate_header("argmax_x", d)) header.push_back(c);
  header.push_back("truncated_mass");
  ctx.write_table("llt.csv", header, rows);

  bool decreasing = true;
  for (std::size_t k = 1; k < report.size(); ++k) decreasing = decreasing && report[k].sup_error < report[k - 1].sup_error;
  json list = json::array();
  for (const auto& r : report) list.push_back({{"n", r.n}, {"sup_error", number(r.sup_error)}});
  ctx.summary["llt"] = list;
  ctx.summary["strictly_decreasing"] = decreasing;

  if (snapshot) {
    const auto kernel = kernel_at(law, *snapshot, kopts);
    auto out = ctx.open("kernel.csv");
    write_csv_meta(out, ctx.meta());
    write_kernel_csv(out, kernel);
    ctx.summary["snapshot_n"] = *snapshot;
  }
}

// ---- beta-fit ------------------------------------------------------------------

void cmd_beta_fit(Context& ctx) {
  const auto& cfg = ctx.config;
  allow_tolerances(cfg, {});
  forbid(cfg, !cfg.law.is_null(), "law");
  forbid(cfg, !cfg.checkpoints.is_null(), "checkpoints");

  auto opts = ctx.options();
  const auto d = opts.get<std::size_t>("d", 1);
  if (d == 0 || d > kMaxDim) throw ConfigError("config: options.d out of range");
  const Observable f = observable_from_config(cfg.observable, d);
  std::optional<double> mean = f.nominal_mean();
  if (opts.has("mean")) mean = opts.get<double>("mean");
  const double gamma = opts.get<double>("gamma", 0.5);
  const auto scales = opts.get<std::vector<double>>("scales", {16, 64, 256, 1024});
  BetaFitOptions bo;
  bo.a = corner(opts.has("a") ? opts.raw("a") : json(), "options.a", f.dimension(), 0.0);
  bo.b = corner(opts.has("b") ? opts.raw("b") : json(), "options.b", f.dimension(), 1.0);
  bo.center_samples = opts.get<std::size_t>("center_samples", bo.center_samples);
  bo.budget = opts.get<std::uint64_t>("budget", bo.budget);
  bo.seed = cfg.seed;
  opts.reject_unknown();
  if (!mean) throw ConfigError("config: observable has no declared mean; set options.mean");
  ctx.describe("observable", f.descriptor());

  const auto fit = beta_fit(f, *mean, gamma, scales, bo);
  std::vector<Row> rows;
  for (const auto& r : fit.rows) {
    Row row{fmt(r.scale), fmt(r.max_error)};
    for (auto& c : site_cells(r.worst_center, f.dimension())) row.push_back(c);
    rows.push_back(std::move(row));
  }
  Row header{"scale", "max_error"};
  for (auto& c : coordinate_header("worst_z", f.dimension())) header.push_back(c);
  ctx.write_table("beta_fit.csv", header, rows);
  json residuals = json::array();
  for (const double r : fit.residuals) residuals.push_back(number(r));
  ctx.summary["mean"] = *mean;
  ctx.summary["gamma"] = gamma;
  ctx.summary["beta_hat"] = number(fit.beta_hat);
  ctx.summary["c_hat"] = number(fit.c_hat);
  ctx.summary["degenerate"] = fit.degenerate;
  ctx.summary["points_used"] = fit.points_used;
  ctx.summary["residuals"] = residuals;
}

}  // namespace

void run_command(const RunConfig& config, const fs::path& out, unsigned threads) {
  static const std::map<std::string, std::function<void(Context&)>> table{
      {"simulate", cmd_simulate},       {"exact", cmd_exact},           {"ocean-demo", cmd_ocean_demo},
      {"chain-sweep", cmd_chain_sweep}, {"llt-report", cmd_llt_report}, {"beta-fit", cmd_beta_fit}};
  const auto it = table.find(config.command);
  if (it == table.end()) throw ConfigError("config: unknown command '" + config.command + "'");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw ConfigError("cannot create output directory " + out.string() + ": " + ec.message());
  Context ctx(config, out, std::max(1u, threads));
  it->second(ctx);
  ctx.write_summary();
}

}  // namespace walklab::cli
