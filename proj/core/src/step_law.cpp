#include "walklab/step_law.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "walklab/errors.hpp"
#include "walklab/format.hpp"

namespace walklab {

AliasTable::AliasTable(std::span<const double> probs) : cut_(probs.size()), alias_(probs.size()) {
  const std::size_t n = probs.size();
  if (n == 0) throw HypothesisError("alias table needs at least one weight");
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  std::vector<double> scaled(n);
  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = probs[i] * static_cast<double>(n) / total;
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
  }
  while (!small.empty() && !large.empty()) {
    const auto s = small.back();
    small.pop_back();
    const auto l = large.back();
    cut_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (auto i : large) {
    cut_[i] = 1.0;
    alias_[i] = i;
  }
  for (auto i : small) {  // rounding leftovers
    cut_[i] = 1.0;
    alias_[i] = i;
  }
}

namespace {

using i128 = __int128;

struct Egcd {
  i128 g, x, y;
};

Egcd egcd(i128 a, i128 b) {
  i128 old_r = a, r = b, old_s = 1, s = 0, old_t = 0, t = 1;
  while (r != 0) {
    const i128 q = old_r / r;
    std::tie(old_r, r) = std::pair{r, old_r - q * r};
    std::tie(old_s, s) = std::pair{s, old_s - q * s};
    std::tie(old_t, t) = std::pair{t, old_t - q * t};
  }
  if (old_r < 0) return {-old_r, -old_s, -old_t};
  return {old_r, old_s, old_t};
}

std::int64_t narrow(i128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
    throw BudgetError("lattice basis reduction overflowed 64-bit integers");
  return static_cast<std::int64_t>(v);
}

std::string hypothesis_prefix(const std::string& preset) {
  return preset.empty() ? std::string("step law: ") : preset + ": ";
}

}  // namespace

bool generates_lattice(std::span<const Site> vectors, std::size_t d) {
  std::array<std::optional<Site>, kMaxDim> rows{};
  auto complete = [&] {
    for (std::size_t c = 0; c < d; ++c)
      if (!rows[c] || (*rows[c])[c] != 1) return false;
    return true;
  };
  for (Site v : vectors) {
    for (std::size_t c = 0; c < d; ++c) {
      if (v[c] == 0) continue;
      if (!rows[c]) {
        if (v[c] < 0) v = negate(v);
        rows[c] = v;
        break;
      }
      Site& r = *rows[c];
      const auto [g, x, y] = egcd(r[c], v[c]);
      const i128 ra = r[c] / g, vb = v[c] / g;
      Site pivot{}, rest{};
      for (std::size_t j = 0; j < d; ++j) {
        pivot[j] = narrow(x * r[j] + y * v[j]);
        rest[j] = narrow(ra * v[j] - vb * r[j]);
      }
      r = pivot;
      v = rest;
      // Keep off-diagonal entries small.
      for (std::size_t j = c + 1; j < d; ++j) {
        if (rows[j] && (*rows[j])[j] > 1) {
          const std::int64_t q = r[j] / (*rows[j])[j];
          for (std::size_t k = 0; k < d; ++k) r[k] -= q * (*rows[j])[k];
        }
      }
    }
    if (complete()) return true;
  }
  return complete();
}

StepLaw StepLaw::Builder::build() && {
  const std::string who = hypothesis_prefix(preset);
  if (dim == 0 || dim > kMaxDim) throw HypothesisError(who + "dimension must be in 1.." + std::to_string(kMaxDim));
  if (alpha == 1.0) throw HypothesisError(who + "alpha = 1 is excluded (the theory assumes alpha != 1)");
  if (!(alpha > 0.0 && alpha <= 2.0)) throw HypothesisError(who + "alpha must lie in (0, 2]");
  if (atoms.empty()) throw HypothesisError(who + "empty support");

  // Canonical order, duplicates merged.
  std::sort(atoms.begin(), atoms.end(), [](const StepAtom& a, const StepAtom& b) { return a.site < b.site; });
  std::vector<StepAtom> merged;
  for (const auto& a : atoms) {
    for (std::size_t j = dim; j < kMaxDim; ++j)
      if (a.site[j] != 0) throw HypothesisError(who + "site " + to_string(a.site, kMaxDim) + " exceeds dimension");
    if (!(a.prob >= 0.0) || !std::isfinite(a.prob))
      throw HypothesisError(who + "negative or non-finite probability at " + to_string(a.site, dim));
    if (!merged.empty() && merged.back().site == a.site)
      merged.back().prob += a.prob;
    else
      merged.push_back(a);
  }
  std::erase_if(merged, [](const StepAtom& a) { return a.prob == 0.0; });
  if (merged.empty()) throw HypothesisError(who + "all probabilities are zero");

  long double total = 0.0L;
  for (const auto& a : merged) total += a.prob;
  if (std::fabs(static_cast<double>(total - 1.0L)) > 1e-12)
    throw HypothesisError(who + "probabilities sum to " + format_double(static_cast<double>(total)) +
                          ", expected 1 within 1e-12");

  if (check_hypotheses) {
    std::vector<Site> sites;
    sites.reserve(merged.size());
    for (const auto& a : merged) sites.push_back(a.site);
    if (!generates_lattice(sites, dim))
      throw HypothesisError(who + "non-degeneracy violated: the support does not generate Z^" + std::to_string(dim));
    std::vector<Site> diffs;
    diffs.reserve(sites.size());
    for (const auto& s : sites) diffs.push_back(s - sites.front());
    if (!generates_lattice(diffs, dim))
      throw HypothesisError(who + "aperiodicity violated: return times have g.c.d. > 1");
  }

  StepLaw law;
  law.dim_ = dim;
  law.atoms_ = std::move(merged);
  law.alpha_ = alpha;
  law.tail_cutoff_ = tail_cutoff;
  law.truncated_tail_mass_ = truncated_tail_mass;
  law.heavy_tailed_ = heavy_tailed;
  law.checked_ = check_hypotheses;
  law.preset_ = std::move(preset);
  law.descriptor_ = std::move(descriptor);

  std::array<long double, kMaxDim> mean{};
  for (const auto& a : law.atoms_)
    for (std::size_t i = 0; i < dim; ++i) mean[i] += static_cast<long double>(a.prob) * a.site[i];
  for (std::size_t i = 0; i < dim; ++i) law.drift_[i] = static_cast<double>(mean[i]);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      long double acc = 0.0L;
      for (const auto& a : law.atoms_) acc += static_cast<long double>(a.prob) * (a.site[i] - mean[i]) * (a.site[j] - mean[j]);
      law.covariance_[i][j] = static_cast<double>(acc);
    }
  }
  law.smin_ = law.atoms_.front().site;
  law.smax_ = law.atoms_.front().site;
  for (const auto& a : law.atoms_)
    for (std::size_t i = 0; i < dim; ++i) {
      law.smin_[i] = std::min(law.smin_[i], a.site[i]);
      law.smax_[i] = std::max(law.smax_[i], a.site[i]);
    }

  // Atoms are sorted, so the mirror of atom k is atom n-1-k when symmetric.
  const std::size_t n = law.atoms_.size();
  law.symmetric_ = true;
  for (std::size_t k = 0; k < n && law.symmetric_; ++k) {
    const auto& a = law.atoms_[k];
    const auto& b = law.atoms_[n - 1 - k];
    law.symmetric_ = (b.site == negate(a.site)) && (a.prob == b.prob);
  }
  if (law.symmetric_) law.drift_ = Vector{};

  std::vector<double> probs(n);
  for (std::size_t k = 0; k < n; ++k) probs[k] = law.atoms_[k].prob;
  law.alias_ = AliasTable(probs);
  return law;
}

StepLaw lazy_srw(std::size_t d, double hold) {
  if (!(hold >= 0.0 && hold < 1.0)) throw HypothesisError("lazy_srw: hold probability must lie in [0, 1)");
  StepLaw::Builder b;
  b.dim = d;
  b.preset = "lazy_srw";
  b.descriptor = "lazy_srw(d=" + std::to_string(d) + ",hold=" + format_double(hold) + ")";
  if (hold > 0.0) b.atoms.push_back({Site{}, hold});
  const double move = (1.0 - hold) / (2.0 * static_cast<double>(d));
  for (std::size_t i = 0; i < d && i < kMaxDim; ++i) {
    Site e{};
    e[i] = 1;
    b.atoms.push_back({e, move});
    b.atoms.push_back({negate(e), move});
  }
  return std::move(b).build();
}

StepLaw product_lazy(std::size_t d, double hold) {
  if (!(hold >= 0.0 && hold < 1.0)) throw HypothesisError("product_lazy: hold probability must lie in [0, 1)");
  if (d == 0 || d > kMaxDim) throw HypothesisError("product_lazy: unsupported dimension");
  StepLaw::Builder b;
  b.dim = d;
  b.preset = "product_lazy";
  b.descriptor = "product_lazy(d=" + std::to_string(d) + ",hold=" + format_double(hold) + ")";
  const std::array<double, 3> marginal{(1.0 - hold) / 2.0, hold, (1.0 - hold) / 2.0};
  std::size_t count = 1;
  for (std::size_t i = 0; i < d; ++i) count *= 3;
  for (std::size_t code = 0; code < count; ++code) {
    Site s{};
    double p = 1.0;
    std::size_t rest = code;
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t digit = rest % 3;
      rest /= 3;
      s[i] = static_cast<std::int64_t>(digit) - 1;
      p *= marginal[digit];
    }
    if (p > 0.0) b.atoms.push_back({s, p});
  }
  return std::move(b).build();
}

StepLaw table_law(std::size_t d, std::vector<StepAtom> table) {
  StepLaw::Builder b;
  b.dim = d;
  b.preset = "table";
  std::string desc = "table(d=" + std::to_string(d);
  for (const auto& a : table) desc += ";" + to_string(a.site, d) + ":" + format_double(a.prob);
  b.descriptor = desc + ")";
  b.atoms = std::move(table);
  return std::move(b).build();
}

StepLaw zero_mean_table(std::size_t d, std::vector<StepAtom> table) {
  StepLaw law = table_law(d, std::move(table));
  for (std::size_t i = 0; i < d; ++i)
    if (std::fabs(law.drift()[i]) > 1e-12)
      throw HypothesisError("zero_mean_finite_var: table mean is " + format_double(law.drift()[i]) +
                            " in coordinate " + std::to_string(i) + ", expected 0");
  return law;
}

StepLaw drift_pareto(double drift, double beta, std::int64_t k_max) {
  if (!(beta > 1.0)) throw HypothesisError("drift_pareto: tail exponent beta must exceed 1");
  if (!(drift > 0.0 && drift < 1.5)) throw HypothesisError("drift_pareto: drift must lie in (0, 1.5)");
  if (k_max < 1) throw HypothesisError("drift_pareto: k_max must be positive");
  // Left tail P(-k) = tau * k^(-1-beta) / Z, right part uniform on {+1, +2}.
  // Summation runs from the small terms up.
  long double z = 0.0L, first = 0.0L;
  for (std::int64_t k = k_max; k >= 1; --k) {
    const long double kk = static_cast<long double>(k);
    const long double w = std::pow(kk, -1.0L - static_cast<long double>(beta));
    z += w;
    first += kk * w;
  }
  const long double mean_jump = first / z;
  const long double tau = (1.5L - drift) / (1.5L + mean_jump);
  StepLaw::Builder b;
  b.dim = 1;
  b.preset = "drift_pareto";
  b.descriptor = "drift_pareto(v=" + format_double(drift) + ",beta=" + format_double(beta) +
                 ",k_max=" + std::to_string(k_max) + ")";
  b.alpha = std::min(beta, 2.0);
  b.tail_cutoff = k_max;
  b.heavy_tailed = true;
  b.atoms.reserve(static_cast<std::size_t>(k_max) + 2);
  for (std::int64_t k = 1; k <= k_max; ++k) {
    const long double w = std::pow(static_cast<long double>(k), -1.0L - static_cast<long double>(beta));
    b.atoms.push_back({Site{-k}, static_cast<double>(tau * w / z)});
  }
  b.atoms.push_back({Site{1}, static_cast<double>((1.0L - tau) / 2.0L)});
  b.atoms.push_back({Site{2}, static_cast<double>((1.0L - tau) / 2.0L)});
  return std::move(b).build();
}

StepLaw sym_stable_lattice(double alpha, std::int64_t k_max) {
  if (alpha == 1.0) throw HypothesisError("sym_stable_lattice: alpha = 1 is excluded (the theory assumes alpha != 1)");
  if (!(alpha > 0.0 && alpha < 2.0)) throw HypothesisError("sym_stable_lattice: alpha must lie in (0,1) or (1,2)");
  if (k_max < 1) throw HypothesisError("sym_stable_lattice: k_max must be positive");
  long double z = 0.0L;
  for (std::int64_t k = k_max; k >= 1; --k) z += std::pow(static_cast<long double>(k), -1.0L - alpha);
  StepLaw::Builder b;
  b.dim = 1;
  b.preset = "sym_stable_lattice";
  b.descriptor = "sym_stable_lattice(alpha=" + format_double(alpha) + ",k_max=" + std::to_string(k_max) + ")";
  b.alpha = alpha;
  b.tail_cutoff = k_max;
  b.heavy_tailed = true;
  // Mass lost by truncating the infinite tail, relative to the untruncated law.
  const long double tail = std::pow(static_cast<long double>(k_max), -static_cast<long double>(alpha)) / alpha;
  b.truncated_tail_mass = static_cast<double>(tail / (z + tail));
  b.atoms.reserve(2 * static_cast<std::size_t>(k_max));
  for (std::int64_t k = 1; k <= k_max; ++k) {
    const double p = static_cast<double>(std::pow(static_cast<long double>(k), -1.0L - alpha) / (2.0L * z));
    b.atoms.push_back({Site{k}, p});
    b.atoms.push_back({Site{-k}, p});
  }
  return std::move(b).build();
}

StepLaw shift_law(std::size_t d, Site step) {
  StepLaw::Builder b;
  b.dim = d;
  b.preset = "shift";
  b.descriptor = "shift" + to_string(step, d);
  b.check_hypotheses = false;
  b.atoms.push_back({step, 1.0});
  return std::move(b).build();
}

StepLaw make_step_law(std::string_view preset, const StepLawParams& params) {
  auto num = [&](const char* key, std::optional<double> fallback = std::nullopt) {
    const auto it = params.numbers.find(key);
    if (it != params.numbers.end()) return it->second;
    if (fallback) return *fallback;
    throw HypothesisError(std::string(preset) + ": missing parameter '" + key + "'");
  };
  auto dim = [&] { return static_cast<std::size_t>(num("d", 1.0)); };
  if (params.numbers.contains("alpha") && params.numbers.at("alpha") == 1.0)
    throw HypothesisError(std::string(preset) + ": alpha = 1 is excluded (the theory assumes alpha != 1)");
  if (preset == "lazy_srw" || preset == "lazy_srw_d") return lazy_srw(dim(), num("hold", 0.5));
  if (preset == "product_lazy") return product_lazy(dim(), num("hold", 0.5));
  if (preset == "zero_mean_finite_var") return zero_mean_table(dim(), params.table);
  if (preset == "table") return table_law(dim(), params.table);
  if (preset == "drift_pareto")
    return drift_pareto(num("v"), num("beta"), static_cast<std::int64_t>(num("k_max", 1e6)));
  if (preset == "sym_stable_lattice")
    return sym_stable_lattice(num("alpha"), static_cast<std::int64_t>(num("k_max", 1e6)));
  if (preset == "shift") return shift_law(dim(), params.step);
  throw HypothesisError("unknown step-law preset '" + std::string(preset) + "'");
}

}  // namespace walklab
