#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "walklab/rng.hpp"
#include "walklab/site.hpp"

namespace walklab {

struct StepAtom {
  Site site{};
  double prob = 0.0;
};

using Vector = std::array<double, kMaxDim>;
using Matrix = std::array<std::array<double, kMaxDim>, kMaxDim>;

/// Vose alias table over a fixed list of weights.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(std::span<const double> probs);

  std::size_t draw(RandomStream& rng) const noexcept {
    const std::uint64_t u = rng.next_u64();
    const auto wide = static_cast<unsigned __int128>(u) * cut_.size();
    const auto idx = static_cast<std::size_t>(wide >> 64);
    const double coin = static_cast<double>(static_cast<std::uint64_t>(wide) >> 11) * 0x1.0p-53;
    return coin < cut_[idx] ? idx : alias_[idx];
  }

  std::size_t size() const noexcept { return cut_.size(); }

 private:
  std::vector<double> cut_;
  std::vector<std::uint32_t> alias_;
};

/// A lattice step distribution on Z^d. Immutable once built; all presets go
/// through the hypothesis checks (normalisation, non-degeneracy,
/// aperiodicity, alpha != 1) except the explicit `shift` fixture.
class StepLaw {
 public:
  std::size_t dimension() const noexcept { return dim_; }
  std::span<const StepAtom> support() const noexcept { return atoms_; }
  double alpha() const noexcept { return alpha_; }
  const Vector& drift() const noexcept { return drift_; }
  const Matrix& covariance() const noexcept { return covariance_; }
  std::int64_t tail_cutoff() const noexcept { return tail_cutoff_; }
  bool heavy_tailed() const noexcept { return heavy_tailed_; }
  /// Finite, modest support: the exact convolution path is available.
  bool kernel_capable() const noexcept { return !heavy_tailed_ && atoms_.size() <= 4096; }
  bool symmetric() const noexcept { return symmetric_; }
  bool hypotheses_checked() const noexcept { return checked_; }
  const std::string& preset() const noexcept { return preset_; }
  /// Stable one-line description, embedded in reports.
  const std::string& descriptor() const noexcept { return descriptor_; }

  /// Per-coordinate bounding box of the support.
  const Site& support_min() const noexcept { return smin_; }
  const Site& support_max() const noexcept { return smax_; }

  const Site& sample(RandomStream& rng) const noexcept { return atoms_[alias_.draw(rng)].site; }

  /// Mass of the tail beyond the cutoff that was renormalised away (0 for
  /// finite tables).
  double truncated_tail_mass() const noexcept { return truncated_tail_mass_; }

  struct Builder;

 private:
  friend struct Builder;
  std::size_t dim_ = 1;
  std::vector<StepAtom> atoms_;
  AliasTable alias_;
  double alpha_ = 2.0;
  Vector drift_{};
  Matrix covariance_{};
  std::int64_t tail_cutoff_ = 0;
  double truncated_tail_mass_ = 0.0;
  bool heavy_tailed_ = false;
  bool symmetric_ = false;
  bool checked_ = true;
  std::string preset_;
  std::string descriptor_;
  Site smin_{};
  Site smax_{};
};

struct StepLaw::Builder {
  std::size_t dim = 1;
  std::vector<StepAtom> atoms;
  double alpha = 2.0;
  std::int64_t tail_cutoff = 0;
  double truncated_tail_mass = 0.0;
  bool heavy_tailed = false;
  bool check_hypotheses = true;
  std::string preset;
  std::string descriptor;

  StepLaw build() &&;
};

// Presets.
StepLaw lazy_srw(std::size_t d, double hold);
StepLaw product_lazy(std::size_t d, double hold);
StepLaw zero_mean_table(std::size_t d, std::vector<StepAtom> table);
StepLaw table_law(std::size_t d, std::vector<StepAtom> table);
StepLaw drift_pareto(double drift, double beta, std::int64_t k_max = 1'000'000);
StepLaw sym_stable_lattice(double alpha, std::int64_t k_max = 1'000'000);
/// Deterministic walk x -> x + step. A degenerate test fixture: it violates
/// aperiodicity and is exempt from the hypothesis checks.
StepLaw shift_law(std::size_t d, Site step);

/// Parameter bag for building presets by name (CLI and scripting entry).
struct StepLawParams {
  std::map<std::string, double> numbers;
  std::vector<StepAtom> table;
  Site step{};
};

StepLaw make_step_law(std::string_view preset, const StepLawParams& params);

/// True when the integer vectors generate all of Z^d.
bool generates_lattice(std::span<const Site> vectors, std::size_t d);

}  // namespace walklab
