#include "walklab/enumerate.hpp"

#include <cmath>

#include "walklab/errors.hpp"

namespace walklab {

PathEnumeration enumerate_paths(const StepLaw& law, const std::function<double(const Site&)>& f, std::size_t horizon,
                                Site start) {
  const auto atoms = law.support();
  const double paths = std::pow(static_cast<double>(atoms.size()), static_cast<double>(horizon));
  if (paths > 5e7) throw BudgetError("enumerate_paths: " + std::to_string(paths) + " paths exceed the budget");

  PathEnumeration out;
  out.horizon = horizon;
  out.mean_f.assign(horizon, 0.0);
  out.pair.assign(horizon, std::vector<double>(horizon, 0.0));

  std::vector<std::size_t> choice(horizon, 0);
  std::vector<double> values(horizon);
  for (;;) {
    double weight = 1.0;
    Site s = start;
    double t = 0.0;
    for (std::size_t n = 0; n < horizon; ++n) {
      const auto& atom = atoms[choice[n]];
      weight *= atom.prob;
      s = s + atom.site;
      values[n] = f(s);
      t += values[n];
    }
    out.endpoint[s] += weight;
    out.mean_t += weight * t;
    out.second_t += weight * t * t;
    for (std::size_t a = 0; a < horizon; ++a) {
      out.mean_f[a] += weight * values[a];
      for (std::size_t b = 0; b < horizon; ++b) out.pair[a][b] += weight * values[a] * values[b];
    }
    // Odometer increment over the step choices.
    std::size_t k = 0;
    while (k < horizon && ++choice[k] == atoms.size()) choice[k++] = 0;
    if (k == horizon) break;
  }
  return out;
}

}  // namespace walklab
