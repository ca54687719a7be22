#include "walklab/trajectory.hpp"

#include <algorithm>

namespace walklab {

Trajectory sample_path(const StepLaw& law, std::uint64_t seed, std::uint64_t steps, bool record, std::uint64_t trial) {
  Trajectory t;
  t.seed = seed;
  t.trial = trial;
  t.steps = steps;
  if (record) {
    t.positions.reserve(steps + 1);
    t.positions.push_back(Site{});
  }
  Walker walker(law, seed, trial);
  const std::size_t d = law.dimension();
  for (std::uint64_t n = 0; n < steps; ++n) {
    const Site& s = walker.step();
    for (std::size_t i = 0; i < d; ++i) {
      t.min_position[i] = std::min(t.min_position[i], s[i]);
      t.max_position[i] = std::max(t.max_position[i], s[i]);
    }
    if (record) t.positions.push_back(s);
  }
  t.final_position = walker.position();
  return t;
}

}  // namespace walklab
