#pragma once

#include <cstdint>
#include <vector>

#include "walklab/rng.hpp"
#include "walklab/step_law.hpp"

namespace walklab {

/// Streaming walker: S_0 = 0, one step per call. Owns its random stream.
class Walker {
 public:
  Walker(const StepLaw& law, std::uint64_t seed, std::uint64_t trial = 0, Site start = {})
      : law_(&law), rng_(seed, trial, streams::kPath), position_(start) {}

  const Site& step() noexcept {
    const Site& x = law_->sample(rng_);
    for (std::size_t i = 0; i < kMaxDim; ++i) position_[i] += x[i];
    ++time_;
    return position_;
  }

  const Site& position() const noexcept { return position_; }
  std::uint64_t time() const noexcept { return time_; }
  const StepLaw& law() const noexcept { return *law_; }

 private:
  const StepLaw* law_;
  RandomStream rng_;
  Site position_;
  std::uint64_t time_ = 0;
};

struct Trajectory {
  std::uint64_t seed = 0;
  std::uint64_t trial = 0;
  std::uint64_t steps = 0;
  Site final_position{};
  Site min_position{};
  Site max_position{};
  /// Positions S_0..S_N, only when recording was requested.
  std::vector<Site> positions;
};

Trajectory sample_path(const StepLaw& law, std::uint64_t seed, std::uint64_t steps, bool record = false,
                       std::uint64_t trial = 0);

}  // namespace walklab
