#pragma once

#include <functional>
#include <map>
#include <vector>

#include "walklab/step_law.hpp"

namespace walklab {

/// Brute-force reference: every one of |support|^N step sequences, weighted
/// by its probability. Shares no code with the kernel or moment paths, which
/// makes it usable as an oracle for them. Cost grows exponentially in N.
struct PathEnumeration {
  std::size_t horizon = 0;
  /// Law of S_N.
  std::map<Site, double> endpoint;
  /// E F(S_n), n = 1..N (index n-1).
  std::vector<double> mean_f;
  /// E F(S_n1) F(S_n2), 1 <= n1, n2 <= N (indices n-1).
  std::vector<std::vector<double>> pair;
  double mean_t = 0.0;
  double second_t = 0.0;
};

PathEnumeration enumerate_paths(const StepLaw& law, const std::function<double(const Site&)>& f, std::size_t horizon,
                                Site start = {});

}  // namespace walklab
