#pragma once

#include <cstdint>
#include <vector>

#include "walklab/observable.hpp"
#include "walklab/step_law.hpp"
#include "walklab_cli/config.hpp"

namespace walklab::cli {

/// {"preset": ..., "d", "hold", "v", "beta", "k_max", "alpha", "table": [[x.., p]], "step": [..]}
StepLaw law_from_config(const json& j);

/// {"kind": ..., kind-specific keys}; `dim` is the default dimension.
Observable observable_from_config(const json& j, std::size_t dim);

/// {"schedule": "geometric", "n_max", "theta", "n_min"} | {"schedule": "dyadic", "k_min", "k_max"}
/// | {"schedule": "list", "n": [..]}
std::vector<std::uint64_t> checkpoints_from_config(const json& j);

Site site_from_json(const json& j, const std::string& what);

}  // namespace walklab::cli
