#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "walklab_cli/config.hpp"

namespace walklab::cli {

const std::vector<std::string>& command_names();

/// Runs one command, writing CSVs and summary.json into `out`.
/// Throws HypothesisError / ConfigError (exit 2) or BudgetError (exit 3).
void run_command(const RunConfig& config, const std::filesystem::path& out, unsigned threads);

std::string version_string();

}  // namespace walklab::cli
