#include <cstdlib>
#include <iostream>

#include "CLI11.hpp"

#include "walklab/errors.hpp"
#include "walklab_cli/commands.hpp"
#include "walklab_cli/config.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfig = 2;
constexpr int kBudget = 3;

/// --threads, then the config, then WALKLAB_THREADS, then 1.
unsigned resolve_threads(unsigned flag, unsigned from_config) {
  if (flag > 0) return flag;
  if (from_config > 0) return from_config;
  if (const char* env = std::getenv("WALKLAB_THREADS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v <= 1024) return static_cast<unsigned>(v);
    throw walklab::cli::ConfigError("WALKLAB_THREADS must be an integer in 1..1024");
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace walklab;
  CLI::App app{"Random-walk Birkhoff sums of global observables", "walklab"};
  app.set_version_flag("--version", cli::version_string());
  std::string config_path, out_dir, command;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  app.add_option("command", command, "simulate | exact | ocean-demo | chain-sweep | llt-report | beta-fit")
      ->required()
      ->check(CLI::IsMember(cli::command_names()));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--out", out_dir, "output directory (overrides the config)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1u, 1024u));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    auto config = cli::load_config(config_path);
    if (config.command.empty()) config.command = command;
    if (config.command != command)
      throw cli::ConfigError("config command '" + config.command + "' does not match '" + command + "'");
    if (seed) config.seed = *seed;
    if (!out_dir.empty()) config.out = out_dir;
    if (config.out.empty()) config.out = "walklab-out";
    cli::run_command(config, config.out, resolve_threads(threads, config.threads));
    std::cout << config.out << "/summary.json\n";
    return kOk;
  } catch (const BudgetError& e) {
    std::cerr << "walklab: budget exceeded: " << e.what() << '\n';
    return kBudget;
  } catch (const HypothesisError& e) {
    std::cerr << "walklab: invalid input: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "walklab: error: " << e.what() << '\n';
    return kConfig;
  }
}
