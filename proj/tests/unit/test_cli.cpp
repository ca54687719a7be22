#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "walklab_cli/commands.hpp"
#include "walklab_cli/config.hpp"
#include "walklab_cli/factories.hpp"

using namespace walklab;
using namespace walklab::cli;
namespace fs = std::filesystem;

namespace {

const char* kSimulate = R"({
  "command": "simulate", "seed": 9, "trials": 40,
  "law": {"preset": "lazy_srw", "d": 1, "hold": 0.5},
  "observable": {"kind": "constant", "value": 1},
  "checkpoints": {"schedule": "dyadic", "k_min": 3, "k_max": 9},
  "tolerances": {"ks_max": 0.05}
})";

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("walklab_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config round-trips through JSON") {
  const auto c = RunConfig::from_json(json::parse(kSimulate));
  CHECK(c.seed == 9);
  CHECK(c.trials == 40);
  CHECK(c.tolerances.at("ks_max") == 0.05);
  const auto again = RunConfig::from_json(json::parse(c.to_json().dump()));
  CHECK(again == c);
  CHECK(again.hash() == c.hash());
}

TEST_CASE("hash ignores key order, output directory and threads") {
  const auto a = RunConfig::from_json(json::parse(kSimulate));
  const auto b = RunConfig::from_json(json::parse(R"({
    "tolerances": {"ks_max": 0.05},
    "checkpoints": {"k_max": 9, "k_min": 3, "schedule": "dyadic"},
    "observable": {"value": 1, "kind": "constant"},
    "law": {"hold": 0.5, "d": 1, "preset": "lazy_srw"},
    "trials": 40, "seed": 9, "command": "simulate", "out": "elsewhere", "threads": 8
  })"));
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
}

TEST_CASE("hash changes with a tolerance or the seed") {
  const auto a = RunConfig::from_json(json::parse(kSimulate));
  auto b = a;
  b.tolerances["ks_max"] = 0.04;
  CHECK(a.hash() != b.hash());
  auto c = a;
  c.seed = 10;
  CHECK(a.hash() != c.hash());
}

TEST_CASE("unknown keys are rejected") {
  auto j = json::parse(kSimulate);
  j["trails"] = 3;
  CHECK_THROWS_AS(RunConfig::from_json(j), ConfigError);
  CHECK_THROWS_AS(law_from_config(json{{"preset", "lazy_srw"}, {"d", 1}, {"hld", 0.5}}), ConfigError);
  CHECK_THROWS_AS(observable_from_config(json{{"kind", "heaviside"}, {"extra", 1}}, 1), ConfigError);
  CHECK_THROWS_AS(checkpoints_from_config(json{{"schedule", "dyadic"}, {"k_min", 1}, {"k_max", 3}, {"x", 0}}),
                  ConfigError);
  auto bad_opt = RunConfig::from_json(json::parse(kSimulate));
  bad_opt.options = {{"statistc", "rms"}};
  CHECK_THROWS_AS(run_command(bad_opt, scratch("unknown_option"), 1), ConfigError);
  auto bad_tol = RunConfig::from_json(json::parse(kSimulate));
  bad_tol.tolerances["oracle"] = 1e-12;
  CHECK_THROWS_AS(run_command(bad_tol, scratch("unknown_tolerance"), 1), ConfigError);
}

TEST_CASE("factories build the named objects") {
  const auto law = law_from_config({{"preset", "product_lazy"}, {"d", 2}, {"hold", 0.5}});
  CHECK(law.dimension() == 2);
  const auto f = observable_from_config({{"kind", "periodic"}, {"period", {4}}, {"values", {1, 1, -1, -1}}}, 1);
  CHECK(f(Site{5}) == 1.0);
  CHECK(f(Site{6}) == -1.0);
  const auto g = observable_from_config(
      {{"kind", "affine"}, {"of", {{"kind", "heaviside"}}}, {"a", 2.0}, {"c", -1.0}}, 1);
  CHECK(g(Site{3}) == 1.0);
  CHECK(g(Site{-3}) == -1.0);
  CHECK(checkpoints_from_config({{"schedule", "list"}, {"n", {1, 5, 9}}}) == std::vector<std::uint64_t>{1, 5, 9});
  CHECK_THROWS_AS(checkpoints_from_config({{"schedule", "list"}, {"n", {5, 5}}}), ConfigError);
  CHECK_THROWS_AS(law_from_config({{"preset", "sym_stable_lattice"}, {"alpha", 1.0}}), HypothesisError);
}

TEST_CASE("every output embeds the config hash and seed") {
  const auto c = RunConfig::from_json(json::parse(kSimulate));
  const auto dir = scratch("embed");
  run_command(c, dir, 1);
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(dir)) {
    ++files;
    const auto text = slurp(entry.path());
    CHECK_MESSAGE(text.find(c.hash()) != std::string::npos, entry.path().string());
    if (entry.path().extension() == ".csv") CHECK(text.find("# seed=9\n") != std::string::npos);
  }
  CHECK(files >= 4);
  const auto summary = json::parse(slurp(dir / "summary.json"));
  CHECK(summary["growth"]["slope"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exact command: constant observable has zero variance") {
  auto c = RunConfig::from_json(json::parse(R"({
    "command": "exact",
    "law": {"preset": "lazy_srw", "d": 1, "hold": 0.5},
    "observable": {"kind": "constant", "value": 2.5},
    "options": {"horizon": 40}
  })"));
  const auto dir = scratch("exact_constant");
  run_command(c, dir, 1);
  std::istringstream rows(slurp(dir / "moments.csv"));
  std::string line;
  std::size_t data = 0;
  bool header = false;
  while (std::getline(rows, line)) {
    if (line.starts_with("#")) continue;
    if (!header) {
      header = true;
      CHECK(line == "N,mean,second,var");
      continue;
    }
    ++data;
    CHECK(line.substr(line.rfind(',') + 1) == "0");
  }
  CHECK(data == 40);
}

TEST_CASE("budget and hypothesis failures surface as the right exceptions") {
  auto big = RunConfig::from_json(json::parse(R"({
    "command": "exact",
    "law": {"preset": "lazy_srw", "d": 1, "hold": 0.5},
    "observable": {"kind": "heaviside"},
    "options": {"horizon": 10000000}
  })"));
  CHECK_THROWS_AS(run_command(big, scratch("big"), 1), BudgetError);
  auto chain = RunConfig::from_json(json::parse(R"({
    "command": "chain-sweep",
    "options": {"grid": 3, "chains": [{"p1": 0.7, "q1": 0.5, "eta1": -0.2, "q2": 0.1, "p2": 0.4, "eta2": 0.5}]}
  })"));
  CHECK_THROWS_AS(run_command(chain, scratch("chain"), 1), HypothesisError);
}
