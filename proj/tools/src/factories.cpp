#include "walklab_cli/factories.hpp"

#include <fstream>
#include <memory>

#include "walklab/birkhoff.hpp"

namespace walklab::cli {

Site site_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || j.size() > kMaxDim)
    throw ConfigError("config: " + what + " must be an integer array of length 1.." + std::to_string(kMaxDim));
  Site s{};
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer()) throw ConfigError("config: " + what + " must hold integers");
    s[i] = j[i].get<std::int64_t>();
  }
  return s;
}

StepLaw law_from_config(const json& j) {
  if (j.is_null()) throw ConfigError("config: missing required key law");
  ConfigNode node(j, "law");
  const auto preset = node.get<std::string>("preset");
  StepLawParams params;
  for (const char* key : {"d", "hold", "v", "beta", "k_max", "alpha"})
    if (node.has(key)) params.numbers[key] = node.get<double>(key);
  const std::size_t d = static_cast<std::size_t>(params.numbers.contains("d") ? params.numbers["d"] : 1.0);
  if (node.has("table")) {
    const json& t = node.raw("table");
    if (!t.is_array()) throw ConfigError("config: law.table must be an array of [x.., p] rows");
    for (const auto& row : t) {
      if (!row.is_array() || row.size() != d + 1) throw ConfigError("config: law.table rows need d coordinates and p");
      StepAtom a;
      for (std::size_t i = 0; i < d; ++i) a.site[i] = row[i].get<std::int64_t>();
      a.prob = row[d].get<double>();
      params.table.push_back(a);
    }
  }
  if (node.has("step")) params.step = site_from_json(node.raw("step"), "law.step");
  node.reject_unknown();
  return make_step_law(preset, params);
}

namespace {

std::vector<double> numbers(const json& j, const std::string& what) {
  if (!j.is_array()) throw ConfigError("config: " + what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) throw ConfigError("config: " + what + " must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

std::shared_ptr<const OceanSchedule> schedule_from(const ConfigNode& node) {
  return std::make_shared<OceanSchedule>(node.get<double>("alpha", 2.0), node.get<std::int64_t>("b1", 3),
                                         node.get<std::string>("a_rule", "log"));
}

}  // namespace

Observable observable_from_config(const json& j, std::size_t dim) {
  if (j.is_null()) throw ConfigError("config: missing required key observable");
  ConfigNode node(j, "observable");
  const auto kind = node.get<std::string>("kind");
  const std::size_t d = node.get<std::size_t>("d", dim);
  std::optional<Observable> f;
  if (kind == "constant") {
    f = make_constant(d, node.get<double>("value"));
  } else if (kind == "parity") {
    f = make_parity(d);
  } else if (kind == "periodic") {
    f = make_periodic(d, site_from_json(node.raw("period"), "observable.period"),
                      numbers(node.raw("values"), "observable.values"));
  } else if (kind == "quasiperiodic") {
    const auto profile = node.get<std::string>("profile", "golden_cos");
    if (profile != "golden_cos") throw ConfigError("config: unknown quasiperiodic profile '" + profile + "'");
    f = make_quasiperiodic(golden_cos_spec(d, static_cast<long double>(node.get<double>("omega", 0.0))));
  } else if (kind == "scenery") {
    f = make_scenery(d, node.get<std::uint64_t>("seed"));
  } else if (kind == "heaviside") {
    f = make_heaviside();
  } else if (kind == "ocean") {
    f = make_ocean(schedule_from(node));
  } else if (kind == "ocean_multidim") {
    f = make_ocean_multidim(d, schedule_from(node));
  } else if (kind == "table") {
    std::map<Site, double> values;
    if (node.has("file")) {
      const auto path = node.get<std::string>("file");
      std::ifstream in(path);
      if (!in) throw ConfigError("config: cannot open observable table " + path);
      values = read_table_csv(in, d);
    } else {
      for (const auto& row : node.raw("values")) {
        if (!row.is_array() || row.size() != d + 1) throw ConfigError("config: observable.values rows need d + 1 entries");
        Site s{};
        for (std::size_t i = 0; i < d; ++i) s[i] = row[i].get<std::int64_t>();
        values[s] = row[d].get<double>();
      }
    }
    f = make_table(d, std::move(values), node.get<double>("fallback", 0.0));
  } else if (kind == "affine") {
    f = affine(observable_from_config(node.raw("of"), d), node.get<double>("a"), node.get<double>("c", 0.0));
  } else {
    throw ConfigError("config: unknown observable kind '" + kind + "'");
  }
  node.reject_unknown();
  return *f;
}

std::vector<std::uint64_t> checkpoints_from_config(const json& j) {
  if (j.is_null()) throw ConfigError("config: missing required key checkpoints");
  ConfigNode node(j, "checkpoints");
  const auto schedule = node.get<std::string>("schedule", "geometric");
  std::vector<std::uint64_t> out;
  if (schedule == "geometric") {
    out = geometric_checkpoints(node.get<std::uint64_t>("n_max"), node.get<double>("theta", 1.25),
                                node.get<std::uint64_t>("n_min", 1));
  } else if (schedule == "dyadic") {
    out = dyadic_checkpoints(node.get<unsigned>("k_min"), node.get<unsigned>("k_max"));
  } else if (schedule == "list") {
    out = node.get<std::vector<std::uint64_t>>("n");
    for (std::size_t k = 0; k < out.size(); ++k)
      if (out[k] == 0 || (k > 0 && out[k] <= out[k - 1]))
        throw ConfigError("config: checkpoints.n must be positive and strictly increasing");
  } else {
    throw ConfigError("config: unknown checkpoint schedule '" + schedule + "'");
  }
  node.reject_unknown();
  if (out.empty()) throw ConfigError("config: empty checkpoint list");
  return out;
}

}  // namespace walklab::cli
