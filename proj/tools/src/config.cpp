#include "walklab_cli/config.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

namespace walklab::cli {

ConfigNode::ConfigNode(const json& value, std::string path)
    : ConfigNode(value, std::move(path), std::make_shared<Tracker>()) {}

ConfigNode::ConfigNode(const json& value, std::string path, std::shared_ptr<Tracker> tracker)
    : value_(&value), path_(std::move(path)), tracker_(std::move(tracker)) {
  if (!value_->is_object()) throw ConfigError("config: " + (path_.empty() ? "top level" : path_) + " must be an object");
}

std::string ConfigNode::qualify(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

bool ConfigNode::has(const std::string& key) const { return value_->contains(key) && !(*value_)[key].is_null(); }

const json& ConfigNode::raw(const std::string& key) const {
  if (!value_->contains(key)) throw ConfigError("config: missing required key " + qualify(key));
  tracker_->used.insert(qualify(key));
  return (*value_)[key];
}

ConfigNode ConfigNode::child(const std::string& key) const {
  const json& v = raw(key);
  tracker_->used.insert(qualify(key) + "{}");
  return ConfigNode(v, qualify(key), tracker_);
}

std::optional<ConfigNode> ConfigNode::child_if(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return child(key);
}

std::vector<ConfigNode> ConfigNode::children(const std::string& key) const {
  const json& v = raw(key);
  if (!v.is_array()) throw ConfigError("config: " + qualify(key) + " must be an array");
  tracker_->used.insert(qualify(key) + "{}");
  std::vector<ConfigNode> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = qualify(key) + "[" + std::to_string(i) + "]";
    tracker_->used.insert(p + "{}");
    out.push_back(ConfigNode(v[i], p, tracker_));
  }
  return out;
}

void ConfigNode::walk(const json& value, const std::string& path) const {
  if (value.is_object()) {
    for (const auto& [k, v] : value.items()) {
      const std::string p = path.empty() ? k : path + "." + k;
      if (!tracker_->used.contains(p)) throw ConfigError("config: unknown key " + p);
      if (tracker_->used.contains(p + "{}")) walk(v, p);
    }
  } else if (value.is_array()) {
    for (std::size_t i = 0; i < value.size(); ++i) {
      const std::string p = path + "[" + std::to_string(i) + "]";
      if (tracker_->used.contains(p + "{}")) walk(value[i], p);
    }
  }
}

void ConfigNode::reject_unknown() const { walk(*value_, path_); }

RunConfig RunConfig::from_json(const json& j) {
  ConfigNode root(j, "");
  RunConfig c;
  c.command = root.get<std::string>("command");
  c.seed = root.get<std::uint64_t>("seed", c.seed);
  c.trials = root.get<std::uint64_t>("trials", c.trials);
  for (auto [key, slot] : {std::pair{"law", &c.law}, {"observable", &c.observable},
                           {"checkpoints", &c.checkpoints}, {"options", &c.options}}) {
    if (!root.has(key)) continue;
    *slot = root.raw(key);
    if (!slot->is_object()) throw ConfigError(std::string("config: ") + key + " must be an object");
  }
  if (root.has("tolerances")) {
    const json& t = root.raw("tolerances");
    if (!t.is_object()) throw ConfigError("config: tolerances must be an object");
    for (const auto& [k, v] : t.items()) {
      if (!v.is_number()) throw ConfigError("config: tolerances." + k + " must be a number");
      c.tolerances[k] = v.get<double>();
    }
  }
  c.out = root.get<std::string>("out", c.out);
  c.threads = root.get<unsigned>("threads", c.threads);
  root.reject_unknown();
  return c;
}

json RunConfig::to_json() const {
  json j = json::object();
  j["command"] = command;
  j["seed"] = seed;
  if (trials != 0) j["trials"] = trials;
  if (!law.is_null()) j["law"] = law;
  if (!observable.is_null()) j["observable"] = observable;
  if (!checkpoints.is_null()) j["checkpoints"] = checkpoints;
  if (!options.is_null()) j["options"] = options;
  if (!tolerances.empty()) j["tolerances"] = tolerances;
  if (!out.empty()) j["out"] = out;
  if (threads != 0) j["threads"] = threads;
  return j;
}

std::string RunConfig::hash() const {
  json j = to_json();
  j.erase("out");
  j.erase("threads");
  const std::string text = j.dump();
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr);
  std::ostringstream hex;
  for (unsigned i = 0; i < 8; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return hex.str();
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + path + " is not valid JSON (" + e.what() + ")");
  }
  return RunConfig::from_json(j);
}

double tolerance(const RunConfig& config, const std::string& key, double fallback) {
  const auto it = config.tolerances.find(key);
  return it == config.tolerances.end() ? fallback : it->second;
}

}  // namespace walklab::cli
