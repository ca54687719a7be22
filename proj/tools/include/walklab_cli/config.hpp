#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "walklab/errors.hpp"

namespace walklab::cli {

using nlohmann::json;

/// Malformed or inconsistent configuration (exit code 2).
class ConfigError : public HypothesisError {
 public:
  explicit ConfigError(const std::string& what) : HypothesisError(what) {}
};

/// Read access to a JSON object that remembers which keys were looked at, so
/// that anything left over can be reported as unknown.
class ConfigNode {
 public:
  ConfigNode(const json& value, std::string path);

  const std::string& path() const noexcept { return path_; }
  bool has(const std::string& key) const;

  template <typename T>
  T get(const std::string& key) const {
    const json& v = raw(key);
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config: " + qualify(key) + " has the wrong type");
    }
  }

  template <typename T>
  T get(const std::string& key, T fallback) const {
    return has(key) ? get<T>(key) : fallback;
  }

  /// The value under key, consumed as a whole (no unknown-key check inside).
  const json& raw(const std::string& key) const;
  ConfigNode child(const std::string& key) const;
  std::optional<ConfigNode> child_if(const std::string& key) const;
  /// Elements of an array of objects.
  std::vector<ConfigNode> children(const std::string& key) const;

  /// Throws ConfigError naming the first key nobody asked for.
  void reject_unknown() const;

 private:
  struct Tracker {
    std::set<std::string> used;
  };
  ConfigNode(const json& value, std::string path, std::shared_ptr<Tracker> tracker);
  std::string qualify(const std::string& key) const;
  void walk(const json& value, const std::string& path) const;

  const json* value_;
  std::string path_;
  std::shared_ptr<Tracker> tracker_;
};

struct RunConfig {
  std::string command;
  std::uint64_t seed = 1;
  std::uint64_t trials = 0;
  json law;
  json observable;
  json checkpoints;
  json options;
  std::map<std::string, double> tolerances;
  std::string out;
  unsigned threads = 0;

  static RunConfig from_json(const json& j);
  json to_json() const;
  /// SHA-256 (first 16 hex digits) of the canonical JSON without out and threads.
  std::string hash() const;

  bool operator==(const RunConfig&) const = default;
};

RunConfig load_config(const std::string& path);

/// Tolerance override or the default.
double tolerance(const RunConfig& config, const std::string& key, double fallback);

}  // namespace walklab::cli
