#pragma once

#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "highway_rl/errors.hpp"

namespace highway_rl {

/// Strict reader for one JSON config object: optional known keys override
/// defaults, unknown keys are errors. Messages carry the dotted field path.
class FieldReader {
 public:
  FieldReader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <class T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(field(key) + ": wrong type (got " + it->dump() + ")");
    }
  }

  /// Returns the sub-object for `key`, or an empty object if absent.
  const nlohmann::json& child(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? empty_ : *it;
  }
  bool has(const std::string& key) const { return j_.contains(key); }

  std::string field(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()) + ": unknown field");
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
  const nlohmann::json empty_ = nlohmann::json::object();
};

}  // namespace highway_rl
