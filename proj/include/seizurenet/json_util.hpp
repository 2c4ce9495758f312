#pragma once

#include <set>
#include <string>
#include <type_traits>

#include <nlohmann/json.hpp>

#include "seizurenet/errors.hpp"

namespace seizurenet {

// Reads one JSON object field by field; finish() rejects keys nobody asked
// for. Type errors surface as ConfigError naming the dotted key path.
class StrictObject {
 public:
  StrictObject(const nlohmann::ordered_json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <typename T>
  void optional(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!j_.at(key).is_number_unsigned()) throw ConfigError(where(key) + " must be a non-negative integer");
    }
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::ordered_json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  template <typename T>
  void required(const std::string& key, T& out) {
    if (!j_.contains(key)) throw ConfigError(where(key) + " is required");
    optional(key, out);
  }

  const nlohmann::ordered_json& child(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string where(const std::string& key = {}) const {
    const std::string base = path_.empty() ? "config" : path_;
    return key.empty() ? base : base + "." + key;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) throw ConfigError("unknown key '" + where(key) + "'");
    }
  }

 private:
  const nlohmann::ordered_json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace seizurenet
