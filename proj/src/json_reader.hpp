#pragma once

// Strict reading of JSON objects: typed getters that record which keys were
// consumed, and finish() rejects the rest.

#include "mcflow/error.hpp"

#include <json.hpp>

#include <cmath>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace mcflow::detail {

class ObjectReader {
 public:
  ObjectReader(const nlohmann::json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ValidationError(where_, "expected a JSON object");
  }

  std::string field(const std::string& key) const { return where_.empty() ? key : where_ + "." + key; }

  bool has(const std::string& key) const { return j_.contains(key); }

  const nlohmann::json* get(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::optional<double> number(const std::string& key) {
    const auto* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_number()) throw ValidationError(field(key), "expected a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) throw ValidationError(field(key), "must be finite");
    return x;
  }
  double number(const std::string& key, double fallback) { return number(key).value_or(fallback); }

  std::optional<long> integer(const std::string& key) {
    const auto* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_number_integer()) throw ValidationError(field(key), "expected an integer");
    return v->get<long>();
  }
  long integer(const std::string& key, long fallback) { return integer(key).value_or(fallback); }

  std::optional<bool> boolean(const std::string& key) {
    const auto* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_boolean()) throw ValidationError(field(key), "expected true or false");
    return v->get<bool>();
  }

  std::optional<std::string> string(const std::string& key) {
    const auto* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_string()) throw ValidationError(field(key), "expected a string");
    return v->get<std::string>();
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    const auto* v = get(key);
    if (!v) return std::nullopt;
    if (!v->is_array()) throw ValidationError(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& x : *v) {
      if (!x.is_number()) throw ValidationError(field(key), "expected an array of numbers");
      out.push_back(x.get<double>());
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key())) throw ValidationError(field(it.key()), "unknown key");
    }
  }

 private:
  const nlohmann::json& j_;
  std::string where_;
  std::set<std::string> used_;
};

}  // namespace mcflow::detail
