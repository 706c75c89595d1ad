#pragma once

// Strict readers shared by the case and scenario parsers.

#include <algorithm>
#include <initializer_list>
#include <string>
#include <string_view>

#include <Eigen/Dense>
#include <json.hpp>

#include "gridse/error.hpp"

namespace gridse::detail {

using nlohmann::json;

[[noreturn]] inline void malformed(const std::string& what) {
  throw Error(ErrorKind::MalformedDocument, what);
}

inline void require_keys(const json& obj, std::string_view where, std::initializer_list<std::string_view> required,
                         std::initializer_list<std::string_view> optional) {
  if (!obj.is_object()) malformed(std::string(where) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    const bool known = std::find(required.begin(), required.end(), key) != required.end() ||
                       std::find(optional.begin(), optional.end(), key) != optional.end();
    if (!known) malformed(std::string(where) + ": unknown key '" + key + "'");
  }
  for (auto key : required) {
    if (!obj.contains(std::string(key))) {
      malformed(std::string(where) + ": missing key '" + std::string(key) + "'");
    }
  }
}

inline double read_number(const json& obj, const char* key, std::string_view where, double fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) malformed(std::string(where) + "." + key + " must be a number");
  return v.get<double>();
}

inline int read_id(const json& obj, const char* key, std::string_view where) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) malformed(std::string(where) + "." + key + " must be an integer");
  return v.get<int>();
}

inline Eigen::VectorXd read_vector(const json& obj, const char* key, std::string_view where) {
  const auto& v = obj.at(key);
  if (!v.is_array()) malformed(std::string(where) + "." + key + " must be an array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) malformed(std::string(where) + "." + key + " must be an array of numbers");
    out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
  }
  return out;
}

}  // namespace gridse::detail
