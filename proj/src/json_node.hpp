#pragma once

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

#include "tics/error.hpp"

namespace tics::detail {

using nlohmann::json;

// Small helpers that keep the JSON path of the element being validated.
class Node {
 public:
  Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const json& raw() const { return j_; }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_, what); }

  void expect_object() const {
    if (!j_.is_object()) fail("expected an object");
  }
  void expect_array() const {
    if (!j_.is_array()) fail("expected an array");
  }

  void only_keys(std::initializer_list<std::string_view> allowed) const {
    for (const auto& [key, value] : j_.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        Node(value, path_ + "." + key).fail("unknown key");
      }
    }
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  Node at(const std::string& key) const {
    if (!j_.contains(key)) throw ConfigError(path_ + "." + key, "missing required key");
    return Node(j_.at(key), path_ + "." + key);
  }
  Node at(std::size_t i) const { return Node(j_.at(i), path_ + "[" + std::to_string(i) + "]"); }
  std::size_t size() const { return j_.size(); }

  std::string str() const {
    if (!j_.is_string()) fail("expected a string");
    return j_.get<std::string>();
  }
  std::string name() const {
    auto s = str();
    if (s.empty()) fail("name must not be empty");
    if (s.find_first_of(", \t\r\n\"") != std::string::npos) fail("name must not contain commas, quotes or whitespace");
    return s;
  }
  double number() const {
    if (!j_.is_number()) fail("expected a number");
    return j_.get<double>();
  }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) const {
    if (!j_.is_number_integer()) fail("expected an integer");
    const auto v = j_.get<std::int64_t>();
    if (v < lo || v > hi) fail("must be in " + std::to_string(lo) + ".." + std::to_string(hi));
    return v;
  }
  bool boolean() const {
    if (!j_.is_boolean()) fail("expected true or false");
    return j_.get<bool>();
  }

 private:
  const json& j_;
  std::string path_;
};

}  // namespace tics::detail
