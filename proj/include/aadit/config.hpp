// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef AADIT_CONFIG_HPP_
#define AADIT_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "aadit/types.hpp"

namespace aadit {

/// Shortest decimal text that parses back to the identical double.
std::string format_double(double v);

/// Flat `key=value` text, one entry per line, in insertion order.
class KeyValueWriter {
 public:
  void add(std::string_view key, std::string_view value);
  void add(std::string_view key, double value) { add(key, format_double(value)); }
  void add(std::string_view key, std::int64_t value) { add(key, std::to_string(value)); }
  void add(std::string_view key, bool value) {
    add(key, std::string_view(value ? "true" : "false"));
  }
  void add(std::string_view key, const std::vector<Index>& values);
  void add(std::string_view key, const std::vector<double>& values);

  std::string str() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Parsed `key=value` text. Blank lines and `#` comments are ignored; later
/// duplicates override earlier ones. The typed `read` overloads leave the
/// target untouched when the key is absent and throw ConfigError on
/// malformed values.
class KeyValueReader {
 public:
  KeyValueReader() = default;
  static KeyValueReader parse(std::string_view text, std::string_view origin);

  void set(std::string key, std::string value) { values_[std::move(key)] = std::move(value); }
  bool has(std::string_view key) const { return values_.count(std::string(key)) > 0; }

  void read(std::string_view key, std::string& out) const;
  void read(std::string_view key, double& out) const;
  void read(std::string_view key, std::int64_t& out) const;
  void read(std::string_view key, std::uint64_t& out) const;
  void read(std::string_view key, bool& out) const;
  void read(std::string_view key, std::vector<Index>& out) const;
  void read(std::string_view key, std::vector<double>& out) const;

  /// Keys present in the text that no `read` call has consumed.
  std::vector<std::string> unused_keys() const;

 private:
  const std::string* find(std::string_view key) const;

  std::map<std::string, std::string, std::less<>> values_;
  mutable std::set<std::string, std::less<>> consumed_;
};

double parse_double(std::string_view text, std::string_view what);
std::int64_t parse_int(std::string_view text, std::string_view what);
std::vector<std::string> split(std::string_view text, char sep);

}  // namespace aadit

#endif  // AADIT_CONFIG_HPP_
