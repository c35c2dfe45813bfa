// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#include "aadit/config.hpp"

#include <charconv>
#include <cmath>

namespace aadit {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
  text = trim(text);
  double v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw ConfigError(std::string(what) + ": '" + std::string(text) + "' is not a finite number");
  }
  return v;
}

std::int64_t parse_int(std::string_view text, std::string_view what) {
  text = trim(text);
  std::int64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw ConfigError(std::string(what) + ": '" + std::string(text) + "' is not an integer");
  }
  return v;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  text = trim(text);
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.emplace_back(trim(text.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

void KeyValueWriter::add(std::string_view key, std::string_view value) {
  entries_.emplace_back(std::string(key), std::string(value));
}

void KeyValueWriter::add(std::string_view key, const std::vector<Index>& values) {
  add(key, join(values));
}

void KeyValueWriter::add(std::string_view key, const std::vector<double>& values) {
  add(key, join(values));
}

std::string KeyValueWriter::str() const {
  std::string out;
  for (const auto& [key, value] : entries_) {
    out += key;
    out += '=';
    out += value;
    out += '\n';
  }
  return out;
}

KeyValueReader KeyValueReader::parse(std::string_view text, std::string_view origin) {
  KeyValueReader reader;
  std::size_t line_no = 0;
  for (const std::string& raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos || trim(line.substr(0, eq)).empty()) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) +
                        ": expected key=value");
    }
    reader.set(std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
  }
  return reader;
}

const std::string* KeyValueReader::find(std::string_view key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  consumed_.insert(it->first);
  return &it->second;
}

void KeyValueReader::read(std::string_view key, std::string& out) const {
  if (const auto* v = find(key)) out = *v;
}

void KeyValueReader::read(std::string_view key, double& out) const {
  if (const auto* v = find(key)) out = parse_double(*v, key);
}

void KeyValueReader::read(std::string_view key, std::int64_t& out) const {
  if (const auto* v = find(key)) out = parse_int(*v, key);
}

void KeyValueReader::read(std::string_view key, std::uint64_t& out) const {
  if (const auto* v = find(key)) {
    std::string_view text = trim(*v);
    std::uint64_t parsed = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), parsed);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
      throw ConfigError(std::string(key) + ": '" + *v + "' is not an unsigned integer");
    }
    out = parsed;
  }
}

void KeyValueReader::read(std::string_view key, bool& out) const {
  if (const auto* v = find(key)) {
    if (*v == "true" || *v == "on" || *v == "1") {
      out = true;
    } else if (*v == "false" || *v == "off" || *v == "0") {
      out = false;
    } else {
      throw ConfigError(std::string(key) + ": '" + *v + "' is not a boolean");
    }
  }
}

void KeyValueReader::read(std::string_view key, std::vector<Index>& out) const {
  if (const auto* v = find(key)) {
    out.clear();
    for (const std::string& item : split(*v, ',')) out.push_back(parse_int(item, key));
  }
}

void KeyValueReader::read(std::string_view key, std::vector<double>& out) const {
  if (const auto* v = find(key)) {
    out.clear();
    for (const std::string& item : split(*v, ',')) out.push_back(parse_double(item, key));
  }
}

std::vector<std::string> KeyValueReader::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : values_) {
    if (consumed_.count(key) == 0) out.push_back(key);
  }
  return out;
}

}  // namespace aadit
