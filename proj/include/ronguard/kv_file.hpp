#pragma once

#include <fstream>
#include <istream>
#include <string>
#include <vector>

#include "ronguard/error.hpp"

namespace ronguard {

struct KeyValue {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

namespace detail {

inline std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace detail

/// Reads `key = value` lines. Blank lines and lines starting with '#' or ';'
/// are skipped, as are `[section]` headers.
inline std::vector<KeyValue> read_key_values(std::istream& in) {
  std::vector<KeyValue> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';' || line[0] == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("line " + std::to_string(line_no) + ": expected key=value");
    KeyValue kv{detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)), line_no};
    if (kv.key.empty()) throw FormatError("line " + std::to_string(line_no) + ": empty key");
    out.push_back(std::move(kv));
  }
  return out;
}

inline std::vector<KeyValue> load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open configuration file '" + path + "'");
  return read_key_values(in);
}

}  // namespace ronguard
