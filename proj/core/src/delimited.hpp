// Internal helpers for the delimited text formats (logs, Q-matrix, edges).
// Comma-delimited when the line contains a comma, whitespace otherwise.
#pragma once

#include <charconv>
#include <fstream>
#include <string>
#include <vector>

#include "cleki/errors.hpp"

namespace cleki::detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  if (line.find(',') != std::string::npos) {
    size_t start = 0;
    while (true) {
      const size_t pos = line.find(',', start);
      std::string field = line.substr(start, pos == std::string::npos ? pos : pos - start);
      // trim surrounding blanks
      const size_t b = field.find_first_not_of(" \t\r");
      const size_t e = field.find_last_not_of(" \t\r");
      out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
  } else {
    size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
      if (j > i) out.push_back(line.substr(i, j - i));
      i = j;
    }
  }
  while (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

inline bool parse_ll(const std::string& s, long long& out) {
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  try {
    size_t used = 0;
    out = std::stod(s, &used);
    return used == s.size();
  } catch (...) {
    return false;
  }
}

inline bool looks_numeric(const std::string& s) {
  double d;
  return parse_double(s, d);
}

inline bool is_header_row(const std::vector<std::string>& fields) {
  if (fields.empty()) return false;
  for (const auto& f : fields)
    if (!looks_numeric(f)) return true;
  return false;
}

inline std::ifstream open_or_throw(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  return in;
}

}  // namespace cleki::detail
