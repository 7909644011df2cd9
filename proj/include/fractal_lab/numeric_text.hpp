#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "fractal_lab/error.hpp"

namespace fractal_lab {

// Shortest text that reads back to the same double.
inline std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_plain_real(std::string_view s, std::string_view what) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InvalidInput("cannot read " + std::string(what) + " from '" + std::string(s) + "'");
  return v;
}

// Decimal or a/b fraction, e.g. "0.04" or "1/24".
inline double parse_real(std::string_view s, std::string_view what = "number") {
  auto slash = s.find('/');
  if (slash == std::string_view::npos) return parse_plain_real(s, what);
  double num = parse_plain_real(s.substr(0, slash), what);
  double den = parse_plain_real(s.substr(slash + 1), what);
  if (den == 0.0) throw InvalidInput(std::string(what) + " has a zero denominator");
  return num / den;
}

inline long long parse_integer(std::string_view s, std::string_view what = "integer") {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InvalidInput("cannot read " + std::string(what) + " from '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace fractal_lab
