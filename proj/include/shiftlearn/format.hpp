#pragma once

#include <charconv>
#include <string>

namespace shiftlearn {

/// Locale-independent general format with `digits` significant digits.
inline std::string format_sig(double v, int digits = 6) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, digits);
  return std::string(buf, res.ptr);
}

/// Shortest text that parses back to the same double.
inline std::string format_exact(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace shiftlearn
