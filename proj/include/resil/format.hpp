#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace resil {

// Shortest round-trip decimal; locale independent.
inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace resil
