#pragma once

// Minimal CSV assembly: %.17g numbers (round-trip exact for doubles) and
// CRLF row endings. Tables are built fully in memory so a command can fail
// without leaving a partial file behind.

#include <cstdio>
#include <initializer_list>
#include <string>

namespace nsdde::csv {

inline std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string num(unsigned long long v) { return std::to_string(v); }
inline std::string num(long long v) { return std::to_string(v); }

inline void row(std::string& out, std::initializer_list<std::string> fields) {
  bool first = true;
  for (const auto& f : fields) {
    if (!first) out += ',';
    first = false;
    out += f;
  }
  out += "\r\n";
}

}  // namespace nsdde::csv
