#pragma once

#include <cstdio>
#include <string>
#include <string_view>

// Locale-independent number formatting for files that must be byte-stable
// across runs. The C locale is never changed by this library, so snprintf
// always produces '.' as the decimal separator.

namespace ltr {

// Fixed-point with the given number of decimals ("%.6f" style).
inline std::string fmt_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

// Shortest representation that round-trips a double exactly.
inline std::string fmt_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// 16-digit zero-padded lowercase hex for 64-bit hashes.
inline std::string fmt_hex64(unsigned long long v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", v);
  return buf;
}

// Minimal JSON string escaping (quotes included in the output).
inline std::string json_quote(std::string_view s) {
  std::string out;
  out.reserve(s.size() + 2);
  out.push_back('"');
  for (unsigned char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default:
        if (c < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out.push_back(static_cast<char>(c));
        }
    }
  }
  out.push_back('"');
  return out;
}

}  // namespace ltr
