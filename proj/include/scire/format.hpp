#pragma once

#include <cstdio>
#include <string>

namespace scire {

/// Round-trippable decimal (17 significant digits), used for every CSV field.
inline std::string fmt_full(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Short form for messages.
inline std::string fmt_g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace scire
