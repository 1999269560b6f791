// format.hpp — locale-independent float formatting shared by io and errors.
#pragma once

#include <cstdio>
#include <string>

namespace necrostrip {

/**
 * Shortest-round-trip style decimal formatting: 17 significant digits,
 * '%.17g', '.' decimal point regardless of locale.  Every double written to
 * a data file goes through this helper so outputs are byte-reproducible and
 * parse back to the identical bit pattern.
 */
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace necrostrip
