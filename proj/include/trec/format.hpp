#pragma once

#include <cstdio>
#include <string>

namespace trec {

/// Shortest round-trippable-enough fixed formatting used for every CSV cell,
/// so reruns produce byte-identical rows.
inline std::string fmt_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

}  // namespace trec
