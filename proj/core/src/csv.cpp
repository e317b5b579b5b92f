#include "advseq/csv.hpp"

#include <cmath>
#include <cstdio>

namespace advseq {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  // glibc rounds the exact binary value correctly, ties to even.
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

}  // namespace advseq
