#include "nethist/format.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace nethist {

double round_sig(double value) {
  if (!std::isfinite(value) || value == 0.0) return value;
  return std::strtod(format_number(value).c_str(), nullptr);
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", kOutputDigits, value);
  return buf;
}

}  // namespace nethist
