#pragma once

#include <cstdio>
#include <string>

namespace caloric {

// Shortest round-trip decimal form, locale independent; fixed notation wins
// ties against scientific ("10", not "1e+01").
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  double back = 0.0;
  std::sscanf(buf, "%lf", &back);
  if (back != x) return buf;
  std::string best = buf;
  for (int prec = 17; prec >= 1; --prec) {
    char probe[40];
    std::snprintf(probe, sizeof probe, "%.*g", prec, x);
    double v = 0.0;
    std::sscanf(probe, "%lf", &v);
    if (v != x) continue;
    const std::string s = probe;
    if (s.size() < best.size() ||
        (s.size() == best.size() && s.find('e') == std::string::npos))
      best = s;
  }
  return best;
}

}  // namespace caloric
