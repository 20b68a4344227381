#include "masskit/cutoff.hpp"

#include "masskit/core.hpp"

namespace masskit {

Jet smoothstep5(double x) {
  if (x <= 0.0) return {0.0, 0.0, 0.0};
  if (x >= 1.0) return {1.0, 0.0, 0.0};
  const double x2 = x * x, x3 = x2 * x;
  return {x3 * (10.0 + x * (-15.0 + 6.0 * x)), 30.0 * x2 * (1.0 - x) * (1.0 - x),
          60.0 * x * (1.0 - x) * (1.0 - 2.0 * x)};
}

Jet ramp(double t, double a, double b) {
  if (!(b > a)) throw ConfigError("cutoff transition must have positive width");
  const double w = b - a;
  const Jet s = smoothstep5((t - a) / w);
  return {s.value, s.d1 / w, s.d2 / (w * w)};
}

Jet plateau(double t, double a, double b, double c, double d) {
  if (!(a < b && b <= c && c < d)) throw ConfigError("plateau cutoff needs a < b <= c < d");
  if (t <= c) return ramp(t, a, b);
  const Jet s = ramp(t, c, d);
  return {1.0 - s.value, -s.d1, -s.d2};
}

}  // namespace masskit
