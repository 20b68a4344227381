#pragma once

namespace masskit {

// Value and first two derivatives of a one-variable profile.
struct Jet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

// 6x^5 - 15x^4 + 10x^3 clamped to [0, 1]; C^2 with flat ends.
Jet smoothstep5(double x);

// 0 for t <= a, 1 for t >= b.
Jet ramp(double t, double a, double b);

// 1 on [b, c], 0 outside (a, d).
Jet plateau(double t, double a, double b, double c, double d);

// zeta of the interpolation: 0 on (-inf, 2], 1 on [3, inf)
inline Jet interpolation_cutoff(double t) { return ramp(t, 2.0, 3.0); }
// eta of the potential: 1 on [2, 3], 0 outside (1, 4)
inline Jet potential_cutoff(double t) { return plateau(t, 1.0, 2.0, 3.0, 4.0); }

}  // namespace masskit
