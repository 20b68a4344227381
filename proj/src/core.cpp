#include "masskit/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace masskit {

double sphere_area(int n) {
  return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

double conformal_coupling(int n) { return (n - 2.0) / (4.0 * (n - 1.0)); }

double conformal_power(int n) { return 4.0 / (n - 2.0); }

double default_step(double r) { return std::min(0.01 * r, 0.05); }

Vec unit_vector(int n, int axis) {
  Vec e = Vec::Zero(n);
  e(axis) = 1.0;
  return e;
}

Vec point_on_axis(int n, double r, int axis) { return r * unit_vector(n, axis); }

}  // namespace masskit
