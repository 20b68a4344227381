#pragma once

#include "masskit/core.hpp"

#include <string>
#include <vector>

namespace masskit {

struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre on [-1, 1], or mapped to [a, b].
GaussRule gauss_legendre(int order);
GaussRule gauss_legendre(int order, double a, double b);

// Composite Gauss-Legendre of a scalar function on [a, b].
double integrate(const RadialFn& f, double a, double b, int panels = 64, int order = 8);

// Directions and weights on S^{n-1}; the weights sum to the area of the covered region.
struct SphereRule {
  int dim = 0;
  std::string name;
  std::vector<Vec> directions;
  std::vector<double> weights;

  double total_weight() const;
};

// Gauss-Legendre in the polar angles times trapezoid in the azimuth.
SphereRule sphere_rule(int n, int order);
// Half sphere x_1 > 0: a fundamental domain of {+I, -I}.
SphereRule hemisphere_rule(int n, int order);
// S^3 in Hopf coordinates with the first phase restricted to [0, 2 pi / k):
// a fundamental domain of the diagonal Z_k action on C^2.
SphereRule hopf_wedge_rule(int order, int k);

}  // namespace masskit
