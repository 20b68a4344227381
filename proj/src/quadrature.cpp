#include "masskit/quadrature.hpp"

#include <cmath>
#include <numbers>

namespace masskit {

GaussRule gauss_legendre(int order) {
  if (order < 1) throw ConfigError("quadrature order must be positive");
  GaussRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (order == 1) p0 = 1.0;
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (order == 1) p0 = 1.0;
      dp = order * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[order - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

GaussRule gauss_legendre(int order, double a, double b) {
  GaussRule rule = gauss_legendre(order);
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  return rule;
}

double integrate(const RadialFn& f, double a, double b, int panels, int order) {
  const GaussRule ref = gauss_legendre(order);
  const double width = (b - a) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    double part = 0.0;
    for (int q = 0; q < order; ++q) {
      part += ref.weights[q] * f(lo + 0.5 * width * (ref.nodes[q] + 1.0));
    }
    sum += 0.5 * width * part;
  }
  return sum;
}

double SphereRule::total_weight() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

namespace {

// Nodes in theta on [0, upper] for the weight sin^power(theta).
GaussRule polar_rule(int order, int power, double upper) {
  if (power == 1) {
    // substitute c = cos(theta)
    GaussRule c = gauss_legendre(order, std::cos(upper), 1.0);
    for (auto& node : c.nodes) node = std::acos(node);
    return c;
  }
  GaussRule t = gauss_legendre(order, 0.0, upper);
  for (std::size_t i = 0; i < t.nodes.size(); ++i) t.weights[i] *= std::pow(std::sin(t.nodes[i]), power);
  return t;
}

SphereRule product_rule(int n, int order, double first_upper, std::string name) {
  if (order < 4) throw ConfigError("sphere quadrature needs at least 8 points per angular period");
  const int effective = n <= 4 ? order : std::min(order, 8);
  const int azimuth = 2 * effective;
  std::vector<GaussRule> polar;
  for (int j = 0; j < n - 2; ++j) {
    polar.push_back(polar_rule(effective, n - 2 - j, j == 0 ? first_upper : std::numbers::pi));
  }
  SphereRule rule;
  rule.dim = n;
  rule.name = std::move(name);
  std::vector<int> idx(static_cast<std::size_t>(n - 2), 0);
  const double dphi = 2.0 * std::numbers::pi / azimuth;
  while (true) {
    double weight = 1.0;
    Vec prefix_dir(n);
    double sin_prod = 1.0;
    for (int j = 0; j < n - 2; ++j) {
      const double th = polar[j].nodes[idx[j]];
      weight *= polar[j].weights[idx[j]];
      prefix_dir(j) = sin_prod * std::cos(th);
      sin_prod *= std::sin(th);
    }
    for (int a = 0; a < azimuth; ++a) {
      const double phi = (a + 0.5) * dphi;
      Vec d = prefix_dir;
      d(n - 2) = sin_prod * std::cos(phi);
      d(n - 1) = sin_prod * std::sin(phi);
      rule.directions.push_back(d);
      rule.weights.push_back(weight * dphi);
    }
    int j = n - 3;
    while (j >= 0) {
      if (++idx[j] < effective) break;
      idx[j] = 0;
      --j;
    }
    if (j < 0) break;
  }
  return rule;
}

}  // namespace

SphereRule sphere_rule(int n, int order) {
  return product_rule(n, order, std::numbers::pi, "gauss_legendre_x_trapezoid");
}

SphereRule hemisphere_rule(int n, int order) {
  return product_rule(n, order, 0.5 * std::numbers::pi, "hemisphere_gauss_legendre_x_trapezoid");
}

SphereRule hopf_wedge_rule(int order, int k) {
  if (k < 1) throw ConfigError("cyclic order must be positive");
  if (order < 4) throw ConfigError("sphere quadrature needs at least 8 points per angular period");
  // measure sin(eta) cos(eta) d eta d xi1 d xi2 = 1/2 d(sin^2 eta) d xi1 d xi2
  const GaussRule s = gauss_legendre(order, 0.0, 1.0);
  const int n1 = 2 * order, n2 = 2 * order;
  const double d1 = 2.0 * std::numbers::pi / k / n1;
  const double d2 = 2.0 * std::numbers::pi / n2;
  SphereRule rule;
  rule.dim = 4;
  rule.name = "hopf_wedge";
  for (std::size_t q = 0; q < s.nodes.size(); ++q) {
    const double sn = std::sqrt(s.nodes[q]);
    const double cs = std::sqrt(1.0 - s.nodes[q]);
    for (int a = 0; a < n1; ++a) {
      const double xi1 = (a + 0.5) * d1;
      for (int b = 0; b < n2; ++b) {
        const double xi2 = (b + 0.5) * d2;
        Vec d(4);
        d << cs * std::cos(xi1), cs * std::sin(xi1), sn * std::cos(xi2), sn * std::sin(xi2);
        rule.directions.push_back(d);
        rule.weights.push_back(0.5 * s.weights[q] * d1 * d2);
      }
    }
  }
  return rule;
}

}  // namespace masskit
