#pragma once

#include "masskit/metric.hpp"
#include "masskit/quadrature.hpp"

#include <span>
#include <string>
#include <vector>

namespace masskit {

struct MassReport {
  int dimension = 0;
  std::string metric_label;
  std::vector<double> radii;
  std::vector<double> partial_masses;
  double extrapolated = 0.0;
  double observed_order = 0.0;
  bool order_fallback = false;
  bool low_confidence = false;
  int quadrature_order = 0;
  std::string angular_rule;
  std::size_t angular_points = 0;
  int group_order = 1;
};

// A symmetric tensor field on the end chart, e.g. a metric or a remainder g~.
struct SymmetricField {
  int dim = 3;
  TensorFn eval;
  double chart_radius = 1.0;
  // True when the field is rotation-equivariant, so one direction represents the sphere.
  bool radial = false;
};

SymmetricField as_field(const MetricSpec& g);

// x^i (d_j T_ij - d_i T_jj) at x, central differences with step h.
double flux_integrand(const SymmetricField& field, const Vec& x, double h);

// Un-normalized flux of the field over {r = rho} with a given angular rule.
double flux_integral(const SymmetricField& field, double rho, const SphereRule& rule);

// Normalized partial mass 1/(2(n-1)|S^{n-1}|) * flux.
double adm_surface_integral(const MetricSpec& g, double rho, int order = 24);

struct Extrapolation {
  double value = 0.0;
  double order = 0.0;
  bool fallback = false;
  bool low_confidence = false;
};

// m(rho) = m_inf + c rho^{-p} through the last three rungs; p falls back to
// fallback_order when the tail is not a clean geometric sequence.
Extrapolation extrapolate_limit(std::span<const double> radii, std::span<const double> values,
                                double fallback_order);

MassReport adm_mass(const MetricSpec& g, std::span<const double> ladder, int order = 24);

// As adm_mass but over a caller-supplied angular rule covering a region of the sphere;
// normalization uses the full sphere area times the covering factor.
MassReport adm_mass_with_rule(const MetricSpec& g, std::span<const double> ladder,
                              const SphereRule& rule, double covering_factor);

struct ResidualFluxReport {
  std::vector<double> radii;
  std::vector<double> fluxes;
  double slope = 0.0;
  bool slope_fitted = false;
  double tolerance = 0.0;
  bool decreasing = false;
  bool pass = false;
};

ResidualFluxReport residual_flux(const SymmetricField& remainder, std::span<const double> ladder,
                                 double tolerance = 1e-6, int order = 24);

// adm_mass(cover) / |Gamma|
MassReport ale_mass(const MetricSpec& cover, int group_order, std::span<const double> ladder,
                    int order = 24);

// Continuation bracket: the limit sits on the far side of the last rung, within
// the span of the last three rungs, when the tail is monotone.
bool extrapolation_bracketed(const MassReport& report);

}  // namespace masskit
