#pragma once

#include "masskit/core.hpp"

#include <limits>
#include <optional>
#include <string>

namespace masskit {

enum class MetricFamily { euclidean, schwarzschild, conformally_flat, perturbed, composite };

std::string to_string(MetricFamily family);

// |h| <= C r^order, |dh| <= C r^(order-1), |ddh| <= C r^(order-2).
// NaN order means the default 2 - n.
struct DecayBudget {
  double order = std::numeric_limits<double>::quiet_NaN();
};

// g = radial(r) xx^T/r^2 + tangential(r) (delta - xx^T/r^2)
struct RadialProfile {
  RadialFn radial;
  RadialFn tangential;

  Mat cartesian(const Vec& x) const;
};

class MetricSpec {
 public:
  MetricSpec(int dim, MetricFamily family, std::string label, TensorFn components,
             double chart_radius = 1.0);

  MetricSpec& with_decay(DecayBudget budget);
  MetricSpec& with_scalar_decay(double q);
  MetricSpec& with_radial(RadialProfile profile);
  MetricSpec& with_mass_parameter(double m);
  MetricSpec& with_conformal_factor(RadialFn phi);

  int dimension() const { return dim_; }
  MetricFamily family() const { return family_; }
  const std::string& label() const { return label_; }
  double chart_radius() const { return chart_radius_; }
  DecayBudget decay() const { return decay_; }
  double scalar_decay() const { return q_; }
  const std::optional<RadialProfile>& radial() const { return radial_; }
  bool is_radial() const { return radial_.has_value(); }
  std::optional<double> mass_parameter() const { return mass_; }
  // Present when g = phi(r)^{4/(n-2)} delta.
  const std::optional<RadialFn>& conformal_factor() const { return phi_; }
  const TensorFn& evaluator() const { return components_; }

  Mat operator()(const Vec& x) const { return components_(x); }
  Mat deviation(const Vec& x) const;

  // Throws DomainError when a stencil of half-width reach around x leaves the chart.
  void require_stencil(const Vec& x, double reach) const;

 private:
  int dim_;
  MetricFamily family_;
  std::string label_;
  TensorFn components_;
  double chart_radius_;
  DecayBudget decay_{};
  double q_ = 0.0;
  std::optional<RadialProfile> radial_;
  std::optional<double> mass_;
  std::optional<RadialFn> phi_;
};

namespace metrics {

MetricSpec euclidean(int n);
MetricSpec schwarzschild(int n, double m);
MetricSpec conformally_flat(int n, RadialFn phi, std::string label, double chart_radius = 1.0,
                            DecayBudget budget = {});
MetricSpec conformally_flat_general(int n, ScalarFn phi, std::string label,
                                    double chart_radius = 1.0, DecayBudget budget = {});
MetricSpec from_profile(int n, RadialProfile profile, std::string label, MetricFamily family,
                        double chart_radius = 1.0, DecayBudget budget = {});

// 4/(1+r^2)^2 delta: the unit round sphere in stereographic coordinates.
MetricSpec round_sphere(int n);
// (1 + A r^{2-n})^{4/(n-2)} delta
MetricSpec power_factor(int n, double A);
// (1 + m/(2 r^{n-2}) + B r^{1-n})^{4/(n-2)} delta
MetricSpec toy_remainder(int n, double m, double B);
// n = 3, phi = 1 + c erf(r/w)/r; R is a positive Gaussian bump at the origin.
MetricSpec gaussian_bump(double c, double width);
// Its scalar curvature in closed form.
RadialFn gaussian_bump_scalar(double c, double width);
// dr^2 + (1 + beta/r) r^2 dOmega^2: mass zero, nonnegative scalar curvature.
MetricSpec tangential_gauge(int n, double beta);
// base + h; radial when both pieces are.
MetricSpec perturbed(const MetricSpec& base, TensorFn h, std::string label, DecayBudget budget,
                     std::optional<RadialProfile> h_profile = std::nullopt);
// delta + amplitude r^power x x^T / r^2
MetricSpec radial_projector(int n, double amplitude, double power);
// x -> Q^T g(Qx) Q
MetricSpec rotated(const MetricSpec& g, const Mat& Q);

}  // namespace metrics

}  // namespace masskit
