#include "masskit/metric.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace masskit {

std::string to_string(MetricFamily family) {
  switch (family) {
    case MetricFamily::euclidean: return "euclidean";
    case MetricFamily::schwarzschild: return "schwarzschild";
    case MetricFamily::conformally_flat: return "conformally_flat";
    case MetricFamily::perturbed: return "perturbed";
    case MetricFamily::composite: return "composite";
  }
  return "unknown";
}

Mat RadialProfile::cartesian(const Vec& x) const {
  const int n = static_cast<int>(x.size());
  const double r = x.norm();
  const double a = radial(r);
  const double b = tangential(r);
  Mat g = b * Mat::Identity(n, n);
  if (r > 0.0 && a != b) {
    const Vec xh = x / r;
    g.noalias() += (a - b) * (xh * xh.transpose());
  }
  return g;
}

MetricSpec::MetricSpec(int dim, MetricFamily family, std::string label, TensorFn components,
                       double chart_radius)
    : dim_(dim),
      family_(family),
      label_(std::move(label)),
      components_(std::move(components)),
      chart_radius_(chart_radius),
      q_(dim + 1.0) {
  if (dim < 3 || dim > kMaxDim) {
    throw ConfigError("metric dimension must lie in [3, " + std::to_string(kMaxDim) + "]");
  }
  decay_.order = 2.0 - dim;
}


MetricSpec& MetricSpec::with_decay(DecayBudget budget) {
  if (!std::isnan(budget.order)) decay_ = budget;
  return *this;
}

MetricSpec& MetricSpec::with_scalar_decay(double q) {
  q_ = q;
  return *this;
}

MetricSpec& MetricSpec::with_radial(RadialProfile profile) {
  radial_ = std::move(profile);
  return *this;
}

MetricSpec& MetricSpec::with_mass_parameter(double m) {
  mass_ = m;
  return *this;
}

MetricSpec& MetricSpec::with_conformal_factor(RadialFn phi) {
  phi_ = std::move(phi);
  return *this;
}

Mat MetricSpec::deviation(const Vec& x) const {
  return components_(x) - Mat::Identity(dim_, dim_);
}

void MetricSpec::require_stencil(const Vec& x, double reach) const {
  if (x.size() != dim_) {
    throw DomainError("point has " + std::to_string(x.size()) + " coordinates, metric dimension is " +
                      std::to_string(dim_));
  }
  if (chart_radius_ > 0.0 && x.norm() - reach < chart_radius_) {
    std::ostringstream msg;
    msg << "stencil of reach " << reach << " at |x| = " << x.norm() << " leaves the chart r >= "
        << chart_radius_;
    throw DomainError(msg.str());
  }
}

namespace metrics {

namespace {

RadialProfile conformal_profile(int n, RadialFn phi) {
  const double p = conformal_power(n);
  RadialFn psi = [phi, p](double r) { return std::pow(phi(r), p); };
  return RadialProfile{psi, psi};
}

}  // namespace

MetricSpec euclidean(int n) {
  RadialFn one = [](double) { return 1.0; };
  MetricSpec g(n, MetricFamily::euclidean, "euclidean",
               [n](const Vec&) -> Mat { return Mat::Identity(n, n); }, 0.0);
  g.with_radial(RadialProfile{one, one}).with_mass_parameter(0.0).with_conformal_factor(one);
  return g;
}

MetricSpec schwarzschild(int n, double m) {
  RadialFn phi = [n, m](double r) { return 1.0 + m / (2.0 * std::pow(r, n - 2)); };
  std::ostringstream label;
  label << "schwarzschild(m=" << m << ")";
  MetricSpec g = conformally_flat(n, phi, label.str());
  MetricSpec out(n, MetricFamily::schwarzschild, g.label(), g.evaluator(), 1.0);
  out.with_radial(*g.radial()).with_mass_parameter(m).with_conformal_factor(phi);
  return out;
}

MetricSpec conformally_flat(int n, RadialFn phi, std::string label, double chart_radius,
                            DecayBudget budget) {
  const double p = conformal_power(n);
  TensorFn eval = [n, phi, p](const Vec& x) -> Mat {
    const double f = phi(x.norm());
    if (!(f > 0.0)) throw DegeneracyError("conformal factor is not positive");
    return std::pow(f, p) * Mat::Identity(n, n);
  };
  MetricSpec g(n, MetricFamily::conformally_flat, std::move(label), eval, chart_radius);
  g.with_decay(budget).with_radial(conformal_profile(n, phi)).with_conformal_factor(phi);
  if (std::isnan(budget.order)) g.with_decay(DecayBudget{2.0 - n});
  return g;
}

MetricSpec conformally_flat_general(int n, ScalarFn phi, std::string label, double chart_radius,
                                    DecayBudget budget) {
  const double p = conformal_power(n);
  TensorFn eval = [n, phi, p](const Vec& x) -> Mat {
    const double f = phi(x);
    if (!(f > 0.0)) throw DegeneracyError("conformal factor is not positive");
    return std::pow(f, p) * Mat::Identity(n, n);
  };
  MetricSpec g(n, MetricFamily::conformally_flat, std::move(label), eval, chart_radius);
  g.with_decay(budget);
  if (std::isnan(budget.order)) g.with_decay(DecayBudget{2.0 - n});
  return g;
}

MetricSpec from_profile(int n, RadialProfile profile, std::string label, MetricFamily family,
                        double chart_radius, DecayBudget budget) {
  TensorFn eval = [profile](const Vec& x) -> Mat { return profile.cartesian(x); };
  MetricSpec g(n, family, std::move(label), eval, chart_radius);
  g.with_radial(std::move(profile)).with_decay(budget);
  if (std::isnan(budget.order)) g.with_decay(DecayBudget{2.0 - n});
  return g;
}

MetricSpec round_sphere(int n) {
  // (2/(1+r^2))^2 = phi^{4/(n-2)}
  const double e = (n - 2.0) / 2.0;
  RadialFn phi = [e](double r) { return std::pow(2.0 / (1.0 + r * r), e); };
  return conformally_flat(n, phi, "round_sphere", 0.0, DecayBudget{-4.0});
}

MetricSpec power_factor(int n, double A) {
  RadialFn phi = [n, A](double r) { return 1.0 + A * std::pow(r, 2 - n); };
  std::ostringstream label;
  label << "power_factor(A=" << A << ")";
  MetricSpec g = conformally_flat(n, phi, label.str());
  g.with_mass_parameter(2.0 * A);
  return g;
}

MetricSpec toy_remainder(int n, double m, double B) {
  RadialFn phi = [n, m, B](double r) {
    return 1.0 + m / (2.0 * std::pow(r, n - 2)) + B * std::pow(r, 1 - n);
  };
  std::ostringstream label;
  label << "toy_remainder(m=" << m << ",B=" << B << ")";
  MetricSpec g = conformally_flat(n, phi, label.str());
  g.with_mass_parameter(m);
  return g;
}

MetricSpec gaussian_bump(double c, double width) {
  const double w = width;
  RadialFn phi = [c, w](double r) {
    if (r < 1e-6 * w) return 1.0 + c * 2.0 / (std::sqrt(std::numbers::pi) * w);
    return 1.0 + c * std::erf(r / w) / r;
  };
  std::ostringstream label;
  label << "gaussian_bump(c=" << c << ",w=" << w << ")";
  MetricSpec g = conformally_flat(3, phi, label.str(), 0.0);
  g.with_mass_parameter(2.0 * c);
  return g;
}

RadialFn gaussian_bump_scalar(double c, double width) {
  const double w = width;
  return [c, w](double r) {
    const double phi = r < 1e-6 * w ? 1.0 + c * 2.0 / (std::sqrt(std::numbers::pi) * w)
                                    : 1.0 + c * std::erf(r / w) / r;
    return 32.0 * c * std::exp(-(r * r) / (w * w)) /
           (std::sqrt(std::numbers::pi) * w * w * w * std::pow(phi, 5));
  };
}

MetricSpec tangential_gauge(int n, double beta) {
  RadialProfile profile{[](double) { return 1.0; },
                        [beta](double r) { return 1.0 + beta / r; }};
  std::ostringstream label;
  label << "tangential_gauge(beta=" << beta << ")";
  MetricSpec g = from_profile(n, profile, label.str(), MetricFamily::composite, 1.0,
                              DecayBudget{-1.0});
  g.with_mass_parameter(0.0);
  return g;
}

MetricSpec perturbed(const MetricSpec& base, TensorFn h, std::string label, DecayBudget budget,
                     std::optional<RadialProfile> h_profile) {
  TensorFn b = base.evaluator();
  TensorFn eval = [b, h](const Vec& x) -> Mat { return b(x) + h(x); };
  MetricSpec g(base.dimension(), MetricFamily::perturbed, std::move(label), eval,
               base.chart_radius());
  g.with_decay(budget);
  if (base.is_radial() && h_profile) {
    RadialProfile bp = *base.radial();
    RadialProfile hp = *h_profile;
    g.with_radial(RadialProfile{[bp, hp](double r) { return bp.radial(r) + hp.radial(r); },
                                [bp, hp](double r) { return bp.tangential(r) + hp.tangential(r); }});
  }
  return g;
}

MetricSpec radial_projector(int n, double amplitude, double power) {
  RadialProfile hp{[amplitude, power](double r) { return amplitude * std::pow(r, power); },
                   [](double) { return 0.0; }};
  TensorFn h = [hp](const Vec& x) -> Mat { return hp.cartesian(x); };
  std::ostringstream label;
  label << "radial_projector(c=" << amplitude << ",p=" << power << ")";
  return perturbed(euclidean(n), h, label.str(), DecayBudget{power}, hp);
}

MetricSpec rotated(const MetricSpec& g, const Mat& Q) {
  TensorFn base = g.evaluator();
  TensorFn eval = [base, Q](const Vec& x) -> Mat {
    const Vec y = Q * x;
    return Q.transpose() * base(y) * Q;
  };
  MetricSpec out(g.dimension(), g.family(), g.label() + "/rotated", eval, g.chart_radius());
  out.with_decay(g.decay()).with_scalar_decay(g.scalar_decay());
  if (g.radial()) out.with_radial(*g.radial());
  if (g.mass_parameter()) out.with_mass_parameter(*g.mass_parameter());
  if (g.conformal_factor()) out.with_conformal_factor(*g.conformal_factor());
  return out;
}

}  // namespace metrics

}  // namespace masskit
