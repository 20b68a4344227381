#include "masskit/rigidity.hpp"

#include "masskit/curvature.hpp"
#include "masskit/cutoff.hpp"
#include "masskit/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace masskit {

double BumpCutoff::operator()(double r) const {
  if (support_lo <= 0.0 && plateau_lo <= 0.0) return 1.0 - ramp(r, plateau_hi, support_hi).value;
  return plateau(r, support_lo, plateau_lo, plateau_hi, support_hi).value;
}

namespace {

std::vector<double> linear_samples(double a, double b, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[i] = a + (b - a) * i / (count - 1);
  return out;
}

MetricSpec conformal_rescale(const MetricSpec& g, RadialFn factor, const std::string& label) {
  const RadialProfile prof = *g.radial();
  const double p = conformal_power(g.dimension());
  RadialProfile out{[prof, factor, p](double r) { return std::pow(factor(r), p) * prof.radial(r); },
                    [prof, factor, p](double r) {
                      return std::pow(factor(r), p) * prof.tangential(r);
                    }};
  return metrics::from_profile(g.dimension(), out, label, MetricFamily::composite,
                               g.chart_radius(), DecayBudget{2.0 - g.dimension()});
}

}  // namespace

ScalarProbeResult rigidity_probe_scalar(const MetricSpec& g, const ScalarProbeSpec& spec) {
  if (!g.is_radial()) throw ConfigError("rigidity probes run on the RADIAL tier only");
  const int n = g.dimension();
  const double kappa = conformal_coupling(n);
  const RadialFn R = spec.scalar_curvature
                         ? spec.scalar_curvature
                         : RadialFn([g](double r) { return radial_scalar_curvature(g, r); });
  const BumpCutoff eta = spec.eta;

  const double lo = spec.domain.kind == DomainModel::Kind::ball ? 1e-3 : spec.domain.r_inner;
  double min_f = std::numeric_limits<double>::infinity(), max_f = 0.0;
  for (double r : linear_samples(lo, eta.support_hi, 400)) {
    const double v = eta(r) * R(r);
    min_f = std::min(min_f, v);
    max_f = std::max(max_f, v);
  }
  if (min_f < -1e-12) {
    throw PreconditionError("eta R(g) takes negative values", "eta R(g) >= 0", min_f, 0.0);
  }

  EllipticProblem problem{g, Potential{}, spec.domain, {}};
  problem.f.end = [R, eta, kappa](double r) {
    const double e = eta(r);
    return e == 0.0 ? 0.0 : kappa * e * R(r);
  };
  problem.f.cylinder = [](double) { return 0.0; };
  problem.f.support_radius = eta.support_hi;
  problem.f.label = "kappa eta R(g)";
  const ConformalFactorSolution sol = solve_conformal_factor(problem);

  ScalarProbeResult out;
  out.A_integral = sol.A_integral;
  out.A_fit = sol.A_fit;
  out.min_u = sol.min_u;
  out.min_factor = 0.5 * (sol.min_u + 1.0);
  out.flux = sol.flux.flux;
  out.weighted_flux = sol.flux.weighted_flux;
  if (max_f > 0.0 && !(out.A_integral < 0.0)) {
    std::ostringstream msg;
    msg << "expansion coefficient is not negative (A = " << out.A_integral
        << ") although eta R(g) > 0 somewhere";
    throw RegimeError(msg.str(), "A < 0", out.A_integral, 0.0);
  }

  const RadialFn u_at = sol.u_at;
  const MetricSpec g_bar = conformal_rescale(
      g, [u_at](double r) { return 0.5 * (u_at(r) + 1.0); }, "half_factor(" + g.label() + ")");
  out.input_mass = adm_mass(g, spec.mass_ladder).extrapolated;
  out.output_mass = adm_mass(g_bar, spec.mass_ladder).extrapolated;
  out.mass_shift = out.output_mass - out.input_mass;
  out.shift_relative_error =
      std::abs(out.mass_shift - out.A_integral) / std::max(std::abs(out.A_integral), 1e-12);
  out.output = g_bar;
  return out;
}

MetricSpec ricci_perturbation(const MetricSpec& g, const BumpCutoff& eta, double epsilon) {
  if (!g.is_radial()) throw ConfigError("rigidity probes run on the RADIAL tier only");
  const RadialProfile prof = *g.radial();
  const int n = g.dimension();
  // coordinate Ric_ij = a Ric_rad on the radial direction and b Ric_tan on the sphere
  RadialProfile out{
      [prof, eta, epsilon, n](double r) {
        const double e = eta(r);
        if (e == 0.0) return prof.radial(r);
        return prof.radial(r) * (1.0 - epsilon * e * radial_curvature_accurate(prof, n, r).ricci_radial);
      },
      [prof, eta, epsilon, n](double r) {
        const double e = eta(r);
        if (e == 0.0) return prof.tangential(r);
        return prof.tangential(r) *
               (1.0 - epsilon * e * radial_curvature_accurate(prof, n, r).ricci_tangential);
      }};
  std::ostringstream label;
  label << "ricci_perturbed(" << g.label() << ", eps=" << epsilon << ")";
  return metrics::from_profile(n, out, label.str(), MetricFamily::composite, g.chart_radius(),
                               DecayBudget{2.0 - n});
}

RicciProbeResult rigidity_probe_ricci(const MetricSpec& g, const RigidityProbeSpec& spec) {
  if (!g.is_radial()) throw ConfigError("rigidity probes run on the RADIAL tier only");
  const int n = g.dimension();
  const double kappa = conformal_coupling(n);
  const double p = conformal_power(n);
  const BumpCutoff eta = spec.eta, eta_t = spec.eta_tilde;
  if (spec.delta_ladder.empty()) throw ConfigError("delta ladder is empty");
  if (!(spec.epsilon > 0.0)) throw ConfigError("epsilon must be positive");

  RicciProbeResult out;
  for (double r : linear_samples(eta.support_lo, eta.support_hi, 200)) {
    const RadialCurvature c = radial_curvature_accurate(*g.radial(), n, r);
    const double norm = std::sqrt(c.ricci_radial * c.ricci_radial +
                                  (n - 1.0) * c.ricci_tangential * c.ricci_tangential);
    if (eta(r) > 0.0) out.max_ricci = std::max(out.max_ricci, norm);
  }
  if (!(out.max_ricci > spec.ricci_floor)) {
    throw PreconditionError("Ricci curvature vanishes on the support of eta; nothing to perturb",
                            "max |Ric(g)| > floor", out.max_ricci, spec.ricci_floor);
  }
  out.eta_tilde_floor = std::numeric_limits<double>::infinity();
  for (double r : linear_samples(eta.support_lo, eta.support_hi, 200)) {
    out.eta_tilde_floor = std::min(out.eta_tilde_floor, eta_t(r));
  }
  if (!(out.eta_tilde_floor > 0.0)) {
    throw ConfigError("eta_tilde needs a positive lower bound on the support of eta");
  }

  const MetricSpec g_bar = ricci_perturbation(g, eta, spec.epsilon);
  const RadialFn R_bar = [g_bar](double r) { return radial_scalar_curvature(g_bar, r); };
  out.scalar_min = std::numeric_limits<double>::infinity();
  out.scalar_max = -std::numeric_limits<double>::infinity();
  for (double r : linear_samples(eta.support_lo, eta.support_hi, 400)) {
    out.scalar_min = std::min(out.scalar_min, R_bar(r));
    out.scalar_max = std::max(out.scalar_max, R_bar(r));
  }

  out.eigenvalue = eigenvalue_lower_bound(g_bar, eta.support_lo, eta.support_hi, R_bar,
                                          BoundaryKind::free, spec.nodes_per_decade)
                       .value;
  if (!(out.eigenvalue > 0.0)) {
    throw PreconditionError("conformal Laplacian form is not positive on S",
                            "int |grad z|^2 + kappa R z^2 > c int z^2, c > 0", out.eigenvalue, 0.0);
  }

  DomainModel domain;
  domain.r_inner = g.chart_radius();
  domain.r_out = spec.r_out;
  domain.nodes_per_decade = spec.nodes_per_decade;
  out.sobolev_constant = sobolev_estimate(g_bar, domain).estimate;
  {
    LineSpec ls;
    ls.r_inner = domain.r_inner;
    ls.r_outer = domain.r_out;
    ls.nodes_per_decade = domain.nodes_per_decade;
    const RadialLine line = RadialLine::build(g_bar, ls);
    Potential rb;
    rb.end = R_bar;
    rb.support_radius = std::max(eta.support_hi, eta_t.support_hi);
    out.smallness_lhs = potential_norm(line, rb, 0.5 * n, true);
    out.smallness_threshold = 0.25 * out.sobolev_constant;
    if (out.smallness_lhs > out.smallness_threshold) {
      throw PreconditionError("negative part of R(g - eps eta Ric) is too large",
                              "(int |R_-|^{n/2})^{2/n} <= c_S/4", out.smallness_lhs,
                              out.smallness_threshold);
    }
  }
  out.input_mass = adm_mass(g, std::vector<double>{64.0, 128.0, 256.0, 512.0}).extrapolated;

  const double support = std::max(eta.support_hi, eta_t.support_hi);
  if (domain.r_out < 10.0 * support) throw ConfigError("r_out must be at least 10 times the bump support");
  for (double delta : spec.delta_ladder) {
    EllipticProblem problem{g_bar, Potential{}, domain, {}};
    problem.f.end = [R_bar, eta_t, delta, kappa](double r) {
      return kappa * (R_bar(r) - delta * eta_t(r));
    };
    problem.f.cylinder = [](double) { return 0.0; };
    problem.f.support_radius = support;
    problem.f.label = "kappa (R - delta eta~)";
    problem.controls.sobolev_constant = out.sobolev_constant;
    const ConformalFactorSolution sol = solve_conformal_factor(problem);

    RicciProbeRung rung;
    rung.delta = delta;
    rung.A_integral = sol.A_integral;
    rung.A_fit = sol.A_fit;
    std::vector<double> u, et, rb;
    for (const LinePosition& pos : sol.nodes) {
      if (pos.region == LineRegion::cylinder) continue;
      if (pos.r > 2.0 * support) break;
      u.push_back(sol.u_at(pos.r));
      et.push_back(eta_t(pos.r));
      rb.push_back(R_bar(pos.r));
    }
    auto min_scalar = [&](double tau) {
      double m = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < u.size(); ++i) {
        const double v = std::pow(1.0 + tau, p) * std::pow(u[i] + tau, -(n + 2.0) / (n - 2.0)) *
                         (delta * et[i] * u[i] + tau * rb[i]);
        m = std::min(m, v);
      }
      return m;
    };
    const double floor = 0.1 * spec.min_scalar_floor;
    if (min_scalar(1.0) >= floor) {
      rung.tau = 1.0;
      rung.tau_found = true;
    } else if (min_scalar(1e-6) >= floor) {
      double lo = 1e-6, hi = 1.0;
      for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        (min_scalar(mid) >= floor ? lo : hi) = mid;
      }
      rung.tau = lo;
      rung.tau_found = true;
    } else {
      rung.tau = 1e-6;
    }
    rung.min_scalar = min_scalar(rung.tau);
    rung.mass = out.input_mass + 2.0 * rung.A_integral / (1.0 + rung.tau);
    out.rungs.push_back(rung);
  }
  out.negative = out.rungs.back().A_integral < 0.0;
  return out;
}

}  // namespace masskit
