#include "masskit/adm.hpp"

#include "masskit/decay.hpp"
#include "masskit/parallel.hpp"

#include <cmath>
#include <limits>

namespace masskit {

namespace {

void check_ladder(std::span<const double> ladder, std::size_t minimum) {
  if (ladder.size() < minimum) {
    throw ConfigError("radius ladder needs at least " + std::to_string(minimum) + " rungs");
  }
  for (std::size_t i = 1; i < ladder.size(); ++i) {
    if (!(ladder[i] > ladder[i - 1])) throw ConfigError("radius ladder must increase strictly");
  }
}

double sweep(std::span<const double> r, double p, int i) { return std::pow(r[i], -p); }

}  // namespace

SymmetricField as_field(const MetricSpec& g) {
  return SymmetricField{g.dimension(), g.evaluator(), g.chart_radius(), g.is_radial()};
}

double flux_integrand(const SymmetricField& field, const Vec& x, double h) {
  const int n = field.dim;
  if (field.chart_radius > 0.0 && x.norm() - h < field.chart_radius) {
    throw DomainError("flux stencil leaves the chart");
  }
  std::vector<Mat> dg(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    Vec xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    dg[k] = (field.eval(xp) - field.eval(xm)) / (2.0 * h);
  }
  const Vec xh = x / x.norm();
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    double div = 0.0, trace_grad = 0.0;
    for (int j = 0; j < n; ++j) {
      div += dg[j](i, j);
      trace_grad += dg[i](j, j);
    }
    s += xh(i) * (div - trace_grad);
  }
  return s;
}

double flux_integral(const SymmetricField& field, double rho, const SphereRule& rule) {
  const double h = default_step(rho);
  const double area_scale = std::pow(rho, field.dim - 1);
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.directions.size(); ++q) {
    sum += rule.weights[q] * flux_integrand(field, rho * rule.directions[q], h);
  }
  return sum * area_scale;
}

namespace {

double radial_flux(const SymmetricField& field, double rho) {
  const double h = default_step(rho);
  return flux_integrand(field, point_on_axis(field.dim, rho), h) * sphere_area(field.dim) *
         std::pow(rho, field.dim - 1);
}

double normalization(int n) { return 1.0 / (2.0 * (n - 1.0) * sphere_area(n)); }

}  // namespace

double adm_surface_integral(const MetricSpec& g, double rho, int order) {
  const int n = g.dimension();
  const SymmetricField field = as_field(g);
  g.require_stencil(point_on_axis(n, rho), default_step(rho));
  if (field.radial) return normalization(n) * radial_flux(field, rho);
  return normalization(n) * flux_integral(field, rho, sphere_rule(n, order));
}

Extrapolation extrapolate_limit(std::span<const double> radii, std::span<const double> values,
                                double fallback_order) {
  check_ladder(radii, 3);
  if (values.size() != radii.size()) throw ConfigError("ladder and values differ in length");
  const std::size_t k = radii.size();
  const std::span<const double> r = radii.subspan(k - 3);
  const double m1 = values[k - 3], m2 = values[k - 2], m3 = values[k - 1];
  const double d1 = m2 - m1, d2 = m3 - m2;
  const double scale = std::max(1.0, std::abs(m3));

  auto with_order = [&](double p) {
    const double c = d2 / (sweep(r, p, 2) - sweep(r, p, 1));
    return m3 - c * sweep(r, p, 2);
  };

  Extrapolation out;
  if (std::abs(d1) <= 1e-13 * scale && std::abs(d2) <= 1e-13 * scale) {
    out.value = m3;
    out.order = fallback_order;
    out.fallback = true;
    return out;
  }
  if (d1 * d2 > 0.0 && std::abs(d2) < std::abs(d1)) {
    const double target = d1 / d2;
    auto ratio = [&](double p) {
      return (sweep(r, p, 1) - sweep(r, p, 0)) / (sweep(r, p, 2) - sweep(r, p, 1)) - target;
    };
    double lo = 1e-3, hi = 12.0;
    if (ratio(lo) < 0.0 && ratio(hi) > 0.0) {
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ratio(mid) > 0.0 ? hi : lo) = mid;
      }
      const double p = 0.5 * (lo + hi);
      if (p >= 0.25 && p <= 8.0) {
        out.order = p;
        out.value = with_order(p);
        return out;
      }
    }
  }
  out.fallback = true;
  out.order = fallback_order;
  out.value = with_order(fallback_order);
  if (d1 * d2 < 0.0 && std::abs(d2) > 1e-10 * scale) out.low_confidence = true;
  return out;
}

namespace {

MassReport finish_report(const MetricSpec& g, std::span<const double> ladder,
                         std::vector<double> partial, int order, std::string rule,
                         std::size_t points) {
  MassReport rep;
  rep.dimension = g.dimension();
  rep.metric_label = g.label();
  rep.radii.assign(ladder.begin(), ladder.end());
  rep.partial_masses = std::move(partial);
  const Extrapolation ex =
      extrapolate_limit(rep.radii, rep.partial_masses, static_cast<double>(g.dimension() - 2));
  rep.extrapolated = ex.value;
  rep.observed_order = ex.order;
  rep.order_fallback = ex.fallback;
  rep.low_confidence = ex.low_confidence;
  rep.quadrature_order = order;
  rep.angular_rule = std::move(rule);
  rep.angular_points = points;
  return rep;
}

void check_geometric(std::span<const double> ladder) {
  const double ratio = ladder[1] / ladder[0];
  for (std::size_t i = 2; i < ladder.size(); ++i) {
    if (std::abs(ladder[i] / ladder[i - 1] - ratio) > 1e-9 * ratio) {
      throw ConfigError("radius ladder must be geometric");
    }
  }
}

}  // namespace

MassReport adm_mass(const MetricSpec& g, std::span<const double> ladder, int order) {
  check_ladder(ladder, 3);
  check_geometric(ladder);
  const int n = g.dimension();
  for (double rho : ladder) g.require_stencil(point_on_axis(n, rho), default_step(rho));
  const SymmetricField field = as_field(g);
  std::vector<double> partial(ladder.size(), 0.0);
  if (field.radial) {
    parallel_for(ladder.size(), [&](std::size_t i) {
      partial[i] = normalization(n) * radial_flux(field, ladder[i]);
    });
    return finish_report(g, ladder, std::move(partial), order, "radial_exact", 1);
  }
  const SphereRule rule = sphere_rule(n, order);
  parallel_for(ladder.size(), [&](std::size_t i) {
    partial[i] = normalization(n) * flux_integral(field, ladder[i], rule);
  });
  return finish_report(g, ladder, std::move(partial), order, rule.name, rule.directions.size());
}

MassReport adm_mass_with_rule(const MetricSpec& g, std::span<const double> ladder,
                              const SphereRule& rule, double covering_factor) {
  check_ladder(ladder, 3);
  check_geometric(ladder);
  const int n = g.dimension();
  for (double rho : ladder) g.require_stencil(point_on_axis(n, rho), default_step(rho));
  SymmetricField field = as_field(g);
  std::vector<double> partial(ladder.size(), 0.0);
  parallel_for(ladder.size(), [&](std::size_t i) {
    partial[i] = covering_factor * normalization(n) * flux_integral(field, ladder[i], rule);
  });
  return finish_report(g, ladder, std::move(partial), 0, rule.name, rule.directions.size());
}

ResidualFluxReport residual_flux(const SymmetricField& remainder, std::span<const double> ladder,
                                 double tolerance, int order) {
  check_ladder(ladder, 2);
  ResidualFluxReport rep;
  rep.radii.assign(ladder.begin(), ladder.end());
  rep.fluxes.assign(ladder.size(), 0.0);
  rep.tolerance = tolerance;
  const SphereRule rule = sphere_rule(remainder.dim, order);
  parallel_for(ladder.size(), [&](std::size_t i) {
    rep.fluxes[i] = remainder.radial ? radial_flux(remainder, ladder[i])
                                     : flux_integral(remainder, ladder[i], rule);
  });
  std::vector<double> mags;
  for (double f : rep.fluxes) mags.push_back(std::abs(f));
  bool decreasing = true;
  for (std::size_t i = 1; i < mags.size(); ++i) {
    if (mags[i] > mags[i - 1] && mags[i] > tolerance * 1e-3) decreasing = false;
  }
  rep.decreasing = decreasing;
  double peak = 0.0;
  for (double m : mags) peak = std::max(peak, m);
  if (peak > 1e-12) {
    const DecayFit fit = fit_power_law(rep.radii, mags);
    rep.slope = fit.exponent;
    rep.slope_fitted = fit.fitted;
  }
  rep.pass = mags.back() <= tolerance && decreasing;
  return rep;
}

MassReport ale_mass(const MetricSpec& cover, int group_order, std::span<const double> ladder,
                    int order) {
  if (group_order < 1) throw ConfigError("group order |Gamma| must be at least 1");
  MassReport rep = adm_mass(cover, ladder, order);
  for (double& m : rep.partial_masses) m /= group_order;
  rep.extrapolated /= group_order;
  rep.group_order = group_order;
  return rep;
}

bool extrapolation_bracketed(const MassReport& report) {
  const std::size_t k = report.partial_masses.size();
  if (k < 3) return false;
  const double m1 = report.partial_masses[k - 3];
  const double m2 = report.partial_masses[k - 2];
  const double m3 = report.partial_masses[k - 1];
  const double d1 = m2 - m1, d2 = m3 - m2;
  if (!(d1 * d2 > 0.0)) return true;
  const double beyond = (report.extrapolated - m3) * (d2 > 0 ? 1.0 : -1.0);
  const double slack = 1e-12 * std::max(1.0, std::abs(m3));
  return beyond >= -slack && beyond <= std::abs(m3 - m1) + slack;
}

}  // namespace masskit
