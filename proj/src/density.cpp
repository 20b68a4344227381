#include "masskit/density.hpp"

#include "masskit/curvature.hpp"
#include "masskit/cutoff.hpp"
#include "masskit/decay.hpp"
#include "masskit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace masskit {

namespace {

const RadialProfile& require_profile(const MetricSpec& g) {
  if (!g.is_radial()) throw ConfigError("density pipeline runs on the RADIAL tier only");
  return *g.radial();
}

std::vector<double> log_samples(double a, double b, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  const double la = std::log(a), lb = std::log(b);
  for (int i = 0; i < count; ++i) out[i] = std::exp(la + (lb - la) * i / (count - 1));
  return out;
}

}  // namespace

double radial_scalar_curvature(const MetricSpec& g, double r) {
  return radial_curvature_accurate(require_profile(g), g.dimension(), r).scalar;
}

SchwarzschildSplit split_schwarzschild(const MetricSpec& g, double m) {
  const RadialProfile& prof = require_profile(g);
  const int n = g.dimension();
  const double p = conformal_power(n);
  RadialFn base = [n, m, p](double r) { return std::pow(1.0 + m / (2.0 * std::pow(r, n - 2)), p); };
  RadialProfile rem{[prof, base](double r) { return prof.radial(r) - base(r); },
                    [prof, base](double r) { return prof.tangential(r) - base(r); }};
  SchwarzschildSplit split{g, m, RadialProfile{base, base}, rem, {}};
  split.remainder_field = SymmetricField{
      n, [rem](const Vec& x) -> Mat { return rem.cartesian(x); }, g.chart_radius(), true};
  return split;
}

MetricSpec build_interpolated_metric(const SchwarzschildSplit& split, double s) {
  if (!(s > 1.0)) throw ConfigError("interpolation scale s must exceed 1");
  const RadialProfile prof = *split.input.radial();
  const RadialFn base = split.base.radial;
  auto blend = [s, base](RadialFn full) {
    return [s, base, full](double r) {
      const double z = interpolation_cutoff(r / s).value;
      if (z == 0.0) return full(r);
      const double b = base(r);
      if (z == 1.0) return b;
      return b + (1.0 - z) * (full(r) - b);
    };
  };
  RadialProfile hat{blend(prof.radial), blend(prof.tangential)};
  std::ostringstream label;
  label << "interpolated(" << split.input.label() << ", s=" << s << ")";
  MetricSpec g = metrics::from_profile(split.input.dimension(), hat, label.str(),
                                       MetricFamily::composite, split.input.chart_radius(),
                                       DecayBudget{2.0 - split.input.dimension()});
  g.with_mass_parameter(split.mass);
  return g;
}

double annulus_volume(const MetricSpec& g, double r_a, double r_b) {
  const RadialProfile& prof = require_profile(g);
  const int n = g.dimension();
  const double area = sphere_area(n);
  RadialFn density = [&](double r) {
    return area * std::pow(r * std::sqrt(prof.tangential(r)), n - 1) * std::sqrt(prof.radial(r));
  };
  return integrate(density, r_a, r_b, 64, 8);
}

ScalarBoundsAudit scalar_bounds_audit(const MetricSpec& g_hat, double s, int samples) {
  const int n = g_hat.dimension();
  ScalarBoundsAudit a;
  a.s = s;
  const double r0 = std::max(g_hat.chart_radius(), 1e-3) * 1.05;
  a.min_inner = std::numeric_limits<double>::infinity();
  for (double r : log_samples(r0, 2.0 * s, samples)) {
    a.min_inner = std::min(a.min_inner, radial_scalar_curvature(g_hat, r));
  }
  for (double r : log_samples(s, 4.0 * s, samples)) {
    a.max_abs_transition = std::max(a.max_abs_transition, std::abs(radial_scalar_curvature(g_hat, r)));
  }
  a.scaled_transition = a.max_abs_transition * std::pow(s, n);
  for (double r : log_samples(3.0 * s, 12.0 * s, samples)) {
    a.sup_outer = std::max(a.sup_outer, std::abs(radial_scalar_curvature(g_hat, r)));
  }
  const RadialProfile& prof = *g_hat.radial();
  const double q = 2.0 * n / (n + 2.0);
  RadialFn integrand = [&](double r) {
    const double vol = sphere_area(n) * std::pow(r * std::sqrt(prof.tangential(r)), n - 1) *
                       std::sqrt(prof.radial(r));
    return vol * std::pow(std::abs(radial_scalar_curvature(g_hat, r)), q);
  };
  a.transition_norm = std::pow(integrate(integrand, s, 4.0 * s, 48, 8), 1.0 / q);
  return a;
}

ScalarBoundsTrend scalar_bounds_trend(const SchwarzschildSplit& split,
                                      const std::vector<double>& s_ladder) {
  ScalarBoundsTrend t;
  std::vector<double> maxes, norms;
  for (double s : s_ladder) {
    t.audits.push_back(scalar_bounds_audit(build_interpolated_metric(split, s), s));
    maxes.push_back(t.audits.back().max_abs_transition);
    norms.push_back(t.audits.back().transition_norm);
  }
  if (s_ladder.size() >= 2) {
    if (*std::min_element(maxes.begin(), maxes.end()) > 0.0) {
      t.transition_exponent = fit_power_law(s_ladder, maxes).exponent;
    }
    if (*std::min_element(norms.begin(), norms.end()) > 0.0) {
      t.norm_exponent = fit_power_law(s_ladder, norms).exponent;
    }
  }
  return t;
}

namespace {

struct GaussTable {
  std::vector<double> weight, eta, scalar;
};

GaussTable tabulate(const MetricSpec& g_hat, double s, const RadialLine& line) {
  GaussTable t;
  for (std::size_t e = line.first_end_node(); e < line.elements(); ++e)
    for (int q = 0; q < RadialLine::kGauss; ++q) {
      const LinePosition p = line.gauss_point(e, q);
      if (p.r < s || p.r > 4.0 * s) continue;
      t.weight.push_back(line.volume_weight(e, q));
      t.eta.push_back(potential_cutoff(p.r / s).value);
      t.scalar.push_back(radial_scalar_curvature(g_hat, p.r));
    }
  return t;
}

double lp_lhs(const GaussTable& t, double delta, int n) {
  const double p = 0.5 * n;
  double sum = 0.0;
  for (std::size_t i = 0; i < t.weight.size(); ++i) {
    const double v = t.eta[i] * t.scalar[i] - delta * t.eta[i];
    if (v < 0.0) sum += t.weight[i] * std::pow(-v, p);
  }
  return std::pow(sum, 1.0 / p);
}

}  // namespace

DeltaChoice choose_delta(const MetricSpec& g_hat, double c_S, double s, const RadialLine& line) {
  if (!(c_S > 0.0)) throw ConfigError("delta selection needs a positive Sobolev constant");
  const int n = g_hat.dimension();
  DeltaChoice d;
  d.volume = annulus_volume(g_hat, s, 4.0 * s);
  const double ceiling = 1.0 / s;
  double delta0 = ceiling / (1.0 + d.volume);
  while (delta0 * (1.0 + d.volume) > ceiling) delta0 = std::nextafter(delta0, 0.0);
  d.delta0 = delta0;
  d.threshold = 0.5 * c_S;
  const GaussTable table = tabulate(g_hat, s, line);
  auto passes = [&](double delta) { return lp_lhs(table, delta, n) <= d.threshold; };
  if (passes(delta0)) {
    d.delta = delta0;
    d.immediate = true;
  } else {
    constexpr double floor = 1e-14;
    if (!passes(floor)) {
      std::ostringstream msg;
      msg << "no admissible delta_s above " << floor << " at s = " << s
          << "; the input leaves the nonnegative scalar curvature regime";
      throw PipelineError(msg.str(), "(int |(eta_s R - delta eta_s)_-|^{n/2})^{2/n} <= c_S/2",
                          lp_lhs(table, floor, n), d.threshold);
    }
    double lo = floor, hi = delta0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (passes(mid) ? lo : hi) = mid;
      ++d.bisection_steps;
    }
    d.delta = lo;
  }
  d.lhs = lp_lhs(table, d.delta, n);
  d.lp_margin = d.threshold - d.lhs;
  d.ceiling_margin = ceiling - d.delta * (1.0 + d.volume);
  return d;
}

namespace {

double input_min_scalar(const MetricSpec& g, double r_max) {
  const double r0 = std::max(g.chart_radius(), 1e-3) * 1.05;
  double m = std::numeric_limits<double>::infinity();
  for (double r : log_samples(r0, r_max, 600)) m = std::min(m, radial_scalar_curvature(g, r));
  return m;
}

struct TauTable {
  std::vector<double> u, eta, scalar;
};

double min_output_scalar(const TauTable& t, double delta, double tau, int n) {
  const double p = conformal_power(n);
  const double e = (n + 2.0) / (n - 2.0);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.u.size(); ++i) {
    const double bracket = ((1.0 - t.eta[i]) * t.scalar[i] + delta * t.eta[i]) * t.u[i] +
                           t.scalar[i] * tau;
    m = std::min(m, std::pow(1.0 + tau, p) * std::pow(t.u[i] + tau, -e) * bracket);
  }
  return m;
}

double pick_tau(const TauTable& t, double delta, int n, double floor) {
  constexpr double lo_bound = 1e-6, hi_bound = 1.0;
  if (min_output_scalar(t, delta, hi_bound, n) >= floor) return hi_bound;
  const double at_lo = min_output_scalar(t, delta, lo_bound, n);
  if (at_lo < floor) {
    throw PipelineError("no tau in [1e-6, 1] keeps the output scalar curvature nonnegative",
                        "min R(g_bar) >= floor", at_lo, floor);
  }
  double lo = lo_bound, hi = hi_bound;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    (min_output_scalar(t, delta, mid, n) >= floor ? lo : hi) = mid;
  }
  return lo;
}

std::vector<double> scaled(const std::vector<double>& factors, double s) {
  std::vector<double> out;
  for (double f : factors) out.push_back(f * s);
  return out;
}

}  // namespace

DensityRun density_deform(const MetricSpec& g, const DensityOptions& opt) {
  const RadialProfile& prof = require_profile(g);
  const int n = g.dimension();
  if (opt.s_ladder.empty()) throw ConfigError("s ladder is empty");
  for (std::size_t i = 0; i < opt.s_ladder.size(); ++i) {
    if (!(opt.s_ladder[i] > 1.0) || (i > 0 && !(opt.s_ladder[i] > opt.s_ladder[i - 1]))) {
      throw ConfigError("s ladder must increase strictly and start above 1");
    }
  }
  DensityRun run;
  run.input_min_scalar = input_min_scalar(g, 8.0 * opt.s_ladder.back());
  if (run.input_min_scalar < opt.min_scalar_floor) {
    std::ostringstream msg;
    msg << "input scalar curvature is negative (min sampled R = " << run.input_min_scalar << ")";
    throw RegimeError(msg.str(), "R(g) >= 0", run.input_min_scalar, opt.min_scalar_floor);
  }
  std::vector<double> mass_ladder = opt.input_mass_ladder;
  if (mass_ladder.empty()) mass_ladder = {64.0, 128.0, 256.0, 512.0};
  run.input_mass = adm_mass(g, mass_ladder).extrapolated;
  // an exact Schwarzschild input splits with its own parameter and leaves nothing to do
  const bool exact = g.family() == MetricFamily::schwarzschild && g.mass_parameter().has_value();
  const SchwarzschildSplit split = split_schwarzschild(g, exact ? *g.mass_parameter() : run.input_mass);
  bool zero_remainder = exact;
  for (double r = 1.5 * g.chart_radius(); zero_remainder && r < 64.0 * opt.s_ladder.back(); r *= 1.1) {
    zero_remainder = split.remainder.radial(r) == 0.0 && split.remainder.tangential(r) == 0.0;
  }

  const double kappa = conformal_coupling(n);
  const double p = conformal_power(n);
  int stalls = 0;
  for (double s : opt.s_ladder) {
    DensityPipelineState st;
    st.s = s;
    if (zero_remainder) {
      st.zero_work = true;
      st.m_bar = run.input_mass;
      st.adm_input = st.adm_output = run.input_mass;
      st.output = g;
      run.rungs.push_back(std::move(st));
      if (opt.epsilon_target > 0.0) {
        run.target_met = true;
        break;
      }
      continue;
    }
    const MetricSpec g_hat = build_interpolated_metric(split, s);
    const RadialProfile hat = *g_hat.radial();
    st.scalar = scalar_bounds_audit(g_hat, s);

    DomainModel domain;
    domain.kind = DomainModel::Kind::end_annulus;
    domain.r_inner = g.chart_radius();
    domain.r_out = 40.0 * s;
    domain.cylinder_l0 = opt.cylinder_l0;
    domain.nodes_per_decade = opt.nodes_per_decade;

    st.sobolev_constant = opt.sobolev_constant > 0.0
                              ? opt.sobolev_constant
                              : sobolev_estimate(g_hat, domain).estimate;
    LineSpec ls;
    ls.r_inner = domain.r_inner;
    ls.r_outer = domain.r_out;
    ls.nodes_per_decade = domain.nodes_per_decade;
    st.delta = choose_delta(g_hat, st.sobolev_constant, s, RadialLine::build(g_hat, ls));
    const double delta = st.delta.delta;

    EllipticProblem problem{g_hat, Potential{}, domain, {}};
    problem.f.end = [g_hat, s, delta, kappa](double r) {
      const double eta = potential_cutoff(r / s).value;
      if (eta == 0.0) return 0.0;
      return kappa * eta * (radial_scalar_curvature(g_hat, r) - delta);
    };
    problem.f.cylinder = [](double) { return 0.0; };
    problem.f.support_radius = 4.0 * s;
    problem.f.label = "kappa (eta_s R - delta_s eta_s)";
    problem.controls.sobolev_constant = st.sobolev_constant;
    const ConformalFactorSolution sol = solve_conformal_factor(problem);
    st.A_integral = sol.A_integral;
    st.A_fit = sol.A_fit;
    st.log = sol.log;

    TauTable table;
    std::vector<double> radii;
    for (const LinePosition& pos : sol.nodes) {
      if (pos.region == LineRegion::cylinder) continue;
      if (pos.r > 8.0 * s) break;
      radii.push_back(pos.r);
    }
    for (double r : radii) {
      table.u.push_back(sol.u_at(r));
      table.eta.push_back(potential_cutoff(r / s).value);
      table.scalar.push_back(radial_scalar_curvature(g_hat, r));
    }
    // a tenth of the audit floor leaves room for sampling noise
    st.tau = pick_tau(table, delta, n, 0.1 * opt.min_scalar_floor);
    st.min_scalar = min_output_scalar(table, delta, st.tau, n);
    st.mass_shift = 2.0 * st.A_integral / (1.0 + st.tau);
    st.m_bar = run.input_mass + st.mass_shift;
    st.identity_residual = (st.m_bar - run.input_mass) - st.mass_shift;

    const double tau = st.tau;
    const RadialFn u_at = sol.u_at;
    auto u_tau = [u_at, tau](double r) { return (u_at(r) + tau) / (1.0 + tau); };
    RadialProfile bar{[u_tau, hat, p](double r) { return std::pow(u_tau(r), p) * hat.radial(r); },
                      [u_tau, hat, p](double r) {
                        return std::pow(u_tau(r), p) * hat.tangential(r);
                      }};
    std::ostringstream label;
    label << "deformed(" << g.label() << ", s=" << s << ")";
    MetricSpec g_bar = metrics::from_profile(n, bar, label.str(), MetricFamily::composite,
                                             g.chart_radius(), DecayBudget{2.0 - n});
    g_bar.with_mass_parameter(st.m_bar);

    st.min_u_tau = std::numeric_limits<double>::infinity();
    for (double u : sol.u) st.min_u_tau = std::min(st.min_u_tau, (u + tau) / (1.0 + tau));
    for (std::size_t k = 0; k < sol.nodes.size(); ++k) {
      const LinePosition& pos = sol.nodes[k];
      if (pos.region == LineRegion::cylinder) continue;
      st.v_sup = std::max(st.v_sup, std::abs(sol.v[k]));
      if (pos.r > 1e3 * s) continue;
      const double da = bar.radial(pos.r) / prof.radial(pos.r) - 1.0;
      const double db = bar.tangential(pos.r) / prof.tangential(pos.r) - 1.0;
      st.end_norm = std::max(st.end_norm, std::sqrt(da * da + (n - 1.0) * db * db));
    }

    // closed form against the difference formula at three audit radii
    for (double f : {1.5, 2.5, 3.5}) {
      const double r = f * s;
      const double u = sol.u_at(r);
      const double eta = potential_cutoff(f).value;
      const double R = radial_scalar_curvature(g_hat, r);
      const double closed = std::pow(1.0 + tau, p) * std::pow(u + tau, -(n + 2.0) / (n - 2.0)) *
                            (((1.0 - eta) * R + delta * eta) * u + R * tau);
      const Vec x = point_on_axis(n, r);
      const double h = default_step(r);
      st.bartnik_step = std::max(st.bartnik_step, h);
      st.bartnik_gap = std::max(st.bartnik_gap, std::abs(closed - scalar_curvature_bartnik(g_bar, x, h)));
    }

    if (opt.verify_adm) {
      const std::vector<double> ladder = scaled(opt.mass_ladder_factors, s);
      st.adm_input = adm_mass(g, ladder).extrapolated;
      st.adm_output = adm_mass(g_bar, ladder).extrapolated;
      st.adm_shift = st.adm_output - st.adm_input;
      st.adm_relative_error = std::abs(st.adm_shift - st.mass_shift) /
                              std::max(std::abs(st.mass_shift), 1e-12);
    }
    st.output = g_bar;

    if (!run.rungs.empty()) {
      const double prev = std::abs(run.rungs.back().A_integral);
      stalls = std::abs(st.A_integral) < prev ? 0 : stalls + 1;
    }
    run.rungs.push_back(std::move(st));
    const DensityPipelineState& last = run.rungs.back();
    if (opt.epsilon_target > 0.0 && std::abs(last.mass_shift) <= opt.epsilon_target) {
      run.target_met = true;
      break;
    }
    if (stalls >= 3) {
      std::ostringstream msg;
      msg << "|A_s| failed to decrease over three consecutive s doublings; trend:";
      for (const auto& r : run.rungs) msg << " s=" << r.s << ":" << r.A_integral;
      throw ConvergenceError(msg.str());
    }
  }
  if (opt.epsilon_target <= 0.0) run.target_met = true;
  return run;
}

}  // namespace masskit
