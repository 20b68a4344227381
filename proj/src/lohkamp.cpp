#include "masskit/compactification.hpp"

#include "masskit/curvature.hpp"
#include "masskit/parallel.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace masskit {

LohkampCutoff LohkampCutoff::from_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("cutoff epsilon must lie in (0, 1)");
  LohkampCutoff z;
  z.epsilon = epsilon;
  z.lower = 1.0 - 0.75 * epsilon;
  z.upper = 1.0 - 0.25 * epsilon;
  z.cap = 1.0 - 0.5 * epsilon;
  return z;
}

Jet LohkampCutoff::operator()(double t) const {
  if (t <= lower) return {t, 1.0, 0.0};
  if (t >= upper) return {cap, 0.0, 0.0};
  const double w = upper - lower;
  const double x = (t - lower) / w;
  const double x2 = x * x;
  return {lower + w * (x - x2 * x + 0.5 * x2 * x2), 1.0 - x2 * (3.0 - 2.0 * x),
          -6.0 * x * (1.0 - x) / w};
}

namespace {

double flat_step(double r) { return std::min(0.005 * r, 0.05); }

// Fourth-order central differences of a scalar on the flat chart.
struct FlatJet {
  double value = 0.0;
  double grad_sq = 0.0;
  double laplacian = 0.0;
};

FlatJet flat_jet(const ScalarFn& f, const Vec& x) {
  const int n = static_cast<int>(x.size());
  const double h = flat_step(x.norm());
  FlatJet out;
  out.value = f(x);
  for (int k = 0; k < n; ++k) {
    Vec y = x;
    auto at = [&](double s) {
      y(k) = x(k) + s * h;
      return f(y);
    };
    const double fm2 = at(-2), fm1 = at(-1), fp1 = at(1), fp2 = at(2);
    const double d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
    const double d2 = (-fm2 + 16.0 * fm1 - 30.0 * out.value + 16.0 * fp1 - fp2) / (12.0 * h * h);
    out.grad_sq += d1 * d1;
    out.laplacian += d2;
  }
  return out;
}

double radial_d1(const RadialFn& f, double r) {
  const double h = flat_step(r);
  return (f(r - 2 * h) - 8.0 * f(r - h) + 8.0 * f(r + h) - f(r + 2 * h)) / (12.0 * h);
}

double radial_d2(const RadialFn& f, double r) {
  const double h = flat_step(r);
  return (-f(r - 2 * h) + 16.0 * f(r - h) - 30.0 * f(r) + 16.0 * f(r + h) - f(r + 2 * h)) /
         (12.0 * h * h);
}

std::vector<Vec> audit_directions(int n) {
  Vec generic(n);
  for (int i = 0; i < n; ++i) generic(i) = 1.0 + i;
  return {unit_vector(n, 0), generic.normalized()};
}

std::vector<double> log_samples(double a, double b, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[i] = a * std::pow(b / a, static_cast<double>(i) / (count - 1));
  return out;
}

// Radius where the radial profile of u crosses level, u increasing in r.
double crossing_radius(const RadialFn& u, double level, double lo, double hi) {
  while (u(hi) < level) {
    hi *= 2.0;
    if (hi > 1e12) throw ConstructionError("factor never reaches the cutoff plateau");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (u(mid) < level ? lo : hi) = mid;
  }
  return hi;
}

// Delta v by the chain rule; exact zero on the plateau.
double chain_laplacian(const LohkampCutoff& zeta, const FlatJet& j) {
  const Jet z = zeta(j.value);
  if (z.d1 == 0.0 && z.d2 == 0.0) return 0.0;
  return z.d2 * j.grad_sq + z.d1 * j.laplacian;
}

std::string location(const Vec& x) {
  std::ostringstream s;
  s << "x = (";
  for (int i = 0; i < x.size(); ++i) s << (i ? ", " : "") << x(i);
  s << "), r = " << x.norm();
  return s.str();
}

}  // namespace

LohkampInput lohkamp_input(const MetricSpec& g_bar, double s1) {
  if (!g_bar.conformal_factor()) {
    throw ConfigError("compactification needs a conformally flat end with a closed-form factor");
  }
  LohkampInput in{g_bar, {}, *g_bar.conformal_factor(), 0.0, s1};
  const RadialFn phi = *g_bar.conformal_factor();
  in.u = [phi](const Vec& x) { return phi(x.norm()); };
  const int n = g_bar.dimension();
  if (g_bar.mass_parameter()) {
    in.mass = *g_bar.mass_parameter();
  } else {
    const double r = 1e4;
    in.mass = 2.0 * (phi(r) - 1.0) * std::pow(r, n - 2);
  }
  return in;
}

LohkampCutoffResult lohkamp_cutoff(const LohkampInput& input) {
  const int n = input.metric.dimension();
  if (!(input.s1 > input.metric.chart_radius())) throw ConfigError("s1 must lie inside the chart");
  const SphereRule rule = sphere_rule(n, input.sphere_order);
  LohkampCutoffResult out;
  out.sup_on_sphere = -std::numeric_limits<double>::infinity();
  for (const Vec& d : rule.directions) {
    out.sup_on_sphere = std::max(out.sup_on_sphere, input.u(input.s1 * d));
  }
  if (!(out.sup_on_sphere < 1.0)) {
    std::ostringstream msg;
    msg << "u >= 1 on the sphere r = " << input.s1 << " (sup u = " << out.sup_on_sphere
        << "): a positive-mass end cannot be capped off";
    throw PreconditionError(msg.str(), "sup_{r=s1} u < 1", out.sup_on_sphere, 1.0);
  }
  if (!(input.mass < 0.0)) {
    throw PreconditionError("mass of the harmonic factor is not negative", "m_bar < 0", input.mass,
                            0.0);
  }
  out.epsilon = 1.0 - out.sup_on_sphere;
  out.zeta = LohkampCutoff::from_epsilon(out.epsilon);
  const ScalarFn u = input.u;
  const LohkampCutoff zeta = out.zeta;
  const double s1 = input.s1;
  out.v = [u, zeta, s1](const Vec& x) {
    const double t = u(x);
    return x.norm() <= s1 ? t : zeta(t).value;
  };
  return out;
}

SuperharmonicAudit check_superharmonic(const LohkampInput& input, const LohkampCutoffResult& cut,
                                       double outer, int radial_samples) {
  const int n = input.metric.dimension();
  const LohkampCutoff& zeta = cut.zeta;
  const RadialFn profile = input.u_radial
                               ? input.u_radial
                               : RadialFn([&input, n](double r) {
                                   return input.u(point_on_axis(n, r));
                                 });
  SuperharmonicAudit a;
  a.transition_inner = crossing_radius(profile, zeta.lower, input.s1, 2.0 * input.s1);
  a.transition_outer = crossing_radius(profile, zeta.upper, a.transition_inner, 2.0 * a.transition_inner);
  if (!(outer > 0.0)) outer = 2.0 * a.transition_outer;
  a.radii = log_samples(input.s1, outer, radial_samples);
  a.laplacian.assign(a.radii.size(), 0.0);

  const std::vector<Vec> dirs = audit_directions(n);
  struct Row {
    double max_lap = -std::numeric_limits<double>::infinity();
    double min_band = std::numeric_limits<double>::infinity();
    double identity = 0.0, plateau = 0.0, harmonic = 0.0, gap = 0.0;
  };
  std::vector<Row> rows(a.radii.size());
  parallel_for(a.radii.size(), [&](std::size_t i) {
    const double r = a.radii[i];
    Row& row = rows[i];
    for (const Vec& d : dirs) {
      const FlatJet j = flat_jet(input.u, r * d);
      const double lap = chain_laplacian(zeta, j);
      row.harmonic = std::max(row.harmonic, std::abs(j.laplacian));
      row.max_lap = std::max(row.max_lap, lap);
      if (j.value <= zeta.lower) {
        row.identity = std::max(row.identity, std::abs(lap));
      } else if (j.value >= zeta.upper) {
        row.plateau = std::max(row.plateau, std::abs(lap));
      } else {
        row.min_band = std::min(row.min_band, lap);
      }
      if (input.u_radial) {
        const Jet z = zeta(j.value);
        const double u1 = radial_d1(input.u_radial, r), u2 = radial_d2(input.u_radial, r);
        const double closed = z.d2 * u1 * u1 + z.d1 * (u2 + (n - 1.0) * u1 / r);
        row.gap = std::max(row.gap, std::abs(closed - lap));
      }
    }
  });
  a.max_laplacian = -std::numeric_limits<double>::infinity();
  a.min_transition_laplacian = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    a.laplacian[i] = rows[i].max_lap;
    a.max_laplacian = std::max(a.max_laplacian, rows[i].max_lap);
    a.min_transition_laplacian = std::min(a.min_transition_laplacian, rows[i].min_band);
    a.max_identity_laplacian = std::max(a.max_identity_laplacian, rows[i].identity);
    a.max_plateau_laplacian = std::max(a.max_plateau_laplacian, rows[i].plateau);
    a.max_harmonic_residual = std::max(a.max_harmonic_residual, rows[i].harmonic);
    a.closed_form_gap = std::max(a.closed_form_gap, rows[i].gap);
  }
  if (a.max_harmonic_residual > input.harmonic_tolerance) {
    throw PreconditionError("factor u is not harmonic on {r >= s1}", "|Delta u| <= tol",
                            a.max_harmonic_residual, input.harmonic_tolerance);
  }
  a.pass = a.max_laplacian <= 1e-10 && a.min_transition_laplacian < -1e-6;
  return a;
}

LohkampMetricResult lohkamp_metric(const LohkampInput& input, const LohkampCutoffResult& cut,
                                   const SuperharmonicAudit& audit) {
  if (!audit.pass) {
    throw ConstructionError("superharmonic audit did not pass", "max Delta v <= 1e-10",
                            audit.max_laplacian, 1e-10);
  }
  const int n = input.metric.dimension();
  const double p = conformal_power(n);
  const double kappa = conformal_coupling(n);
  const MetricSpec g_bar = input.metric;
  const ScalarFn u = input.u, v = cut.v;
  const LohkampCutoff zeta = cut.zeta;
  const double s1 = input.s1;

  LohkampMetricResult out{g_bar, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, false, {}};
  out.r_flat = audit.transition_outer;
  out.flat_scale = std::pow(zeta.cap, p);
  TensorFn eval = [g_bar, v, s1, p, n](const Vec& x) -> Mat {
    if (x.norm() <= s1) return g_bar(x);
    return std::pow(v(x), p) * Mat::Identity(n, n);
  };
  std::ostringstream label;
  label << "lohkamp(" << g_bar.label() << ", eps=" << cut.epsilon << ")";
  out.metric = MetricSpec(n, MetricFamily::composite, label.str(), eval, g_bar.chart_radius());
  out.metric.with_decay(DecayBudget{0.0});

  // R of w^{4/(n-2)} delta, w = v (= u inside s1)
  out.scalar_curvature = [u, zeta, s1, kappa, n](const Vec& x) {
    const FlatJet j = flat_jet(u, x);
    const bool outside = x.norm() > s1;
    const double w = outside ? zeta(j.value).value : j.value;
    const double lap = outside ? chain_laplacian(zeta, j) : j.laplacian;
    if (lap == 0.0) return 0.0;
    return -lap / (kappa * std::pow(w, (n + 2.0) / (n - 2.0)));
  };

  const double lo = 1.5 * g_bar.chart_radius();
  const std::vector<double> radii = log_samples(lo, 4.0 * out.r_flat, 400);
  const std::vector<Vec> dirs = audit_directions(n);
  std::vector<double> rmin(radii.size()), rmax(radii.size());
  parallel_for(radii.size(), [&](std::size_t i) {
    rmin[i] = std::numeric_limits<double>::infinity();
    rmax[i] = -std::numeric_limits<double>::infinity();
    for (const Vec& d : dirs) {
      const double R = out.scalar_curvature(radii[i] * d);
      rmin[i] = std::min(rmin[i], R);
      rmax[i] = std::max(rmax[i], R);
    }
  });
  out.min_scalar = std::numeric_limits<double>::infinity();
  out.max_scalar = -std::numeric_limits<double>::infinity();
  std::size_t worst = 0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (rmin[i] < out.min_scalar) {
      out.min_scalar = rmin[i];
      worst = i;
    }
    if (rmax[i] > out.max_scalar) {
      out.max_scalar = rmax[i];
      out.max_scalar_radius = radii[i];
    }
  }
  if (out.min_scalar < -1e-8) {
    std::ostringstream msg;
    msg << "R(g~) negative at r = " << radii[worst];
    throw ConstructionError(msg.str(), "R(g~) >= -1e-8", out.min_scalar, -1e-8);
  }
  if (!(out.max_scalar > 1e-6)) {
    throw ConstructionError("no positive scalar curvature witness", "max R(g~) > 1e-6",
                            out.max_scalar, 1e-6);
  }
  const Vec witness = point_on_axis(n, out.max_scalar_radius);
  out.bartnik_gap =
      std::abs(scalar_curvature_bartnik(out.metric, witness) - out.scalar_curvature(witness));

  const Mat flat = out.flat_scale * Mat::Identity(n, n);
  out.constant_outside = true;
  for (double r : log_samples(out.r_flat, 64.0 * out.r_flat, 200)) {
    for (const Vec& d : dirs) {
      const Vec x = r * d;
      if (out.metric(x) != flat) {
        throw ConstructionError("g~ is not constant beyond r_flat at " + location(x));
      }
    }
  }
  return out;
}

TorusChart torus_glue(const LohkampMetricResult& lm, double side, int grid, int face_samples) {
  const MetricSpec& g = lm.metric;
  const int n = g.dimension();
  if (!(side > 0.0)) side = 16.0 * lm.r_flat;
  if (grid < 2 || face_samples < 2) throw ConfigError("torus sampling needs at least 2 points per axis");
  TorusChart chart;
  chart.dimension = n;
  chart.side = side;
  chart.grid = grid;
  chart.collar = side / 16.0;
  const double half = 0.5 * side;
  const Mat flat = lm.flat_scale * Mat::Identity(n, n);
  const double h = chart.collar / 4.0;

  // face pairs x_k = -half and x_k = +half, values and normal derivative stencils
  std::vector<int> idx(static_cast<std::size_t>(n - 1), 0);
  for (int k = 0; k < n; ++k) {
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      Vec lo(n);
      for (int a = 0, j = 0; a < n; ++a) {
        if (a == k) {
          lo(a) = -half;
        } else {
          lo(a) = -half + side * idx[j++] / (face_samples - 1);
        }
      }
      Vec hi = lo;
      hi(k) = half;
      for (double depth : {0.0, 0.5 * chart.collar, chart.collar}) {
        for (const Vec& base : {lo, hi}) {
          Vec y = base;
          y(k) += base(k) < 0.0 ? depth : -depth;
          if (g(y) != flat) {
            throw GluingError("metric is not constant in the collar at " + location(y),
                              "g = const delta on the collar", (g(y) - flat).norm(), 0.0);
          }
        }
      }
      auto stencil = [&](const Vec& x) {
        Vec e = unit_vector(n, k) * h;
        const Mat gm = g(x - e), g0 = g(x), gp = g(x + e);
        return std::array<Mat, 3>{g0, (gp - gm) / (2.0 * h), (gp - 2.0 * g0 + gm) / (h * h)};
      };
      const auto sl = stencil(lo), sh = stencil(hi);
      for (int q = 0; q < 3; ++q) {
        chart.max_face_gap = std::max(chart.max_face_gap, (sl[q] - sh[q]).cwiseAbs().maxCoeff());
      }
      int j = n - 2;
      while (j >= 0) {
        if (++idx[j] < face_samples) break;
        idx[j] = 0;
        --j;
      }
      if (j < 0) break;
    }
  }
  if (chart.max_face_gap != 0.0) {
    throw GluingError("identified faces disagree", "face gap = 0", chart.max_face_gap, 0.0);
  }

  // fundamental domain: cell centres plus a ray through the transition band
  std::vector<Vec> points;
  std::vector<int> cell(static_cast<std::size_t>(n), 0);
  while (true) {
    Vec x(n);
    for (int a = 0; a < n; ++a) x(a) = -half + side * (cell[a] + 0.5) / grid;
    points.push_back(x);
    int j = n - 1;
    while (j >= 0) {
      if (++cell[j] < grid) break;
      cell[j] = 0;
      --j;
    }
    if (j < 0) break;
  }
  for (double r : log_samples(1.5 * g.chart_radius(), half, 64)) points.push_back(point_on_axis(n, r));

  const double inner = 1.5 * g.chart_radius();
  std::vector<TorusSample> samples(points.size());
  std::vector<char> keep(points.size(), 0);
  parallel_for(points.size(), [&](std::size_t i) {
    const Vec& x = points[i];
    if (x.norm() < inner) return;
    keep[i] = 1;
    samples[i] = TorusSample{x, g(x), lm.scalar_curvature(x)};
  });
  chart.min_scalar = std::numeric_limits<double>::infinity();
  chart.max_scalar = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!keep[i]) {
      ++chart.skipped_interior;
      continue;
    }
    chart.min_scalar = std::min(chart.min_scalar, samples[i].scalar);
    chart.max_scalar = std::max(chart.max_scalar, samples[i].scalar);
    chart.samples.push_back(std::move(samples[i]));
  }
  chart.sampled = chart.samples.size();
  if (chart.min_scalar < -1e-8) {
    throw GluingError("glued metric has negative scalar curvature", "R >= -1e-8", chart.min_scalar,
                      -1e-8);
  }
  if (!(chart.max_scalar > 1e-6)) {
    throw GluingError("glued metric has no positive scalar curvature witness", "max R > 1e-6",
                      chart.max_scalar, 1e-6);
  }
  return chart;
}

}  // namespace masskit
