#include "masskit/elliptic.hpp"

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

namespace masskit {

double DomainModel::cylinder_length(int level) const {
  return has_toy_end() ? std::ldexp(cylinder_l0, level) : 0.0;
}

void DomainModel::validate() const {
  if (kind == Kind::end_annulus && !(r_inner > 0.0)) throw ConfigError("r_inner must be positive");
  if (!(r_out > (kind == Kind::ball ? 0.0 : r_inner))) throw ConfigError("r_out must exceed r_inner");
  if (cylinder_l0 < 0.0) throw ConfigError("cylinder length must be nonnegative");
  if (kind == Kind::ball && cylinder_l0 > 0.0) throw ConfigError("toy ends attach to annuli only");
  if (nodes_per_decade < 10) throw ConfigError("nodes_per_decade must be at least 10");
  if (max_cylinder_levels < 1 || max_truncation_doublings < 1) {
    throw ConfigError("exhaustion schedules need at least one step");
  }
}

Potential Potential::zero() {
  Potential p;
  p.end = [](double) { return 0.0; };
  p.cylinder = [](double) { return 0.0; };
  p.support_radius = 0.0;
  p.label = "zero";
  return p;
}

namespace {

Potential shell_potential(double amplitude, double center, double width, bool odd, std::string label) {
  if (!(width > 0.0)) throw ConfigError("potential width must be positive");
  Potential p;
  p.end = [=](double r) {
    const double x = (r - center) / width;
    if (std::abs(x) >= 1.0) return 0.0;
    const double w = 1.0 - x * x;
    return amplitude * (odd ? x : 1.0) * w * w * w * w;
  };
  p.cylinder = [](double) { return 0.0; };
  p.support_radius = center + width;
  p.label = std::move(label);
  return p;
}

}  // namespace

Potential bump_potential(double amplitude, double center, double width) {
  return shell_potential(amplitude, center, width, false, "bump");
}

Potential dipole_potential(double amplitude, double center, double width) {
  return shell_potential(amplitude, center, width, true, "dipole");
}

double Potential::at(const LinePosition& p) const {
  if (p.region == LineRegion::cylinder) return cylinder ? cylinder(p.t) : 0.0;
  if (p.r > support_radius) return 0.0;
  return end ? end(p.r) : 0.0;
}

namespace {

constexpr int G = RadialLine::kGauss;

std::vector<double> potential_at_gauss(const RadialLine& line, const Potential& f) {
  std::vector<double> out(line.elements() * G);
  for (std::size_t e = 0; e < line.elements(); ++e)
    for (int q = 0; q < G; ++q) out[e * G + q] = f.at(line.gauss_point(e, q));
  return out;
}

// Line coordinate of the cut dU (toy end) or the inner boundary.
struct DomainGeometry {
  double dx = 0.0;
  double cyl_scale = 1.0;
  std::size_t cut_intervals = 0;  // cylinder intervals inside U
  double l0 = 0.0;                // snapped L_0
};

DomainGeometry domain_geometry(const MetricSpec& g, const DomainModel& d) {
  DomainGeometry geo;
  geo.dx = std::log(10.0) / d.nodes_per_decade;
  if (d.has_toy_end()) {
    geo.cyl_scale = std::sqrt(g.radial()->radial(d.r_inner)) * d.r_inner;
    geo.cut_intervals = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(d.cylinder_l0 / (geo.cyl_scale * geo.dx))));
    geo.l0 = geo.cut_intervals * geo.cyl_scale * geo.dx;
  }
  return geo;
}

LineSpec line_spec(const DomainModel& d, const DomainGeometry& geo, int level, double R,
                   BoundaryKind outer) {
  LineSpec s;
  s.shape = d.kind == DomainModel::Kind::ball ? LineSpec::Shape::ball : LineSpec::Shape::annulus;
  s.r_inner = d.r_inner;
  s.r_outer = R;
  s.cylinder_length = d.has_toy_end() ? std::ldexp(geo.l0, level) : 0.0;
  s.nodes_per_decade = d.nodes_per_decade;
  s.inner = BoundaryKind::free;
  s.outer = outer;
  return s;
}

// Index of the node on dU within a line built for the given level.
std::size_t cut_node(const RadialLine& line, const DomainGeometry& geo) {
  return line.first_end_node() - geo.cut_intervals * (line.first_end_node() > 0 ? 1 : 0);
}

std::vector<double> restrict_to_u(const RadialLine& line, const DomainGeometry& geo,
                                  std::span<const double> values, double r_out) {
  std::vector<double> out;
  for (std::size_t k = cut_node(line, geo); k < line.size(); ++k) {
    const LinePosition p = line.node(k);
    if (p.region != LineRegion::cylinder && p.r > r_out * (1.0 + 1e-12)) break;
    out.push_back(values[k]);
  }
  return out;
}

double max_difference(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t k = 0; k < n; ++k) m = std::max(m, std::abs(a[k] - b[k]));
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  return m;
}

bool has_negative_part(std::span<const double> fg) {
  return std::any_of(fg.begin(), fg.end(), [](double v) { return v < 0.0; });
}

double critical_exponent(int n) { return 2.0 * n / (n - 2.0); }

}  // namespace

double potential_norm(const RadialLine& line, const Potential& f, double p, bool negative_part) {
  double s = 0.0;
  for (std::size_t e = 0; e < line.elements(); ++e)
    for (int q = 0; q < G; ++q) {
      double v = f.at(line.gauss_point(e, q));
      if (negative_part) v = std::min(v, 0.0);
      s += line.volume_weight(e, q) * std::pow(std::abs(v), p);
    }
  return std::pow(s, 1.0 / p);
}

SmallnessReport check_smallness(const RadialLine& line, const Potential& f, double c_S) {
  SmallnessReport rep;
  const int n = line.dimension();
  rep.lhs = potential_norm(line, f, 0.5 * n, true);
  rep.threshold = 0.5 * c_S;
  rep.ratio = rep.lhs > 0.0 ? rep.lhs / rep.threshold : 0.0;
  rep.pass = rep.lhs <= rep.threshold;
  return rep;
}

SobolevReport sobolev_estimate(const MetricSpec& g, const DomainModel& domain,
                               double truncation_radius, int max_iterations) {
  domain.validate();
  const double R = truncation_radius > 0.0 ? truncation_radius : 4.0 * domain.r_out;
  const DomainGeometry geo = domain_geometry(g, domain);
  const RadialLine line =
      RadialLine::build(g, line_spec(domain, geo, 0, R, BoundaryKind::zero));
  const int n = g.dimension();
  const double p = critical_exponent(n);
  const std::size_t N = line.size();
  const std::vector<double> zero(line.elements() * G, 0.0);
  const Tridiagonal K = assemble_operator(line, zero, BoundaryKind::free, BoundaryKind::zero);

  auto norm_p = [&](const std::vector<double>& z) {
    double s = 0.0;
    for (std::size_t e = 0; e < line.elements(); ++e)
      for (int q = 0; q < G; ++q) s += line.volume_weight(e, q) * std::pow(std::abs(line.interpolate(z, e, q)), p);
    return std::pow(s, 1.0 / p);
  };
  auto dirichlet = [&](const std::vector<double>& z) {
    const std::vector<double> kz = K.apply(z);
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < N; ++k) s += z[k] * kz[k];
    return s;
  };

  // start from a bubble centred at the origin
  const double r0 = domain.kind == DomainModel::Kind::ball ? 0.0 : domain.r_inner;
  const double lambda = domain.kind == DomainModel::Kind::ball ? 0.1 * R : std::sqrt(r0 * R);
  auto bubble = [&](double r) { return std::pow(1.0 + (r / lambda) * (r / lambda), -0.5 * (n - 2)); };
  std::vector<double> z(N);
  for (std::size_t k = 0; k < N; ++k) z[k] = bubble(line.node(k).r) - bubble(R);
  z[N - 1] = 0.0;
  double nz = norm_p(z);
  for (double& v : z) v /= nz;
  double quotient = dirichlet(z);

  SobolevReport rep;
  std::ostringstream desc;
  desc << (domain.kind == DomainModel::Kind::ball ? "ball" : "end") << " r<=" << R;
  if (domain.has_toy_end()) desc << " + cylinder L0=" << geo.l0;
  desc << ", radial test functions, outer ring zero";
  rep.domain = desc.str();

  int it = 0;
  bool converged = false;
  for (; it < max_iterations; ++it) {
    std::vector<double> w(N, 0.0);
    for (std::size_t e = 0; e < line.elements(); ++e)
      for (int q = 0; q < G; ++q) {
        const double zv = line.interpolate(z, e, q);
        const double s = line.volume_weight(e, q) * std::pow(std::abs(zv), p - 2.0) * zv;
        const double xi = line.gauss_fraction(q);
        w[e] += s * (1.0 - xi);
        w[e + 1] += s * xi;
      }
    w[N - 1] = 0.0;
    std::vector<double> next = solve_tridiagonal(K, w, 1e-9);
    next[N - 1] = 0.0;
    nz = norm_p(next);
    for (double& v : next) v /= nz;
    const double qn = dirichlet(next);
    z = std::move(next);
    const double change = quotient - qn;
    quotient = qn;
    if (std::abs(change) <= 1e-11 * std::abs(qn)) {
      converged = true;
      break;
    }
  }
  rep.estimate = quotient;
  rep.iterations = it;
  for (std::size_t k = 0; k < N; ++k) {
    rep.radii.push_back(line.node(k).r);
    rep.profile.push_back(z[k]);
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "Sobolev quotient minimization did not converge after " << max_iterations
        << " iterations; last estimate " << quotient;
    throw EstimationError(msg.str());
  }
  if (!(quotient > 0.0)) throw EstimationError("Sobolev estimate is not positive");
  return rep;
}

namespace {

SmallnessReport ensure_smallness(const EllipticProblem& problem, const RadialLine& line,
                                 std::span<const double> fg, double* c_S_out) {
  SmallnessReport rep;
  if (!has_negative_part(fg)) {
    rep.threshold = problem.controls.sobolev_constant > 0.0 ? 0.5 * problem.controls.sobolev_constant
                                                            : std::numeric_limits<double>::infinity();
    if (c_S_out) *c_S_out = problem.controls.sobolev_constant;
    return rep;
  }
  double c_S = problem.controls.sobolev_constant;
  if (!(c_S > 0.0)) c_S = sobolev_estimate(problem.metric, problem.domain).estimate;
  if (c_S_out) *c_S_out = c_S;
  rep = check_smallness(line, problem.f, c_S);
  if (!rep.pass) {
    std::ostringstream msg;
    msg << "smallness of the negative part fails: (int |f_-|^{n/2})^{2/n} = " << rep.lhs
        << " > c_S/2 = " << rep.threshold;
    throw PreconditionError(msg.str(), "(int_U |f_-|^{n/2})^{2/n} <= c_S/2", rep.lhs,
                            rep.threshold);
  }
  return rep;
}

TruncatedSolution truncated_core(const EllipticProblem& problem, const DomainGeometry& geo,
                                 int level, double R) {
  const BoundaryKind outer =
      problem.controls.outer == OuterCondition::robin ? BoundaryKind::robin : BoundaryKind::zero;
  TruncatedSolution sol{RadialLine::build(problem.metric,
                                          line_spec(problem.domain, geo, level, R, outer)),
                        {}, 0.0, 0.0, R, level};
  const RadialLine& line = sol.line;
  const std::vector<double> fg = potential_at_gauss(line, problem.f);
  const Tridiagonal A = assemble_operator(line, fg, BoundaryKind::free, outer);
  const Tridiagonal M = assemble_mass(line, fg);
  const std::vector<double> ones(line.size(), 1.0);
  std::vector<double> rhs = M.apply(ones);
  for (double& v : rhs) v = -v;
  if (outer == BoundaryKind::zero) rhs.back() = 0.0;
  sol.v = solve_tridiagonal(A, rhs, problem.controls.residual_tolerance);
  sol.residual = backward_error(A, sol.v, rhs);
  for (std::size_t e = 0; e < line.elements(); ++e) {
    const double d = sol.v[e + 1] - sol.v[e];
    sol.energy += line.conductance(e) * d * d;
  }
  return sol;
}

double a_integral(const RadialLine& line, std::span<const double> fg, std::span<const double> u) {
  const int n = line.dimension();
  double s = 0.0;
  for (std::size_t e = 0; e < line.elements(); ++e)
    for (int q = 0; q < G; ++q) s += line.volume_weight(e, q) * fg[e * G + q] * line.interpolate(u, e, q);
  return -s / ((n - 2.0) * sphere_area(n));
}

struct FitResult {
  double A = 0.0, B = 0.0, omega = 0.0;
};

FitResult fit_expansion(const RadialLine& line, std::span<const double> v, double r_out) {
  const int n = line.dimension();
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::size_t> rows;
  for (std::size_t k = line.first_end_node(); k < line.size(); ++k) {
    const double r = line.node(k).r;
    if (r >= 0.1 * r_out && r <= 0.9 * r_out) rows.push_back(k);
  }
  FitResult fit;
  if (rows.size() < 2) return fit;
  X.resize(static_cast<Eigen::Index>(rows.size()), 2);
  y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double r = line.node(rows[i]).r;
    X(i, 0) = std::pow(r, 2 - n);
    X(i, 1) = std::pow(r, 1 - n);
    y(i) = v[rows[i]];
  }
  const Eigen::Vector2d c = X.colPivHouseholderQr().solve(y);
  fit.A = c(0);
  fit.B = c(1);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double r = line.node(rows[i]).r;
    fit.omega = std::max(fit.omega, std::abs(y(i) - fit.A * X(i, 0)) * std::pow(r, n - 1));
  }
  return fit;
}

}  // namespace

TruncatedSolution solve_truncated(const EllipticProblem& problem, int level, double R) {
  problem.domain.validate();
  if (!(R > problem.f.support_radius)) {
    throw ConfigError("truncation radius must exceed the support of f");
  }
  const DomainGeometry geo = domain_geometry(problem.metric, problem.domain);
  const RadialLine probe = RadialLine::build(
      problem.metric, line_spec(problem.domain, geo, level, R, BoundaryKind::zero));
  ensure_smallness(problem, probe, potential_at_gauss(probe, problem.f), nullptr);
  return truncated_core(problem, geo, level, R);
}

ConformalFactorSolution solve_conformal_factor(const EllipticProblem& problem) {
  const DomainModel& d = problem.domain;
  d.validate();
  const int n = problem.metric.dimension();
  if (problem.f.support_radius > 0.1 * d.r_out + 1e-12) {
    throw ConfigError("R_out must be at least 10 times the support radius of f");
  }
  const DomainGeometry geo = domain_geometry(problem.metric, d);
  const double R0 = d.initial_truncation > 0.0 ? d.initial_truncation : 2.0 * d.r_out;
  if (!(R0 >= d.r_out)) throw ConfigError("initial truncation must be at least R_out");

  ConformalFactorSolution out;
  out.dimension = n;

  double c_S = 0.0;
  {
    const RadialLine probe =
        RadialLine::build(problem.metric, line_spec(d, geo, 0, R0, BoundaryKind::zero));
    out.smallness = ensure_smallness(problem, probe, potential_at_gauss(probe, problem.f), &c_S);
  }

  const int levels = d.has_toy_end() ? d.max_cylinder_levels : 1;
  const double tol = problem.controls.exhaustion_tolerance;
  std::vector<double> previous_level;
  std::optional<TruncatedSolution> final;
  bool level_converged = !d.has_toy_end();
  for (int i = 0; i < levels; ++i) {
    std::vector<double> previous;
    std::optional<TruncatedSolution> current;
    bool stable = false;
    for (int j = 0; j < d.max_truncation_doublings; ++j) {
      const double R = std::ldexp(R0, j);
      TruncatedSolution sol = truncated_core(problem, geo, i, R);
      std::vector<double> u(sol.v.size());
      for (std::size_t k = 0; k < u.size(); ++k) u[k] = 1.0 + sol.v[k];
      const std::vector<double> uu = restrict_to_u(sol.line, geo, u, d.r_out);
      const double change = previous.empty() ? std::numeric_limits<double>::infinity()
                                             : max_difference(uu, previous);
      const std::vector<double> fg = potential_at_gauss(sol.line, problem.f);
      IterationRecord rec;
      rec.level = i;
      rec.step = j;
      rec.truncation_radius = R;
      rec.cylinder_length = std::ldexp(geo.l0, i);
      rec.residual = sol.residual;
      rec.min_u = *std::min_element(u.begin(), u.end());
      rec.A_integral = a_integral(sol.line, fg, u);
      rec.A_fit = fit_expansion(sol.line, sol.v, d.r_out).A;
      rec.change = change;
      out.log.push_back(rec);
      previous = uu;
      current = std::move(sol);
      if (change < tol) {
        stable = true;
        break;
      }
    }
    if (!stable) {
      std::ostringstream msg;
      msg << "exhaustion in R did not stabilize to " << tol << " after "
          << d.max_truncation_doublings << " doublings at level " << i;
      throw SolverError(msg.str());
    }
    final = std::move(current);
    if (!previous_level.empty() && max_difference(previous, previous_level) < tol) {
      level_converged = true;
      out.levels = i + 1;
      break;
    }
    previous_level = previous;
    out.levels = i + 1;
  }
  if (!level_converged) {
    throw SolverError("exhaustion over toy-end levels did not stabilize");
  }

  const TruncatedSolution& sol = *final;
  const RadialLine& line = sol.line;
  const std::vector<double> fg = potential_at_gauss(line, problem.f);
  out.v = sol.v;
  out.u.resize(sol.v.size());
  for (std::size_t k = 0; k < out.u.size(); ++k) out.u[k] = 1.0 + sol.v[k];
  for (std::size_t k = 0; k < line.size(); ++k) {
    out.x.push_back(line.coordinate(k));
    out.nodes.push_back(line.node(k));
  }
  out.final_truncation = sol.truncation_radius;
  out.final_cylinder_length = line.spec().cylinder_length;
  out.energy = sol.energy;
  out.min_u = *std::min_element(out.u.begin(), out.u.end());
  out.A_integral = a_integral(line, fg, out.u);
  const FitResult fit = fit_expansion(line, out.v, d.r_out);
  out.A_fit = fit.A;
  out.B_fit = fit.B;
  out.omega_proxy = fit.omega;

  // fluxes through dU with outward normal pointing away from U
  if (d.kind == DomainModel::Kind::end_annulus) {
    const std::size_t b = cut_node(line, geo);
    const double xi0 = line.gauss_fraction(0);
    (void)xi0;
    double row = line.conductance(b) * (out.u[b] - out.u[b + 1]);
    for (int q = 0; q < G; ++q) {
      const double s = line.gauss_fraction(q);
      row += line.volume_weight(b, q) * fg[b * G + q] * line.interpolate(out.u, b, q) * (1.0 - s);
    }
    out.flux.boundary_present = true;
    out.flux.flux = row;
    out.flux.weighted_flux = out.u[b] * row;
    const double du = (-3.0 * out.u[b] + 4.0 * out.u[b + 1] - out.u[b + 2]) / (2.0 * line.spacing());
    out.flux.fd_flux = -line.flux_weight(b) * du;
    out.flux.fd_weighted_flux = out.u[b] * out.flux.fd_flux;
  }

  // energy bound diagnostics over U
  const double pc = critical_exponent(n);
  const double pd = 2.0 * n / (n + 2.0);
  double vint = 0.0, fint = 0.0;
  const std::size_t b = d.kind == DomainModel::Kind::end_annulus ? cut_node(line, geo) : 0;
  for (std::size_t e = b; e < line.elements(); ++e)
    for (int q = 0; q < G; ++q) {
      vint += line.volume_weight(e, q) * std::pow(std::abs(line.interpolate(out.v, e, q)), pc);
      fint += line.volume_weight(e, q) * std::pow(std::abs(fg[e * G + q]), pd);
    }
  out.v_critical_norm = std::pow(vint, 1.0 / pc);
  out.C0 = std::pow(fint, 1.0 / pd);
  if (!(c_S > 0.0) && out.C0 > 0.0) c_S = sobolev_estimate(problem.metric, d).estimate;
  out.sobolev_constant = c_S;
  out.energy_bound_holds =
      out.C0 == 0.0 ? out.v_critical_norm <= 1e-12
                    : out.v_critical_norm <= 2.0 * out.C0 / c_S * (1.0 + 1e-9);

  // interpolant of u on the end chart
  {
    const std::size_t k0 = line.first_end_node();
    std::vector<double> data(out.u.begin() + static_cast<std::ptrdiff_t>(k0), out.u.end());
    auto spline = std::make_shared<boost::math::interpolators::cardinal_cubic_b_spline<double>>(
        data.begin(), data.end(), line.coordinate(k0), line.spacing());
    const double r_first = line.node(k0).r;
    const double r_last = line.node(line.size() - 1).r;
    const bool robin = problem.controls.outer == OuterCondition::robin;
    const double v_last = out.v.back();
    auto pos = std::make_shared<RadialLine>(line);
    out.u_at = [spline, pos, r_first, r_last, robin, v_last, n](double r) {
      if (r < r_first * (1.0 - 1e-12)) throw DomainError("u requested inside the end chart boundary");
      if (r >= r_last) return robin ? 1.0 + v_last * std::pow(r / r_last, 2 - n) : 1.0;
      LinePosition p;
      p.region = pos->node(pos->first_end_node()).region;
      p.r = r;
      return (*spline)(pos->position_to_x(p));
    };
  }

  if (!(out.min_u > 0.0)) {
    std::ostringstream msg;
    msg << "conformal factor lost positivity: min u = " << out.min_u;
    throw PositivityError(msg.str());
  }
  const double mismatch =
      std::abs(out.A_integral - out.A_fit) / std::max(std::abs(out.A_integral), 1e-8);
  if (mismatch > problem.controls.extraction_tolerance) {
    std::ostringstream msg;
    msg << "expansion coefficient estimates disagree: A_integral = " << out.A_integral
        << ", A_fit = " << out.A_fit << " (relative " << mismatch << ")";
    throw ExtractionError(msg.str());
  }
  return out;
}

EigenReport eigenvalue_lower_bound(const MetricSpec& g, double r_a, double r_b,
                                   const RadialFn& scalar_curvature, BoundaryKind test_class,
                                   int nodes_per_decade, int max_iterations) {
  if (test_class == BoundaryKind::robin) throw ConfigError("eigenvalue test class is zero or free");
  LineSpec spec;
  spec.shape = r_a > 0.0 ? LineSpec::Shape::annulus : LineSpec::Shape::ball;
  spec.r_inner = r_a > 0.0 ? r_a : 1.0;
  spec.r_outer = r_b;
  spec.nodes_per_decade = nodes_per_decade;
  spec.exact_outer = true;
  const RadialLine line = RadialLine::build(g, spec);
  const int n = g.dimension();
  const double kappa = conformal_coupling(n);
  const std::size_t N = line.size();

  std::vector<double> vg(line.elements() * G), ones(line.elements() * G, 1.0);
  double vmin = 0.0;
  for (std::size_t e = 0; e < line.elements(); ++e)
    for (int q = 0; q < G; ++q) {
      vg[e * G + q] = kappa * scalar_curvature(line.gauss_point(e, q).r);
      vmin = std::min(vmin, vg[e * G + q]);
    }
  const BoundaryKind inner = spec.shape == LineSpec::Shape::ball ? BoundaryKind::free : test_class;
  const Tridiagonal A = assemble_operator(line, vg, inner, test_class);
  const Tridiagonal M = assemble_mass(line, ones);
  const double width = r_b - r_a;
  const double sigma = -vmin + 1e-3 * (M_PI / width) * (M_PI / width);
  Tridiagonal shifted = A;
  const Tridiagonal Mfull = M;
  for (std::size_t k = 0; k < N; ++k) shifted.diag[k] += sigma * M.diag[k];
  for (std::size_t k = 0; k + 1 < N; ++k) shifted.off[k] += sigma * M.off[k];
  auto clamp = [&](std::vector<double>& z) {
    if (inner == BoundaryKind::zero) z.front() = 0.0;
    if (test_class == BoundaryKind::zero) z.back() = 0.0;
  };
  // identity rows for zero nodes
  if (inner == BoundaryKind::zero) {
    shifted.diag[0] = 1.0;
    shifted.off[0] = 0.0;
  }
  if (test_class == BoundaryKind::zero) {
    shifted.diag[N - 1] = 1.0;
    shifted.off[N - 2] = 0.0;
  }
  auto rayleigh = [&](const std::vector<double>& z) {
    const std::vector<double> az = A.apply(z), mz = Mfull.apply(z);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      const bool fixed = (k == 0 && inner == BoundaryKind::zero) ||
                         (k == N - 1 && test_class == BoundaryKind::zero);
      if (fixed) continue;
      num += z[k] * az[k];
      den += z[k] * mz[k];
    }
    return num / den;
  };

  std::vector<double> z(N);
  for (std::size_t k = 0; k < N; ++k) {
    const double s = (line.node(k).r - r_a) / width;
    z[k] = test_class == BoundaryKind::zero ? std::sin(M_PI * std::clamp(s, 0.0, 1.0)) : 1.0;
    if (spec.shape == LineSpec::Shape::ball && test_class == BoundaryKind::zero) {
      z[k] = std::cos(0.5 * M_PI * std::clamp(s, 0.0, 1.0));
    }
  }
  clamp(z);
  double value = rayleigh(z);
  EigenReport rep;
  int it = 0;
  bool converged = false;
  for (; it < max_iterations; ++it) {
    std::vector<double> rhs = Mfull.apply(z);
    clamp(rhs);
    std::vector<double> next = solve_tridiagonal(shifted, rhs, 1e-9);
    clamp(next);
    double nrm = 0.0;
    for (double x : next) nrm = std::max(nrm, std::abs(x));
    for (double& x : next) x /= nrm;
    const double vn = rayleigh(next);
    z = std::move(next);
    const double change = std::abs(vn - value);
    value = vn;
    if (change <= 1e-13 * std::max(1.0, std::abs(vn))) {
      converged = true;
      break;
    }
  }
  rep.value = value;
  rep.iterations = it;
  for (std::size_t k = 0; k < N; ++k) {
    rep.radii.push_back(line.node(k).r);
    rep.minimizer.push_back(z[k]);
  }
  if (!converged) {
    std::ostringstream msg;
    msg << "inverse iteration did not converge after " << max_iterations
        << " iterations; last value " << value;
    throw EstimationError(msg.str());
  }
  return rep;
}

}  // namespace masskit
