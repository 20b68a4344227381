#include "masskit/radial_line.hpp"

#include "masskit/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace masskit {

namespace {

struct Coefficients {
  double p = 0.0;  // stiffness density in the line coordinate
  double q = 0.0;  // volume density in the line coordinate
};

}  // namespace

RadialLine RadialLine::build(const MetricSpec& g, const LineSpec& spec) {
  if (!g.is_radial()) throw ConfigError("RADIAL tier requires a spherically symmetric metric");
  if (spec.nodes_per_decade < 10) throw ConfigError("nodes_per_decade must be at least 10");
  const RadialProfile& prof = *g.radial();
  const int n = g.dimension();
  const double area = sphere_area(n);

  RadialLine line;
  line.dim_ = n;
  line.spec_ = spec;
  double dx = std::log(10.0) / spec.nodes_per_decade;

  const GaussRule gr = gauss_legendre(kGauss, 0.0, 1.0);
  for (int q = 0; q < kGauss; ++q) line.xi_[q] = gr.nodes[q];

  double cyl_scale = 0.0;
  std::size_t cyl_intervals = 0;
  std::size_t end_intervals = 0;
  if (spec.shape == LineSpec::Shape::annulus) {
    if (!(spec.r_inner > 0.0) || !(spec.r_outer > spec.r_inner)) {
      throw ConfigError("annulus needs 0 < r_inner < r_outer");
    }
    line.r_inner_ = spec.r_inner;
    line.x_origin_end_ = std::log(spec.r_inner);
    end_intervals = static_cast<std::size_t>(
        std::ceil(std::log(spec.r_outer / spec.r_inner) / dx - 1e-9));
    if (spec.exact_outer && end_intervals > 0) dx = std::log(spec.r_outer / spec.r_inner) / end_intervals;
    if (spec.cylinder_length > 0.0) {
      const double a0 = prof.radial(spec.r_inner);
      cyl_scale = std::sqrt(a0) * spec.r_inner;
      cyl_intervals = static_cast<std::size_t>(std::llround(spec.cylinder_length / (cyl_scale * dx)));
      if (cyl_intervals == 0) cyl_intervals = 1;
    }
  } else {
    if (!(spec.r_outer > 0.0)) throw ConfigError("ball needs a positive radius");
    if (spec.cylinder_length > 0.0) throw ConfigError("toy ends attach to annuli only");
    line.r_inner_ = 0.0;
    end_intervals = static_cast<std::size_t>(std::ceil(std::asinh(spec.r_outer) / dx - 1e-9));
    if (spec.exact_outer && end_intervals > 0) dx = std::asinh(spec.r_outer) / end_intervals;
  }
  if (end_intervals < 2) throw ConfigError("radial line too short for its resolution");
  line.dx_ = dx;

  const std::size_t total = cyl_intervals + end_intervals + 1;
  line.x_.resize(total);
  line.node_region_.resize(total);
  const LineRegion outer_region =
      spec.shape == LineSpec::Shape::ball ? LineRegion::ball : LineRegion::end;
  for (std::size_t k = 0; k < total; ++k) {
    const double xi = (static_cast<double>(k) - static_cast<double>(cyl_intervals)) * dx;
    line.x_[k] = xi;
    line.node_region_[k] = k < cyl_intervals ? LineRegion::cylinder : outer_region;
  }
  line.first_end_ = cyl_intervals;
  line.cyl_scale_ = cyl_intervals ? cyl_scale : 1.0;

  const double w_cyl =
      cyl_intervals ? spec.r_inner * std::sqrt(prof.tangential(spec.r_inner)) : 0.0;

  auto coefficients = [&](LineRegion region, double xi) {
    Coefficients c;
    if (region == LineRegion::cylinder) {
      const double cross = area * std::pow(w_cyl, n - 1);
      c.p = cross / cyl_scale;
      c.q = cross * cyl_scale;
      return c;
    }
    double r, dr;
    if (region == LineRegion::end) {
      r = std::exp(line.x_origin_end_ + xi);
      dr = r;
    } else {
      r = std::sinh(xi);
      dr = std::cosh(xi);
    }
    const double a = prof.radial(r);
    const double b = prof.tangential(r);
    if (!(a > 0.0) || !(b > 0.0)) {
      std::ostringstream msg;
      msg << "metric profile is not positive at r = " << r;
      throw DegeneracyError(msg.str());
    }
    const double cross = area * std::pow(r * std::sqrt(b), n - 1);
    c.p = cross / (std::sqrt(a) * dr);
    c.q = cross * std::sqrt(a) * dr;
    return c;
  };

  const std::size_t ne = total - 1;
  line.elem_region_.resize(ne);
  line.wq_.assign(ne * kGauss, 0.0);
  line.cond_.assign(ne, 0.0);
  line.lumped_.assign(total, 0.0);
  for (std::size_t e = 0; e < ne; ++e) {
    const LineRegion region = e < cyl_intervals ? LineRegion::cylinder : outer_region;
    line.elem_region_[e] = region;
    double pint = 0.0;
    for (int q = 0; q < kGauss; ++q) {
      const double xi = line.x_[e] + line.xi_[q] * dx;
      const Coefficients c = coefficients(region, xi);
      pint += gr.weights[q] * dx * c.p;
      const double w = gr.weights[q] * dx * c.q;
      line.wq_[e * kGauss + q] = w;
      line.lumped_[e] += w * (1.0 - line.xi_[q]);
      line.lumped_[e + 1] += w * line.xi_[q];
    }
    line.cond_[e] = pint / (dx * dx);
  }

  line.pnode_.resize(total);
  for (std::size_t k = 0; k < total; ++k) {
    line.pnode_[k] = coefficients(line.node_region_[k], line.x_[k]).p;
  }
  const double xn = line.x_.back();
  const double ratio = outer_region == LineRegion::end ? 1.0 : std::cosh(xn) / std::sinh(xn);
  line.robin_ = (n - 2.0) * line.pnode_.back() * ratio;
  return line;
}

LinePosition RadialLine::node(std::size_t k) const {
  LinePosition p;
  p.region = node_region_[k];
  const double xi = x_[k];
  if (p.region == LineRegion::cylinder) {
    p.r = r_inner_;
    p.t = xi * cyl_scale_;
  } else if (p.region == LineRegion::end) {
    p.r = std::exp(x_origin_end_ + xi);
  } else {
    p.r = std::sinh(xi);
  }
  return p;
}

LinePosition RadialLine::gauss_point(std::size_t e, int q) const {
  LinePosition p;
  p.region = elem_region_[e];
  const double xi = x_[e] + xi_[q] * dx_;
  if (p.region == LineRegion::cylinder) {
    p.r = r_inner_;
    p.t = xi * cyl_scale_;
  } else if (p.region == LineRegion::end) {
    p.r = std::exp(x_origin_end_ + xi);
  } else {
    p.r = std::sinh(xi);
  }
  return p;
}

double RadialLine::position_to_x(const LinePosition& p) const {
  switch (p.region) {
    case LineRegion::cylinder: return p.t / cyl_scale_;
    case LineRegion::end: return std::log(p.r) - x_origin_end_;
    case LineRegion::ball: return std::asinh(p.r);
  }
  return 0.0;
}

std::vector<double> Tridiagonal::apply(std::span<const double> v) const {
  const std::size_t n = diag.size();
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    double s = diag[k] * v[k];
    if (k > 0) s += off[k - 1] * v[k - 1];
    if (k + 1 < n) s += off[k] * v[k + 1];
    out[k] = s;
  }
  return out;
}

namespace {

std::vector<double> ldlt_solve(const Tridiagonal& a, std::span<const double> rhs) {
  const std::size_t n = a.diag.size();
  std::vector<double> d(n), l(n, 0.0), y(n);
  d[0] = a.diag[0];
  for (std::size_t k = 1; k < n; ++k) {
    if (!(d[k - 1] > 0.0)) {
      std::ostringstream msg;
      msg << "tridiagonal operator is not positive definite (pivot " << d[k - 1] << " at row "
          << k - 1 << ")";
      throw SolverError(msg.str());
    }
    l[k] = a.off[k - 1] / d[k - 1];
    d[k] = a.diag[k] - l[k] * a.off[k - 1];
  }
  if (!(d[n - 1] > 0.0)) throw SolverError("tridiagonal operator is not positive definite");
  y[0] = rhs[0];
  for (std::size_t k = 1; k < n; ++k) y[k] = rhs[k] - l[k] * y[k - 1];
  for (std::size_t k = 0; k < n; ++k) y[k] /= d[k];
  for (std::size_t k = n - 1; k-- > 0;) y[k] -= l[k + 1] * y[k + 1];
  return y;
}

}  // namespace

double backward_error(const Tridiagonal& a, std::span<const double> x, std::span<const double> rhs) {
  const std::size_t n = a.diag.size();
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double ax = a.diag[k] * x[k];
    double scale = std::abs(a.diag[k] * x[k]);
    if (k > 0) {
      ax += a.off[k - 1] * x[k - 1];
      scale += std::abs(a.off[k - 1] * x[k - 1]);
    }
    if (k + 1 < n) {
      ax += a.off[k] * x[k + 1];
      scale += std::abs(a.off[k] * x[k + 1]);
    }
    scale += std::abs(rhs[k]);
    if (scale > 0.0) worst = std::max(worst, std::abs(rhs[k] - ax) / scale);
  }
  return worst;
}

std::vector<double> solve_tridiagonal(const Tridiagonal& a, std::span<const double> rhs,
                                      double tolerance) {
  std::vector<double> x = ldlt_solve(a, rhs);
  const std::vector<double> ax = a.apply(x);
  std::vector<double> r(rhs.size());
  for (std::size_t k = 0; k < r.size(); ++k) r[k] = rhs[k] - ax[k];
  const std::vector<double> dxv = ldlt_solve(a, r);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] += dxv[k];
  const double err = backward_error(a, x, rhs);
  if (!(err <= tolerance)) {
    std::ostringstream msg;
    msg << "linear solve backward error " << err << " exceeds tolerance " << tolerance;
    throw SolverError(msg.str());
  }
  return x;
}

Tridiagonal assemble_mass(const RadialLine& line, std::span<const double> weight_at_gauss) {
  const std::size_t n = line.size();
  Tridiagonal m{std::vector<double>(n, 0.0), std::vector<double>(n - 1, 0.0)};
  for (std::size_t e = 0; e < line.elements(); ++e) {
    for (int q = 0; q < RadialLine::kGauss; ++q) {
      const double w = line.volume_weight(e, q) * weight_at_gauss[e * RadialLine::kGauss + q];
      const double s = line.gauss_fraction(q);
      m.diag[e] += w * (1.0 - s) * (1.0 - s);
      m.diag[e + 1] += w * s * s;
      m.off[e] += w * s * (1.0 - s);
    }
  }
  return m;
}

Tridiagonal assemble_operator(const RadialLine& line, std::span<const double> reaction_at_gauss,
                              BoundaryKind inner, BoundaryKind outer) {
  Tridiagonal a = assemble_mass(line, reaction_at_gauss);
  const std::size_t n = line.size();
  for (std::size_t e = 0; e < line.elements(); ++e) {
    const double c = line.conductance(e);
    a.diag[e] += c;
    a.diag[e + 1] += c;
    a.off[e] -= c;
  }
  if (outer == BoundaryKind::robin) a.diag[n - 1] += line.robin_coefficient();
  if (inner == BoundaryKind::robin) throw ConfigError("Robin condition is only available outside");
  if (inner == BoundaryKind::zero) {
    a.diag[0] = 1.0;
    a.off[0] = 0.0;
  }
  if (outer == BoundaryKind::zero) {
    a.diag[n - 1] = 1.0;
    a.off[n - 2] = 0.0;
  }
  return a;
}

}  // namespace masskit
