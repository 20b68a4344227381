#pragma once

// Independent reference computations. Nothing here calls into masskit.

#include <boost/numeric/odeint.hpp>

#include <array>
#include <cmath>
#include <functional>

namespace oracle {

using Fn = std::function<double(double)>;

inline double schwarzschild_phi(int n, double m, double r) {
  return 1.0 + m / (2.0 * std::pow(r, n - 2));
}

// Warped radial metric a(r) dr^2 + b(r) r^2 dOmega^2 and the equation Delta u = f u.
struct RadialProblem {
  int n = 3;
  Fn a;
  Fn b;
  Fn f;
  double support = 0.0;  // f = 0 beyond this radius
};

struct ShootingResult {
  double A = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double match_radius = 0.0;
  double u_min = 0.0;  // of the normalized solution up to the match radius
};

namespace detail {

using State = std::array<double, 2>;

inline double warp(const RadialProblem& p, double r) { return r * std::sqrt(p.b(r)); }

// G(r) = int_r^inf sqrt(a) / w^{n-1}, integrated in s = 1/r.
inline double green_tail(const RadialProblem& p, double r) {
  namespace ode = boost::numeric::odeint;
  std::array<double, 1> g{0.0};
  auto rhs = [&p](const std::array<double, 1>&, std::array<double, 1>& d, double s) {
    if (s <= 0.0) {
      d[0] = p.n == 3 ? 1.0 : 0.0;
      return;
    }
    const double rr = 1.0 / s;
    d[0] = std::sqrt(p.a(rr)) / std::pow(warp(p, rr), p.n - 1) * rr * rr;
  };
  ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<std::array<double, 1>>>(1e-13, 1e-13),
                          rhs, g, 0.0, 1.0 / r, 1e-4 / r);
  return g[0];
}

}  // namespace detail

// u' = sqrt(a) F / w^{n-1}, F' = sqrt(a) w^{n-1} f u from r0 with data (u0, F0),
// matched to alpha + beta G(r) beyond the support.
inline ShootingResult shoot(const RadialProblem& p, double r0, double u0, double F0) {
  namespace ode = boost::numeric::odeint;
  using detail::State;
  auto rhs = [&p](const State& y, State& d, double r) {
    const double sa = std::sqrt(p.a(r));
    const double w = std::pow(detail::warp(p, r), p.n - 1);
    d[0] = sa * y[1] / w;
    d[1] = sa * w * p.f(r) * y[0];
  };
  const double rm = std::max(2.0 * p.support, 2.0 * r0 + 1.0);
  State y{u0, F0};
  double u_min = u0;
  auto watch = [&u_min](const State& s, double) { u_min = std::min(u_min, s[0]); };
  ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<State>>(1e-13, 1e-13), rhs, y,
                          r0, rm, 1e-3, watch);
  ShootingResult out;
  out.match_radius = rm;
  out.beta = -y[1];
  out.alpha = y[0] - out.beta * detail::green_tail(p, rm);
  // G ~ r^{2-n} / (n-2) for an asymptotically flat warp
  out.A = out.beta / (out.alpha * (p.n - 2));
  out.u_min = u_min / out.alpha;
  return out;
}

// Natural boundary at the inner sphere: u' = 0.
inline ShootingResult shoot_annulus(const RadialProblem& p, double r_inner) {
  return shoot(p, r_inner, 1.0, 0.0);
}

// Regular at the origin: u = 1 + f(0) r^2 / (2n) to leading order.
inline ShootingResult shoot_ball(const RadialProblem& p, double r0 = 1e-4) {
  const double c = p.f(0.0) * p.a(0.0) / (2.0 * p.n);
  const double u0 = 1.0 + c * r0 * r0;
  const double w = std::pow(detail::warp(p, r0), p.n - 1);
  const double F0 = w * 2.0 * c * r0 / std::sqrt(p.a(r0));
  return shoot(p, r0, u0, F0);
}

inline RadialProblem conformally_flat(int n, Fn phi, Fn f, double support) {
  const double pw = 4.0 / (n - 2);
  RadialProblem p;
  p.n = n;
  p.a = [phi, pw](double r) { return std::pow(phi(r), pw); };
  p.b = p.a;
  p.f = std::move(f);
  p.support = support;
  return p;
}

// a (1 - x^2)^4 on |x| < 1, x = (r - c)/w
inline Fn bump(double amp, double c, double w) {
  return [=](double r) {
    const double x = (r - c) / w;
    return std::abs(x) < 1.0 ? amp * std::pow(1.0 - x * x, 4) : 0.0;
  };
}

inline Fn dipole(double amp, double c, double w) {
  return [=](double r) {
    const double x = (r - c) / w;
    return std::abs(x) < 1.0 ? amp * x * std::pow(1.0 - x * x, 4) : 0.0;
  };
}

// phi = 1 + c erf(r/w)/r has flat Laplacian -(4c/(sqrt(pi) w^3)) exp(-r^2/w^2),
// so R = -8 Delta phi / phi^5.
inline double gaussian_bump_scalar(double c, double w, double r) {
  const double phi = r > 1e-8 ? 1.0 + c * std::erf(r / w) / r : 1.0 + 2.0 * c / (std::sqrt(M_PI) * w);
  const double lap = -4.0 * c / (std::sqrt(M_PI) * w * w * w) * std::exp(-r * r / (w * w));
  return -8.0 * lap / std::pow(phi, 5);
}

inline double gaussian_bump_phi(double c, double w, double r) {
  return r > 1e-8 ? 1.0 + c * std::erf(r / w) / r : 1.0 + 2.0 * c / (std::sqrt(M_PI) * w);
}

// Observed order from two errors at steps h and h/2.
inline double observed_order(double e_coarse, double e_fine) {
  return std::log2(e_coarse / e_fine);
}

}  // namespace oracle
