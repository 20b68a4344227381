#include "masskit/decay.hpp"

#include "masskit/parallel.hpp"

#include <cmath>

namespace masskit {

namespace {

std::vector<Vec> audit_directions(int n) {
  std::vector<Vec> dirs;
  if (n <= 4) {
    std::vector<int> digit(static_cast<std::size_t>(n), -1);
    while (true) {
      Vec d(n);
      for (int i = 0; i < n; ++i) d(i) = digit[i];
      if (d.norm() > 0.0) dirs.push_back(d / d.norm());
      int i = 0;
      while (i < n && ++digit[i] > 1) digit[i++] = -1;
      if (i == n) break;
    }
    return dirs;
  }
  for (int i = 0; i < n; ++i) {
    dirs.push_back(unit_vector(n, i));
    dirs.push_back(-unit_vector(n, i));
    for (int j = i + 1; j < n; ++j)
      for (int s = -1; s <= 1; s += 2) {
        Vec d = unit_vector(n, i) + s * unit_vector(n, j);
        dirs.push_back(d / d.norm());
        dirs.push_back(-d / d.norm());
      }
  }
  return dirs;
}

constexpr double kNoiseFloor = 1e-10;

}  // namespace

DecayFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  DecayFit fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int count = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++count;
  }
  if (count < 2) return fit;
  const double denom = count * sxx - sx * sx;
  fit.exponent = (count * sxy - sx * sy) / denom;
  fit.constant = std::exp((sy - fit.exponent * sx) / count);
  fit.fitted = true;
  return fit;
}

DecayAudit decay_audit(const MetricSpec& g, std::span<const double> radii) {
  if (radii.size() < 4) throw ConfigError("decay audit needs a radius ladder with at least 4 rungs");
  for (std::size_t i = 1; i < radii.size(); ++i) {
    if (!(radii[i] > radii[i - 1])) throw ConfigError("decay audit radii must increase strictly");
  }
  const int n = g.dimension();
  const std::vector<Vec> dirs = audit_directions(n);
  DecayAudit audit;
  audit.declared_order = g.decay().order;
  audit.radii.assign(radii.begin(), radii.end());
  audit.h_norm.assign(radii.size(), 0.0);
  audit.dh_norm.assign(radii.size(), 0.0);
  audit.ddh_norm.assign(radii.size(), 0.0);

  parallel_for(radii.size(), [&](std::size_t ir) {
    const double r = radii[ir];
    const double h = default_step(r);
    g.require_stencil(point_on_axis(n, r), 2.0 * h);
    double m0 = 0, m1 = 0, m2 = 0;
    for (const Vec& d : dirs) {
      const Vec x = r * d;
      m0 = std::max(m0, g.deviation(x).norm());
      double grad = 0.0, hess = 0.0;
      for (int k = 0; k < n; ++k) {
        Vec xp = x, xm = x;
        xp(k) += h;
        xm(k) -= h;
        const Mat gp = g(xp), gm = g(xm);
        grad += (gp - gm).squaredNorm() / (4.0 * h * h);
        for (int l = 0; l < n; ++l) {
          Mat second;
          if (k == l) {
            second = (gp - 2.0 * g(x) + gm) / (h * h);
          } else {
            Vec a = x, b = x, c = x, e = x;
            a(k) += h; a(l) += h;
            b(k) += h; b(l) -= h;
            c(k) -= h; c(l) += h;
            e(k) -= h; e(l) -= h;
            second = (g(a) - g(b) - g(c) + g(e)) / (4.0 * h * h);
          }
          hess += second.squaredNorm();
        }
      }
      m1 = std::max(m1, std::sqrt(grad));
      m2 = std::max(m2, std::sqrt(hess));
    }
    audit.h_norm[ir] = m0;
    audit.dh_norm[ir] = m1;
    audit.ddh_norm[ir] = m2;
  });

  auto finish = [&](const std::vector<double>& norms, int k) {
    DecayFit fit;
    double peak = 0.0;
    for (double v : norms) peak = std::max(peak, v);
    if (peak > kNoiseFloor) fit = fit_power_law(radii, norms);
    for (std::size_t i = 0; i < radii.size(); ++i) {
      fit.budget_constant =
          std::max(fit.budget_constant, norms[i] * std::pow(radii[i], k - audit.declared_order));
    }
    if (fit.fitted && fit.exponent > audit.declared_order - k + 0.2) audit.violation = true;
    return fit;
  };
  audit.h = finish(audit.h_norm, 0);
  audit.dh = finish(audit.dh_norm, 1);
  audit.ddh = finish(audit.ddh_norm, 2);
  return audit;
}

}  // namespace masskit
