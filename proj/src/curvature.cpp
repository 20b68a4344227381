#include "masskit/curvature.hpp"

#include <cmath>
#include <sstream>

namespace masskit {

namespace {

struct PointData {
  Mat g;
  Mat ginv;
  double det = 0.0;
  std::vector<Mat> dg;
};

PointData point_data(const MetricSpec& g, const Vec& x, double h) {
  PointData d;
  d.g = g(x);
  d.ginv = checked_inverse(d.g, &d.det);
  d.dg = metric_gradient(g, x, h);
  return d;
}

// Gamma_ijk from a gradient; k is the lowered index of d_k g_ij.
std::vector<double> first_kind_from(const std::vector<Mat>& dg, int n) {
  std::vector<double> gam(static_cast<std::size_t>(n * n * n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        gam[(i * n + j) * n + k] = 0.5 * (dg[i](j, k) + dg[j](i, k) - dg[k](i, j));
  return gam;
}

Vec log_det_gradient(const PointData& d, int n) {
  Vec out(n);
  for (int j = 0; j < n; ++j) out(j) = (d.ginv.cwiseProduct(d.dg[j])).sum();
  return out;
}

// C^k_ij = g^{kl} Gamma_ijl, flattened as (k*n + i)*n + j
std::vector<double> second_kind(const PointData& d, int n) {
  const std::vector<double> gam = first_kind_from(d.dg, n);
  std::vector<double> c(static_cast<std::size_t>(n * n * n), 0.0);
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int l = 0; l < n; ++l) s += d.ginv(k, l) * gam[(i * n + j) * n + l];
        c[(k * n + i) * n + j] = s;
      }
  return c;
}

void check_step(double h) {
  if (!(h > 0.0)) throw DomainError("difference step must be positive");
}

}  // namespace

Mat checked_inverse(const Mat& g, double* det) {
  const int n = static_cast<int>(g.rows());
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + g.cwiseAbs().maxCoeff())) {
    throw DegeneracyError("metric is not symmetric");
  }
  Eigen::LLT<Mat> llt(g);
  if (llt.info() != Eigen::Success) throw DegeneracyError("metric is not positive definite");
  const Mat L = llt.matrixL();
  double dd = 1.0;
  for (int i = 0; i < n; ++i) dd *= L(i, i) * L(i, i);
  if (!(dd > 0.0) || !std::isfinite(dd)) throw DegeneracyError("metric determinant is not positive");
  if (det) *det = dd;
  return llt.solve(Mat::Identity(n, n));
}

std::vector<Mat> metric_gradient(const MetricSpec& g, const Vec& x, double h) {
  check_step(h);
  g.require_stencil(x, h);
  const int n = g.dimension();
  std::vector<Mat> dg(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    Vec xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    dg[k] = (g(xp) - g(xm)) / (2.0 * h);
  }
  return dg;
}

ChristoffelData christoffel_first_kind(const MetricSpec& g, const Vec& x, double h) {
  check_step(h);
  g.require_stencil(x, 2.0 * h);
  const int n = g.dimension();
  const PointData d = point_data(g, x, h);
  ChristoffelData out;
  out.dim = n;
  out.first_kind = first_kind_from(d.dg, n);
  out.contracted = Vec::Zero(n);
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += d.ginv(i, j) * out(i, j, k);
    out.contracted(k) = s;
  }
  return out;
}

ChristoffelData christoffel_first_kind(const MetricSpec& g, const Vec& x) {
  return christoffel_first_kind(g, x, default_step(x.norm()));
}

double scalar_curvature_bartnik(const MetricSpec& g, const Vec& x, double h) {
  check_step(h);
  g.require_stencil(x, 2.0 * h);
  const int n = g.dimension();

  // V^i = sqrt|g| g^{ij} (Gamma_j - 1/2 d_j log|g|)
  auto flux_vector = [&](const Vec& y) {
    const PointData d = point_data(g, y, h);
    const std::vector<double> gam = first_kind_from(d.dg, n);
    const Vec dlog = log_det_gradient(d, n);
    Vec contracted = Vec::Zero(n);
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) s += d.ginv(i, j) * gam[(i * n + j) * n + k];
      contracted(k) = s;
    }
    const Vec inner = contracted - 0.5 * dlog;
    return Vec(std::sqrt(d.det) * (d.ginv * inner));
  };

  double divergence = 0.0;
  for (int i = 0; i < n; ++i) {
    Vec xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    divergence += (flux_vector(xp)(i) - flux_vector(xm)(i)) / (2.0 * h);
  }

  const PointData d = point_data(g, x, h);
  const std::vector<double> gam = first_kind_from(d.dg, n);
  const Vec dlog = log_det_gradient(d, n);
  Vec contracted = Vec::Zero(n);
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) s += d.ginv(i, j) * gam[(i * n + j) * n + k];
    contracted(k) = s;
  }

  const double term1 = divergence / std::sqrt(d.det);
  const double term2 = -0.5 * contracted.dot(d.ginv * dlog);

  // raise all three indices of Gamma_ikp, then contract against Gamma_jql
  const std::size_t nn = static_cast<std::size_t>(n);
  std::vector<double> t1(nn * nn * nn, 0.0), t2(nn * nn * nn, 0.0), t3(nn * nn * nn, 0.0);
  auto at = [n](int a, int b, int c) { return static_cast<std::size_t>((a * n + b) * n + c); };
  for (int a = 0; a < n; ++a)
    for (int k = 0; k < n; ++k)
      for (int p = 0; p < n; ++p) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += d.ginv(a, i) * gam[at(i, k, p)];
        t1[at(a, k, p)] = s;
      }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int p = 0; p < n; ++p) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += d.ginv(b, k) * t1[at(a, k, p)];
        t2[at(a, b, p)] = s;
      }
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) {
        double s = 0.0;
        for (int p = 0; p < n; ++p) s += d.ginv(c, p) * t2[at(a, b, p)];
        t3[at(a, b, c)] = s;
      }
  double term3 = 0.0;
  for (int j = 0; j < n; ++j)
    for (int l = 0; l < n; ++l)
      for (int q = 0; q < n; ++q) term3 += t3[at(j, l, q)] * gam[at(j, q, l)];

  return term1 + term2 + term3;
}

double scalar_curvature_bartnik(const MetricSpec& g, const Vec& x) {
  return scalar_curvature_bartnik(g, x, default_step(x.norm()));
}

double scalar_curvature_conformal(int n, double base_R, double phi, double laplacian_phi) {
  if (!(phi > 0.0)) {
    std::ostringstream msg;
    msg << "conformal factor must be positive, got " << phi;
    throw PositivityError(msg.str());
  }
  const double expo = -(n + 2.0) / (n - 2.0);
  return std::pow(phi, expo) * (-(4.0 * (n - 1.0) / (n - 2.0)) * laplacian_phi + base_R * phi);
}

Mat ricci_tensor_fd(const MetricSpec& g, const Vec& x, double h) {
  check_step(h);
  g.require_stencil(x, 2.0 * h);
  const int n = g.dimension();
  auto at = [n](int a, int b, int c) { return static_cast<std::size_t>((a * n + b) * n + c); };

  const PointData d0 = point_data(g, x, h);
  const std::vector<double> c0 = second_kind(d0, n);

  std::vector<std::vector<double>> cp(n), cm(n);
  for (int k = 0; k < n; ++k) {
    Vec xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    cp[k] = second_kind(point_data(g, xp, h), n);
    cm[k] = second_kind(point_data(g, xm, h), n);
  }

  Mat ric = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) {
        s += (cp[k][at(k, i, j)] - cm[k][at(k, i, j)]) / (2.0 * h);
        s -= (cp[j][at(k, i, k)] - cm[j][at(k, i, k)]) / (2.0 * h);
        for (int l = 0; l < n; ++l) {
          s += c0[at(k, k, l)] * c0[at(l, i, j)];
          s -= c0[at(k, j, l)] * c0[at(l, i, k)];
        }
      }
      ric(i, j) = s;
    }
  return 0.5 * (ric + ric.transpose());
}

Mat ricci_tensor_fd(const MetricSpec& g, const Vec& x) {
  return ricci_tensor_fd(g, x, default_step(x.norm()));
}

RadialCurvature radial_curvature(const RadialProfile& profile, int n, double r, double h) {
  check_step(h);
  if (!(r - h > 0.0)) throw DomainError("radial stencil reaches the origin");
  auto w = [&](double t) { return t * std::sqrt(profile.tangential(t)); };
  const double a = profile.radial(r);
  if (!(a > 0.0) || !(profile.tangential(r) > 0.0)) {
    throw DegeneracyError("radial profile is not positive");
  }
  const double w0 = w(r), wp = w(r + h), wm = w(r - h);
  const double w_r = (wp - wm) / (2.0 * h);
  const double w_rr = (wp - 2.0 * w0 + wm) / (h * h);
  const double a_r = (profile.radial(r + h) - profile.radial(r - h)) / (2.0 * h);
  const double w_s = w_r / std::sqrt(a);
  const double w_ss = (w_rr - w_r * a_r / (2.0 * a)) / a;
  const double curv = (n - 2.0) * (1.0 - w_s * w_s) / (w0 * w0);
  RadialCurvature out;
  out.ricci_radial = -(n - 1.0) * w_ss / w0;
  out.ricci_tangential = -w_ss / w0 + curv;
  out.scalar = -2.0 * (n - 1.0) * w_ss / w0 + (n - 1.0) * curv;
  return out;
}

RadialCurvature radial_curvature(const RadialProfile& profile, int n, double r) {
  return radial_curvature(profile, n, r, default_step(r));
}

RadialCurvature radial_curvature_accurate(const RadialProfile& profile, int n, double r) {
  const double h = 0.02 * r;
  if (!(r - 2.0 * h > 0.0)) throw DomainError("radial stencil reaches the origin");
  auto w = [&](double t) { return t * std::sqrt(profile.tangential(t)); };
  const double a = profile.radial(r);
  if (!(a > 0.0) || !(profile.tangential(r) > 0.0)) {
    throw DegeneracyError("radial profile is not positive");
  }
  auto d1 = [h](double fm2, double fm1, double fp1, double fp2) {
    return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
  };
  auto d2 = [h](double fm2, double fm1, double f0, double fp1, double fp2) {
    return (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
  };
  const double w0 = w(r), wp1 = w(r + h), wm1 = w(r - h), wp2 = w(r + 2 * h), wm2 = w(r - 2 * h);
  const double w_r = d1(wm2, wm1, wp1, wp2);
  const double w_rr = d2(wm2, wm1, w0, wp1, wp2);
  const double a_r = d1(profile.radial(r - 2 * h), profile.radial(r - h), profile.radial(r + h),
                        profile.radial(r + 2 * h));
  const double w_s = w_r / std::sqrt(a);
  const double w_ss = (w_rr - w_r * a_r / (2.0 * a)) / a;
  const double curv = (n - 2.0) * (1.0 - w_s * w_s) / (w0 * w0);
  RadialCurvature out;
  out.ricci_radial = -(n - 1.0) * w_ss / w0;
  out.ricci_tangential = -w_ss / w0 + curv;
  out.scalar = -2.0 * (n - 1.0) * w_ss / w0 + (n - 1.0) * curv;
  return out;
}

double radial_laplacian(const RadialProfile& profile, int n, const RadialFn& f, double r,
                        double h) {
  check_step(h);
  if (!(r - h > 0.0)) throw DomainError("radial stencil reaches the origin");
  auto w = [&](double t) { return t * std::sqrt(profile.tangential(t)); };
  const double a = profile.radial(r);
  const double a_r = (profile.radial(r + h) - profile.radial(r - h)) / (2.0 * h);
  const double w_r = (w(r + h) - w(r - h)) / (2.0 * h);
  const double f0 = f(r), fp = f(r + h), fm = f(r - h);
  const double f_r = (fp - fm) / (2.0 * h);
  const double f_rr = (fp - 2.0 * f0 + fm) / (h * h);
  return (f_rr + f_r * ((n - 1.0) * w_r / w(r) - a_r / (2.0 * a))) / a;
}

double flat_radial_laplacian(int n, const RadialFn& f, double r, double h) {
  const double fp = f(r + h), fm = f(r - h), f0 = f(r);
  return (fp - 2.0 * f0 + fm) / (h * h) + (n - 1.0) * (fp - fm) / (2.0 * h * r);
}

}  // namespace masskit
