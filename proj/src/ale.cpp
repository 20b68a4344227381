#include "masskit/compactification.hpp"

#include <cmath>
#include <deque>
#include <numbers>
#include <sstream>

namespace masskit {

namespace {

constexpr double kGroupTol = 1e-12;

bool same(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff() <= kGroupTol; }

int find(const std::vector<Mat>& set, const Mat& m) {
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (same(set[i], m)) return static_cast<int>(i);
  }
  return -1;
}

// 2x2 rotation blocks by angle on both complex coordinates of C^2
Mat hopf_rotation(double angle) {
  Mat T = Mat::Zero(4, 4);
  const double c = std::cos(angle), s = std::sin(angle);
  for (int b = 0; b < 2; ++b) {
    T(2 * b, 2 * b) = c;
    T(2 * b, 2 * b + 1) = -s;
    T(2 * b + 1, 2 * b) = s;
    T(2 * b + 1, 2 * b + 1) = c;
  }
  return T;
}

}  // namespace

GroupAction make_group(int n, const std::vector<Mat>& generators, int max_order) {
  GroupAction G;
  G.dimension = n;
  G.generators = generators;
  const Mat I = Mat::Identity(n, n);
  for (const Mat& T : generators) {
    if (T.rows() != n || T.cols() != n) throw ConfigError("generator has the wrong shape");
    if ((T.transpose() * T - I).cwiseAbs().maxCoeff() > kGroupTol) {
      throw ConfigError("generator is not orthogonal");
    }
  }
  G.elements.push_back(I);
  std::deque<Mat> queue{I};
  while (!queue.empty()) {
    const Mat a = queue.front();
    queue.pop_front();
    for (const Mat& T : generators) {
      const Mat b = T * a;
      if (find(G.elements, b) >= 0) continue;
      if (static_cast<int>(G.elements.size()) >= max_order) {
        throw ConfigError("generators do not close into a finite group of the allowed order");
      }
      G.elements.push_back(b);
      queue.push_back(b);
    }
  }
  for (const Mat& a : G.elements) {
    for (const Mat& b : G.elements) {
      if (find(G.elements, a * b) < 0) throw ConfigError("group is not closed under composition");
    }
  }
  for (std::size_t i = 1; i < G.elements.size(); ++i) {
    // a fixed direction on S^{n-1} is an eigenvalue 1
    Eigen::EigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(G.elements[i]));
    for (const auto& lambda : es.eigenvalues()) {
      if (std::abs(lambda - std::complex<double>(1.0, 0.0)) < 1e-9) {
        std::ostringstream msg;
        msg << "group element " << i << " fixes a direction; the action on the sphere is not free";
        throw PreconditionError(msg.str(), "no eigenvalue 1 off the identity",
                                std::abs(lambda - 1.0), 0.0);
      }
    }
  }
  return G;
}

GroupAction trivial_group(int n) { return make_group(n, {}); }

GroupAction antipodal_group(int n) { return make_group(n, {Mat(-Mat::Identity(n, n))}); }

GroupAction cyclic_hopf_group(int k) {
  if (k < 1) throw ConfigError("cyclic order must be positive");
  return make_group(4, {hopf_rotation(2.0 * std::numbers::pi / k)});
}

SphereRule fundamental_domain_rule(const GroupAction& group, int order) {
  const int n = group.dimension;
  const int k = group.order();
  if (k == 1) return sphere_rule(n, order);
  const Mat minus = -Mat::Identity(n, n);
  if (k == 2 && same(group.elements[1], minus)) return hemisphere_rule(n, order);
  if (n == 4) {
    const Mat R = hopf_rotation(2.0 * std::numbers::pi / k);
    bool cyclic = true;
    Mat P = Mat::Identity(4, 4);
    for (int j = 0; j < k && cyclic; ++j, P = R * P) cyclic = find(group.elements, P) >= 0;
    if (cyclic) return hopf_wedge_rule(order, k);
  }
  throw ConfigError("no fundamental domain rule for this group");
}

AleLiftReport ale_lift(const MetricSpec& quotient, const GroupAction& group,
                       std::span<const double> ladder, int order) {
  const int n = quotient.dimension();
  if (group.dimension != n) throw ConfigError("group and metric dimensions differ");
  AleLiftReport rep;
  rep.group_order = group.order();
  // invariance T^T g(Tx) T = g(x) on a shell of sample points
  const SphereRule probe = sphere_rule(n, 4);
  for (double r : ladder) {
    for (const Vec& d : probe.directions) {
      const Vec x = r * d;
      const Mat gx = quotient(x);
      for (const Mat& T : group.generators) {
        const Mat pulled = T.transpose() * quotient(T * x) * T;
        rep.invariance_gap = std::max(rep.invariance_gap, (pulled - gx).cwiseAbs().maxCoeff());
      }
    }
  }
  if (rep.invariance_gap > kGroupTol) {
    throw InvarianceError("metric is not invariant under the group", "|g o T - g| <= 1e-12",
                          rep.invariance_gap, kGroupTol);
  }
  // linear action: the cover shares the chart and the evaluator
  rep.cover_metric = quotient;
  rep.cover = adm_mass(*rep.cover_metric, ladder, order);
  rep.quotient = adm_mass_with_rule(quotient, ladder, fundamental_domain_rule(group, order), 1.0);
  rep.quotient.group_order = group.order();
  rep.ratio = rep.cover.extrapolated / rep.quotient.extrapolated;
  rep.ratio_error = std::abs(rep.ratio - group.order()) / group.order();
  return rep;
}

FixedPointResult fixed_point_of_finite_group(const std::vector<AffineMap>& group, double tolerance) {
  if (group.empty()) throw ConfigError("empty group");
  const int n = static_cast<int>(group.front().v.size());
  FixedPointResult out;
  out.point = Vec::Zero(n);
  for (const AffineMap& g : group) out.point += g(Vec::Zero(n));
  out.point /= static_cast<double>(group.size());
  for (const AffineMap& g : group) {
    out.max_displacement = std::max(out.max_displacement, (g(out.point) - out.point).norm());
  }
  out.closed = true;
  for (const AffineMap& a : group) {
    for (const AffineMap& b : group) {
      const Mat T = a.T * b.T;
      const Vec v = a.T * b.v + a.v;
      bool hit = false;
      for (const AffineMap& c : group) {
        if (same(c.T, T) && (c.v - v).cwiseAbs().maxCoeff() <= tolerance) {
          hit = true;
          break;
        }
      }
      out.closed = out.closed && hit;
    }
  }
  if (out.max_displacement > tolerance) {
    std::ostringstream msg;
    msg << "averaged point is moved by " << out.max_displacement
        << "; the set is not a finite group of affine isometries";
    throw PreconditionError(msg.str(), "|g(p) - p| <= tol", out.max_displacement, tolerance);
  }
  if (!out.closed) {
    throw PreconditionError("affine set is not closed under composition");
  }
  return out;
}

std::vector<AffineMap> conjugate_by_translation(const GroupAction& group, const Vec& t) {
  std::vector<AffineMap> out;
  for (const Mat& T : group.elements) out.push_back({T, t - T * t});
  return out;
}

}  // namespace masskit
