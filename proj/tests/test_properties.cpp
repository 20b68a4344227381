// Seeded randomized checks of the invariants; every draw is reproducible.

#include "masskit/adm.hpp"
#include "masskit/commands.hpp"
#include "masskit/compactification.hpp"
#include "masskit/curvature.hpp"
#include "masskit/density.hpp"
#include "masskit/elliptic.hpp"

#include <doctest.h>

#include <Eigen/QR>

#include <cmath>
#include <random>

using namespace masskit;

namespace {

std::mt19937_64& rng() {
  static std::mt19937_64 gen(20261016);
  return gen;
}

double uniform(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }

Mat random_rotation(int n) {
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = uniform(-1.0, 1.0);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
  Mat Q = qr.householderQ();
  if (Q.determinant() < 0.0) Q.col(0) *= -1.0;
  return Q;
}

// Schwarzschild plus an anisotropic r^{-1} term
MetricSpec anisotropic(double m, double c) {
  const MetricSpec base = metrics::schwarzschild(3, m);
  TensorFn h = [c](const Vec& x) -> Mat {
    const double r = x.norm();
    Mat t = Mat::Zero(3, 3);
    t(0, 0) = c * (1.0 + x(2) / r) / r;
    t(1, 2) = t(2, 1) = 0.5 * c * x(0) / (r * r);
    return t;
  };
  return metrics::perturbed(base, h, "anisotropic", DecayBudget{-1.0});
}

}  // namespace

TEST_SUITE("properties") {

TEST_CASE("ADM mass is invariant under rotations of the chart") {
  const std::vector<double> ladder{16.0, 32.0, 64.0, 128.0};
  const MetricSpec g = anisotropic(1.0, 0.3);
  const double m0 = adm_mass(g, ladder).extrapolated;
  for (int trial = 0; trial < 4; ++trial) {
    const MetricSpec gq = metrics::rotated(g, random_rotation(3));
    CHECK(adm_mass(gq, ladder).extrapolated == doctest::Approx(m0).epsilon(1e-6));
  }
}

TEST_CASE("scalar curvature transforms as a scalar") {
  const MetricSpec g = anisotropic(0.7, 0.2);
  for (int trial = 0; trial < 6; ++trial) {
    const Mat Q = random_rotation(3);
    Vec x(3);
    x << uniform(-4, 4), uniform(-4, 4), uniform(-4, 4);
    x *= uniform(3.0, 9.0) / x.norm();
    const double a = scalar_curvature_bartnik(metrics::rotated(g, Q), x, 1e-3);
    const double b = scalar_curvature_bartnik(g, Vec(Q * x), 1e-3);
    CHECK(a == doctest::Approx(b).epsilon(1e-6));
  }
}

TEST_CASE("Schwarzschild mass within 1% for random m") {
  const std::vector<double> ladder{8.0, 16.0, 32.0, 64.0};
  for (int trial = 0; trial < 6; ++trial) {
    const double m = uniform(-1.0, 2.0);
    const double got = adm_mass(metrics::schwarzschild(3, m), ladder).extrapolated;
    CHECK(std::abs(got - m) <= 0.01 * std::max(1.0, std::abs(m)));
  }
}

TEST_CASE("cutoff caps, never exceeds the identity and is monotone") {
  for (int trial = 0; trial < 20; ++trial) {
    const LohkampCutoff z = LohkampCutoff::from_epsilon(uniform(1e-3, 0.5));
    double prev = -1.0;
    for (int i = 0; i <= 200; ++i) {
      const double t = 0.5 + 0.7 * i / 200.0;
      const double v = z(t).value;
      CHECK(v <= z.cap);
      CHECK(v <= t);
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("comparison principle: larger potential, smaller A") {
  DomainModel d;
  d.r_inner = 1.0;
  d.r_out = 40.0;
  d.nodes_per_decade = 400;
  for (int trial = 0; trial < 3; ++trial) {
    const double a1 = uniform(0.05, 0.5);
    const double a2 = a1 + uniform(0.05, 0.5);
    const double c = uniform(1.8, 2.5);
    const auto s1 = solve_conformal_factor({metrics::schwarzschild(3, 1.0), bump_potential(a1, c, 0.7), d, {}});
    const auto s2 = solve_conformal_factor({metrics::schwarzschild(3, 1.0), bump_potential(a2, c, 0.7), d, {}});
    CHECK(s2.A_integral < s1.A_integral);
    CHECK(s1.A_integral < 0.0);
    CHECK(s2.min_u > 0.0);
    CHECK(s2.min_u <= s1.min_u);
    for (double u : s1.u) CHECK(u <= 1.0 + 1e-12);
  }
}

TEST_CASE("interpolated metric agrees with its inputs off the transition") {
  const MetricSpec g = metrics::toy_remainder(3, 1.0, -0.2);
  const SchwarzschildSplit split = split_schwarzschild(g, 1.0);
  const MetricSpec schw = metrics::schwarzschild(3, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const double s = uniform(4.0, 40.0);
    const MetricSpec gh = build_interpolated_metric(split, s);
    Vec x(3);
    x << uniform(-1, 1), uniform(-1, 1), uniform(-1, 1);
    x /= x.norm();
    const double inner = uniform(1.1, 2.0 * s);
    const double outer = uniform(3.0 * s, 30.0 * s);
    CHECK(gh(Vec(inner * x)) == g(Vec(inner * x)));
    CHECK(gh(Vec(outer * x)) == schw(Vec(outer * x)));
  }
}

TEST_CASE("closed groups are orthogonal and contain inverses") {
  for (int k = 2; k <= 6; ++k) {
    const GroupAction G = cyclic_hopf_group(k);
    for (const Mat& a : G.elements) {
      CHECK((a.transpose() * a - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-12);
      bool has_inverse = false;
      for (const Mat& b : G.elements) has_inverse |= (a * b - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-12;
      CHECK(has_inverse);
    }
  }
}

TEST_CASE("conjugated groups fix the conjugating point") {
  const GroupAction G = antipodal_group(4);
  for (int trial = 0; trial < 10; ++trial) {
    Vec t(4);
    for (int i = 0; i < 4; ++i) t(i) = uniform(-10.0, 10.0);
    const FixedPointResult r = fixed_point_of_finite_group(conjugate_by_translation(G, t));
    CHECK((r.point - t).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("seeded directions are unit and reproducible") {
  const std::vector<Vec> a = seeded_directions(5, 16, 42);
  const std::vector<Vec> b = seeded_directions(5, 16, 42);
  const std::vector<Vec> c = seeded_directions(5, 16, 43);
  REQUIRE(a.size() == 16);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i] == b[i]);
    CHECK(a[i].norm() == doctest::Approx(1.0));
  }
  CHECK(a[0] != c[0]);
}

}  // TEST_SUITE
