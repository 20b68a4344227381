#include "oracles.hpp"

#include "masskit/curvature.hpp"
#include "masskit/grid.hpp"
#include "masskit/metric.hpp"

#include <doctest.h>

#include <cmath>

using namespace masskit;

namespace {

Vec point(double x, double y, double z) {
  Vec p(3);
  p << x, y, z;
  return p;
}

// a non-diagonal, non-radial metric with nontrivial curvature
MetricSpec skewed() {
  TensorFn eval = [](const Vec& x) -> Mat {
    Mat g = Mat::Identity(3, 3);
    g(0, 1) = g(1, 0) = 0.1 * std::sin(x(2));
    g(0, 0) += 0.2 * x(1) * x(1) / (1.0 + x.squaredNorm());
    g(2, 2) += 0.1 * std::cos(x(0));
    return g;
  };
  return MetricSpec(3, MetricFamily::perturbed, "skewed", eval, 0.0);
}

}  // namespace

TEST_SUITE("geometry_core") {

TEST_CASE("round sphere in stereographic coordinates has R = n(n-1)") {
  for (int n : {3, 4, 5}) {
    const MetricSpec g = metrics::round_sphere(n);
    Vec x = Vec::Zero(n);
    x(0) = 0.3;
    x(n - 1) = -0.7;
    CHECK(scalar_curvature_bartnik(g, x, 1e-3) == doctest::Approx(n * (n - 1.0)).epsilon(1e-5));
  }
}

TEST_CASE("Schwarzschild is scalar flat to truncation error") {
  const MetricSpec g = metrics::schwarzschild(3, 1.0);
  for (double r : {2.0, 5.0, 20.0}) {
    const double h = default_step(r);
    const double c = r / std::sqrt(3.0);
    CHECK(std::abs(scalar_curvature_bartnik(g, point(c, c, c))) < h * h);
  }
}

TEST_CASE("toy remainder curvature matches the conformal closed form") {
  // phi = 1 + m/(2r) + B/r^2: flat Laplacian 2B/r^4, R = -8 Delta phi / phi^5
  const double m = 1.0, B = -0.2;
  const MetricSpec g = metrics::toy_remainder(3, m, B);
  for (double r : {2.0, 3.0, 6.0}) {
    const double phi = 1.0 + m / (2.0 * r) + B / (r * r);
    const double expected = -8.0 * 2.0 * B / std::pow(r, 4) / std::pow(phi, 5);
    CHECK(scalar_curvature_bartnik(g, point(0.0, r, 0.0), 1e-3) == doctest::Approx(expected).epsilon(1e-4));
    CHECK(radial_curvature_accurate(*g.radial(), 3, r).scalar == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("conformal formula reduces to the flat one on a flat base") {
  // phi^{-(n+2)/(n-2)} (-4(n-1)/(n-2) lap + R phi)
  CHECK(scalar_curvature_conformal(3, 0.0, 2.0, -1.0) == doctest::Approx(8.0 / 32.0));
  CHECK(scalar_curvature_conformal(4, 6.0, 1.0, 0.0) == doctest::Approx(6.0));
}

TEST_CASE("Bartnik form equals the trace of the Ricci tensor") {
  const MetricSpec g = skewed();
  const Vec x = point(0.4, -0.3, 0.8);
  const Mat ric = ricci_tensor_fd(g, x, 1e-3);
  const Mat ginv = checked_inverse(g(x));
  CHECK((ginv * ric).trace() == doctest::Approx(scalar_curvature_bartnik(g, x, 1e-3)).epsilon(1e-5));
}

TEST_CASE("Schwarzschild Ricci eigenvalues in an orthonormal frame") {
  // radial -2m/rho^3, tangential m/rho^3 with rho = r phi^2
  const double m = 1.0;
  const MetricSpec g = metrics::schwarzschild(3, m);
  for (double r : {2.0, 4.0}) {
    const double phi = oracle::schwarzschild_phi(3, m, r);
    const double rho = r * phi * phi;
    const RadialCurvature c = radial_curvature_accurate(*g.radial(), 3, r);
    CHECK(c.ricci_radial == doctest::Approx(-2.0 * m / std::pow(rho, 3)).epsilon(1e-6));
    CHECK(c.ricci_tangential == doctest::Approx(m / std::pow(rho, 3)).epsilon(1e-6));
    CHECK(std::abs(c.scalar) < 1e-6);
  }
}

TEST_CASE("radial curvature agrees with the Cartesian difference formula") {
  const MetricSpec g = metrics::radial_projector(3, 0.3, -1.0);
  const double r = 2.5;
  const RadialCurvature c = radial_curvature(*g.radial(), 3, r);
  CHECK(c.scalar == doctest::Approx(scalar_curvature_bartnik(g, point(r, 0.0, 0.0), 1e-3)).epsilon(1e-4));
  const Mat ric = ricci_tensor_fd(g, point(r, 0.0, 0.0), 1e-3);
  // on the x axis the radial direction is e0; g_00 = 1 + 0.3/r
  CHECK(ric(0, 0) / g(point(r, 0.0, 0.0))(0, 0) == doctest::Approx(c.ricci_radial).epsilon(1e-4));
}

TEST_CASE("Christoffel symbols of the first kind are symmetric in the first pair") {
  const ChristoffelData gamma = christoffel_first_kind(skewed(), point(0.2, 0.5, -0.4), 1e-3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) CHECK(gamma(i, j, k) == doctest::Approx(gamma(j, i, k)));
}

TEST_CASE("Euclidean gradient vanishes identically") {
  for (const Mat& d : metric_gradient(metrics::euclidean(4), point_on_axis(4, 3.0), 0.01)) {
    CHECK(d.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("degenerate or indefinite metrics are rejected") {
  Mat g = Mat::Identity(3, 3);
  g(2, 2) = -1.0;
  CHECK_THROWS_AS(checked_inverse(g), DegeneracyError);
  g(2, 2) = 0.0;
  CHECK_THROWS_AS(checked_inverse(g), DegeneracyError);
}

TEST_CASE("stencils may not reach inside the chart radius") {
  const MetricSpec g = metrics::schwarzschild(3, 1.0);
  CHECK_THROWS_AS(g.require_stencil(point(0.9, 0.0, 0.0), 0.05), DomainError);
  CHECK_THROWS_AS(scalar_curvature_bartnik(g, point(0.5, 0.0, 0.0)), DomainError);
  CHECK_NOTHROW(g.require_stencil(point(3.0, 0.0, 0.0), 0.05));
}

TEST_CASE("sampled metrics are symmetric on the grid") {
  const Grid grid = Grid::full3d(2.0, 20.0, 6, 5, 8);
  CHECK(grid.node_count() == 6u * 5u * 8u);
  const TensorField field = sample_metric(skewed(), grid);
  CHECK(field.symmetry_defect() == 0.0);
  const TensorField R = sample_scalar_curvature(metrics::schwarzschild(3, 1.0), grid);
  for (std::size_t k = 0; k < grid.node_count(); ++k) CHECK(std::abs(R.scalar(k)) < 1e-3);
}

}  // TEST_SUITE
