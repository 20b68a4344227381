#include "masskit/compactification.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace masskit;

namespace {

// cap-off input on the negative-mass Schwarzschild end, u = 1 - 1/(4r)
struct Negative {
  LohkampInput in = lohkamp_input(metrics::schwarzschild(3, -0.5), 8.0);
  LohkampCutoffResult cut = lohkamp_cutoff(in);
  SuperharmonicAudit audit = check_superharmonic(in, cut);
  LohkampMetricResult lm = lohkamp_metric(in, cut, audit);
};

const Negative& negative() {
  static const Negative n;
  return n;
}

Mat plane_rotation(int n, int i, int j, double angle) {
  Mat R = Mat::Identity(n, n);
  R(i, i) = R(j, j) = std::cos(angle);
  R(i, j) = -std::sin(angle);
  R(j, i) = std::sin(angle);
  return R;
}

}  // namespace

TEST_SUITE("compactification") {

TEST_CASE("cutoff is the identity below a and the cap above b") {
  const LohkampCutoff z = LohkampCutoff::from_epsilon(0.1);
  CHECK(z.lower == doctest::Approx(1.0 - 0.075));
  CHECK(z.upper == doctest::Approx(1.0 - 0.025));
  CHECK(z.cap == doctest::Approx(0.95));
  for (double t : {0.0, 0.5, z.lower}) {
    const Jet j = z(t);
    CHECK(j.value == t);
    CHECK(j.d1 == 1.0);
    CHECK(j.d2 == 0.0);
  }
  for (double t : {z.upper, 1.0, 3.0}) {
    const Jet j = z(t);
    CHECK(j.value == doctest::Approx(z.cap).epsilon(1e-15));
    CHECK(j.d1 == 0.0);
    CHECK(j.d2 == 0.0);
  }
}

TEST_CASE("cutoff derivatives match differences and stay concave") {
  const LohkampCutoff z = LohkampCutoff::from_epsilon(0.2);
  const double h = 1e-6;
  for (int i = 1; i < 50; ++i) {
    const double t = z.lower + (z.upper - z.lower) * i / 50.0;
    const Jet j = z(t);
    CHECK(j.d1 == doctest::Approx((z(t + h).value - z(t - h).value) / (2 * h)).epsilon(1e-7));
    CHECK(j.d2 == doctest::Approx((z(t + h).d1 - z(t - h).d1) / (2 * h)).epsilon(1e-6));
    CHECK(j.d2 < 0.0);
    CHECK(j.d1 >= 0.0);
    CHECK(j.d1 <= 1.0);
  }
}

TEST_CASE("epsilon comes from the sup of u on the sphere") {
  const Negative& n = negative();
  CHECK(n.cut.sup_on_sphere == doctest::Approx(1.0 - 1.0 / 32.0).epsilon(1e-15));
  CHECK(n.cut.epsilon == doctest::Approx(1.0 / 32.0).epsilon(1e-12));
}

TEST_CASE("superharmonic audit on the negative-mass end") {
  const SuperharmonicAudit& a = negative().audit;
  CHECK(a.pass);
  CHECK(a.max_laplacian <= 1e-10);
  CHECK(a.min_transition_laplacian < -1e-6);
  CHECK(a.max_identity_laplacian <= 1e-8);
  CHECK(a.max_plateau_laplacian == 0.0);
  CHECK(a.transition_inner < a.transition_outer);
  // u = a at r = 1/(4(1-a)), u = b at r = 1/(4(1-b))
  const double eps = negative().cut.epsilon;
  CHECK(a.transition_inner == doctest::Approx(1.0 / (3.0 * eps)).epsilon(1e-9));
  CHECK(a.transition_outer == doctest::Approx(1.0 / eps).epsilon(1e-9));
}

TEST_CASE("modified metric is exactly constant beyond r_flat") {
  const LohkampMetricResult& lm = negative().lm;
  CHECK(lm.constant_outside);
  CHECK(lm.flat_scale == doctest::Approx(std::pow(negative().cut.zeta.cap, 4)));
  for (double f : {1.0, 1.5, 10.0}) {
    Vec x(3);
    x << 0.3, -0.8, 0.52;
    x *= f * lm.r_flat / x.norm();
    CHECK(lm.metric(x) == Mat(lm.flat_scale * Mat::Identity(3, 3)));
  }
  CHECK(lm.min_scalar >= -1e-8);
  CHECK(lm.max_scalar > 1e-6);
  CHECK(lm.max_scalar_radius > negative().audit.transition_inner);
  CHECK(lm.max_scalar_radius < negative().audit.transition_outer);
}

TEST_CASE("torus chart is periodic across faces") {
  const TorusChart chart = torus_glue(negative().lm);
  CHECK(chart.side == doctest::Approx(16.0 * negative().lm.r_flat));
  CHECK(chart.max_face_gap == 0.0);
  CHECK(chart.min_scalar >= -1e-8);
  CHECK(chart.max_scalar > 1e-6);
  CHECK(chart.samples.size() == chart.sampled);
}

TEST_CASE("a cube that cuts into the bent region cannot be glued") {
  CHECK_THROWS_AS(torus_glue(negative().lm, negative().lm.r_flat), GluingError);
}

TEST_CASE("positive mass cannot be capped") {
  const LohkampInput in = lohkamp_input(metrics::schwarzschild(3, 0.5), 8.0);
  try {
    lohkamp_cutoff(in);
    FAIL("expected a precondition failure");
  } catch (const PreconditionError& e) {
    CHECK(e.lhs() >= 1.0);
    CHECK(e.rhs() == 1.0);
  }
}

TEST_CASE("non-harmonic factors are refused") {
  const LohkampInput in = lohkamp_input(metrics::toy_remainder(3, -0.5, 0.3), 8.0);
  CHECK_THROWS_AS(check_superharmonic(in, lohkamp_cutoff(in)), PreconditionError);
}

TEST_CASE("group closure orders") {
  CHECK(trivial_group(4).order() == 1);
  CHECK(antipodal_group(4).order() == 2);
  CHECK(cyclic_hopf_group(5).order() == 5);
  const GroupAction G = cyclic_hopf_group(3);
  CHECK(G.elements.front() == Mat(Mat::Identity(4, 4)));
}

TEST_CASE("groups that fix a direction or fail to close are rejected") {
  // rotation in one plane of R^4 fixes the other plane
  CHECK_THROWS_AS(make_group(4, {plane_rotation(4, 0, 1, std::numbers::pi / 2)}), PreconditionError);
  // irrational angle: no finite closure
  const Mat Q = plane_rotation(4, 0, 1, 1.0) * plane_rotation(4, 2, 3, 1.0);
  CHECK_THROWS_AS(make_group(4, {Q}), ConfigError);
  Mat S = Mat::Identity(4, 4);
  S(0, 0) = 2.0;
  CHECK_THROWS_AS(make_group(4, {S}), ConfigError);
}

TEST_CASE("fundamental domains carry |S^{n-1}| / |Gamma|") {
  for (const GroupAction& G : {trivial_group(4), antipodal_group(4), cyclic_hopf_group(3)}) {
    CHECK(fundamental_domain_rule(G, 16).total_weight() ==
          doctest::Approx(sphere_area(4) / G.order()).epsilon(1e-12));
  }
}

TEST_CASE("cover mass is |Gamma| times the quotient mass") {
  const std::vector<double> ladder{64.0, 128.0, 256.0, 512.0};
  const AleLiftReport rep = ale_lift(metrics::schwarzschild(4, 1.0), cyclic_hopf_group(3), ladder);
  CHECK(rep.group_order == 3);
  CHECK(rep.ratio_error <= 1e-3);
  CHECK(rep.invariance_gap <= 1e-12);
}

TEST_CASE("a metric that is not invariant cannot be lifted") {
  TensorFn eval = [](const Vec& x) -> Mat {
    Mat g = Mat::Identity(4, 4);
    g(0, 0) += 0.1 * x(0) / x.squaredNorm();
    return g;
  };
  const MetricSpec g(4, MetricFamily::perturbed, "odd", eval, 1.0);
  const std::vector<double> ladder{64.0, 128.0, 256.0};
  CHECK_THROWS_AS(ale_lift(g, antipodal_group(4), ladder), InvarianceError);
}

TEST_CASE("fixed point of a finite affine group") {
  const GroupAction G = cyclic_hopf_group(4);
  std::vector<AffineMap> linear;
  for (const Mat& T : G.elements) linear.push_back({T, Vec::Zero(4)});
  CHECK(fixed_point_of_finite_group(linear).point.norm() == 0.0);

  Vec t(4);
  t << -1.0, 0.5, 2.0, 3.0;
  const FixedPointResult r = fixed_point_of_finite_group(conjugate_by_translation(G, t));
  CHECK((r.point - t).norm() <= 1e-12);
  CHECK(r.closed);

  CHECK_THROWS_AS(fixed_point_of_finite_group({{Mat::Identity(4, 4), Vec::Zero(4)}, {Mat::Identity(4, 4), t}}),
                  PreconditionError);
}

}  // TEST_SUITE
