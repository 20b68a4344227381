#include "oracles.hpp"

#include "masskit/density.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace masskit;

TEST_SUITE("density_pipeline") {

TEST_CASE("Schwarzschild split leaves phi^4 - (1 + m/2r)^4 as the remainder") {
  const double m = 1.0, B = -0.2;
  const SchwarzschildSplit split = split_schwarzschild(metrics::toy_remainder(3, m, B), m);
  for (double r : {2.0, 10.0, 50.0}) {
    const double full = std::pow(1.0 + m / (2.0 * r) + B / (r * r), 4);
    const double base = std::pow(oracle::schwarzschild_phi(3, m, r), 4);
    CHECK(split.remainder.radial(r) == doctest::Approx(full - base).epsilon(1e-12));
    CHECK(split.remainder.tangential(r) == doctest::Approx(full - base).epsilon(1e-12));
  }
}

TEST_CASE("interpolated metric is exact on both sides of the transition") {
  const MetricSpec g = metrics::toy_remainder(3, 1.0, -0.2);
  const SchwarzschildSplit split = split_schwarzschild(g, 1.0);
  const double s = 8.0;
  const MetricSpec g_hat = build_interpolated_metric(split, s);
  const MetricSpec schw = metrics::schwarzschild(3, 1.0);
  for (double r : {1.5, 10.0, 16.0}) {
    const Vec x = point_on_axis(3, r, 1);
    CHECK(g_hat(x) == g(x));
  }
  for (double r : {24.0, 40.0, 400.0}) {
    const Vec x = point_on_axis(3, r, 2);
    CHECK(g_hat(x) == schw(x));
  }
}

TEST_CASE("scalar bounds on the interpolated toy metric") {
  const SchwarzschildSplit split = split_schwarzschild(metrics::toy_remainder(3, 1.0, -0.2), 1.0);
  const ScalarBoundsAudit a = scalar_bounds_audit(build_interpolated_metric(split, 8.0), 8.0);
  CHECK(a.min_inner >= -1e-8);
  // stencils at r = 3s still see the cutoff's third derivative
  CHECK(a.sup_outer <= 1e-4);
  CHECK(a.max_abs_transition > 0.0);
  CHECK(a.scaled_transition == doctest::Approx(a.max_abs_transition * std::pow(8.0, 3)));
}

TEST_CASE("transition curvature shrinks with s") {
  const SchwarzschildSplit split = split_schwarzschild(metrics::toy_remainder(3, 1.0, -0.2), 1.0);
  const ScalarBoundsTrend t = scalar_bounds_trend(split, {8.0, 16.0, 32.0});
  REQUIRE(t.audits.size() == 3);
  CHECK(t.audits[2].max_abs_transition < t.audits[0].max_abs_transition);
  CHECK(t.transition_exponent < -2.0);
}

TEST_CASE("integral norm of the transition curvature") {
  // r^{-1} remainder: R ~ s^{-3} on [s, 4s], so the norm scales like s^{(2-n)/2}
  const ScalarBoundsTrend slow = scalar_bounds_trend(split_schwarzschild(metrics::tangential_gauge(3, 0.5), 0.0), {8.0, 16.0, 32.0});
  CHECK(slow.norm_exponent == doctest::Approx(-0.5).epsilon(0.3));
  // r^{-2} remainder decays faster than that bound
  const ScalarBoundsTrend fast = scalar_bounds_trend(split_schwarzschild(metrics::toy_remainder(3, 1.0, -0.2), 1.0), {8.0, 16.0, 32.0});
  CHECK(fast.norm_exponent <= -0.5 + 0.15);
}

TEST_CASE("Euclidean annulus volume") {
  CHECK(annulus_volume(metrics::euclidean(3), 2.0, 5.0) ==
        doctest::Approx(4.0 / 3.0 * std::numbers::pi * (125.0 - 8.0)).epsilon(1e-10));
}

TEST_CASE("Schwarzschild input needs no work") {
  const DensityRun run = density_deform(metrics::schwarzschild(3, 1.0));
  REQUIRE(run.rungs.size() == 3);
  for (const DensityPipelineState& st : run.rungs) {
    CHECK(st.zero_work);
    CHECK(st.A_integral == 0.0);
    CHECK(st.m_bar == run.input_mass);
  }
}

TEST_CASE("negative scalar curvature is outside the regime") {
  CHECK_THROWS_AS(density_deform(metrics::toy_remainder(3, 1.0, 0.5)), RegimeError);
}

TEST_CASE("single rung on the toy metric") {
  DensityOptions opt;
  opt.s_ladder = {8.0};
  const DensityRun run = density_deform(metrics::toy_remainder(3, 1.0, -0.2), opt);
  REQUIRE(run.rungs.size() == 1);
  const DensityPipelineState& st = run.rungs[0];
  CHECK(st.A_integral < 0.0);
  CHECK(st.delta.lp_margin >= 0.0);
  CHECK(st.delta.ceiling_margin >= 0.0);
  CHECK(st.delta.delta <= st.delta.delta0);
  CHECK(st.min_scalar >= -1e-8);
  CHECK(st.mass_shift == doctest::Approx(2.0 * st.A_integral / (1.0 + st.tau)));
  CHECK(st.adm_relative_error <= 0.01);
  REQUIRE(st.output.has_value());
}

TEST_CASE("an epsilon target stops the ladder early") {
  DensityOptions opt;
  opt.epsilon_target = 0.1;
  opt.verify_adm = false;
  const DensityRun run = density_deform(metrics::toy_remainder(3, 1.0, -0.2), opt);
  CHECK(run.target_met);
  CHECK(run.rungs.size() == 1);
}

}  // TEST_SUITE
