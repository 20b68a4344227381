#include "oracles.hpp"

#include "masskit/elliptic.hpp"
#include "masskit/radial_line.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace masskit;

namespace {

DomainModel annulus(double r_out = 40.0) {
  DomainModel d;
  d.r_inner = 1.0;
  d.r_out = r_out;
  return d;
}

double oracle_A(double m, const oracle::Fn& f, double support) {
  auto phi = [m](double r) { return oracle::schwarzschild_phi(3, m, r); };
  return oracle::shoot_annulus(oracle::conformally_flat(3, phi, f, support), 1.0).A;
}

}  // namespace

TEST_SUITE("elliptic_engine") {

TEST_CASE("tridiagonal LDL solve agrees with a dense factorization") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const std::size_t n = 40;
  Tridiagonal a;
  a.diag.resize(n);
  a.off.resize(n - 1);
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t k = 0; k + 1 < n; ++k) a.off[k] = U(rng);
  for (std::size_t k = 0; k < n; ++k) {
    a.diag[k] = 3.0 + U(rng);
    dense(k, k) = a.diag[k];
    if (k + 1 < n) dense(k, k + 1) = dense(k + 1, k) = a.off[k];
  }
  std::vector<double> b(n);
  for (double& v : b) v = U(rng);
  const std::vector<double> x = solve_tridiagonal(a, b);
  const Eigen::VectorXd ref = dense.ldlt().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), n));
  for (std::size_t k = 0; k < n; ++k) CHECK(x[k] == doctest::Approx(ref(k)).epsilon(1e-12));
  CHECK(backward_error(a, x, b) < 1e-14);
}

TEST_CASE("indefinite tridiagonal systems are refused") {
  Tridiagonal a{{1.0, -2.0, 1.0}, {0.1, 0.1}};
  const std::vector<double> b{1.0, 1.0, 1.0};
  CHECK_THROWS_AS(solve_tridiagonal(a, b), SolverError);
}

TEST_CASE("radial Dirichlet eigenvalue of the flat annulus [1, 2] is pi^2") {
  // z = sin(pi (r - 1)) / r
  const EigenReport rep = eigenvalue_lower_bound(metrics::euclidean(3), 1.0, 2.0,
                                                 [](double) { return 0.0; }, BoundaryKind::zero);
  CHECK(rep.value == doctest::Approx(std::numbers::pi * std::numbers::pi).epsilon(1e-4));
}

TEST_CASE("zero potential gives u = 1 and A = 0") {
  const ConformalFactorSolution sol =
      solve_conformal_factor({metrics::schwarzschild(3, 1.0), Potential::zero(), annulus(), {}});
  CHECK(sol.A_integral == 0.0);
  for (double u : sol.u) CHECK(u == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("nonnegative bump against the shooting oracle") {
  const ConformalFactorSolution sol =
      solve_conformal_factor({metrics::schwarzschild(3, 1.0), bump_potential(0.5, 2.0, 1.0), annulus(), {}});
  const double A = oracle_A(1.0, oracle::bump(0.5, 2.0, 1.0), 3.0);
  CHECK(A < 0.0);
  CHECK(std::abs(sol.A_integral - A) <= 1e-4 * std::abs(A));
  CHECK(std::abs(sol.A_fit - A) <= 1e-2 * std::abs(A));
  CHECK(sol.min_u > 0.0);
  CHECK(std::abs(sol.flux.flux) <= 1e-8);
  CHECK(sol.flux.weighted_flux <= 1e-8);
  CHECK(sol.energy_bound_holds);
}

TEST_CASE("small negative bump raises u above one") {
  const ConformalFactorSolution sol =
      solve_conformal_factor({metrics::euclidean(3), bump_potential(-0.05, 2.0, 1.0), annulus(), {}});
  const double A = oracle::shoot_annulus(
                       oracle::conformally_flat(3, [](double) { return 1.0; }, oracle::bump(-0.05, 2.0, 1.0), 3.0), 1.0)
                       .A;
  CHECK(A > 0.0);
  CHECK(sol.A_integral == doctest::Approx(A).epsilon(1e-4));
  CHECK(sol.smallness.pass);
  CHECK(sol.smallness.ratio > 0.0);
}

TEST_CASE("large negative potential violates the smallness condition") {
  const EllipticProblem p{metrics::euclidean(3), bump_potential(-50.0, 2.0, 1.0), annulus(), {}};
  try {
    solve_conformal_factor(p);
    FAIL("expected a precondition failure");
  } catch (const PreconditionError& e) {
    CHECK(e.lhs() > e.rhs());
    CHECK_FALSE(e.inequality().empty());
  }
}

TEST_CASE("a potential-free toy end does not change A") {
  DomainModel with_end = annulus();
  with_end.cylinder_l0 = 2.0;
  const Potential f = bump_potential(0.5, 2.0, 1.0);
  const double plain = solve_conformal_factor({metrics::schwarzschild(3, 1.0), f, annulus(), {}}).A_integral;
  const ConformalFactorSolution toy = solve_conformal_factor({metrics::schwarzschild(3, 1.0), f, with_end, {}});
  CHECK(toy.A_integral == doctest::Approx(plain).epsilon(1e-6));
  CHECK(toy.final_cylinder_length > 0.0);
}

TEST_CASE("Robin and Dirichlet truncations converge to the same A") {
  SolverControls robin;
  robin.outer = OuterCondition::robin;
  const Potential f = bump_potential(0.5, 2.0, 1.0);
  const double a = solve_conformal_factor({metrics::schwarzschild(3, 1.0), f, annulus(), {}}).A_integral;
  const double b = solve_conformal_factor({metrics::schwarzschild(3, 1.0), f, annulus(), robin}).A_integral;
  CHECK(b == doctest::Approx(a).epsilon(1e-6));
}

TEST_CASE("r_out must leave room for the fit window") {
  const EllipticProblem p{metrics::euclidean(3), bump_potential(0.5, 2.0, 1.0), annulus(20.0), {}};
  CHECK_THROWS_AS(solve_conformal_factor(p), ConfigError);
}

TEST_CASE("Sobolev estimate is a positive upper bound") {
  const SobolevReport rep = sobolev_estimate(metrics::euclidean(3), annulus());
  CHECK(rep.estimate > 0.0);
  CHECK(rep.upper_bound);
  // sharp constant of R^3 for the gradient against L^6
  CHECK(rep.estimate <= 3.0 * std::pow(std::numbers::pi / 2.0, 4.0 / 3.0) * 1.05);
}

TEST_CASE("iteration log records every exhaustion step") {
  const ConformalFactorSolution sol =
      solve_conformal_factor({metrics::schwarzschild(3, 1.0), bump_potential(0.5, 2.0, 1.0), annulus(), {}});
  REQUIRE_FALSE(sol.log.empty());
  for (std::size_t i = 1; i < sol.log.size(); ++i) {
    CHECK(sol.log[i].truncation_radius >= sol.log[i - 1].truncation_radius);
  }
  CHECK(sol.log.back().A_integral == doctest::Approx(sol.A_integral));
}

}  // TEST_SUITE
