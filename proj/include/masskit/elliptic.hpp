#pragma once

#include "masskit/metric.hpp"
#include "masskit/radial_line.hpp"

#include <string>
#include <vector>

namespace masskit {

// End chart {r >= r_inner} (or a ball through the origin) plus an optional toy
// arbitrary end: a cylinder glued at r_inner and cut at depth L_i = 2^i L_0.
struct DomainModel {
  enum class Kind { end_annulus, ball };
  Kind kind = Kind::end_annulus;
  double r_inner = 1.0;
  // outer radius of the reported annulus U_{R_out}; A_fit uses [R_out/10, 0.9 R_out]
  double r_out = 40.0;
  double cylinder_l0 = 0.0;
  int max_cylinder_levels = 6;
  int nodes_per_decade = 1000;
  // first truncation radius; 0 means 2 R_out
  double initial_truncation = 0.0;
  int max_truncation_doublings = 60;

  bool has_toy_end() const { return kind == Kind::end_annulus && cylinder_l0 > 0.0; }
  double cylinder_length(int level) const;
  void validate() const;
};

// Compactly supported potential f: end(r) on the end chart (or ball), cylinder(t) on the toy end.
struct Potential {
  RadialFn end;
  RadialFn cylinder;
  double support_radius = 0.0;
  std::string label = "f";

  static Potential zero();
  double at(const LinePosition& p) const;
};

// a (1 - x^2)^4 with x = (r - center)/width on |x| < 1
Potential bump_potential(double amplitude, double center, double width);
// a x (1 - x^2)^4: sign-changing
Potential dipole_potential(double amplitude, double center, double width);

enum class OuterCondition { dirichlet, robin };

struct SolverControls {
  double exhaustion_tolerance = 1e-10;
  double residual_tolerance = 1e-10;
  OuterCondition outer = OuterCondition::dirichlet;
  // relative |A_integral - A_fit| / max(|A_integral|, 1e-8)
  double extraction_tolerance = 1e-2;
  // 0 requests a fresh estimate over U
  double sobolev_constant = 0.0;
};

struct EllipticProblem {
  MetricSpec metric;
  Potential f;
  DomainModel domain;
  SolverControls controls;
};

struct SmallnessReport {
  double lhs = 0.0;
  double threshold = 0.0;
  // lhs / threshold; 0 when f >= 0
  double ratio = 0.0;
  bool pass = true;
};

struct SobolevReport {
  double estimate = 0.0;
  bool upper_bound = true;
  std::string domain;
  int iterations = 0;
  std::vector<double> radii;
  std::vector<double> profile;
};

struct TruncatedSolution {
  RadialLine line;
  std::vector<double> v;
  double energy = 0.0;
  double residual = 0.0;
  double truncation_radius = 0.0;
  int level = 0;
};

struct IterationRecord {
  int level = 0;
  int step = 0;
  double truncation_radius = 0.0;
  double cylinder_length = 0.0;
  double residual = 0.0;
  double min_u = 0.0;
  double A_integral = 0.0;
  double A_fit = 0.0;
  double change = 0.0;
};

struct FluxDiagnostics {
  bool boundary_present = false;
  // variationally consistent flux of u through dU, outward normal
  double flux = 0.0;
  double weighted_flux = 0.0;
  // same from a one-sided second order difference
  double fd_flux = 0.0;
  double fd_weighted_flux = 0.0;
};

struct ConformalFactorSolution {
  int dimension = 3;
  std::vector<double> x;  // line coordinate per node
  std::vector<LinePosition> nodes;
  std::vector<double> u;
  std::vector<double> v;
  double A_integral = 0.0;
  double A_fit = 0.0;
  double B_fit = 0.0;
  // max |v - A r^{2-n}| r^{n-1} over the fit window
  double omega_proxy = 0.0;
  FluxDiagnostics flux;
  double min_u = 0.0;
  double energy = 0.0;
  double sobolev_constant = 0.0;
  SmallnessReport smallness;
  double C0 = 0.0;
  double v_critical_norm = 0.0;
  bool energy_bound_holds = true;
  double final_truncation = 0.0;
  double final_cylinder_length = 0.0;
  int levels = 0;
  std::vector<IterationRecord> log;
  // u at radius r on the end chart (ball); 1 beyond the truncation radius
  RadialFn u_at;
};

// Lebesgue norm (int |f|^p)^{1/p} of a potential over the line.
double potential_norm(const RadialLine& line, const Potential& f, double p, bool negative_part);

SobolevReport sobolev_estimate(const MetricSpec& g, const DomainModel& domain,
                               double truncation_radius = 0.0, int max_iterations = 4000);

SmallnessReport check_smallness(const RadialLine& line, const Potential& f, double c_S);

TruncatedSolution solve_truncated(const EllipticProblem& problem, int level, double R);

ConformalFactorSolution solve_conformal_factor(const EllipticProblem& problem);

struct EigenReport {
  double value = 0.0;
  int iterations = 0;
  std::vector<double> radii;
  std::vector<double> minimizer;
};

// Smallest value of int |grad z|^2 + kappa R z^2 over int z^2 = 1 for radial z supported in
// the annulus [r_a, r_b] (or ball of radius r_b when r_a = 0). test_class: zero or free.
EigenReport eigenvalue_lower_bound(const MetricSpec& g, double r_a, double r_b,
                                   const RadialFn& scalar_curvature, BoundaryKind test_class,
                                   int nodes_per_decade = 1000, int max_iterations = 20000);

}  // namespace masskit
