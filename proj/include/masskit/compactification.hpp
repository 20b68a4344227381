#pragma once

#include "masskit/adm.hpp"
#include "masskit/cutoff.hpp"
#include "masskit/metric.hpp"
#include "masskit/quadrature.hpp"

#include <optional>
#include <string>
#include <vector>

namespace masskit {

// Concave C^2 cap: identity for t <= a, constant 1 - eps/2 for t >= b, with
// a = 1 - 3 eps/4, b = 1 - eps/4 and zeta' = 1 - smoothstep3 in between.
struct LohkampCutoff {
  double epsilon = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double cap = 0.0;

  static LohkampCutoff from_epsilon(double epsilon);
  Jet operator()(double t) const;
};

// Harmonic factor near infinity: g_bar = u^{4/(n-2)} delta on {r >= s1}.
struct LohkampInput {
  MetricSpec metric;
  ScalarFn u;
  // radial form of u when available; enables the closed-form cross-check
  RadialFn u_radial;
  double mass = 0.0;
  double s1 = 8.0;
  // sup over the sphere {r = s1} uses this many polar nodes
  int sphere_order = 8;
  double harmonic_tolerance = 1e-8;
};

// Reads the factor from a conformally flat metric with a closed-form factor.
LohkampInput lohkamp_input(const MetricSpec& g_bar, double s1 = 8.0);

struct LohkampCutoffResult {
  double sup_on_sphere = 0.0;
  double epsilon = 0.0;
  LohkampCutoff zeta;
  // v = zeta(u) outside s1, u inside
  ScalarFn v;
};

LohkampCutoffResult lohkamp_cutoff(const LohkampInput& input);

struct SuperharmonicAudit {
  double max_laplacian = 0.0;          // over all samples in {r >= s1}
  double min_transition_laplacian = 0.0;
  double max_identity_laplacian = 0.0;  // |Delta v| where v = u
  double max_plateau_laplacian = 0.0;   // |Delta v| where v is constant
  double closed_form_gap = 0.0;         // chain-rule vs radial closed form
  double max_harmonic_residual = 0.0;   // |Delta u|
  double transition_inner = 0.0;        // radius where u = a
  double transition_outer = 0.0;        // radius where u = b
  std::vector<double> radii;
  std::vector<double> laplacian;        // max over directions per radius
  bool pass = false;
};

// Radii are log-spaced on [s1, outer]; outer = 0 picks twice the flat radius.
SuperharmonicAudit check_superharmonic(const LohkampInput& input, const LohkampCutoffResult& cut,
                                       double outer = 0.0, int radial_samples = 240);

struct LohkampMetricResult {
  MetricSpec metric;
  double r_flat = 0.0;
  double flat_scale = 0.0;       // (1 - eps/2)^{4/(n-2)}
  double min_scalar = 0.0;
  double max_scalar = 0.0;
  double max_scalar_radius = 0.0;
  double bartnik_gap = 0.0;      // closed form vs the difference formula at the witness
  bool constant_outside = false;
  // R(g~) on the chart from the conformal formula
  ScalarFn scalar_curvature;
};

LohkampMetricResult lohkamp_metric(const LohkampInput& input, const LohkampCutoffResult& cut,
                                   const SuperharmonicAudit& audit);

struct TorusSample {
  Vec x;
  Mat g;
  double scalar = 0.0;
};

struct TorusChart {
  int dimension = 0;
  double side = 0.0;
  int grid = 0;                  // samples per axis
  double collar = 0.0;
  double max_face_gap = 0.0;     // values and first two normal derivatives
  double min_scalar = 0.0;
  double max_scalar = 0.0;
  std::size_t sampled = 0;
  std::size_t skipped_interior = 0;  // samples inside the chart's inner boundary
  std::vector<TorusSample> samples;
};

// Cube [-side/2, side/2]^n; side = 0 picks 16 r_flat.
TorusChart torus_glue(const LohkampMetricResult& lm, double side = 0.0, int grid = 9,
                      int face_samples = 7);

// ---- ALE quotients ----

struct GroupAction {
  int dimension = 0;
  std::vector<Mat> generators;
  std::vector<Mat> elements;  // closure, identity first

  int order() const { return static_cast<int>(elements.size()); }
};

// Breadth-first closure; throws ConfigError past max_order or for non-orthogonal
// generators, PreconditionError when a non-identity element fixes a direction.
GroupAction make_group(int n, const std::vector<Mat>& generators, int max_order = 512);

GroupAction trivial_group(int n);
GroupAction antipodal_group(int n);
// diagonal Z_k on C^2 = R^4
GroupAction cyclic_hopf_group(int k);

// Fundamental domain of Gamma on the sphere for the supported groups.
SphereRule fundamental_domain_rule(const GroupAction& group, int order);

struct AleLiftReport {
  int group_order = 1;
  double invariance_gap = 0.0;
  MassReport cover;
  MassReport quotient;
  double ratio = 0.0;
  double ratio_error = 0.0;  // |ratio - |Gamma|| / |Gamma|
  std::optional<MetricSpec> cover_metric;
};

AleLiftReport ale_lift(const MetricSpec& quotient, const GroupAction& group,
                       std::span<const double> ladder, int order = 24);

struct AffineMap {
  Mat T;
  Vec v;

  Vec operator()(const Vec& x) const { return T * x + v; }
};

struct FixedPointResult {
  Vec point;
  double max_displacement = 0.0;
  bool closed = false;
};

// Average of g(0); throws PreconditionError when some element moves it.
FixedPointResult fixed_point_of_finite_group(const std::vector<AffineMap>& group,
                                             double tolerance = 1e-12);

// x -> T(x - t) + t for every element of a linear group.
std::vector<AffineMap> conjugate_by_translation(const GroupAction& group, const Vec& t);

}  // namespace masskit
