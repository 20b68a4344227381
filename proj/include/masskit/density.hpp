#pragma once

#include "masskit/adm.hpp"
#include "masskit/elliptic.hpp"
#include "masskit/metric.hpp"

#include <optional>
#include <string>
#include <vector>

namespace masskit {

// g = (1 + m/(2 r^{n-2}))^{4/(n-2)} delta + g~ on a radial metric.
struct SchwarzschildSplit {
  MetricSpec input;
  double mass = 0.0;
  RadialProfile base;
  RadialProfile remainder;
  SymmetricField remainder_field;
};

SchwarzschildSplit split_schwarzschild(const MetricSpec& g, double m);

// Schwarzschild part plus (1 - zeta(r/s)) g~. Returns the input metric itself on
// r <= 2s and the Schwarzschild part itself on r >= 3s.
MetricSpec build_interpolated_metric(const SchwarzschildSplit& split, double s);

// Fourth-order radial differences.
double radial_scalar_curvature(const MetricSpec& g, double r);

struct ScalarBoundsAudit {
  double s = 0.0;
  double min_inner = 0.0;            // min R over {r <= 2s}
  double max_abs_transition = 0.0;   // max |R| over {s <= r <= 4s}
  double scaled_transition = 0.0;    // the same times s^n
  double sup_outer = 0.0;            // max |R| over {r >= 3s}
  double transition_norm = 0.0;      // (int_{s<=r<=4s} |R|^{2n/(n+2)})^{(n+2)/(2n)}
};

ScalarBoundsAudit scalar_bounds_audit(const MetricSpec& g_hat, double s, int samples = 400);

struct ScalarBoundsTrend {
  std::vector<ScalarBoundsAudit> audits;
  double transition_exponent = 0.0;  // slope of log max|R| against log s
  double norm_exponent = 0.0;        // slope of log transition_norm against log s
};

ScalarBoundsTrend scalar_bounds_trend(const SchwarzschildSplit& split,
                                      const std::vector<double>& s_ladder);

struct DeltaChoice {
  double delta = 0.0;
  double delta0 = 0.0;
  double volume = 0.0;      // volume of {s <= r <= 4s}
  double lhs = 0.0;         // (int |(eta R - delta eta)_-|^{n/2})^{2/n}
  double threshold = 0.0;   // c_S / 2
  double lp_margin = 0.0;   // threshold - lhs
  double ceiling_margin = 0.0;  // 1/s - delta (1 + volume)
  bool immediate = false;
  int bisection_steps = 0;
};

// Largest admissible delta not above delta0 = s^{-1}/(1 + volume).
DeltaChoice choose_delta(const MetricSpec& g_hat, double c_S, double s, const RadialLine& line);

double annulus_volume(const MetricSpec& g, double r_a, double r_b);

struct DensityOptions {
  std::vector<double> s_ladder{8.0, 16.0, 32.0};
  // stop at the first rung with |m_bar - m| <= target; 0 runs every rung
  double epsilon_target = 0.0;
  // radii for the input mass; empty means {64, 128, 256, 512}
  std::vector<double> input_mass_ladder;
  // output masses are compared on s times these factors
  std::vector<double> mass_ladder_factors{16.0, 32.0, 64.0, 128.0};
  int nodes_per_decade = 1000;
  double cylinder_l0 = 0.0;
  // 0 estimates c_S on each rung
  double sobolev_constant = 0.0;
  double min_scalar_floor = -1e-8;
  bool verify_adm = true;
};

struct DensityPipelineState {
  double s = 0.0;
  // g~ vanishes identically: no solve, A_s = 0 and g_bar = g
  bool zero_work = false;
  double sobolev_constant = 0.0;
  DeltaChoice delta;
  ScalarBoundsAudit scalar;
  double A_integral = 0.0;
  double A_fit = 0.0;
  double tau = 0.0;
  double mass_shift = 0.0;      // 2 A_s / (1 + tau)
  double m_bar = 0.0;
  double identity_residual = 0.0;  // (m_bar - m) - mass_shift
  double min_scalar = 0.0;      // min sampled R of the output metric
  double min_u_tau = 0.0;
  double v_sup = 0.0;           // max |u_s - 1| on the end
  double end_norm = 0.0;        // sup |g_bar - g|_g on the end
  double bartnik_gap = 0.0;     // closed-form R vs difference formula at audit points
  double bartnik_step = 0.0;
  double adm_input = 0.0;
  double adm_output = 0.0;
  double adm_shift = 0.0;
  double adm_relative_error = 0.0;
  std::vector<IterationRecord> log;
  std::optional<MetricSpec> output;
};

struct DensityRun {
  double input_mass = 0.0;
  double input_min_scalar = 0.0;
  std::vector<DensityPipelineState> rungs;
  bool target_met = false;
};

DensityRun density_deform(const MetricSpec& g, const DensityOptions& options = {});

}  // namespace masskit
