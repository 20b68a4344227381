#pragma once

#include "masskit/adm.hpp"
#include "masskit/elliptic.hpp"

#include <optional>
#include <vector>

namespace masskit {

// Cutoff eta = 1 on [plateau_lo, plateau_hi], 0 outside (support_lo, support_hi).
// support_lo = 0 means eta is 1 down to the origin (ball domains).
struct BumpCutoff {
  double support_lo = 0.0;
  double plateau_lo = 0.0;
  double plateau_hi = 2.0;
  double support_hi = 4.0;

  double operator()(double r) const;
};

struct ScalarProbeSpec {
  BumpCutoff eta;
  // closed-form R(g); absent means radial differences
  RadialFn scalar_curvature;
  DomainModel domain;
  std::vector<double> mass_ladder{64.0, 128.0, 256.0, 512.0};
};

struct ScalarProbeResult {
  double A_integral = 0.0;
  double A_fit = 0.0;
  double min_u = 0.0;
  double min_factor = 0.0;   // min (u+1)/2
  double input_mass = 0.0;
  double output_mass = 0.0;
  double mass_shift = 0.0;   // measured m_bar - m
  double shift_relative_error = 0.0;  // against A
  double flux = 0.0;
  double weighted_flux = 0.0;
  std::optional<MetricSpec> output;
};

ScalarProbeResult rigidity_probe_scalar(const MetricSpec& g, const ScalarProbeSpec& spec);

struct RigidityProbeSpec {
  BumpCutoff eta{1.5, 2.0, 3.0, 4.0};
  // eta~ supported in S~, with a positive lower bound on supp eta
  BumpCutoff eta_tilde{1.25, 1.5, 4.0, 4.5};
  double epsilon = 0.03;
  std::vector<double> delta_ladder{1e-3, 1e-4, 1e-5};
  double r_out = 60.0;
  int nodes_per_decade = 1000;
  double ricci_floor = 1e-8;
  double min_scalar_floor = -1e-8;
};

struct RicciProbeRung {
  double delta = 0.0;
  double A_integral = 0.0;
  double A_fit = 0.0;
  double tau = 0.0;
  double min_scalar = 0.0;   // min sampled R of the final metric
  double mass = 0.0;         // m + 2A/(1+tau)
  bool tau_found = false;
};

struct RicciProbeResult {
  double max_ricci = 0.0;
  double eigenvalue = 0.0;   // lower bound of the form on S, free test class
  double smallness_lhs = 0.0;
  double smallness_threshold = 0.0;  // c_S / 4
  double sobolev_constant = 0.0;
  double scalar_min = 0.0;   // of g - eps eta Ric
  double scalar_max = 0.0;
  double eta_tilde_floor = 0.0;
  double input_mass = 0.0;
  std::vector<RicciProbeRung> rungs;
  bool negative = false;     // A < 0 on the smallest delta
};

// Perturbed metric g - eps eta Ric(g) on a radial end.
MetricSpec ricci_perturbation(const MetricSpec& g, const BumpCutoff& eta, double epsilon);

RicciProbeResult rigidity_probe_ricci(const MetricSpec& g, const RigidityProbeSpec& spec);

}  // namespace masskit
