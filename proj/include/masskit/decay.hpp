#pragma once

#include "masskit/metric.hpp"

#include <span>
#include <vector>

namespace masskit {

struct DecayFit {
  double exponent = 0.0;
  // best-fit C in |.| ~ C r^exponent
  double constant = 0.0;
  // max over the ladder of |.| r^{k - declared}
  double budget_constant = 0.0;
  bool fitted = false;
};

struct DecayAudit {
  double declared_order = 0.0;
  std::vector<double> radii;
  // max over sampled directions of |h|, |dh|, |ddh| (Frobenius)
  std::vector<double> h_norm, dh_norm, ddh_norm;
  DecayFit h, dh, ddh;
  bool violation = false;
};

// Fits log-log slopes of the three orders; flags when a measured exponent
// exceeds the declared budget order - k by more than 0.2.
DecayAudit decay_audit(const MetricSpec& g, std::span<const double> radii);

// Least-squares slope and intercept of log y against log x.
DecayFit fit_power_law(std::span<const double> x, std::span<const double> y);

}  // namespace masskit
