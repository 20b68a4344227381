#pragma once

#include "masskit/metric.hpp"

#include <array>
#include <vector>

namespace masskit {

// First derivatives d_k g_ij by central differences, index order [k](i, j).
std::vector<Mat> metric_gradient(const MetricSpec& g, const Vec& x, double h);

// Throws DegeneracyError unless g is symmetric positive definite.
Mat checked_inverse(const Mat& g, double* det = nullptr);

struct ChristoffelData {
  int dim = 0;
  // Gamma_ijk = 1/2 (g_jk,i + g_ik,j - g_ij,k), flattened as (i*n + j)*n + k
  std::vector<double> first_kind;
  // Gamma_k = g^{ij} Gamma_ijk
  Vec contracted;

  double operator()(int i, int j, int k) const { return first_kind[(i * dim + j) * dim + k]; }
};

ChristoffelData christoffel_first_kind(const MetricSpec& g, const Vec& x, double h);
ChristoffelData christoffel_first_kind(const MetricSpec& g, const Vec& x);

double scalar_curvature_bartnik(const MetricSpec& g, const Vec& x, double h);
double scalar_curvature_bartnik(const MetricSpec& g, const Vec& x);

// Scalar curvature of phi^{4/(n-2)} g from the base data.
double scalar_curvature_conformal(int n, double base_R, double phi, double laplacian_phi);

Mat ricci_tensor_fd(const MetricSpec& g, const Vec& x, double h);
Mat ricci_tensor_fd(const MetricSpec& g, const Vec& x);

// Curvature of a = radial, b = tangential warped metrics from one-dimensional differences.
struct RadialCurvature {
  double scalar = 0.0;
  // orthonormal-frame components
  double ricci_radial = 0.0;
  double ricci_tangential = 0.0;
};

RadialCurvature radial_curvature(const RadialProfile& profile, int n, double r, double h);
RadialCurvature radial_curvature(const RadialProfile& profile, int n, double r);

// Five-point fourth-order differences with h = 0.02 r; for nested evaluations where
// second-order truncation would swamp the quantity of interest.
RadialCurvature radial_curvature_accurate(const RadialProfile& profile, int n, double r);

// Delta_g f for radial f on a radial metric.
double radial_laplacian(const RadialProfile& profile, int n, const RadialFn& f, double r, double h);

// Flat Laplacian of a radial function.
double flat_radial_laplacian(int n, const RadialFn& f, double r, double h);

}  // namespace masskit
