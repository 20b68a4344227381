#pragma once

#include "masskit/metric.hpp"

#include <array>
#include <span>
#include <vector>

namespace masskit {

enum class BoundaryKind { free, zero, robin };

// Coordinate used along the line. end: r = exp(x); ball: r = sinh(x); cylinder: t = x <= 0.
enum class LineRegion { cylinder, end, ball };

struct LineSpec {
  enum class Shape { annulus, ball };
  Shape shape = Shape::annulus;
  double r_inner = 1.0;
  double r_outer = 10.0;
  // toy arbitrary end: cylinder of this length glued at r_inner (annulus only)
  double cylinder_length = 0.0;
  // uniform spacing in x is ln(10) / nodes_per_decade; the last node may overshoot r_outer
  int nodes_per_decade = 1000;
  // shrink the spacing so the last node sits on r_outer; lines built this way do not
  // share nodes across different r_outer
  bool exact_outer = false;
  BoundaryKind inner = BoundaryKind::free;
  BoundaryKind outer = BoundaryKind::zero;
};

struct LinePosition {
  LineRegion region = LineRegion::end;
  double r = 0.0;  // radius; r_inner on the cylinder
  double t = 0.0;  // cylinder coordinate, <= 0
};

// P1 finite elements for div(P u') on a radial line of a warped product metric.
// Weights per element use 4-point Gauss quadrature.
class RadialLine {
 public:
  static constexpr int kGauss = 4;

  static RadialLine build(const MetricSpec& g, const LineSpec& spec);

  int dimension() const { return dim_; }
  const LineSpec& spec() const { return spec_; }
  std::size_t size() const { return x_.size(); }
  std::size_t elements() const { return x_.size() - 1; }
  double spacing() const { return dx_; }

  double coordinate(std::size_t k) const { return x_[k]; }
  LinePosition node(std::size_t k) const;
  LinePosition gauss_point(std::size_t e, int q) const;
  double gauss_fraction(int q) const { return xi_[q]; }
  // integral weight of the volume form at a Gauss point
  double volume_weight(std::size_t e, int q) const { return wq_[e * kGauss + q]; }
  // int_e P dx / dx^2: coupling of neighbouring nodes in the stiffness form
  double conductance(std::size_t e) const { return cond_[e]; }
  // P at a node (flux density through the sphere at that node, per unit x-derivative)
  double flux_weight(std::size_t k) const { return pnode_[k]; }
  std::span<const double> lumped_volume() const { return lumped_; }
  double robin_coefficient() const { return robin_; }
  // index of the first node with region end/ball
  std::size_t first_end_node() const { return first_end_; }

  double interpolate(std::span<const double> values, std::size_t e, int q) const {
    return (1.0 - xi_[q]) * values[e] + xi_[q] * values[e + 1];
  }
  // sum over elements and Gauss points of F(position, interpolated value) * weight
  template <class F>
  double integrate(std::span<const double> values, F&& fn) const {
    double s = 0.0;
    for (std::size_t e = 0; e < elements(); ++e)
      for (int q = 0; q < kGauss; ++q)
        s += volume_weight(e, q) * fn(gauss_point(e, q), interpolate(values, e, q));
    return s;
  }

  double position_to_x(const LinePosition& p) const;

 private:
  int dim_ = 3;
  LineSpec spec_;
  double dx_ = 0.0;
  double x_origin_end_ = 0.0;
  std::vector<double> x_;
  std::vector<LineRegion> node_region_;
  std::vector<LineRegion> elem_region_;
  std::vector<double> wq_;
  std::vector<double> cond_;
  std::vector<double> pnode_;
  std::vector<double> lumped_;
  std::array<double, kGauss> xi_{};
  double robin_ = 0.0;
  std::size_t first_end_ = 0;
  double r_inner_ = 1.0;
  double cyl_scale_ = 1.0;
};

// Symmetric tridiagonal matrix: diag[k], off[k] couples k and k+1.
struct Tridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  std::vector<double> apply(std::span<const double> v) const;
};

// Componentwise backward error max_k |b - Ax|_k / (|A||x| + |b|)_k.
double backward_error(const Tridiagonal& a, std::span<const double> x, std::span<const double> rhs);

// LDL^T solve; throws SolverError on a non-positive pivot or when the
// backward error exceeds tolerance after one refinement step.
std::vector<double> solve_tridiagonal(const Tridiagonal& a, std::span<const double> rhs,
                                      double tolerance = 1e-10);

// Stiffness form plus a zero-order term c(x) u, with boundary kinds applied.
// Rows of zero-boundary nodes become identity rows.
Tridiagonal assemble_operator(const RadialLine& line, std::span<const double> reaction_at_gauss,
                              BoundaryKind inner, BoundaryKind outer);

// Consistent mass form of a weight given at Gauss points.
Tridiagonal assemble_mass(const RadialLine& line, std::span<const double> weight_at_gauss);

}  // namespace masskit
