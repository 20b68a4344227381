#pragma once

#include "masskit/metric.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace masskit {

enum class GridTier { radial, full3d };

class Grid {
 public:
  // Log-spaced radii on [r_min, r_max]; nodes sit on the first axis.
  static Grid radial(int dim, double r_min, double r_max, int radial_nodes);
  // n = 3 only: log radii x pole-offset latitudes x uniform longitudes.
  static Grid full3d(double r_min, double r_max, int radial_nodes, int latitude_nodes,
                     int longitude_nodes);

  GridTier tier() const { return tier_; }
  int dimension() const { return dim_; }
  std::span<const double> radii() const { return radii_; }
  std::span<const double> latitudes() const { return lat_; }
  std::span<const double> longitudes() const { return lon_; }
  double log_spacing() const { return dlog_; }
  double latitude_spacing() const;
  double longitude_spacing() const;

  std::size_t node_count() const;
  std::size_t index(std::size_t ir, std::size_t ilat = 0, std::size_t ilon = 0) const;
  Vec node(std::size_t index) const;
  // Difference step attached to a node: h = min(0.01 r, 0.05).
  double step(std::size_t index) const;

 private:
  GridTier tier_ = GridTier::radial;
  int dim_ = 3;
  std::vector<double> radii_;
  std::vector<double> lat_;
  std::vector<double> lon_;
  double dlog_ = 0.0;
};

class TensorField {
 public:
  TensorField(const Grid& grid, int rank, bool symmetric = false);

  const Grid& grid() const { return *grid_; }
  int rank() const { return rank_; }
  bool symmetric() const { return symmetric_; }
  int components() const { return components_; }
  std::span<double> at(std::size_t node);
  std::span<const double> at(std::size_t node) const;
  std::span<const double> values() const { return values_; }

  double scalar(std::size_t node) const { return values_[node * components_]; }
  // Largest |T_ij - T_ji| over nodes; zero for symmetric rank-2 data.
  double symmetry_defect() const;

 private:
  const Grid* grid_;
  int rank_;
  bool symmetric_;
  int components_;
  std::vector<double> values_;
};

TensorField sample_scalar_curvature(const MetricSpec& g, const Grid& grid);
TensorField sample_metric(const MetricSpec& g, const Grid& grid);

// Mean of a scalar field over the latitude ring adjacent to a pole (FULL3D closure value).
double polar_value(const TensorField& field, std::size_t ir, bool north);

}  // namespace masskit
