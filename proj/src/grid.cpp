#include "masskit/grid.hpp"

#include "masskit/curvature.hpp"
#include "masskit/parallel.hpp"

#include <cmath>
#include <numbers>

namespace masskit {

Grid Grid::radial(int dim, double r_min, double r_max, int radial_nodes) {
  if (!(r_min > 0.0) || !(r_max > r_min)) throw ConfigError("grid radii must satisfy 0 < r_min < r_max");
  if (radial_nodes < 2) throw ConfigError("grid needs at least two radial nodes");
  Grid g;
  g.tier_ = GridTier::radial;
  g.dim_ = dim;
  g.dlog_ = std::log(r_max / r_min) / (radial_nodes - 1);
  for (int i = 0; i < radial_nodes; ++i) g.radii_.push_back(r_min * std::exp(i * g.dlog_));
  g.radii_.back() = r_max;
  return g;
}

Grid Grid::full3d(double r_min, double r_max, int radial_nodes, int latitude_nodes,
                  int longitude_nodes) {
  if (latitude_nodes < 2 || longitude_nodes < 4) throw ConfigError("angular grid too coarse");
  Grid g = radial(3, r_min, r_max, radial_nodes);
  g.tier_ = GridTier::full3d;
  for (int j = 0; j < latitude_nodes; ++j) {
    g.lat_.push_back((j + 0.5) * std::numbers::pi / latitude_nodes);
  }
  for (int k = 0; k < longitude_nodes; ++k) {
    g.lon_.push_back(k * 2.0 * std::numbers::pi / longitude_nodes);
  }
  return g;
}

double Grid::latitude_spacing() const { return lat_.empty() ? 0.0 : std::numbers::pi / lat_.size(); }

double Grid::longitude_spacing() const {
  return lon_.empty() ? 0.0 : 2.0 * std::numbers::pi / lon_.size();
}

std::size_t Grid::node_count() const {
  if (tier_ == GridTier::radial) return radii_.size();
  return radii_.size() * lat_.size() * lon_.size();
}

std::size_t Grid::index(std::size_t ir, std::size_t ilat, std::size_t ilon) const {
  if (tier_ == GridTier::radial) return ir;
  return (ir * lat_.size() + ilat) * lon_.size() + ilon;
}

Vec Grid::node(std::size_t index) const {
  if (tier_ == GridTier::radial) return point_on_axis(dim_, radii_[index]);
  const std::size_t ilon = index % lon_.size();
  const std::size_t ilat = (index / lon_.size()) % lat_.size();
  const std::size_t ir = index / (lon_.size() * lat_.size());
  const double r = radii_[ir], th = lat_[ilat], ph = lon_[ilon];
  Vec x(3);
  x << r * std::sin(th) * std::cos(ph), r * std::sin(th) * std::sin(ph), r * std::cos(th);
  return x;
}

double Grid::step(std::size_t index) const {
  const std::size_t ir = tier_ == GridTier::radial ? index : index / (lon_.size() * lat_.size());
  return default_step(radii_[ir]);
}

TensorField::TensorField(const Grid& grid, int rank, bool symmetric)
    : grid_(&grid), rank_(rank), symmetric_(symmetric) {
  if (rank < 0 || rank > 2) throw ConfigError("tensor rank must be 0, 1 or 2");
  const int n = grid.dimension();
  components_ = rank == 0 ? 1 : (rank == 1 ? n : n * n);
  values_.assign(grid.node_count() * components_, 0.0);
}

std::span<double> TensorField::at(std::size_t node) {
  return std::span<double>(values_).subspan(node * components_, components_);
}

std::span<const double> TensorField::at(std::size_t node) const {
  return std::span<const double>(values_).subspan(node * components_, components_);
}

double TensorField::symmetry_defect() const {
  if (rank_ != 2) return 0.0;
  const int n = grid_->dimension();
  double worst = 0.0;
  for (std::size_t k = 0; k < grid_->node_count(); ++k) {
    auto v = at(k);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) worst = std::max(worst, std::abs(v[i * n + j] - v[j * n + i]));
  }
  return worst;
}

TensorField sample_scalar_curvature(const MetricSpec& g, const Grid& grid) {
  TensorField out(grid, 0);
  parallel_for(grid.node_count(), [&](std::size_t k) {
    out.at(k)[0] = scalar_curvature_bartnik(g, grid.node(k), grid.step(k));
  });
  return out;
}

TensorField sample_metric(const MetricSpec& g, const Grid& grid) {
  TensorField out(grid, 2, true);
  const int n = grid.dimension();
  parallel_for(grid.node_count(), [&](std::size_t k) {
    const Mat m = g(grid.node(k));
    auto v = out.at(k);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) v[i * n + j] = m(i, j);
  });
  return out;
}

double polar_value(const TensorField& field, std::size_t ir, bool north) {
  const Grid& g = field.grid();
  if (g.tier() != GridTier::full3d) throw ConfigError("polar closure needs a FULL3D grid");
  const std::size_t ilat = north ? 0 : g.latitudes().size() - 1;
  double s = 0.0;
  for (std::size_t k = 0; k < g.longitudes().size(); ++k) s += field.scalar(g.index(ir, ilat, k));
  return s / static_cast<double>(g.longitudes().size());
}

}  // namespace masskit
