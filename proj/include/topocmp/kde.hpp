#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "topocmp/point_cloud.hpp"

namespace topocmp {

struct KdeConfig {
  double bandwidth = 0.1;
  std::size_t dim = 2;

  void validate() const;
};

enum class FiltrationDirection { SuperLevel, SubLevel };

// Axis-aligned box [lower, upper] in R^D.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t dim() const noexcept { return lower.size(); }
};

// Values of a scalar field on a regular lattice. Row-major: the last axis
// varies fastest, so in 2-D value(i, j) = values[i * shape[1] + j] and node
// (i, j) sits at (origin[0] + i * spacing[0], origin[1] + j * spacing[1]).
struct ScalarGrid {
  std::vector<double> origin;
  std::vector<double> spacing;
  std::vector<std::size_t> shape;
  std::vector<double> values;
  FiltrationDirection direction = FiltrationDirection::SuperLevel;

  std::size_t dim() const noexcept { return shape.size(); }
  std::size_t node_count() const noexcept;
  std::vector<double> node_position(std::size_t flat_index) const;

  // Throws ValidationError if the layout is inconsistent.
  void validate() const;

  friend bool operator==(const ScalarGrid&, const ScalarGrid&) = default;
};

// Gaussian kernel density estimate at p:
//   f(p) = 1 / (n (sqrt(2 pi) eta)^D) * sum_i exp(-|p - z_i|^2 / (2 eta^2)).
double kde_eval(const PointCloud& cloud, const KdeConfig& cfg, std::span<const double> p);

// Bounding box of the cloud widened by `pad_bandwidths * bandwidth` per side.
Box default_bounds(const PointCloud& cloud, const KdeConfig& cfg,
                   double pad_bandwidths = 3.0);

inline constexpr std::size_t kDefaultGridResolution = 128;

// kde_eval at every node of a lattice spanning `bounds` with resolution[d]
// nodes along axis d (both box faces are nodes). Direction is SuperLevel.
ScalarGrid kde_grid(const PointCloud& cloud, const KdeConfig& cfg, const Box& bounds,
                    std::span<const std::size_t> resolution);
// Default box and kDefaultGridResolution nodes per axis.
ScalarGrid kde_grid(const PointCloud& cloud, const KdeConfig& cfg);

// Text layout:
//   dim,<D>
//   origin,<x0>,...
//   spacing,<h0>,...
//   shape,<m0>,...
//   direction,superlevel|sublevel
//   values
//   <one value per line, row-major>
void write_grid(std::ostream& out, const ScalarGrid& grid);
ScalarGrid read_grid(std::istream& in);

}  // namespace topocmp
