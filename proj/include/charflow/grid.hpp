#pragma once

#include "charflow/geometry.hpp"
#include "charflow/types.hpp"

#include <cstdint>

namespace charflow {

enum class CellKind : std::uint8_t { Outside = 0, Inside = 1, SigmaTube = 2 };

/// Uniform cell-centred raster: cell (i, j) has centre origin + h (j + 1/2, i + 1/2).
struct GridSpec {
  Point origin = Point::Zero();
  double spacing = 1.0;
  Eigen::Index nx = 0;
  Eigen::Index ny = 0;

  /// `resolution` cells along the longer side of the box.
  static GridSpec cover(const BBox& box, Eigen::Index resolution);

  Point center(Eigen::Index i, Eigen::Index j) const {
    return origin + spacing * Point(static_cast<double>(j) + 0.5, static_cast<double>(i) + 0.5);
  }
  Eigen::Index size() const { return nx * ny; }
  double cell_area() const { return spacing * spacing; }
  bool operator==(const GridSpec& o) const {
    return origin == o.origin && spacing == o.spacing && nx == o.nx && ny == o.ny;
  }
};

struct GridFunction {
  GridSpec grid;
  Raster<double> values;
  Raster<CellKind> mask;

  GridFunction() = default;
  explicit GridFunction(const GridSpec& g, double fill = 0.0)
      : grid(g),
        values(Raster<double>::Constant(g.ny, g.nx, fill)),
        mask(Raster<CellKind>::Constant(g.ny, g.nx, CellKind::Outside)) {}

  bool active(Eigen::Index i, Eigen::Index j) const { return mask(i, j) != CellKind::Outside; }
  double max_abs() const;
  /// Midpoint-rule integral of |values| over active cells.
  double l1_norm() const;
};

/// Midpoint-rule L1 distance over cells active in both functions.
double l1_distance(const GridFunction& a, const GridFunction& b);
/// Max |a - b| over cells active in both.
double max_distance(const GridFunction& a, const GridFunction& b);

}  // namespace charflow
