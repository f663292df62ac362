#pragma once

#include "charflow/geometry.hpp"
#include "charflow/grid.hpp"
#include "charflow/timefield.hpp"

#include <cstdint>
#include <memory>

namespace charflow {

/// Time function realized on a pixel raster from a region mask.
///
/// Pixel (i, j) sits at (j h, i h). Pixels outside the mask are the boundary
/// ring with T = 0; T is the fast-marching distance to them normalized by its
/// maximum, and the stop set is the set of pixels attaining that maximum.
struct DistanceField {
  GridSpec grid;               ///< pixel-centred grid of the raster
  Raster<std::uint8_t> inside;  ///< 1 on mask pixels
  Raster<std::uint8_t> sigma;   ///< 1 on stop-set pixels
  Raster<double> T;
  Raster<double> grad_x, grad_y;
  double max_distance = 0.0;
  std::shared_ptr<const TimeField> field;
  std::shared_ptr<const Domain> domain;

  /// Boundary parameter of the nearest ring pixel is its linear index i * nx + j.
  Eigen::Index ring_index(double s) const { return static_cast<Eigen::Index>(std::llround(s)); }
};

/// First-order fast marching from every non-mask pixel (distance 0) into the mask.
Raster<double> fast_marching_distance(const Raster<std::uint8_t>& inside_mask, double spacing);

/// Throws EmptyMask or DisconnectedMask (4-connectivity).
DistanceField field_from_distance_grid(const Raster<std::uint8_t>& inside_mask, double spacing);

}  // namespace charflow
