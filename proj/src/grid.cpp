#include "charflow/grid.hpp"

#include <algorithm>
#include <cmath>

namespace charflow {

GridSpec GridSpec::cover(const BBox& box, Eigen::Index resolution) {
  if (resolution < 1) throw Error(Errc::InvalidArgument, "grid resolution must be positive");
  GridSpec g;
  g.origin = box.lo;
  g.spacing = std::max(box.width(), box.height()) / static_cast<double>(resolution);
  g.nx = static_cast<Eigen::Index>(std::ceil(box.width() / g.spacing - 1e-9));
  g.ny = static_cast<Eigen::Index>(std::ceil(box.height() / g.spacing - 1e-9));
  return g;
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (Eigen::Index i = 0; i < grid.ny; ++i) {
    for (Eigen::Index j = 0; j < grid.nx; ++j) {
      if (active(i, j)) m = std::max(m, std::abs(values(i, j)));
    }
  }
  return m;
}

double GridFunction::l1_norm() const {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < grid.ny; ++i) {
    for (Eigen::Index j = 0; j < grid.nx; ++j) {
      if (active(i, j)) sum += std::abs(values(i, j));
    }
  }
  return sum * grid.cell_area();
}

double l1_distance(const GridFunction& a, const GridFunction& b) {
  if (!(a.grid == b.grid)) throw Error(Errc::InvalidArgument, "grid mismatch");
  double sum = 0.0;
  for (Eigen::Index i = 0; i < a.grid.ny; ++i) {
    for (Eigen::Index j = 0; j < a.grid.nx; ++j) {
      if (a.active(i, j) && b.active(i, j)) sum += std::abs(a.values(i, j) - b.values(i, j));
    }
  }
  return sum * a.grid.cell_area();
}

double max_distance(const GridFunction& a, const GridFunction& b) {
  if (!(a.grid == b.grid)) throw Error(Errc::InvalidArgument, "grid mismatch");
  double m = 0.0;
  for (Eigen::Index i = 0; i < a.grid.ny; ++i) {
    for (Eigen::Index j = 0; j < a.grid.nx; ++j) {
      if (a.active(i, j) && b.active(i, j)) m = std::max(m, std::abs(a.values(i, j) - b.values(i, j)));
    }
  }
  return m;
}

}  // namespace charflow
