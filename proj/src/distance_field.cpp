#include "charflow/distance_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <tuple>
#include <vector>

namespace charflow {

namespace {

using Index = Eigen::Index;

constexpr Index kDi[4] = {-1, 1, 0, 0};
constexpr Index kDj[4] = {0, 0, -1, 1};

std::size_t count_components(const Raster<std::uint8_t>& mask) {
  const Index ny = mask.rows(), nx = mask.cols();
  Raster<std::uint8_t> seen = Raster<std::uint8_t>::Zero(ny, nx);
  std::size_t components = 0;
  std::vector<std::pair<Index, Index>> stack;
  for (Index i = 0; i < ny; ++i) {
    for (Index j = 0; j < nx; ++j) {
      if (!mask(i, j) || seen(i, j)) continue;
      ++components;
      stack.push_back({i, j});
      seen(i, j) = 1;
      while (!stack.empty()) {
        auto [a, b] = stack.back();
        stack.pop_back();
        for (int k = 0; k < 4; ++k) {
          const Index u = a + kDi[k], v = b + kDj[k];
          if (u < 0 || v < 0 || u >= ny || v >= nx) continue;
          if (mask(u, v) && !seen(u, v)) {
            seen(u, v) = 1;
            stack.push_back({u, v});
          }
        }
      }
    }
  }
  return components;
}

// Bilinear sample of a pixel-centred raster at x, clamped to the raster extent.
double bilinear(const Raster<double>& r, double h, const Point& x) {
  const double fx = std::clamp(x.x() / h, 0.0, static_cast<double>(r.cols() - 1));
  const double fy = std::clamp(x.y() / h, 0.0, static_cast<double>(r.rows() - 1));
  const Index j0 = std::min<Index>(static_cast<Index>(fx), r.cols() - 2 < 0 ? 0 : r.cols() - 2);
  const Index i0 = std::min<Index>(static_cast<Index>(fy), r.rows() - 2 < 0 ? 0 : r.rows() - 2);
  const Index j1 = std::min<Index>(j0 + 1, r.cols() - 1);
  const Index i1 = std::min<Index>(i0 + 1, r.rows() - 1);
  const double wx = fx - static_cast<double>(j0);
  const double wy = fy - static_cast<double>(i0);
  return (1 - wy) * ((1 - wx) * r(i0, j0) + wx * r(i0, j1)) + wy * ((1 - wx) * r(i1, j0) + wx * r(i1, j1));
}

}  // namespace

Raster<double> fast_marching_distance(const Raster<std::uint8_t>& inside_mask, double spacing) {
  const Index ny = inside_mask.rows(), nx = inside_mask.cols();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  Raster<double> dist = Raster<double>::Constant(ny, nx, kInf);
  Raster<std::uint8_t> frozen = Raster<std::uint8_t>::Zero(ny, nx);
  using Entry = std::tuple<double, Index, Index>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;

  for (Index i = 0; i < ny; ++i) {
    for (Index j = 0; j < nx; ++j) {
      if (!inside_mask(i, j)) {
        dist(i, j) = 0.0;
        frozen(i, j) = 1;
      }
    }
  }
  auto update = [&](Index i, Index j) {
    auto axis_min = [&](Index a1, Index b1, Index a2, Index b2) {
      double m = kInf;
      if (a1 >= 0 && b1 >= 0 && a1 < ny && b1 < nx && frozen(a1, b1)) m = std::min(m, dist(a1, b1));
      if (a2 >= 0 && b2 >= 0 && a2 < ny && b2 < nx && frozen(a2, b2)) m = std::min(m, dist(a2, b2));
      return m;
    };
    const double a = axis_min(i, j - 1, i, j + 1);
    const double b = axis_min(i - 1, j, i + 1, j);
    double candidate;
    if (std::isinf(a) && std::isinf(b)) return;
    if (std::isinf(a) || std::isinf(b) || std::abs(a - b) >= spacing) {
      candidate = std::min(a, b) + spacing;
    } else {
      candidate = 0.5 * (a + b + std::sqrt(2.0 * spacing * spacing - (a - b) * (a - b)));
    }
    if (candidate < dist(i, j)) {
      dist(i, j) = candidate;
      heap.push({candidate, i, j});
    }
  };
  for (Index i = 0; i < ny; ++i) {
    for (Index j = 0; j < nx; ++j) {
      if (frozen(i, j)) continue;
      for (int k = 0; k < 4; ++k) {
        const Index u = i + kDi[k], v = j + kDj[k];
        if (u >= 0 && v >= 0 && u < ny && v < nx && !inside_mask(u, v)) {
          update(i, j);
          break;
        }
      }
    }
  }
  while (!heap.empty()) {
    auto [d, i, j] = heap.top();
    heap.pop();
    if (frozen(i, j) || d > dist(i, j)) continue;
    frozen(i, j) = 1;
    for (int k = 0; k < 4; ++k) {
      const Index u = i + kDi[k], v = j + kDj[k];
      if (u >= 0 && v >= 0 && u < ny && v < nx && !frozen(u, v)) update(u, v);
    }
  }
  return dist;
}

DistanceField field_from_distance_grid(const Raster<std::uint8_t>& inside_mask, double spacing) {
  if (!(spacing > 0)) throw Error(Errc::InvalidArgument, "spacing must be positive");
  if ((inside_mask != 0).count() == 0) throw Error(Errc::EmptyMask, "mask has no inside pixels");
  if (count_components(inside_mask) != 1) {
    throw Error(Errc::DisconnectedMask, "mask must be one connected region");
  }
  const Index ny = inside_mask.rows(), nx = inside_mask.cols();
  DistanceField out;
  out.grid.origin = Point(-0.5 * spacing, -0.5 * spacing);
  out.grid.spacing = spacing;
  out.grid.nx = nx;
  out.grid.ny = ny;
  out.inside = (inside_mask != 0).cast<std::uint8_t>();

  Raster<double> dist = fast_marching_distance(out.inside, spacing);
  for (Index i = 0; i < ny; ++i) {
    for (Index j = 0; j < nx; ++j) {
      if (std::isinf(dist(i, j))) dist(i, j) = 0.0;  // unreachable: no ring in the raster
    }
  }
  out.max_distance = dist.maxCoeff();
  if (!(out.max_distance > 0)) throw Error(Errc::EmptyMask, "mask has no interior distance");
  out.T = dist / out.max_distance;
  out.sigma = (out.T >= 1.0 - 1e-9).cast<std::uint8_t>();

  // Central differences, one-sided toward the mask where a neighbour is missing
  // or where the pixel itself lies on the ring.
  out.grad_x = Raster<double>::Zero(ny, nx);
  out.grad_y = Raster<double>::Zero(ny, nx);
  auto usable = [&](Index i, Index j, Index u, Index v) {
    if (u < 0 || v < 0 || u >= ny || v >= nx) return false;
    return out.inside(i, j) || out.inside(u, v);
  };
  for (Index i = 0; i < ny; ++i) {
    for (Index j = 0; j < nx; ++j) {
      const bool left = usable(i, j, i, j - 1), right = usable(i, j, i, j + 1);
      const bool down = usable(i, j, i - 1, j), up = usable(i, j, i + 1, j);
      if (left && right) {
        out.grad_x(i, j) = (out.T(i, j + 1) - out.T(i, j - 1)) / (2 * spacing);
      } else if (right) {
        out.grad_x(i, j) = (out.T(i, j + 1) - out.T(i, j)) / spacing;
      } else if (left) {
        out.grad_x(i, j) = (out.T(i, j) - out.T(i, j - 1)) / spacing;
      }
      if (down && up) {
        out.grad_y(i, j) = (out.T(i + 1, j) - out.T(i - 1, j)) / (2 * spacing);
      } else if (up) {
        out.grad_y(i, j) = (out.T(i + 1, j) - out.T(i, j)) / spacing;
      } else if (down) {
        out.grad_y(i, j) = (out.T(i, j) - out.T(i - 1, j)) / spacing;
      }
    }
  }

  auto T = std::make_shared<Raster<double>>(out.T);
  auto gx = std::make_shared<Raster<double>>(out.grad_x);
  auto gy = std::make_shared<Raster<double>>(out.grad_y);
  const double h = spacing;
  out.field = std::make_shared<TimeField>(
      [T, h](const Point& x) { return bilinear(*T, h, x); },
      [gx, gy, h](const Point& x) -> Vec2 { return {bilinear(*gx, h, x), bilinear(*gy, h, x)}; },
      2.0, FieldSource::Grid);

  // Stop set summarized by the centroid of its pixels.
  Point centroid = Point::Zero();
  double n_sigma = 0;
  for (Index i = 0; i < ny; ++i) {
    for (Index j = 0; j < nx; ++j) {
      if (out.sigma(i, j)) {
        centroid += Point(j * h, i * h);
        n_sigma += 1;
      }
    }
  }
  centroid /= n_sigma;

  auto inside = std::make_shared<Raster<std::uint8_t>>(out.inside);
  auto contains = [inside, h](const Point& x) {
    const auto j = static_cast<Index>(std::llround(x.x() / h));
    const auto i = static_cast<Index>(std::llround(x.y() / h));
    return i >= 0 && j >= 0 && i < inside->rows() && j < inside->cols() && (*inside)(i, j) != 0;
  };
  const double xmax = (nx - 1) * h, ymax = (ny - 1) * h;
  auto clamp = [xmax, ymax](const Point& x) -> Point {
    return {std::clamp(x.x(), 0.0, xmax), std::clamp(x.y(), 0.0, ymax)};
  };
  auto project = [inside, h](const Point& x) -> BoundaryProjection {
    const Index ny = inside->rows(), nx = inside->cols();
    const auto cj = static_cast<Index>(std::llround(x.x() / h));
    const auto ci = static_cast<Index>(std::llround(x.y() / h));
    const Index max_r = std::max(ny, nx);
    double best = std::numeric_limits<double>::infinity();
    Index best_idx = -1;
    for (Index r = 1; r <= max_r; ++r) {
      for (Index i = ci - r; i <= ci + r; ++i) {
        for (Index j = cj - r; j <= cj + r; ++j) {
          if (i < 0 || j < 0 || i >= ny || j >= nx || (*inside)(i, j)) continue;
          const double d = (Point(j * h, i * h) - x).norm();
          const Index idx = i * nx + j;
          if (d < best || (d == best && idx < best_idx)) {
            best = d;
            best_idx = idx;
          }
        }
      }
      // Anything found within ring r beats all pixels beyond distance r*h.
      if (best_idx >= 0 && best <= static_cast<double>(r) * h) break;
    }
    if (best_idx < 0) throw Error(Errc::LevelNotFound, "no ring pixel in raster");
    return {static_cast<double>(best_idx), best};
  };
  BBox box{Point(-h, -h), Point(xmax + h, ymax + h)};
  out.domain = std::make_shared<Domain>("raster", StopSet::isolated_point(centroid), box, contains,
                                        clamp, project,
                                        static_cast<double>(out.inside.count()) * h * h);
  return out;
}

}  // namespace charflow
