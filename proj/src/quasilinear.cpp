#include "charflow/quasilinear.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace charflow {

using Index = Eigen::Index;

SelfMapBounds self_map_bounds(const FunctionalCoefficients& fc, const LinearProblem& base, double M4,
                              double M5, double dn_l1) {
  const double beta = fc.beta, m0 = base.m0;
  const double area = base.domain->area();
  const double sup = M4 + fc.M2 / (beta * m0);
  SelfMapBounds b;
  b.M4 = M4;
  b.M5 = M5;
  b.M_star = sup * area;
  b.M_starstar = 2.0 * sup * base.domain->stopset().length() + M5 / (beta * m0) +
                 (fc.M2 / beta + fc.M3 / (beta * beta * m0)) * area +
                 fc.M2 / (beta * beta * beta * m0) * (fc.M1 + dn_l1);
  return b;
}

GridFunction apply_U(const FunctionalCoefficients& fc, const LinearProblem& base, const GridFunction& v) {
  LinearProblem p = base;
  p.c = fc.c_of(v);
  p.f = fc.f_of(v);
  p.opts.beta_m0 = fc.beta * p.m0;
  // Causality on a stride of the iterate grid.
  const Index stride = std::max<Index>(1, std::max(v.grid.nx, v.grid.ny) / 64);
  for (Index i = 0; i < v.grid.ny; i += stride) {
    for (Index j = 0; j < v.grid.nx; j += stride) {
      const Point x = v.grid.center(i, j);
      if (!p.domain->contains(x) || p.tf->in_sigma_tube(x)) continue;
      double cn;
      try {
        cn = p.c(x).dot(p.tf->normal(x));
      } catch (const Error& e) {
        if (e.code() == Errc::DegenerateField) continue;
        throw;
      }
      if (cn < fc.beta - 1e-9) throw Error(Errc::NotCausal, "c[v] violates the causality constant");
    }
  }
  return solve_on_grid(p, v.grid);
}

std::pair<GridFunction, FixedPointReport> solve_quasilinear(const FunctionalCoefficients& fc,
                                                            const LinearProblem& base,
                                                            const GridFunction& seed,
                                                            const FixedPointOptions& opts,
                                                            const std::optional<SelfMapBounds>& bounds) {
  if (!(opts.tol > 0)) throw Error(Errc::InvalidArgument, "tolerance must be positive");
  if (opts.max_iter < 1) throw Error(Errc::InvalidArgument, "max_iter must be at least 1");
  if (!(opts.omega > 0 && opts.omega <= 1)) throw Error(Errc::InvalidArgument, "omega must lie in (0, 1]");
  FixedPointReport report;
  GridFunction u = seed;
  bool inside_X = true;
  for (std::size_t k = 0; k < opts.max_iter; ++k) {
    GridFunction next = apply_U(fc, base, u);
    if (opts.omega < 1.0) {
      for (Index i = 0; i < next.grid.ny; ++i) {
        for (Index j = 0; j < next.grid.nx; ++j) {
          if (next.active(i, j) && u.active(i, j)) {
            next.values(i, j) = (1.0 - opts.omega) * u.values(i, j) + opts.omega * next.values(i, j);
          }
        }
      }
    }
    const double residual = l1_distance(next, u);
    u = std::move(next);
    report.l1_residuals.push_back(residual);
    report.l1_norms.push_back(u.l1_norm());
    report.tvs.push_back(discrete_tv(u));
    report.n_iters = k + 1;
    if (bounds) {
      inside_X = inside_X && report.l1_norms.back() <= bounds->M_star &&
                 report.tvs.back() <= bounds->M_starstar * 1.10;
    }
    if (residual <= opts.tol) {
      report.converged = true;
      break;
    }
  }
  report.final_l1_norm = report.l1_norms.back();
  report.final_tv = report.tvs.back();
  if (bounds) report.in_X = inside_X;
  return {std::move(u), std::move(report)};
}

double g_tilde(double t) { return std::clamp(t, -1.0, 1.0); }

namespace {

double signed_integral(const GridFunction& g) {
  double sum = 0.0;
  for (Index i = 0; i < g.grid.ny; ++i) {
    for (Index j = 0; j < g.grid.nx; ++j) {
      if (g.active(i, j)) sum += g.values(i, j);
    }
  }
  return sum * g.grid.cell_area();
}

double inner(const GridFunction& a, const GridFunction& b) {
  double sum = 0.0;
  for (Index i = 0; i < a.grid.ny; ++i) {
    for (Index j = 0; j < a.grid.nx; ++j) {
      if (a.active(i, j) && b.active(i, j)) sum += a.values(i, j) * b.values(i, j);
    }
  }
  return sum;
}

}  // namespace

FunctionalCoefficients nonunique_coefficients(const LinearProblem& base, double a_l1) {
  FunctionalCoefficients fc;
  const TransportField c = base.c;
  fc.c_of = [c](const GridFunction&) { return c; };
  // The iterates are signed; the functional is the integral of v, which is
  // the L1 norm for non-negative v.
  fc.f_of = [a_l1](const GridFunction& v) { return Rhs::constant(g_tilde(signed_integral(v) / a_l1)); };
  fc.beta = base.c.beta;
  fc.M2 = 1.0;
  fc.M3 = 0.0;
  return fc;
}

NonuniqueResult nonuniqueness_demo(const LinearProblem& base, const GridSpec& grid,
                                   const std::vector<double>& seeds, const FixedPointOptions& opts) {
  LinearProblem unit = base;
  unit.u0 = BoundaryData::constant(0.0);
  unit.f = Rhs::constant(1.0);
  const GridFunction a = solve_on_grid(unit, grid);
  NonuniqueResult result;
  result.a_l1 = a.l1_norm();
  const double a_l1 = result.a_l1;

  FunctionalCoefficients fc = nonunique_coefficients(base, a_l1);
  const std::optional<AuxIntegrals> aux = sample_aux(unit, grid);
  fc.M1 = aux ? aux->dc_l1 : 0.0;
  result.bounds = self_map_bounds(fc, unit, 0.0, 0.0, aux ? aux->dn_l1 : 0.0);

  LinearProblem zero_data = base;
  zero_data.u0 = BoundaryData::constant(0.0);
  const double aa = inner(a, a);
  for (double s : seeds) {
    GridFunction seed = a;
    seed.values *= s;
    auto [u, report] = solve_quasilinear(fc, zero_data, seed, opts, aux ? std::optional(result.bounds) : std::nullopt);
    NonuniqueRow row;
    row.seed = s;
    row.alpha = inner(u, a) / aa;
    row.residual = std::abs(row.alpha - g_tilde(row.alpha));
    row.iterations = report.n_iters;
    row.converged = report.converged;
    row.report = std::move(report);
    result.rows.push_back(std::move(row));
  }
  std::vector<double> limits;
  for (const auto& r : result.rows) {
    const bool seen = std::any_of(limits.begin(), limits.end(),
                                  [&](double l) { return std::abs(l - r.alpha) <= 1e-3; });
    if (!seen) limits.push_back(r.alpha);
  }
  result.distinct_limits = limits.size();
  return result;
}

namespace {

// Separable Gaussian blur with standard deviation sigma in cells.
Raster<double> gaussian_blur(const Raster<double>& in, double sigma) {
  if (sigma <= 0) return in;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> w(2 * radius + 1);
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    w[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
    total += w[k + radius];
  }
  for (double& x : w) x /= total;
  const Index ny = in.rows(), nx = in.cols();
  Raster<double> tmp(ny, nx), out(ny, nx);
  for (Index i = 0; i < ny; ++i) {
    for (Index j = 0; j < nx; ++j) {
      double s = 0.0;
      for (int k = -radius; k <= radius; ++k) s += w[k + radius] * in(i, std::clamp<Index>(j + k, 0, nx - 1));
      tmp(i, j) = s;
    }
  }
  for (Index i = 0; i < ny; ++i) {
    for (Index j = 0; j < nx; ++j) {
      double s = 0.0;
      for (int k = -radius; k <= radius; ++k) s += w[k + radius] * tmp(std::clamp<Index>(i + k, 0, ny - 1), j);
      out(i, j) = s;
    }
  }
  return out;
}

double sample_cells(const Raster<double>& r, const GridSpec& g, const Point& x) {
  const double fx = std::clamp((x.x() - g.origin.x()) / g.spacing - 0.5, 0.0, static_cast<double>(g.nx - 1));
  const double fy = std::clamp((x.y() - g.origin.y()) / g.spacing - 0.5, 0.0, static_cast<double>(g.ny - 1));
  const Index j0 = std::min<Index>(static_cast<Index>(fx), std::max<Index>(g.nx - 2, 0));
  const Index i0 = std::min<Index>(static_cast<Index>(fy), std::max<Index>(g.ny - 2, 0));
  const Index j1 = std::min<Index>(j0 + 1, g.nx - 1), i1 = std::min<Index>(i0 + 1, g.ny - 1);
  const double wx = fx - j0, wy = fy - i0;
  return (1 - wy) * ((1 - wx) * r(i0, j0) + wx * r(i0, j1)) + wy * ((1 - wx) * r(i1, j0) + wx * r(i1, j1));
}

Vec2 cone_project(const Vec2& d, const Vec2& n, double beta) {
  const double dn = d.dot(n);
  if (dn >= beta) return d;
  const Vec2 tangential = d - dn * n;
  const double t = tangential.norm();
  if (t == 0.0) return n;
  return beta * n + std::sqrt(std::max(0.0, 1.0 - beta * beta)) * tangential / t;
}

}  // namespace

FunctionalCoefficients build_inpainting_coefficients(const LinearProblem& base, const GridFunction& image,
                                                     double smoothing, double blend, double beta) {
  if (!(smoothing > 0)) throw Error(Errc::InvalidArgument, "smoothing must be positive");
  if (!(blend >= 0 && blend <= 1)) throw Error(Errc::InvalidArgument, "blend must lie in [0, 1]");
  if (!(beta > 0 && beta <= 1)) throw Error(Errc::InvalidArgument, "beta must lie in (0, 1]");
  FunctionalCoefficients fc;
  fc.beta = beta;
  fc.f_of = [](const GridFunction&) { return Rhs::constant(0.0); };
  auto tf = base.tf;
  const GridSpec grid = image.grid;
  const Raster<double> known = image.values;
  const double sigma_cells = smoothing / grid.spacing;
  fc.c_of = [tf, grid, known, sigma_cells, blend, beta](const GridFunction& v) -> TransportField {
    auto normal = [tf](const Point& x) -> Vec2 {
      try {
        return tf->normal(x);
      } catch (const Error&) {
        return Vec2::Zero();
      }
    };
    if (blend == 0.0) return {normal, beta, "normal"};
    Raster<double> composite = known;
    for (Index i = 0; i < grid.ny; ++i) {
      for (Index j = 0; j < grid.nx; ++j) {
        if (v.active(i, j)) composite(i, j) = v.values(i, j);
      }
    }
    const Raster<double> smooth = gaussian_blur(composite, sigma_cells);
    auto gx = std::make_shared<Raster<double>>(Raster<double>::Zero(grid.ny, grid.nx));
    auto gy = std::make_shared<Raster<double>>(Raster<double>::Zero(grid.ny, grid.nx));
    for (Index i = 0; i < grid.ny; ++i) {
      for (Index j = 0; j < grid.nx; ++j) {
        const Index jl = std::max<Index>(j - 1, 0), jr = std::min<Index>(j + 1, grid.nx - 1);
        const Index id = std::max<Index>(i - 1, 0), iu = std::min<Index>(i + 1, grid.ny - 1);
        (*gx)(i, j) = jr > jl ? (smooth(i, jr) - smooth(i, jl)) / ((jr - jl) * grid.spacing) : 0.0;
        (*gy)(i, j) = iu > id ? (smooth(iu, j) - smooth(id, j)) / ((iu - id) * grid.spacing) : 0.0;
      }
    }
    // Gradients below kappa fade into the normal field.
    constexpr double kappa = 1e-3;
    auto c = [normal, gx, gy, grid, blend, beta](const Point& x) -> Vec2 {
      const Vec2 n = normal(x);
      if (n.isZero()) return n;
      const Vec2 g(sample_cells(*gx, grid, x), sample_cells(*gy, grid, x));
      const double g2 = g.squaredNorm();
      Vec2 iso = n;
      if (g2 > 0) {
        iso = perp(Vec2(g / std::sqrt(g2)));
        if (iso.dot(n) < 0) iso = -iso;
        const double w = g2 / (g2 + kappa * kappa);
        iso = w * iso + (1.0 - w) * n;
      }
      Vec2 d = (1.0 - blend) * n + blend * iso;
      const double len = d.norm();
      d = len > 0 ? Vec2(d / len) : n;
      return cone_project(d, n, beta);
    };
    return {c, beta, "isophote"};
  };
  return fc;
}

}  // namespace charflow
