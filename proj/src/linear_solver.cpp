#include "charflow/linear_solver.hpp"

#include "charflow/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace charflow {

using Index = Eigen::Index;

BoundaryData BoundaryData::constant(double value) {
  return {[value](double) { return value; }, std::abs(value), 0.0};
}

BoundaryData BoundaryData::from_samples(std::vector<double> params, std::vector<double> values,
                                        double a, double period) {
  if (params.empty() || params.size() != values.size()) {
    throw Error(Errc::InvalidArgument, "boundary samples need matching non-empty arrays");
  }
  if (!std::is_sorted(params.begin(), params.end())) {
    throw Error(Errc::InvalidArgument, "boundary sample parameters must increase");
  }
  double sup = 0.0, variation = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    sup = std::max(sup, std::abs(values[k]));
    variation += std::abs(values[(k + 1) % values.size()] - values[k]);
  }
  auto eval = [params = std::move(params), values = std::move(values), a, period](double s) {
    double w = std::fmod(s - a, period);
    if (w < 0) w += period;
    w += a;
    auto it = std::upper_bound(params.begin(), params.end(), w);
    if (it == params.begin()) return values.back();  // wraps to the last piece
    return values[static_cast<std::size_t>(it - params.begin()) - 1];
  };
  return {std::move(eval), sup, variation};
}

BoundaryData BoundaryData::from_point_function(const BoundaryCurve& curve,
                                               std::function<double(const Point&)> g,
                                               std::optional<double> sup,
                                               std::optional<double> variation) {
  return {[curve, g = std::move(g)](double s) { return g(curve.position(s)); }, sup, variation};
}

Rhs Rhs::constant(double v) {
  return {[v](const Point&) { return v; }, [](const Point&) -> Vec2 { return Vec2::Zero(); },
          std::abs(v), 0.0};
}

double LinearProblem::linf_bound() const {
  if (!u0.sup || !f.sup) throw Error(Errc::MissingAux, "sup norms of the data are unknown");
  return *u0.sup + *f.sup / (c.beta * m0);
}

double resolve_m0(const TimeField& tf, const Domain& domain, const Sampling& sampling) {
  if (tf.exact_m0()) return *tf.exact_m0();
  return estimate_m0(tf, domain, sampling);
}

LinearProblem finalize(LinearProblem p) {
  if (!(p.m0 > 0)) p.m0 = resolve_m0(*p.tf, *p.domain);
  p.opts.beta_m0 = p.c.beta * p.m0;
  return p;
}

namespace {

double solution_at(const LinearProblem& p, const ScaledField& sf, const Point& x) {
  const std::function<double(const Point&)>& g = p.f.value;
  const BackwardSummary b = backward_summary(x, sf, p.opts, p.f.is_zero() ? nullptr : &g);
  return p.u0(b.boundary_param) + b.integral;
}

bool compatible(int a, int b) { return a == 0 || b == 0 || a == b; }

// Same-side nearest fill of the cells in `pending` from cells with kind Inside.
void fill_from_neighbours(GridFunction& g, const StopSet& sigma, const std::vector<Index>& pending) {
  const Index nx = g.grid.nx, ny = g.grid.ny;
  std::vector<double> filled(pending.size(), 0.0);
  for (std::size_t k = 0; k < pending.size(); ++k) {
    const Index ci = pending[k] / nx, cj = pending[k] % nx;
    const int label = side_label(sigma, g.grid.center(ci, cj));
    double best = std::numeric_limits<double>::infinity();
    Index best_idx = -1;
    for (Index r = 1; r <= std::max(nx, ny); ++r) {
      for (Index i = std::max<Index>(0, ci - r); i <= std::min(ny - 1, ci + r); ++i) {
        for (Index j = std::max<Index>(0, cj - r); j <= std::min(nx - 1, cj + r); ++j) {
          if (g.mask(i, j) != CellKind::Inside) continue;
          const double d = static_cast<double>((i - ci) * (i - ci) + (j - cj) * (j - cj));
          const Index idx = i * nx + j;
          if (d < best || (d == best && idx < best_idx)) {
            if (!compatible(label, side_label(sigma, g.grid.center(i, j)))) continue;
            best = d;
            best_idx = idx;
          }
        }
      }
      if (best_idx >= 0 && best <= static_cast<double>(r * r)) break;
    }
    filled[k] = best_idx >= 0 ? g.values(best_idx / nx, best_idx % nx) : 0.0;
  }
  for (std::size_t k = 0; k < pending.size(); ++k) {
    g.values(pending[k] / nx, pending[k] % nx) = filled[k];
  }
}

template <typename Eval>
GridFunction solve_cells(const LinearProblem& p, const GridSpec& grid, Eval&& eval,
                         const std::function<bool(const Point&)>& include) {
  GridFunction g(grid);
  const Domain& domain = *p.domain;
  const TimeField& tf = *p.tf;
  std::vector<std::uint8_t> failed(static_cast<std::size_t>(grid.size()), 0);
  parallel_for(static_cast<std::size_t>(grid.size()), [&](std::size_t idx) {
    const Index i = static_cast<Index>(idx) / grid.nx, j = static_cast<Index>(idx) % grid.nx;
    const Point x = grid.center(i, j);
    if (!domain.contains(x) || (include && !include(x))) return;
    if (tf.in_sigma_tube(x)) {
      failed[idx] = 1;
      return;
    }
    try {
      g.values(i, j) = eval(x);
      g.mask(i, j) = CellKind::Inside;
    } catch (const Error&) {
      failed[idx] = 1;
    }
  });
  std::vector<Index> pending;
  for (std::size_t idx = 0; idx < failed.size(); ++idx) {
    if (!failed[idx]) continue;
    const Index i = static_cast<Index>(idx) / grid.nx, j = static_cast<Index>(idx) % grid.nx;
    g.mask(i, j) = CellKind::SigmaTube;
    pending.push_back(static_cast<Index>(idx));
  }
  if (!pending.empty()) fill_from_neighbours(g, domain.stopset(), pending);
  return g;
}

}  // namespace

int side_label(const StopSet& sigma, const Point& x) {
  if (sigma.degenerate() || sigma.arcs().empty()) return 0;
  double best = std::numeric_limits<double>::infinity();
  int label = 0;
  for (std::size_t k = 0; k < sigma.arcs().size(); ++k) {
    const ArcProjection pr = sigma.project_to_arc(k, x);
    if (pr.dist < best) {
      best = pr.dist;
      const double s = (x - pr.point).dot(sigma.arcs()[k].normal(pr.t));
      label = s > 1e-12 ? 1 : (s < -1e-12 ? -1 : 0);
    }
  }
  return label;
}

double evaluate_solution(const LinearProblem& p, const Point& x) {
  const ScaledField sf = p.scaled();
  return solution_at(p, sf, x);
}

GridFunction solve_on_grid(const LinearProblem& p, const GridSpec& grid) {
  const ScaledField sf = p.scaled();
  return solve_cells(p, grid, [&](const Point& x) { return solution_at(p, sf, x); }, {});
}

GridFunction solve_on_grid(const LinearProblem& p, Index resolution) {
  if (resolution < 8) throw Error(Errc::InvalidArgument, "grid resolution must be at least 8");
  return solve_on_grid(p, GridSpec::cover(p.domain->bbox(), resolution));
}

LevelTrace trace_on_level(const LinearProblem& p, double lambda, std::size_t n) {
  const double upper = 1.0 - kSigmaFloor - 0.05;
  if (!(lambda >= 0.05 && lambda <= upper)) {
    throw Error(Errc::InvalidArgument, "level must lie in [0.05, 0.95 - floor]");
  }
  const BoundaryCurve& curve = p.domain->boundary();
  const ScaledField sf = p.scaled();
  LevelTrace out;
  out.lambda = lambda;
  out.params.resize(n);
  out.points.resize(n);
  out.values.resize(n);
  parallel_for(n, [&](std::size_t k) {
    const double s = curve.period_begin() + curve.period() * static_cast<double>(k) / static_cast<double>(n);
    CharacteristicTrace tr;
    try {
      tr = integrate_forward(s, sf, p.opts, lambda);
    } catch (const Error& e) {
      if (e.code() == Errc::LeftDomain) throw Error(Errc::LevelNotFound, "level line leaves the box");
      throw;
    }
    double integral = 0.0;
    if (!p.f.is_zero()) {
      for (std::size_t m = 1; m < tr.points.size(); ++m) {
        const double a = p.f(tr.points[m - 1]) * sf.inverse_rate(tr.points[m - 1]);
        const double b = p.f(tr.points[m]) * sf.inverse_rate(tr.points[m]);
        integral += 0.5 * (a + b) * (tr.times[m] - tr.times[m - 1]);
      }
    }
    out.params[k] = s;
    out.points[k] = tr.points.back();
    out.values[k] = p.u0(s) + integral;
  });
  out.arclength.assign(n, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    out.arclength[k] = out.arclength[k - 1] + (out.points[k] - out.points[k - 1]).norm();
  }
  return out;
}

StopSetTraces traces_on_stopset(const LinearProblem& p, std::size_t k, std::size_t n,
                                const StopSetTraceOptions& opts) {
  const StopSet& sigma = p.domain->stopset();
  if (sigma.degenerate()) throw Error(Errc::InvalidArgument, "stop set has no arcs");
  if (k >= sigma.arcs().size()) throw Error(Errc::InvalidArgument, "arc index out of range");
  StopSetTraces out;
  out.arc = k;
  if (n == 0) return out;
  const StopArc& arc = sigma.arcs()[k];
  const double length = arc.length();
  if (length <= 2.0 * opts.node_exclusion) {
    throw Error(Errc::NodeProximity, "arc shorter than the node exclusion zone");
  }
  // Arc-length positions of the samples, mapped to t through a cumulative table.
  constexpr std::size_t kTable = 1024;
  std::vector<double> cum(kTable + 1, 0.0);
  for (std::size_t m = 1; m <= kTable; ++m) {
    cum[m] = cum[m - 1] + (arc.position(static_cast<double>(m) / kTable) -
                           arc.position(static_cast<double>(m - 1) / kTable))
                              .norm();
  }
  auto t_at = [&](double len) {
    auto it = std::lower_bound(cum.begin(), cum.end(), len);
    const std::size_t m = std::clamp<std::size_t>(static_cast<std::size_t>(it - cum.begin()), 1, kTable);
    const double w = (len - cum[m - 1]) / std::max(cum[m] - cum[m - 1], 1e-300);
    return (static_cast<double>(m - 1) + std::clamp(w, 0.0, 1.0)) / kTable;
  };
  const double lo = opts.node_exclusion, hi = cum.back() - opts.node_exclusion;
  out.t.resize(n);
  out.points.resize(n);
  out.u_plus.resize(n);
  out.u_minus.resize(n);
  const ScaledField sf = p.scaled();
  parallel_for(n, [&](std::size_t m) {
    const double len = n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * static_cast<double>(m) / (n - 1);
    const double t = t_at(len);
    const Point z = arc.position(t);
    const Vec2 nz = arc.normal(t);
    const double d = opts.offset;
    auto limit = [&](double sign) {
      const double far = solution_at(p, sf, z + sign * d * nz);
      const double near = solution_at(p, sf, z + sign * 0.5 * d * nz);
      return 2.0 * near - far;
    };
    out.t[m] = t;
    out.points[m] = z;
    out.u_plus[m] = limit(1.0);
    out.u_minus[m] = limit(-1.0);
  });
  return out;
}

GridFunction restart_solve(const LinearProblem& p, double lambda, const LevelTrace& trace,
                           const GridSpec& grid) {
  if (trace.points.empty()) throw Error(Errc::InvalidArgument, "empty level trace");
  if (std::abs(trace.lambda - lambda) > 1e-12) {
    throw Error(Errc::InvalidArgument, "trace was sampled on a different level");
  }
  const ScaledField sf = p.scaled();
  const TimeField& tf = *p.tf;
  const std::function<double(const Point&)>& g = p.f.value;
  auto eval = [&](const Point& x) {
    const BackwardSummary b = backward_summary(x, sf, p.opts, p.f.is_zero() ? nullptr : &g, lambda);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < trace.points.size(); ++k) {
      const double d = (trace.points[k] - b.endpoint).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    return trace.values[best] + b.integral;
  };
  auto above = [&](const Point& x) { return transform_time(tf, x) > lambda; };
  return solve_cells(p, grid, eval, above);
}

}  // namespace charflow
