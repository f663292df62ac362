#include "charflow/bv_analysis.hpp"

#include "charflow/parallel.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace charflow {

using Index = Eigen::Index;

double discrete_tv(const GridFunction& g) {
  double sum = 0.0;
  for (Index i = 0; i < g.grid.ny; ++i) {
    for (Index j = 0; j < g.grid.nx; ++j) {
      if (!g.active(i, j)) continue;
      if (j + 1 < g.grid.nx && g.active(i, j + 1)) sum += std::abs(g.values(i, j + 1) - g.values(i, j));
      if (i + 1 < g.grid.ny && g.active(i + 1, j)) sum += std::abs(g.values(i + 1, j) - g.values(i, j));
    }
  }
  return sum * g.grid.spacing;
}

std::optional<AuxIntegrals> sample_aux(const LinearProblem& p, const GridSpec& grid) {
  const Domain& domain = *p.domain;
  const TimeField& tf = *p.tf;
  const StopSet& sigma = domain.stopset();
  const double h = grid.spacing;
  const double radius = 4.0 * h;
  const double eps = 0.25 * h;
  std::vector<Point> nodes;
  if (sigma.degenerate()) {
    nodes.push_back(sigma.nearest(domain.bbox().lo));
  } else {
    for (const auto& n : sigma.nodes()) nodes.push_back(n.point);
  }
  const auto n_cells = static_cast<std::size_t>(grid.size());
  std::vector<double> dc(n_cells, 0.0), dn(n_cells, 0.0);
  std::vector<std::uint8_t> bad(n_cells, 0);
  parallel_for(n_cells, [&](std::size_t idx) {
    const Index i = static_cast<Index>(idx) / grid.nx, j = static_cast<Index>(idx) % grid.nx;
    const Point x = grid.center(i, j);
    if (!domain.contains(x)) return;
    for (const Point& z : nodes) {
      if ((x - z).norm() < radius) return;
    }
    if (sigma.distance(x) < 2.0 * eps || tf.in_sigma_tube(x)) return;
    try {
      Mat2 jc, jn;
      for (int a = 0; a < 2; ++a) {
        const Vec2 e = a == 0 ? Vec2(eps, 0.0) : Vec2(0.0, eps);
        jc.col(a) = (p.c(x + e) - p.c(x - e)) / (2.0 * eps);
        jn.col(a) = (tf.normal(x + e) - tf.normal(x - e)) / (2.0 * eps);
      }
      dc[idx] = jc.norm();
      dn[idx] = jn.norm();
      if (!std::isfinite(dc[idx]) || !std::isfinite(dn[idx])) bad[idx] = 1;
    } catch (const Error&) {
      bad[idx] = 1;
    }
  });
  if (std::any_of(bad.begin(), bad.end(), [](std::uint8_t b) { return b != 0; })) return std::nullopt;
  AuxIntegrals aux;
  aux.excluded_radius = radius;
  for (std::size_t k = 0; k < n_cells; ++k) {
    aux.dc_l1 += dc[k];
    aux.dn_l1 += dn[k];
  }
  aux.dc_l1 *= grid.cell_area();
  aux.dn_l1 *= grid.cell_area();
  return aux;
}

double boundary_variation(const LinearProblem& p, std::size_t n) {
  if (p.u0.variation) return *p.u0.variation;
  const BoundaryCurve& curve = p.domain->boundary();
  double sum = 0.0;
  double prev = p.u0(curve.period_begin());
  const double first = prev;
  for (std::size_t k = 1; k < n; ++k) {
    const double v = p.u0(curve.period_begin() + curve.period() * static_cast<double>(k) / static_cast<double>(n));
    sum += std::abs(v - prev);
    prev = v;
  }
  return sum + std::abs(first - prev);
}

double rhs_gradient_sup(const LinearProblem& p, const GridSpec& grid) {
  if (p.f.grad_sup) return *p.f.grad_sup;
  double m = 0.0;
  for (Index i = 0; i < grid.ny; ++i) {
    for (Index j = 0; j < grid.nx; ++j) {
      const Point x = grid.center(i, j);
      if (p.domain->contains(x)) m = std::max(m, p.f.gradient(x).norm());
    }
  }
  return m;
}

double tv_bound_interior(const LinearProblem& p, const std::optional<AuxIntegrals>& aux,
                         double du0_variation, double grad_f_sup) {
  const double beta = p.c.beta, m0 = p.m0;
  if (!p.f.sup) throw Error(Errc::MissingAux, "sup norm of f is unknown");
  const double fs = *p.f.sup;
  double bound = du0_variation / (beta * m0);
  if (fs == 0.0 && grad_f_sup == 0.0) return bound;
  if (!aux) throw Error(Errc::MissingAux, "derivative integrals of c and N are unavailable");
  bound += (fs / beta + grad_f_sup / (beta * beta * m0)) * p.domain->area();
  bound += fs / (beta * beta * beta * m0) * (aux->dc_l1 + aux->dn_l1);
  return bound;
}

double jump_mass_sigma(const LinearProblem& p, const std::vector<StopSetTraces>& traces) {
  const StopSet& sigma = p.domain->stopset();
  if (sigma.degenerate()) return 0.0;
  double mass = 0.0;
  for (const StopSetTraces& tr : traces) {
    const std::size_t n = tr.points.size();
    if (n == 0) continue;
    const StopArc& arc = sigma.arcs().at(tr.arc);
    std::vector<double> jump(n);
    for (std::size_t k = 0; k < n; ++k) jump[k] = std::abs(tr.u_plus[k] - tr.u_minus[k]);
    for (std::size_t k = 1; k < n; ++k) {
      mass += 0.5 * (jump[k - 1] + jump[k]) * (tr.points[k] - tr.points[k - 1]).norm();
    }
    // Constant extension over the excluded end pieces.
    const double head = (tr.points.front() - arc.position(0.0)).norm();
    const double tail = (arc.position(1.0) - tr.points.back()).norm();
    mass += jump.front() * head + jump.back() * tail;
  }
  return mass;
}

BVEstimate estimate_bv(const LinearProblem& p, const GridFunction& g, std::size_t n_sigma) {
  BVEstimate est;
  est.linf = g.max_abs();
  est.linf_bound = p.linf_bound();
  est.tv_discrete = discrete_tv(g);
  est.du0_variation = boundary_variation(p);
  est.sigma_length = p.domain->stopset().length();
  est.aux = sample_aux(p, g.grid);
  est.tv_bound_interior = tv_bound_interior(p, est.aux, est.du0_variation, rhs_gradient_sup(p, g.grid));
  est.tv_bound_total = est.tv_bound_interior + 2.0 * est.linf_bound * est.sigma_length;
  const StopSet& sigma = p.domain->stopset();
  if (!sigma.degenerate() && n_sigma > 0) {
    std::vector<StopSetTraces> traces;
    for (std::size_t k = 0; k < sigma.arcs().size(); ++k) traces.push_back(traces_on_stopset(p, k, n_sigma));
    est.jump_mass_sigma = jump_mass_sigma(p, traces);
  }
  return est;
}

BoundsReport check_bounds(const BVEstimate& est, double slack) {
  BoundsReport r;
  r.linf_pass = est.linf <= est.linf_bound;
  r.tv_allowed = est.tv_bound_total * (1.0 + slack);
  r.tv_pass = est.tv_discrete <= r.tv_allowed;
  return r;
}

std::string to_json(const BVEstimate& est) {
  nlohmann::ordered_json j;
  j["linf"] = est.linf;
  j["linf_bound"] = est.linf_bound;
  j["tv_discrete"] = est.tv_discrete;
  j["tv_bound_interior"] = est.tv_bound_interior;
  j["tv_bound_total"] = est.tv_bound_total;
  j["jump_mass_sigma"] = est.jump_mass_sigma;
  j["du0_variation"] = est.du0_variation;
  j["sigma_length"] = est.sigma_length;
  if (est.aux) {
    j["dc_l1"] = est.aux->dc_l1;
    j["dn_l1"] = est.aux->dn_l1;
  } else {
    j["dc_l1"] = nullptr;
    j["dn_l1"] = nullptr;
  }
  return j.dump(2);
}

}  // namespace charflow
