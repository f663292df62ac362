#pragma once

#include "charflow/grid.hpp"
#include "charflow/linear_solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace charflow {

/// Anisotropic discrete total variation: sum of |u(a) - u(b)| h over
/// horizontally and vertically adjacent pairs of active cells.
double discrete_tv(const GridFunction& g);

/// Sampled L1 norms of the derivatives of the transport field and of the
/// level normal.
struct AuxIntegrals {
  double dc_l1 = 0.0;
  double dn_l1 = 0.0;
  double excluded_radius = 0.0;  ///< radius of the disks removed around stop-set nodes
};

/// Midpoint quadrature of the Frobenius norms |Dc| and |DN| from central
/// differences at the cell centres. Disks of radius 4h around the stop-set
/// nodes and the stop-set tube are left out. Returns nullopt when no cell
/// survives or a sample is not finite.
std::optional<AuxIntegrals> sample_aux(const LinearProblem& p, const GridSpec& grid);

/// |Du0| over one boundary period: the known value or a dense sampled sum.
double boundary_variation(const LinearProblem& p, std::size_t n = 8192);

/// ||grad f||_inf: the known value or a sampled maximum over `grid`.
double rhs_gradient_sup(const LinearProblem& p, const GridSpec& grid);

/// Interior total variation bound M. Throws MissingAux when f is not zero
/// and no aux integrals are available.
double tv_bound_interior(const LinearProblem& p, const std::optional<AuxIntegrals>& aux,
                         double du0_variation, double grad_f_sup);

/// Sum over arcs of the trapezoidal integral of |u+ - u-| with respect to arc length.
double jump_mass_sigma(const LinearProblem& p, const std::vector<StopSetTraces>& traces);

struct BVEstimate {
  double linf = 0.0;
  double linf_bound = 0.0;
  double tv_discrete = 0.0;
  double tv_bound_interior = 0.0;
  double tv_bound_total = 0.0;
  double jump_mass_sigma = 0.0;
  double du0_variation = 0.0;
  double sigma_length = 0.0;
  std::optional<AuxIntegrals> aux;
};

/// Assembles every field from the problem and a solved grid. The jump mass is
/// computed from `n_sigma` samples per arc when the stop set has arcs.
BVEstimate estimate_bv(const LinearProblem& p, const GridFunction& g, std::size_t n_sigma = 200);

struct BoundsReport {
  bool linf_pass = false;
  bool tv_pass = false;
  double tv_allowed = 0.0;
  bool pass() const { return linf_pass && tv_pass; }
};

/// linf <= linf_bound exactly; tv_discrete <= tv_bound_total (1 + slack).
BoundsReport check_bounds(const BVEstimate& est, double slack = 0.10);

std::string to_json(const BVEstimate& est);

}  // namespace charflow
