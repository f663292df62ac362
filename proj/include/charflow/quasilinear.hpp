#pragma once

#include "charflow/bv_analysis.hpp"
#include "charflow/linear_solver.hpp"

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace charflow {

/// Coefficients that depend on the current iterate v.
struct FunctionalCoefficients {
  std::function<TransportField(const GridFunction&)> c_of;
  std::function<Rhs(const GridFunction&)> f_of;
  double M1 = 0.0;  ///< cap of ||D_x c[v]||_L1
  double M2 = 0.0;  ///< cap of ||f[v]||_inf
  double M3 = 0.0;  ///< cap of ||grad_x f[v]||_inf
  double beta = 1.0;
};

struct SelfMapBounds {
  double M_star = 0.0;
  double M_starstar = 0.0;
  double M4 = 0.0;  ///< cap of ||u0||_inf
  double M5 = 0.0;  ///< cap of |Du0|
};

/// M_* = (M4 + M2 / (beta m0)) area and M_** from the same caps plus H1(Sigma)
/// and ||DN||_L1.
SelfMapBounds self_map_bounds(const FunctionalCoefficients& fc, const LinearProblem& base, double M4,
                              double M5, double dn_l1);

/// Freezes the coefficients at v and solves on v's grid. Throws NotCausal when
/// the sampled <c[v], N> falls below fc.beta.
GridFunction apply_U(const FunctionalCoefficients& fc, const LinearProblem& base, const GridFunction& v);

struct FixedPointOptions {
  double tol = 1e-6;
  std::size_t max_iter = 50;
  double omega = 1.0;  ///< damping: u <- (1 - omega) u + omega U[u]
};

struct FixedPointReport {
  std::size_t n_iters = 0;
  std::vector<double> l1_residuals;
  std::vector<double> l1_norms;
  std::vector<double> tvs;
  bool converged = false;
  double final_l1_norm = 0.0;
  double final_tv = 0.0;
  std::optional<bool> in_X;  ///< set when self-map bounds were supplied
};

/// Picard iteration in the L1 metric. Not converging is reported, not thrown.
std::pair<GridFunction, FixedPointReport> solve_quasilinear(
    const FunctionalCoefficients& fc, const LinearProblem& base, const GridFunction& seed,
    const FixedPointOptions& opts, const std::optional<SelfMapBounds>& bounds = std::nullopt);

/// Clamp -1 / identity / 1.
double g_tilde(double t);

struct NonuniqueRow {
  double seed = 0.0;
  double alpha = 0.0;
  double residual = 0.0;  ///< |alpha - g_tilde(alpha)|
  std::size_t iterations = 0;
  bool converged = false;
  FixedPointReport report;
};

struct NonuniqueResult {
  double a_l1 = 0.0;  ///< midpoint quadrature of the arc-length function
  SelfMapBounds bounds;
  std::vector<NonuniqueRow> rows;
  std::size_t distinct_limits = 0;  ///< limits separated by more than 1e-3
};

/// Fixed transport field and constant right-hand side g_tilde(integral of v / a_l1).
FunctionalCoefficients nonunique_coefficients(const LinearProblem& base, double a_l1);

/// Zero-data problem with right-hand side g(integral of v) where
/// g(t) = g_tilde(t / ||a||_L1) and a is the boundary-to-x arc length.
NonuniqueResult nonuniqueness_demo(const LinearProblem& base, const GridSpec& grid,
                                   const std::vector<double>& seeds, const FixedPointOptions& opts);

/// Image-adapted transport: c[v] blends the level normal N with the mollified
/// isophote tangent of v, then is rotated toward N where <c, N> < beta.
/// `image` supplies v outside the active cells of the iterate.
FunctionalCoefficients build_inpainting_coefficients(const LinearProblem& base, const GridFunction& image,
                                                     double smoothing, double blend, double beta);

}  // namespace charflow
