#pragma once

#include "charflow/characteristics.hpp"
#include "charflow/grid.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace charflow {

/// Dirichlet data as a function of the boundary parameter.
struct BoundaryData {
  std::function<double(double)> eval;
  std::optional<double> sup;        ///< ess sup |u0| when known
  std::optional<double> variation;  ///< total variation over one period when known

  double operator()(double s) const { return eval(s); }

  static BoundaryData constant(double value);
  /// Piecewise-constant interpolation of samples at increasing parameters
  /// params[k] in [a, a + period); each sample holds until the next one.
  static BoundaryData from_samples(std::vector<double> params, std::vector<double> values, double a,
                                   double period);
  /// Data given as a function of the boundary point gamma(s).
  static BoundaryData from_point_function(const BoundaryCurve& curve,
                                          std::function<double(const Point&)> g,
                                          std::optional<double> sup = std::nullopt,
                                          std::optional<double> variation = std::nullopt);
};

/// Right-hand side f with its gradient.
struct Rhs {
  std::function<double(const Point&)> value;
  std::function<Vec2(const Point&)> gradient;
  std::optional<double> sup;
  std::optional<double> grad_sup;

  double operator()(const Point& x) const { return value(x); }
  bool is_zero() const { return sup && *sup == 0.0; }

  static Rhs constant(double v);
};

struct LinearProblem {
  std::shared_ptr<const Domain> domain;
  std::shared_ptr<const TimeField> tf;
  TransportField c;
  Rhs f;
  BoundaryData u0;
  double m0 = 0.0;  ///< lower bound of |grad T0|
  IntegrationOptions opts;

  ScaledField scaled() const { return ScaledField(*domain, *tf, c); }
  /// ||u0||_inf + ||f||_inf / (beta m0).
  double linf_bound() const;
};

/// m0 for the pair: the analytic value when the field carries one, otherwise
/// the sampled estimate.
double resolve_m0(const TimeField& tf, const Domain& domain, const Sampling& sampling = {});

/// Fills opts.beta_m0 from the problem constants.
LinearProblem finalize(LinearProblem p);

/// u(x) = u0(s(eta(T0(x), x))) + integral of f0 along the backward trace.
double evaluate_solution(const LinearProblem& p, const Point& x);

/// Solution at every inside cell centre. Cells whose evaluation is refused
/// (stop-set tube) are marked SigmaTube and filled from the nearest computed
/// cell on the same side of the stop set.
GridFunction solve_on_grid(const LinearProblem& p, const GridSpec& grid);
GridFunction solve_on_grid(const LinearProblem& p, Eigen::Index resolution);

/// Samples of u along the level line {T0 = lambda}.
struct LevelTrace {
  double lambda = 0.0;
  std::vector<double> params;  ///< boundary parameter of the generating characteristic
  std::vector<Point> points;
  std::vector<double> values;
  std::vector<double> arclength;  ///< cumulative polyline length along the level line
};

LevelTrace trace_on_level(const LinearProblem& p, double lambda, std::size_t n);

/// One-sided limits of u on stop-set arc k.
struct StopSetTraces {
  std::size_t arc = 0;
  std::vector<double> t;  ///< arc parameters of the sample points
  std::vector<Point> points;
  std::vector<double> u_plus;
  std::vector<double> u_minus;
};

struct StopSetTraceOptions {
  double offset = 1e-2;         ///< delta; limits use delta and delta / 2
  double node_exclusion = 2e-3;  ///< arc-length distance kept from the arc ends
};

StopSetTraces traces_on_stopset(const LinearProblem& p, std::size_t k, std::size_t n,
                                const StopSetTraceOptions& opts = {});

/// Solves the problem restricted to {T0 > lambda} with the level line as
/// inflow boundary and `trace` as data. Cells with T0 <= lambda stay outside.
GridFunction restart_solve(const LinearProblem& p, double lambda, const LevelTrace& trace,
                           const GridSpec& grid);

/// Side label of x relative to the stop set: +1 or -1 from the nearest arc
/// normal, 0 for the isolated point or points on the set.
int side_label(const StopSet& sigma, const Point& x);

}  // namespace charflow
