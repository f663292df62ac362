#pragma once

#include "charflow/builtins.hpp"
#include "charflow/bv_analysis.hpp"
#include "charflow/quasilinear.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace charflow {

/// Closed-form solution on the disk for u0 = x1 / |x| and c the inward radial
/// field rotated by theta: cos(phi - tan(theta) ln r).
double spiral_cos_solution(const Point& x, double theta);

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
  std::vector<std::pair<std::string, double>> metrics;
};

struct VerifyConfig {
  Eigen::Index grid = 128;
  double step = 1e-3;
  double q = 2.0;
  std::size_t n_traces = 1000;
  std::size_t n_jacobian = 200;
  double theta = 0.5235987755982988;
  std::optional<double> spiral_beta;  ///< declared beta of the spiral field; default cos(theta)
  std::uint64_t seed = 20240611;
};

/// One solved built-in case with its variation estimate.
struct SuiteEntry {
  BuiltinCase spec;
  LinearProblem problem;
  GridFunction solution;
  BVEstimate estimate;
};

/// Every built-in domain with its default field (plus the spiral on the disk)
/// against data {cos, step} and right-hand sides {zero, one}.
std::vector<SuiteEntry> run_solve_suite(const VerifyConfig& cfg);

CheckResult check_causality(const VerifyConfig& cfg);
CheckResult check_arc_length(const VerifyConfig& cfg);
CheckResult check_clock_identity(const VerifyConfig& cfg);
CheckResult check_det_sandwich(const VerifyConfig& cfg);
CheckResult check_linf(const std::vector<SuiteEntry>& suite);
CheckResult check_tv(const std::vector<SuiteEntry>& suite, double slack);
CheckResult check_jump_mass(const VerifyConfig& cfg);
CheckResult check_restart(const VerifyConfig& cfg);
CheckResult check_boundary_trace(const VerifyConfig& cfg);
CheckResult check_superposition(const VerifyConfig& cfg);

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool all_pass() const;
};

/// Causality, arc length, clock identity, det sandwich, L-infinity and TV
/// bounds, jump mass, restart and boundary-trace decay.
VerifyReport run_verify(const VerifyConfig& cfg);

std::string to_json(const VerifyReport& report);

struct StabilityRow {
  int n = 0;
  double theta = 0.0;
  double l1_error = 0.0;  ///< sub-cell quadrature against the exact solution
  double l1_grid = 0.0;   ///< cell-centre L1 distance to the unperturbed solve
  double tv = 0.0;
  double tv_cap = 0.0;
};

struct StabilityResult {
  double floor = 0.0;  ///< the same quadrature applied to the exact cell-centre values
  std::vector<StabilityRow> rows;
  bool decreasing = false;
  bool final_within_floor = false;  ///< final l1_error <= 3 floor
  bool ratio_ok = false;            ///< l1_grid ratios <= 0.75 for n >= 1
  bool tv_ok = false;
  bool pass() const { return decreasing && final_within_floor && ratio_ok && tv_ok; }
};

/// Rotates the radial field by theta0 / 2^n, n = 0..levels, and measures the
/// distance of the solutions to the unperturbed one.
StabilityResult run_stability(Eigen::Index grid, double step, double theta0 = 0.5235987755982988,
                              int levels = 5);

struct ConvergeStepRow {
  double step = 0.0;
  double max_error = 0.0;        ///< spiral case against the closed form
  double const_max_error = 0.0;  ///< constant data, exact solution
};

struct ConvergeGridRow {
  Eigen::Index grid = 0;
  double tv = 0.0;
  double cauchy = 0.0;  ///< |tv - tv of the previous grid|; 0 for the first row
};

struct ConvergeResult {
  std::vector<ConvergeStepRow> step_rows;
  std::vector<ConvergeGridRow> grid_rows;
  double step_order = 0.0;  ///< log(e_first / e_last) / log(h_first / h_last)
  double tv_order = 0.0;    ///< log2 of the ratio of successive Cauchy differences
  bool step_order_ok = false;
  bool tv_shrink_ok = false;
  bool pass() const { return step_order_ok && tv_shrink_ok; }
};

ConvergeResult run_converge(const std::vector<double>& steps, const std::vector<Eigen::Index>& grids,
                            double theta = 0.5235987755982988);

}  // namespace charflow
