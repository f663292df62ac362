#pragma once

#include "charflow/linear_solver.hpp"

#include <memory>
#include <string>
#include <vector>

namespace charflow {

/// Analytic domain together with its time function.
struct BuiltinGeometry {
  std::shared_ptr<const Domain> domain;
  std::shared_ptr<const TimeField> tf;
};

/// "disk": unit disk, stop set the origin, T = 1 - |x|.
/// "disk-segment": unit disk, stop set [-1/2, 1/2] x {0}, T = dB / (dSigma + dB).
/// "rect-skeleton": stadium of half-width 1/2 around the same segment, T = 1 - 2 dSigma.
BuiltinGeometry builtin_geometry(const std::string& name, double q = 2.0);

/// "radial" and "spiral" (rotation by theta) on the disk; "nearest" (alias
/// "vertical") points at the nearest stop-set point on the other two.
TransportField builtin_field(const std::string& domain, const std::string& field,
                             double theta = 0.5235987755982988);

/// Default transport field of each domain.
std::string default_field(const std::string& domain);

/// "cos" (x1 / |x| of the boundary point), "step" (1 where x2 > 0), "const"
/// (the given value), "zero".
BoundaryData builtin_data(const std::string& name, const Domain& domain, double value = 1.0);

/// "zero" or "one".
Rhs builtin_rhs(const std::string& name);

struct BuiltinCase {
  std::string domain = "disk";
  std::string field;  ///< empty: default field of the domain
  std::string data = "cos";
  std::string rhs = "zero";
  double q = 2.0;
  double theta = 0.5235987755982988;
  double const_value = 1.0;
  double step = 1e-3;
};

LinearProblem make_problem(const BuiltinCase& spec);

std::vector<std::string> builtin_domain_names();

}  // namespace charflow
