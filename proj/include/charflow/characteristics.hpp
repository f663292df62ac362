#pragma once

#include "charflow/geometry.hpp"
#include "charflow/timefield.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace charflow {

/// Transport field rescaled so that T0 is the clock of its trajectories:
/// c0 = c / <c, grad T0>, f0 = f / <c, grad T0>.
///
/// Non-owning view; the referenced objects must outlive it.
class ScaledField {
 public:
  ScaledField(const Domain& domain, const TimeField& tf, const TransportField& c)
      : domain_(&domain), tf_(&tf), c_(&c) {}

  const Domain& domain() const { return *domain_; }
  const TimeField& time_field() const { return *tf_; }
  const TransportField& transport() const { return *c_; }

  /// 1 / <c, grad T0> at the clamped point; the speed |c0| since |c| = 1.
  double inverse_rate(const Point& x) const;
  Vec2 c0(const Point& x) const;

 private:
  const Domain* domain_;
  const TimeField* tf_;
  const TransportField* c_;
};

enum class EndpointKind { Boundary, StopSet, Level, StepLimit };

std::string to_string(EndpointKind kind);

/// One integrated characteristic in the T0 clock.
struct CharacteristicTrace {
  std::vector<Point> points;
  std::vector<double> times;  ///< T0-clock offsets tau from the start point
  double arc_length = 0.0;
  EndpointKind endpoint_kind = EndpointKind::Boundary;
  Point endpoint = Point::Zero();
  double boundary_param = 0.0;   ///< backward traces: parameter of the boundary endpoint
  std::optional<Side> side;      ///< forward traces ending on a stop-set arc
  std::size_t steps = 0;

  double duration() const { return times.empty() ? 0.0 : times.back(); }
};

struct IntegrationOptions {
  double step = 1e-3;         ///< T0 units
  std::size_t max_steps = 0;  ///< 0: 10 (1 / (beta m0)) / step
  double beta_m0 = 1.0;       ///< used for the default step limit
  /// Forward traces stop at 1 - T0 = stop_margin; 0 picks 10 floor^(1/q).
  double stop_margin = 0.0;
};

/// Backward characteristic y' = -c0(y) from x to the boundary level T0 = 0.
/// Refuses points inside the stop-set tube (NearStopSet).
CharacteristicTrace integrate_backward(const Point& x, const ScaledField& sf,
                                       const IntegrationOptions& opts = {});

/// Allocation-free variant of integrate_backward: integrates down to the level
/// T0 = stop_level and returns the endpoint, its boundary parameter and the
/// trapezoidal integral of g(y) / <c, grad T0> along the trace.
struct BackwardSummary {
  double boundary_param = 0.0;  ///< only meaningful when stop_level = 0
  double integral = 0.0;
  double duration = 0.0;
  Point endpoint = Point::Zero();
};
BackwardSummary backward_summary(const Point& x, const ScaledField& sf, const IntegrationOptions& opts,
                                 const std::function<double(const Point&)>* integrand,
                                 double stop_level = 0.0);

/// Forward characteristic y' = c0(y) from the boundary point gamma(s). Stops at
/// `stop_time` when given, otherwise at the stop-set tube and completes the
/// path to the stop set by projection.
CharacteristicTrace integrate_forward(double s, const ScaledField& sf,
                                      const IntegrationOptions& opts = {},
                                      std::optional<double> stop_time = std::nullopt);

/// Forward characteristic from an interior point for a T0-duration `duration`.
CharacteristicTrace integrate_forward_from(const Point& x, const ScaledField& sf, double duration,
                                           const IntegrationOptions& opts = {});

struct ArcLengthReport {
  std::size_t n_traces = 0;
  double max_arc_length = 0.0;
  double bound = 0.0;
  bool pass = true;
  std::string warning;
};

/// Compares measured arc lengths against 1 / (beta m0) with relative slack 1e-3.
ArcLengthReport arc_length_bound_check(const std::vector<CharacteristicTrace>& traces, double beta,
                                       double m0);

/// Central finite-difference Jacobian (d_t xi | d_s xi) of the forward map
/// xi(t, s).
Mat2 jacobian_xi(double t, double s, const ScaledField& sf, double h,
                 const IntegrationOptions& opts = {});

/// det D xi signed so that it is positive for either boundary orientation.
double oriented_det(const Mat2& jac, Orientation orientation);

/// Generic RK4 step for y' = f(y).
template <typename Vector, typename F>
Vector rk4_step(const Vector& y, double h, F&& f) {
  const Vector k1 = f(y);
  const Vector k2 = f(Vector(y + 0.5 * h * k1));
  const Vector k3 = f(Vector(y + 0.5 * h * k2));
  const Vector k4 = f(Vector(y + h * k3));
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

}  // namespace charflow
