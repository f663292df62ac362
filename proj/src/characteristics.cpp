#include "charflow/characteristics.hpp"

#include <algorithm>
#include <cmath>

namespace charflow {

std::string to_string(EndpointKind kind) {
  switch (kind) {
    case EndpointKind::Boundary: return "boundary";
    case EndpointKind::StopSet: return "stopset";
    case EndpointKind::Level: return "level";
    case EndpointKind::StepLimit: return "step_limit";
  }
  return "unknown";
}

double ScaledField::inverse_rate(const Point& x) const {
  const Point xc = domain_->clamp_inside(x);
  const double rate = c_->c(xc).dot(grad_T0(*tf_, xc));
  if (!(rate > 0.0)) throw Error(Errc::NotCausal, "<c, grad T0> is not positive");
  return 1.0 / rate;
}

Vec2 ScaledField::c0(const Point& x) const {
  const Point xc = domain_->clamp_inside(x);
  const Vec2 c = c_->c(xc);
  const double rate = c.dot(grad_T0(*tf_, xc));
  if (!(rate > 0.0)) throw Error(Errc::NotCausal, "<c, grad T0> is not positive");
  return c / rate;
}

namespace {

// T0 extended past the boundary level so that overshoots stay visible.
double clock_value(const TimeField& tf, const Point& x) {
  return transformed_level(std::min(tf.T(x), 1.0), tf.q());
}

double forward_margin(const TimeField& tf, const IntegrationOptions& opts) {
  return opts.stop_margin > 0 ? opts.stop_margin : 10.0 * std::pow(kSigmaFloor, 1.0 / tf.q());
}

struct MarchEnd {
  Point y;
  Point prev;
  double last_h = 0.0;
  std::size_t steps = 0;
};

// Integrates y' = dir * c0(y) for `duration` units of the T0 clock. Steps whose
// field evaluation fails or whose clock drifts by more than half a step are
// retried with half the step.
template <typename Visit>
MarchEnd march(const ScaledField& sf, const Point& start, double duration, double dir,
               const IntegrationOptions& opts, Visit&& visit) {
  if (!(opts.step > 0)) throw Error(Errc::InvalidArgument, "step must be positive");
  const std::size_t max_steps =
      opts.max_steps > 0 ? opts.max_steps
                         : static_cast<std::size_t>(std::ceil(10.0 / (opts.beta_m0 * opts.step))) + 64;
  const TimeField& tf = sf.time_field();
  const BBox& box = sf.domain().bbox();
  const double margin = 1e-3 * std::max(box.width(), box.height());
  const bool check_clock = tf.source() == FieldSource::Analytic;
  auto rhs = [&](const Point& y) -> Vec2 { return dir * sf.c0(y); };

  MarchEnd end{start, start, 0.0, 0};
  double tau = 0.0;
  visit(tau, end.y);
  std::size_t attempts = 0;
  while (duration - tau > 1e-14) {
    double h = std::min(opts.step, duration - tau);
    for (;;) {
      if (++attempts > max_steps) throw Error(Errc::StepLimit, "maximum number of steps exceeded");
      bool ok = true;
      Point next;
      try {
        next = rk4_step(end.y, h, rhs);
      } catch (const Error& e) {
        if (e.code() != Errc::NearStopSet && e.code() != Errc::DegenerateField &&
            e.code() != Errc::NotCausal) {
          throw;
        }
        ok = false;
      }
      ok = ok && next.allFinite();
      if (ok && check_clock) {
        // Local clock defect of this step; a large one means the stage points
        // jumped across the stop set.
        const double expected = clock_value(tf, end.y) + dir * h;
        ok = std::abs(clock_value(tf, next) - expected) <= 0.1 * h;
      }
      if (ok) {
        if (!box.contains(next, margin)) throw Error(Errc::LeftDomain, "trajectory left the bounding box");
        end.prev = end.y;
        end.y = next;
        end.last_h = h;
        ++end.steps;
        tau = (duration - tau - h <= 1e-14) ? duration : tau + h;
        visit(tau, end.y);
        break;
      }
      h *= 0.5;
      if (h < 1e-14) throw Error(Errc::NearStopSet, "step size underflow near the stop set");
    }
  }
  return end;
}

// Bisection on the length of the final step so that T0 hits `level` exactly.
Point refine_crossing(const ScaledField& sf, const MarchEnd& end, double level, double dir) {
  const TimeField& tf = sf.time_field();
  if (tf.source() != FieldSource::Analytic || end.last_h <= 0.0) return end.y;
  auto residual = [&](const Point& y) { return dir * (clock_value(tf, y) - level); };
  if (std::abs(residual(end.y)) <= 1e-12) return end.y;
  auto rhs = [&](const Point& y) -> Vec2 { return dir * sf.c0(y); };
  auto at = [&](double h) { return rk4_step(end.prev, h, rhs); };
  double lo = 0.0, hi = 2.0 * end.last_h;
  try {
    if (residual(at(hi)) < 0.0) return end.y;
  } catch (const Error&) {
    return end.y;
  }
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (residual(at(mid)) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return at(0.5 * (lo + hi));
}

}  // namespace

CharacteristicTrace integrate_backward(const Point& x, const ScaledField& sf,
                                       const IntegrationOptions& opts) {
  const TimeField& tf = sf.time_field();
  if (tf.in_sigma_tube(x)) throw Error(Errc::NearStopSet, "start point inside the stop-set tube");
  CharacteristicTrace trace;
  trace.endpoint_kind = EndpointKind::Boundary;
  const double duration = std::max(0.0, transform_time(tf, x));
  const MarchEnd end = march(sf, x, duration, -1.0, opts, [&](double tau, const Point& y) {
    if (!trace.points.empty()) trace.arc_length += (y - trace.points.back()).norm();
    trace.points.push_back(y);
    trace.times.push_back(tau);
  });
  trace.steps = end.steps;
  Point final_point = refine_crossing(sf, end, 0.0, -1.0);
  if (end.steps > 0) {
    const Point& before = trace.points[trace.points.size() - 2];
    trace.arc_length += (final_point - before).norm() - (trace.points.back() - before).norm();
    trace.points.back() = final_point;
  }
  const BoundaryProjection proj = sf.domain().project_to_boundary(final_point);
  trace.boundary_param = proj.s;
  trace.endpoint = final_point;
  trace.arc_length += proj.dist;
  return trace;
}

BackwardSummary backward_summary(const Point& x, const ScaledField& sf, const IntegrationOptions& opts,
                                 const std::function<double(const Point&)>* integrand,
                                 double stop_level) {
  const TimeField& tf = sf.time_field();
  if (tf.in_sigma_tube(x)) throw Error(Errc::NearStopSet, "start point inside the stop-set tube");
  BackwardSummary out;
  out.duration = std::max(0.0, transform_time(tf, x) - stop_level);
  double prev_tau = 0.0, prev_value = 0.0;
  bool first = true;
  const MarchEnd end = march(sf, x, out.duration, -1.0, opts, [&](double tau, const Point& y) {
    if (!integrand) return;
    const double value = (*integrand)(y) * sf.inverse_rate(y);
    if (!first) out.integral += 0.5 * (prev_value + value) * (tau - prev_tau);
    first = false;
    prev_tau = tau;
    prev_value = value;
  });
  out.endpoint = refine_crossing(sf, end, stop_level, -1.0);
  if (stop_level == 0.0) out.boundary_param = sf.domain().project_to_boundary(out.endpoint).s;
  return out;
}

namespace {

CharacteristicTrace forward_from(const Point& x, const ScaledField& sf, double target,
                                 bool to_stopset, const IntegrationOptions& opts) {
  const TimeField& tf = sf.time_field();
  CharacteristicTrace trace;
  const double start_clock = std::max(0.0, transform_time(tf, x));
  const double duration = std::max(0.0, target - start_clock);
  const MarchEnd end = march(sf, x, duration, 1.0, opts, [&](double tau, const Point& y) {
    if (!trace.points.empty()) trace.arc_length += (y - trace.points.back()).norm();
    trace.points.push_back(y);
    trace.times.push_back(tau);
  });
  trace.steps = end.steps;
  if (!to_stopset) {
    trace.endpoint_kind = EndpointKind::Level;
    trace.endpoint = trace.points.back();
    return trace;
  }
  trace.endpoint_kind = EndpointKind::StopSet;
  const StopSet& sigma = sf.domain().stopset();
  const Point last = trace.points.back();
  const Point p = sigma.nearest(last);
  trace.arc_length += (last - p).norm();
  trace.endpoint = p;
  if (!sigma.degenerate()) {
    try {
      trace.side = sf.domain().classify_side(last).side;
    } catch (const Error&) {
      trace.side.reset();
    }
  }
  return trace;
}

}  // namespace

CharacteristicTrace integrate_forward(double s, const ScaledField& sf, const IntegrationOptions& opts,
                                      std::optional<double> stop_time) {
  const Point start = sf.domain().boundary().position(s);
  const double stop_clock = 1.0 - forward_margin(sf.time_field(), opts);
  if (stop_time && *stop_time < stop_clock) return forward_from(start, sf, *stop_time, false, opts);
  return forward_from(start, sf, stop_clock, true, opts);
}

CharacteristicTrace integrate_forward_from(const Point& x, const ScaledField& sf, double duration,
                                           const IntegrationOptions& opts) {
  const double start_clock = std::max(0.0, transform_time(sf.time_field(), x));
  const double stop_clock = 1.0 - forward_margin(sf.time_field(), opts);
  const double target = start_clock + duration;
  if (target < stop_clock) return forward_from(x, sf, target, false, opts);
  return forward_from(x, sf, stop_clock, true, opts);
}

ArcLengthReport arc_length_bound_check(const std::vector<CharacteristicTrace>& traces, double beta,
                                       double m0) {
  ArcLengthReport report;
  report.n_traces = traces.size();
  report.bound = 1.0 / (beta * m0);
  if (traces.empty()) {
    report.warning = "no traces: bound holds vacuously";
    return report;
  }
  for (const auto& t : traces) report.max_arc_length = std::max(report.max_arc_length, t.arc_length);
  report.pass = report.max_arc_length <= report.bound * (1.0 + 1e-3);
  return report;
}

Mat2 jacobian_xi(double t, double s, const ScaledField& sf, double h, const IntegrationOptions& opts) {
  auto xi = [&](double tt, double ss) -> Point {
    return integrate_forward(ss, sf, opts, tt).points.back();
  };
  Mat2 jac;
  jac.col(0) = (xi(t + h, s) - xi(t - h, s)) / (2.0 * h);
  jac.col(1) = (xi(t, s + h) - xi(t, s - h)) / (2.0 * h);
  return jac;
}

double oriented_det(const Mat2& jac, Orientation orientation) {
  const double det = jac.determinant();
  return orientation == Orientation::Clockwise ? det : -det;
}

}  // namespace charflow
