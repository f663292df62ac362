#include "charflow/timefield.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

namespace charflow {

TimeField::TimeField(ScalarFn T, VectorFn grad_T, double q, FieldSource source,
                     std::optional<double> exact_m0)
    : T_(std::move(T)), grad_(std::move(grad_T)), q_(q), source_(source), exact_m0_(exact_m0) {
  if (!(q > 1.0)) throw Error(Errc::InvalidArgument, "exponent q must exceed 1");
}

Vec2 TimeField::normal(const Point& x) const {
  const Vec2 g = grad_T(x);
  const double n = g.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw Error(Errc::DegenerateField, "grad T vanishes");
  return g / n;
}

double transform_time(const TimeField& tf, const Point& x) {
  const double t = tf.T(x);
  if (!(t >= -1e-6 && t <= 1.0 + 1e-6)) {
    std::ostringstream os;
    os << "T = " << t << " outside [0, 1]";
    throw Error(Errc::OutOfDomain, os.str());
  }
  return transformed_level(std::clamp(t, 0.0, 1.0), tf.q());
}

Vec2 grad_T0(const TimeField& tf, const Point& x) {
  const double t = tf.T(x);
  if (1.0 - t < kSigmaFloor) throw Error(Errc::NearStopSet, "inside the stop-set floor");
  return transformed_gradient_factor(std::max(t, 0.0), tf.q()) * tf.grad_T(x);
}

std::vector<Point> sample_points(const Domain& domain, const TimeField& tf, const Sampling& sampling) {
  std::vector<Point> pts;
  const BBox& box = domain.bbox();
  const double h = std::max(box.width(), box.height()) / static_cast<double>(sampling.n);
  const auto nx = static_cast<std::size_t>(std::ceil(box.width() / h - 1e-9));
  const auto ny = static_cast<std::size_t>(std::ceil(box.height() / h - 1e-9));
  for (std::size_t i = 0; i < ny; ++i) {
    for (std::size_t j = 0; j < nx; ++j) {
      const Point x = box.lo + h * Point(j + 0.5, i + 0.5);
      if (domain.contains(x) && !tf.in_sigma_tube(x)) pts.push_back(x);
    }
  }
  if (domain.has_boundary_curve()) {
    const BoundaryCurve& curve = domain.boundary();
    for (std::size_t k = 0; k < sampling.n_boundary; ++k) {
      pts.push_back(curve.position(curve.period_begin() + curve.period() * static_cast<double>(k) /
                                                              static_cast<double>(sampling.n_boundary)));
    }
  }
  return pts;
}

double estimate_m0(const TimeField& tf, const Domain& domain, const Sampling& sampling) {
  double m = std::numeric_limits<double>::infinity();
  for (const Point& x : sample_points(domain, tf, sampling)) {
    const double g = grad_T0(tf, x).norm();
    if (!(g > 0.0)) throw Error(Errc::DegenerateField, "sampled |grad T0| is not positive");
    m = std::min(m, g);
  }
  if (!std::isfinite(m)) throw Error(Errc::DegenerateField, "no samples outside the stop-set tube");
  return 0.9 * m;
}

double check_causality(const TimeField& tf, const TransportField& c, const Domain& domain,
                       const Sampling& sampling) {
  double beta = std::numeric_limits<double>::infinity();
  for (const Point& x : sample_points(domain, tf, sampling)) {
    const double v = c(x).dot(tf.normal(x));
    if (!(v > 0.0)) {
      std::ostringstream os;
      os << "<c, N> = " << v << " at (" << x.x() << ", " << x.y() << ")";
      throw Error(Errc::NotCausal, os.str());
    }
    beta = std::min(beta, v);
  }
  return beta;
}

}  // namespace charflow
