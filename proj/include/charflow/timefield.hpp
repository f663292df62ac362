#pragma once

#include "charflow/geometry.hpp"
#include "charflow/types.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>

namespace charflow {

enum class FieldSource { Analytic, Grid };

/// Time function T with its gradient and the exponent q of the transformed
/// clock T0 = 1 - (1 - T)^(1/q).
class TimeField {
 public:
  using ScalarFn = std::function<double(const Point&)>;
  using VectorFn = std::function<Vec2(const Point&)>;

  TimeField(ScalarFn T, VectorFn grad_T, double q, FieldSource source,
            std::optional<double> exact_m0 = std::nullopt);

  double T(const Point& x) const { return T_(x); }
  Vec2 grad_T(const Point& x) const { return grad_(x); }
  double q() const { return q_; }
  FieldSource source() const { return source_; }
  /// Analytic lower bound of |grad T0| when the built-in knows it.
  std::optional<double> exact_m0() const { return exact_m0_; }

  /// Level normal N = grad T / |grad T|. Throws DegenerateField where grad T = 0.
  Vec2 normal(const Point& x) const;
  bool in_sigma_tube(const Point& x) const { return 1.0 - T(x) < kSigmaFloor; }

 private:
  ScalarFn T_;
  VectorFn grad_;
  double q_;
  FieldSource source_;
  std::optional<double> exact_m0_;
};

/// Unit transport direction c with its declared causality constant.
struct TransportField {
  std::function<Vec2(const Point&)> c;
  double beta = 1.0;
  std::string name;

  Vec2 operator()(const Point& x) const { return c(x); }
};

template <typename Scalar>
Scalar transformed_level(Scalar t, Scalar q) {
  using std::pow;
  return Scalar(1) - pow(Scalar(1) - t, Scalar(1) / q);
}

/// Factor H with grad T0 = H * grad T, i.e. (1/q) (1 - T)^((1 - q)/q).
template <typename Scalar>
Scalar transformed_gradient_factor(Scalar t, Scalar q) {
  using std::pow;
  return pow(Scalar(1) - t, (Scalar(1) - q) / q) / q;
}

/// T0(x). Throws OutOfDomain when T(x) leaves [0, 1] by more than 1e-6.
double transform_time(const TimeField& tf, const Point& x);

/// grad T0(x). Throws NearStopSet inside the stop-set floor.
Vec2 grad_T0(const TimeField& tf, const Point& x);

struct Sampling {
  std::size_t n = 128;          ///< n x n cell centres over the bounding box
  std::size_t n_boundary = 512;  ///< boundary-curve samples, when the domain has one
};

/// Sample points of cl(Omega) minus the stop-set tube.
std::vector<Point> sample_points(const Domain& domain, const TimeField& tf, const Sampling& sampling);

/// Sampled min |grad T0| reduced by 10%.
double estimate_m0(const TimeField& tf, const Domain& domain, const Sampling& sampling);

/// Sampled min <c, N>. Throws NotCausal when the minimum is not positive.
double check_causality(const TimeField& tf, const TransportField& c, const Domain& domain,
                       const Sampling& sampling);

}  // namespace charflow
