#include "charflow/builtins.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace charflow {

namespace {

constexpr double kPi = std::numbers::pi;

double wrap_angle(double a) {
  a = std::fmod(a, 2 * kPi);
  return a < 0 ? a + 2 * kPi : a;
}

BoundaryCurve unit_circle() {
  return BoundaryCurve(
      0.0, 2 * kPi, [](double s) -> Point { return {std::cos(s), std::sin(s)}; },
      [](double s) -> Vec2 { return {-std::sin(s), std::cos(s)}; }, Orientation::CounterClockwise, 1024,
      [](const Point& x) -> BoundaryProjection {
        const double r = x.norm();
        if (r == 0.0) return {0.0, 1.0};
        return {wrap_angle(std::atan2(x.y(), x.x())), std::abs(r - 1.0)};
      });
}

// Distance to the segment [-1/2, 1/2] x {0} and its foot point.
Point segment_foot(const Point& x) { return {std::clamp(x.x(), -0.5, 0.5), 0.0}; }

Vec2 away_from_segment(const Point& x) {
  const Vec2 v = x - segment_foot(x);
  const double d = v.norm();
  if (d == 0.0) return Vec2::Zero();
  return v / d;
}

StopSet unit_segment() { return StopSet::from_arcs({StopArc::segment({-0.5, 0.0}, {0.5, 0.0})}); }

// Stadium boundary, counter-clockwise by arc length from (-1/2, -1/2).
constexpr double kHalfCap = kPi / 2;
constexpr double kStadiumPeriod = 2.0 + kPi;

Point stadium_position(double u) {
  if (u < 1.0) return {-0.5 + u, -0.5};
  if (u < 1.0 + kHalfCap) {
    const double phi = -kPi / 2 + 2.0 * (u - 1.0);
    return {0.5 + 0.5 * std::cos(phi), 0.5 * std::sin(phi)};
  }
  if (u < 2.0 + kHalfCap) return {0.5 - (u - 1.0 - kHalfCap), 0.5};
  const double phi = kPi / 2 + 2.0 * (u - 2.0 - kHalfCap);
  return {-0.5 + 0.5 * std::cos(phi), 0.5 * std::sin(phi)};
}

Vec2 stadium_tangent(double u) {
  if (u < 1.0) return {1.0, 0.0};
  if (u < 1.0 + kHalfCap) {
    const double phi = -kPi / 2 + 2.0 * (u - 1.0);
    return {-std::sin(phi), std::cos(phi)};
  }
  if (u < 2.0 + kHalfCap) return {-1.0, 0.0};
  const double phi = kPi / 2 + 2.0 * (u - 2.0 - kHalfCap);
  return {-std::sin(phi), std::cos(phi)};
}

BoundaryProjection stadium_project(const Point& x) {
  const Point foot = segment_foot(x);
  Vec2 v = x - foot;
  double r = v.norm();
  if (r == 0.0) {
    v = Vec2(0.0, -1.0);
  } else {
    v /= r;
  }
  const double dist = std::abs(r - 0.5);
  if (x.x() >= -0.5 && x.x() <= 0.5) {
    if (v.y() < 0) return {x.x() + 0.5, dist};
    return {1.0 + kHalfCap + (0.5 - x.x()), dist};
  }
  double phi = std::atan2(v.y(), v.x());
  if (x.x() > 0.5) return {1.0 + (phi + kPi / 2) / 2.0, dist};
  if (phi < 0) phi += 2 * kPi;
  return {2.0 + kHalfCap + (phi - kPi / 2) / 2.0, dist};
}

}  // namespace

BuiltinGeometry builtin_geometry(const std::string& name, double q) {
  if (!(q > 1.0)) throw Error(Errc::InvalidArgument, "q must exceed 1");
  const BBox unit_box{{-1.0, -1.0}, {1.0, 1.0}};
  auto in_disk = [](const Point& x) { return x.squaredNorm() <= 1.0; };
  if (name == "disk") {
    auto domain = std::make_shared<Domain>("disk", unit_circle(), StopSet::isolated_point(Point::Zero()),
                                           unit_box, in_disk);
    auto tf = std::make_shared<TimeField>(
        [](const Point& x) { return 1.0 - x.norm(); },
        [](const Point& x) -> Vec2 {
          const double r = x.norm();
          return r > 0 ? Vec2(-x / r) : Vec2::Zero();
        },
        q, FieldSource::Analytic, 1.0 / q);
    return {domain, tf};
  }
  if (name == "disk-segment") {
    auto domain = std::make_shared<Domain>("disk-segment", unit_circle(), unit_segment(), unit_box, in_disk);
    auto tf = std::make_shared<TimeField>(
        [](const Point& x) {
          const double db = 1.0 - x.norm();
          const double ds = (x - segment_foot(x)).norm();
          return db / (ds + db);
        },
        [](const Point& x) -> Vec2 {
          const double r = x.norm();
          const double db = 1.0 - r;
          const double ds = (x - segment_foot(x)).norm();
          const Vec2 gb = r > 0 ? Vec2(-x / r) : Vec2::Zero();
          const Vec2 gs = away_from_segment(x);
          const double sum = ds + db;
          return (ds * gb - db * gs) / (sum * sum);
        },
        q, FieldSource::Analytic);
    return {domain, tf};
  }
  if (name == "rect-skeleton") {
    BoundaryCurve curve(0.0, kStadiumPeriod, stadium_position, stadium_tangent,
                        Orientation::CounterClockwise, 1024, stadium_project);
    auto domain = std::make_shared<Domain>(
        "rect-skeleton", std::move(curve), unit_segment(), BBox{{-1.0, -0.5}, {1.0, 0.5}},
        [](const Point& x) { return (x - segment_foot(x)).norm() <= 0.5; });
    auto tf = std::make_shared<TimeField>(
        [](const Point& x) { return 1.0 - 2.0 * (x - segment_foot(x)).norm(); },
        [](const Point& x) -> Vec2 { return -2.0 * away_from_segment(x); }, q, FieldSource::Analytic,
        2.0 / q);
    return {domain, tf};
  }
  throw Error(Errc::InvalidArgument, "unknown built-in domain '" + name + "'");
}

std::string default_field(const std::string& domain) {
  if (domain == "disk") return "radial";
  if (domain == "disk-segment" || domain == "rect-skeleton") return "nearest";
  throw Error(Errc::InvalidArgument, "unknown built-in domain '" + domain + "'");
}

TransportField builtin_field(const std::string& domain, const std::string& field, double theta) {
  if (domain == "disk") {
    auto inward = [](const Point& x) -> Vec2 {
      const double r = x.norm();
      return r > 0 ? Vec2(-x / r) : Vec2::Zero();
    };
    if (field == "radial") return {inward, 1.0, "radial"};
    if (field == "spiral") {
      return {[inward, theta](const Point& x) -> Vec2 { return rotate(inward(x), theta); },
              std::cos(theta), "spiral"};
    }
  }
  if ((domain == "disk-segment" || domain == "rect-skeleton") && (field == "nearest" || field == "vertical")) {
    // On the disk the infimum of <c, N> is attained at the boundary points
    // above the segment ends, where it equals cos(pi/6).
    const double beta = domain == "disk-segment" ? std::sqrt(3.0) / 2.0 : 1.0;
    return {[](const Point& x) -> Vec2 { return -away_from_segment(x); }, beta, "nearest"};
  }
  throw Error(Errc::InvalidArgument, "unknown field '" + field + "' for domain '" + domain + "'");
}

BoundaryData builtin_data(const std::string& name, const Domain& domain, double value) {
  if (name == "const") return BoundaryData::constant(value);
  if (name == "zero") return BoundaryData::constant(0.0);
  const BoundaryCurve& curve = domain.boundary();
  if (name == "cos") {
    return BoundaryData::from_point_function(
        curve, [](const Point& y) { return y.x() / y.norm(); }, 1.0, 4.0);
  }
  if (name == "step") {
    return BoundaryData::from_point_function(
        curve, [](const Point& y) { return y.y() > 0 ? 1.0 : 0.0; }, 1.0, 2.0);
  }
  throw Error(Errc::InvalidArgument, "unknown boundary data '" + name + "'");
}

Rhs builtin_rhs(const std::string& name) {
  if (name == "zero") return Rhs::constant(0.0);
  if (name == "one") return Rhs::constant(1.0);
  throw Error(Errc::InvalidArgument, "unknown right-hand side '" + name + "'");
}

LinearProblem make_problem(const BuiltinCase& spec) {
  const BuiltinGeometry geo = builtin_geometry(spec.domain, spec.q);
  LinearProblem p;
  p.domain = geo.domain;
  p.tf = geo.tf;
  p.c = builtin_field(spec.domain, spec.field.empty() ? default_field(spec.domain) : spec.field, spec.theta);
  p.f = builtin_rhs(spec.rhs);
  p.u0 = builtin_data(spec.data, *geo.domain, spec.const_value);
  p.opts.step = spec.step;
  return finalize(std::move(p));
}

std::vector<std::string> builtin_domain_names() { return {"disk", "disk-segment", "rect-skeleton"}; }

}  // namespace charflow
