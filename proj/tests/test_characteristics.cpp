#include "charflow/builtins.hpp"
#include "charflow/characteristics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace charflow;

namespace {

struct Setup {
  LinearProblem p;
  explicit Setup(const std::string& domain, const std::string& field = "", double step = 1e-3) {
    BuiltinCase bc;
    bc.domain = domain;
    bc.field = field;
    bc.step = step;
    p = make_problem(bc);
  }
  ScaledField sf() const { return p.scaled(); }
};

}  // namespace

TEST_CASE("scaled field makes T0 the clock") {
  for (const std::string name : builtin_domain_names()) {
    Setup s(name);
    const ScaledField sf = s.sf();
    for (const Point& x : sample_points(*s.p.domain, *s.p.tf, Sampling{32, 64})) {
      const Vec2 c0 = sf.c0(x);
      CHECK(c0.dot(grad_T0(*s.p.tf, x)) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(c0.norm() <= 1.0 / (s.p.c.beta * s.p.m0) * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("radial backward characteristic") {
  Setup s("disk");
  const CharacteristicTrace tr = integrate_backward({0.25, 0.0}, s.sf(), s.p.opts);
  CHECK(tr.endpoint_kind == EndpointKind::Boundary);
  CHECK((tr.endpoint - Point(1.0, 0.0)).norm() < 1e-9);
  CHECK(tr.duration() == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(tr.arc_length == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(tr.boundary_param == doctest::Approx(0.0).epsilon(1e-9));
  for (std::size_t k = 1; k < tr.times.size(); ++k) CHECK(tr.times[k] > tr.times[k - 1]);
}

TEST_CASE("backward trace from a boundary point is trivial") {
  Setup s("disk");
  const CharacteristicTrace tr = integrate_backward({0.0, 1.0}, s.sf(), s.p.opts);
  CHECK(tr.points.size() == 1);
  CHECK(tr.duration() == 0.0);
  CHECK(tr.arc_length == 0.0);
}

TEST_CASE("backward trace refuses points in the stop-set tube") {
  Setup s("disk");
  try {
    integrate_backward({1e-12, 0.0}, s.sf(), s.p.opts);
    FAIL("expected NearStopSet");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NearStopSet);
  }
}

TEST_CASE("step limit") {
  Setup s("disk");
  IntegrationOptions opts = s.p.opts;
  opts.max_steps = 3;
  try {
    integrate_backward({0.25, 0.0}, s.sf(), opts);
    FAIL("expected StepLimit");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::StepLimit);
  }
}

TEST_CASE("radial forward characteristic reaches the centre") {
  Setup s("disk");
  const CharacteristicTrace tr = integrate_forward(M_PI / 2, s.sf(), s.p.opts);
  CHECK(tr.endpoint_kind == EndpointKind::StopSet);
  CHECK(tr.endpoint.norm() < 1e-6);
  CHECK(std::abs(tr.points.back().x()) < 1e-9);
  CHECK(tr.arc_length == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("vertical field ends on the plus side of the segment") {
  Setup s("disk-segment", "vertical");
  const CharacteristicTrace tr = integrate_forward(M_PI / 2, s.sf(), s.p.opts);
  CHECK(tr.endpoint_kind == EndpointKind::StopSet);
  REQUIRE(tr.side.has_value());
  CHECK(*tr.side == Side::Plus);
  CHECK((tr.endpoint - Point(0.0, 0.0)).norm() < 1e-6);
  const CharacteristicTrace below = integrate_forward(3 * M_PI / 2, s.sf(), s.p.opts);
  REQUIRE(below.side.has_value());
  CHECK(*below.side == Side::Minus);
}

TEST_CASE("one oversized step still terminates at the crossing") {
  Setup s("disk", "", 0.7);
  const CharacteristicTrace tr = integrate_forward(0.3, s.sf(), s.p.opts);
  CHECK(tr.endpoint_kind == EndpointKind::StopSet);
  CHECK(tr.duration() == doctest::Approx(1.0).epsilon(1e-3));
  const CharacteristicTrace back = integrate_backward({0.3, 0.4}, s.sf(), s.p.opts);
  CHECK(back.duration() == doctest::Approx(transform_time(*s.p.tf, {0.3, 0.4})).epsilon(1e-9));
  CHECK(back.endpoint.norm() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("arc-length bound") {
  SUBCASE("radial") {
    Setup s("disk");
    std::vector<CharacteristicTrace> traces;
    for (int k = 0; k < 64; ++k) traces.push_back(integrate_forward(2 * M_PI * k / 64, s.sf(), s.p.opts));
    const ArcLengthReport r = arc_length_bound_check(traces, s.p.c.beta, s.p.m0);
    CHECK(r.pass);
    CHECK(r.bound == doctest::Approx(2.0));
    CHECK(r.max_arc_length == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("spiral") {
    const double theta = M_PI / 6;
    Setup s("disk", "spiral");
    std::vector<CharacteristicTrace> traces;
    for (int k = 0; k < 64; ++k) traces.push_back(integrate_forward(2 * M_PI * k / 64, s.sf(), s.p.opts));
    const ArcLengthReport r = arc_length_bound_check(traces, std::cos(theta), s.p.m0);
    // Logarithmic spiral r(phi) = exp(-phi / tan(theta)) has length 1 / cos(theta) from r = 1 to 0.
    CHECK(r.pass);
    CHECK(r.bound == doctest::Approx(2.0 / std::cos(theta)));
    CHECK(r.max_arc_length == doctest::Approx(1.0 / std::cos(theta)).epsilon(1e-5));
  }
  SUBCASE("empty list") {
    const ArcLengthReport r = arc_length_bound_check({}, 1.0, 0.5);
    CHECK(r.pass);
    CHECK_FALSE(r.warning.empty());
  }
}

TEST_CASE("clock identity on backward traces") {
  for (const std::string name : builtin_domain_names()) {
    Setup s(name);
    const ScaledField sf = s.sf();
    std::mt19937_64 rng(5);
    const BBox box = s.p.domain->bbox();
    std::uniform_real_distribution<double> ux(box.lo.x(), box.hi.x()), uy(box.lo.y(), box.hi.y());
    double worst = 0.0;
    for (int n = 0; n < 100;) {
      const Point x(ux(rng), uy(rng));
      if (!s.p.domain->contains(x) || s.p.domain->stopset().distance(x) < 1e-3) continue;
      ++n;
      const CharacteristicTrace tr = integrate_backward(x, sf, s.p.opts);
      const double t0 = transform_time(*s.p.tf, x);
      for (std::size_t k = 0; k < tr.points.size(); ++k) {
        worst = std::max(worst, std::abs(transform_time(*s.p.tf, tr.points[k]) - (t0 - tr.times[k])));
      }
    }
    CHECK_MESSAGE(worst <= 1e-6, name);
  }
}

TEST_CASE("forward and backward characteristics agree") {
  for (const std::string name : builtin_domain_names()) {
    Setup s(name);
    const ScaledField sf = s.sf();
    for (const Point& x : {Point(0.31, 0.22), Point(-0.4, -0.17), Point(0.05, 0.3)}) {
      if (!s.p.domain->contains(x)) continue;
      const CharacteristicTrace back = integrate_backward(x, sf, s.p.opts);
      const CharacteristicTrace fwd = integrate_forward(back.boundary_param, sf, s.p.opts, back.duration());
      CHECK_MESSAGE((fwd.points.back() - x).norm() <= 1e-5, name);
    }
  }
}

TEST_CASE("time increases along forward traces") {
  Setup s("disk-segment");
  for (int k = 0; k < 16; ++k) {
    const CharacteristicTrace tr = integrate_forward(2 * M_PI * (k + 0.5) / 16, s.sf(), s.p.opts);
    for (std::size_t m = 1; m + 1 < tr.points.size(); ++m) {
      const double dT = transform_time(*s.p.tf, tr.points[m]) - transform_time(*s.p.tf, tr.points[m - 1]);
      CHECK(dT >= 0.5 * s.p.m0 * s.p.c.beta * (tr.times[m] - tr.times[m - 1]));
    }
  }
}

TEST_CASE("Jacobian of the forward map") {
  Setup s("disk");
  const ScaledField sf = s.sf();
  const double h = 1e-4;
  const Mat2 j = jacobian_xi(0.25, 0.0, sf, h, s.p.opts);
  const double det = oriented_det(j, s.p.domain->boundary().orientation());
  CHECK(det > 0.0);
  // Radial and angular directions are orthogonal: the sandwich is tight.
  const double prod = j.col(0).norm() * j.col(1).norm();
  CHECK(std::abs(prod - det) <= 10 * h);

  Setup sp("disk", "spiral");
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ut(0.05, 0.9), us(0.0, 2 * M_PI);
  for (int k = 0; k < 20; ++k) {
    const Mat2 js = jacobian_xi(ut(rng), us(rng), sp.sf(), h, sp.p.opts);
    const double d = oriented_det(js, Orientation::CounterClockwise);
    const double pr = js.col(0).norm() * js.col(1).norm();
    CHECK(d > 0.0);
    CHECK(d <= pr + 10 * h);
    CHECK(pr <= d / std::cos(M_PI / 6) + 10 * h);
  }
}
