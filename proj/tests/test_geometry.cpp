#include "charflow/builtins.hpp"
#include "charflow/geometry.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace charflow;

namespace {

BoundaryCurve circle(double radius, bool flat_tangent_at_zero = false) {
  return BoundaryCurve(
      0.0, 2.0 * M_PI, [radius](double s) { return Point(radius * std::cos(s), radius * std::sin(s)); },
      [radius, flat_tangent_at_zero](double s) -> Vec2 {
        if (flat_tangent_at_zero && std::abs(s) < 1e-9) return Vec2::Zero();
        return radius * Vec2(-std::sin(s), std::cos(s));
      },
      Orientation::CounterClockwise);
}

StopSet segment() { return StopSet::from_arcs({StopArc::segment({-0.5, 0.0}, {0.5, 0.0})}); }

Domain disk_with(StopSet sigma, bool flat = false) {
  return Domain("test-disk", circle(1.0, flat), std::move(sigma), BBox{{-1, -1}, {1, 1}},
                [](const Point& x) { return x.squaredNorm() <= 1.0; });
}

}  // namespace

TEST_CASE("disk boundary projection") {
  const auto g = builtin_geometry("disk");
  const BoundaryCurve& curve = g.domain->boundary();

  auto check = [&](Point x, Point foot, double dist) {
    const BoundaryProjection p = g.domain->project_to_boundary(x);
    CHECK((curve.position(p.s) - foot).norm() < 1e-9);
    CHECK(p.dist == doctest::Approx(dist).epsilon(1e-9));
  };
  check({2.0, 0.0}, {1.0, 0.0}, 1.0);
  check({0.999, 0.0}, {1.0, 0.0}, 0.001);
  check({0.0, -0.5}, {0.0, -1.0}, 0.5);
}

TEST_CASE("projection of boundary points is the identity") {
  for (const std::string name : {"disk", "disk-segment", "rect-skeleton"}) {
    const auto g = builtin_geometry(name);
    const BoundaryCurve& curve = g.domain->boundary();
    for (int k = 0; k < 97; ++k) {
      const double s = curve.period_begin() + curve.period() * (k + 0.31) / 97.0;
      const Point x = curve.position(s);
      const BoundaryProjection p = g.domain->project_to_boundary(x);
      CHECK(p.dist < 1e-9);
      CHECK((curve.position(p.s) - x).norm() < 1e-9);
    }
  }
}

TEST_CASE("generic curve projection via golden section") {
  // Ellipse without an exact projector; oracle by dense brute force.
  const BoundaryCurve ellipse(
      0.0, 2.0 * M_PI, [](double s) { return Point(2.0 * std::cos(s), std::sin(s)); },
      [](double s) { return Vec2(-2.0 * std::sin(s), std::cos(s)); }, Orientation::CounterClockwise);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int k = 0; k < 50; ++k) {
    const Point x(u(rng), 0.6 * u(rng));
    double best = 1e300;
    for (int i = 0; i < 200000; ++i) {
      const double s = 2.0 * M_PI * i / 200000.0;
      best = std::min(best, (Point(2.0 * std::cos(s), std::sin(s)) - x).norm());
    }
    CHECK(ellipse.project(x).dist == doctest::Approx(best).epsilon(1e-6));
  }
}

TEST_CASE("side classification against a segment") {
  const Domain d = disk_with(segment());
  SUBCASE("plus side") {
    const SideClassification s = d.classify_side({0.0, 0.1});
    CHECK(s.arc == 0);
    CHECK(s.side == Side::Plus);
    CHECK(s.dist == doctest::Approx(0.1));
  }
  SUBCASE("minus side") {
    const SideClassification s = d.classify_side({0.0, -0.1});
    CHECK(s.side == Side::Minus);
    CHECK(s.dist == doctest::Approx(0.1));
  }
  SUBCASE("beyond the end node") {
    try {
      d.classify_side({0.6, 0.0});
      FAIL("expected AmbiguousProjection");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::AmbiguousProjection);
    }
  }
}

TEST_CASE("side flips under reflection through the projection") {
  const Domain d = disk_with(segment());
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ut(-0.45, 0.45), ur(1e-4, 0.09);
  for (int k = 0; k < 500; ++k) {
    const double t = ut(rng), r = ur(rng);
    const Point above(t, r), below(t, -r);
    CHECK(d.classify_side(above).side != d.classify_side(below).side);
  }
}

TEST_CASE("domain validation") {
  SUBCASE("disk with centre point passes") {
    const auto g = builtin_geometry("disk");
    CHECK(validate_domain(*g.domain, 256).all_pass());
  }
  SUBCASE("built-ins pass") {
    for (const std::string name : builtin_domain_names()) {
      CHECK_MESSAGE(validate_domain(*builtin_geometry(name).domain, 256).all_pass(), name);
    }
  }
  SUBCASE("stop set touching the boundary") {
    const Domain d = disk_with(StopSet::from_arcs({StopArc::segment({0.0, 0.0}, {1.0, 0.0})}));
    const ValidationReport r = validate_domain(d, 256);
    REQUIRE(r.find("stop set compactly contained"));
    CHECK_FALSE(r.find("stop set compactly contained")->pass);
  }
  SUBCASE("zero tangent sample") {
    const Domain d = disk_with(StopSet::isolated_point(Point::Zero()), true);
    const ValidationReport r = validate_domain(d, 64);
    CHECK_FALSE(r.find("boundary regularity")->pass);
    CHECK(r.find("stop set compactly contained")->pass);
  }
  SUBCASE("too few samples") { CHECK_THROWS_AS(validate_domain(*builtin_geometry("disk").domain, 8), Error); }
}

TEST_CASE("stop-set structure") {
  const StopSet s = segment();
  CHECK(s.length() == doctest::Approx(1.0));
  CHECK(s.is_tree());
  CHECK(s.component_count() == 1);
  CHECK(s.nodes().size() == 2);
  CHECK(StopSet::isolated_point({0.1, 0.2}).length() == 0.0);

  // A Y-shaped tree: three arcs sharing a branching node.
  const StopSet y = StopSet::from_arcs({StopArc::segment({0, 0}, {0.3, 0}), StopArc::segment({0, 0}, {-0.2, 0.2}),
                                        StopArc::segment({0, 0}, {-0.2, -0.2})});
  CHECK(y.is_tree());
  CHECK(y.length() == doctest::Approx(0.3 + 2.0 * std::sqrt(0.08)));
  // A closed triangle is not a tree.
  const StopSet loop = StopSet::from_arcs({StopArc::segment({0, 0}, {0.3, 0}), StopArc::segment({0.3, 0}, {0, 0.3}),
                                           StopArc::segment({0, 0.3}, {0, 0})});
  CHECK_FALSE(loop.is_tree());
}

TEST_CASE("arc normals are unit and continuous") {
  const auto g = builtin_geometry("disk-segment");
  for (const StopArc& arc : g.domain->stopset().arcs()) {
    Vec2 prev = arc.normal(0.0);
    for (int k = 1; k <= 100; ++k) {
      const Vec2 n = arc.normal(k / 100.0);
      CHECK(n.norm() == doctest::Approx(1.0));
      CHECK((n - prev).norm() < 0.1);
      prev = n;
    }
  }
}

TEST_CASE("polyline boundary") {
  const BoundaryCurve sq = BoundaryCurve::polyline({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  CHECK(sq.period() == doctest::Approx(4.0));
  CHECK(sq.enclosed_area() == doctest::Approx(1.0));
  CHECK(sq.polygon_contains({0.5, 0.5}));
  CHECK_FALSE(sq.polygon_contains({1.5, 0.5}));
  const BoundaryProjection p = sq.project({0.5, 0.2});
  CHECK(p.dist == doctest::Approx(0.2));
}
