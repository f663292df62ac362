#include "charflow/builtins.hpp"
#include "charflow/distance_field.hpp"
#include "charflow/timefield.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace charflow;

namespace {

TimeField constant_T(double value) {
  return TimeField([value](const Point&) { return value; }, [](const Point&) { return Vec2::Zero(); }, 2.0,
                   FieldSource::Analytic);
}

template <typename F>
void expect_error(Errc code, F&& f) {
  try {
    f();
    FAIL("expected " << to_string(code));
  } catch (const Error& e) {
    CHECK(e.code() == code);
  }
}

}  // namespace

TEST_CASE("transformed time at fixed levels") {
  CHECK(transformed_level(0.0, 2.0) == 0.0);
  CHECK(transformed_level(1.0, 2.0) == 1.0);
  CHECK(transformed_level(0.75, 2.0) == doctest::Approx(0.5));
  CHECK(transform_time(constant_T(0.75), Point::Zero()) == doctest::Approx(0.5));
  expect_error(Errc::OutOfDomain, [] { transform_time(constant_T(1.1), Point::Zero()); });
}

TEST_CASE("transformed time is monotone") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    if (a == b) continue;
    for (double q : {1.5, 2.0, 4.0}) CHECK(transformed_level(a, q) < transformed_level(b, q));
  }
}

TEST_CASE("grad T0 on the radial disk") {
  const auto g = builtin_geometry("disk", 2.0);
  const Vec2 a = grad_T0(*g.tf, {0.25, 0.0});
  CHECK(a.norm() == doctest::Approx(1.0));
  CHECK(a.normalized().x() == doctest::Approx(-1.0));
  const Vec2 b = grad_T0(*g.tf, {1.0, 0.0});
  CHECK(b.norm() == doctest::Approx(0.5));
  CHECK(b.normalized().x() == doctest::Approx(-1.0));
  const double r = kSigmaFloor / 2.0;  // 1 - T = floor / 2
  expect_error(Errc::NearStopSet, [&] { grad_T0(*g.tf, {r, 0.0}); });
}

TEST_CASE("grad T0 is parallel to grad T") {
  for (const std::string name : builtin_domain_names()) {
    const auto g = builtin_geometry(name);
    for (const Point& x : sample_points(*g.domain, *g.tf, Sampling{32, 64})) {
      const Vec2 a = grad_T0(*g.tf, x), b = g.tf->grad_T(x);
      if (b.norm() == 0.0) continue;
      CHECK(a.normalized().dot(b.normalized()) >= 1.0 - 1e-9);
    }
  }
}

TEST_CASE("grad T0 blows up at the stop set with the predicted rate") {
  for (double q : {2.0, 3.0, 4.0}) {
    const auto g = builtin_geometry("disk", q);
    const double r0 = 1e-4, r1 = 1e-2;
    const double slope = std::log(grad_T0(*g.tf, {r1, 0}).norm() / grad_T0(*g.tf, {r0, 0}).norm()) / std::log(r1 / r0);
    const double expected = (1.0 - q) / q;
    CHECK(std::abs(slope - expected) <= 0.05 * std::abs(expected));
  }
}

TEST_CASE("time function levels on the built-ins") {
  for (const std::string name : builtin_domain_names()) {
    const auto g = builtin_geometry(name);
    const BoundaryCurve& curve = g.domain->boundary();
    for (int k = 0; k < 64; ++k) {
      CHECK(std::abs(g.tf->T(curve.position(curve.period() * k / 64.0 + curve.period_begin()))) < 1e-9);
    }
    for (const Point& z : g.domain->stopset().samples(32)) CHECK(g.tf->T(z) == doctest::Approx(1.0));
    for (const Point& x : sample_points(*g.domain, *g.tf, Sampling{24, 32})) {
      CHECK(g.tf->T(x) >= -1e-12);
      CHECK(g.tf->T(x) < 1.0);
    }
  }
}

TEST_CASE("m0 estimates") {
  const Sampling s{128, 512};
  const double m2 = estimate_m0(*builtin_geometry("disk", 2.0).tf, *builtin_geometry("disk", 2.0).domain, s);
  CHECK(m2 >= 0.45);
  CHECK(m2 <= 0.5);
  const auto g4 = builtin_geometry("disk", 4.0);
  const double m4 = estimate_m0(*g4.tf, *g4.domain, s);
  CHECK(m4 >= 0.225);
  CHECK(m4 <= 0.25);

  const auto g = builtin_geometry("disk");
  expect_error(Errc::DegenerateField, [&] { estimate_m0(constant_T(0.3), *g.domain, s); });
}

TEST_CASE("causality estimates") {
  const auto g = builtin_geometry("disk");
  const Sampling s{128, 512};
  CHECK(check_causality(*g.tf, builtin_field("disk", "radial"), *g.domain, s) == doctest::Approx(1.0));
  const double spiral = check_causality(*g.tf, builtin_field("disk", "spiral", M_PI / 6), *g.domain, s);
  CHECK(std::abs(spiral - std::cos(M_PI / 6)) <= 0.01);
  TransportField outward{[](const Point& x) -> Vec2 { return x.norm() > 0 ? Vec2(x.normalized()) : Vec2(1, 0); }, 1.0,
                         "outward"};
  expect_error(Errc::NotCausal, [&] { check_causality(*g.tf, outward, *g.domain, s); });
}

TEST_CASE("built-in fields meet their advertised beta") {
  const Sampling s{128, 512};
  for (const std::string name : builtin_domain_names()) {
    const auto g = builtin_geometry(name);
    const TransportField c = builtin_field(name, default_field(name));
    CHECK_MESSAGE(check_causality(*g.tf, c, *g.domain, s) >= c.beta - 1e-6, name);
    for (const Point& x : sample_points(*g.domain, *g.tf, Sampling{32, 64})) {
      CHECK(c(x).norm() == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("distance field from a disk mask") {
  const Eigen::Index n = 64;
  Raster<std::uint8_t> mask = Raster<std::uint8_t>::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) mask(i, j) = std::hypot(i - 31.5, j - 31.5) < 20.0;
  }
  const double h = 1.0 / n;
  const DistanceField df = field_from_distance_grid(mask, h);
  CHECK(df.T.maxCoeff() == doctest::Approx(1.0));
  CHECK(df.T(31, 31) >= 0.97);
  // Cells next to the ring are one spacing away.
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    for (Eigen::Index j = 1; j + 1 < n; ++j) {
      if (!mask(i, j)) continue;
      const bool edge = !mask(i - 1, j) || !mask(i + 1, j) || !mask(i, j - 1) || !mask(i, j + 1);
      if (edge) CHECK(df.T(i, j) <= 1.5 * h / df.max_distance);
    }
  }
}

TEST_CASE("distance field from a rectangle mask has a medial stop set") {
  const Eigen::Index n = 64;
  Raster<std::uint8_t> mask = Raster<std::uint8_t>::Zero(n, n);
  mask.block(20, 8, 24, 48).setOnes();  // rows 20..43, cols 8..55
  const double h = 1.0 / n;
  const DistanceField df = field_from_distance_grid(mask, h);
  // Exact distance to the ring of outside pixel centres.
  auto exact = [](Eigen::Index i, Eigen::Index j) {
    return static_cast<double>(std::min({i - 19, 44 - i, j - 7, 56 - j}));
  };
  REQUIRE(df.sigma.count() > 0);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!df.sigma(i, j)) continue;
      CHECK(std::abs(i - 31.5) <= 1.5);
      CHECK(exact(i, j) >= 12.0 - 1.5);
    }
  }
}

TEST_CASE("distance field errors") {
  expect_error(Errc::EmptyMask, [] { field_from_distance_grid(Raster<std::uint8_t>::Zero(16, 16), 1.0 / 16); });
  Raster<std::uint8_t> two = Raster<std::uint8_t>::Zero(16, 16);
  two.block(2, 2, 4, 4).setOnes();
  two.block(9, 9, 4, 4).setOnes();
  expect_error(Errc::DisconnectedMask, [&] { field_from_distance_grid(two, 1.0 / 16); });
}
