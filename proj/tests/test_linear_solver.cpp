#include "charflow/builtins.hpp"
#include "charflow/bv_analysis.hpp"
#include "charflow/linear_solver.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace charflow;

namespace {

LinearProblem problem(const std::string& domain, const std::string& data = "cos", const std::string& rhs = "zero",
                      const std::string& field = "") {
  BuiltinCase bc;
  bc.domain = domain;
  bc.data = data;
  bc.rhs = rhs;
  bc.field = field;
  return make_problem(bc);
}

}  // namespace

TEST_CASE("pointwise solution on the radial disk") {
  CHECK(evaluate_solution(problem("disk"), {0.25, 0.0}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(evaluate_solution(problem("disk", "zero", "one"), {0.25, 0.0}) == doctest::Approx(0.75).epsilon(1e-9));
  const LinearProblem p = problem("disk");
  for (double s : {0.1, 1.3, 2.9, 4.4}) {
    const Point x = p.domain->boundary().position(s);
    CHECK(evaluate_solution(p, x) == p.u0(s));
  }
}

TEST_CASE("grid solve matches the closed form") {
  const LinearProblem p = problem("disk");
  const GridFunction u = solve_on_grid(p, 128);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < u.grid.ny; ++i) {
    for (Eigen::Index j = 0; j < u.grid.nx; ++j) {
      if (!u.active(i, j)) continue;
      const Point x = u.grid.center(i, j);
      if (x.norm() == 0.0) continue;
      worst = std::max(worst, std::abs(u.values(i, j) - x.x() / x.norm()));
    }
  }
  CHECK(worst <= 2e-3);
}

TEST_CASE("constants are transported exactly") {
  BuiltinCase bc;
  bc.domain = "disk-segment";
  bc.data = "const";
  bc.const_value = 5.0;
  const GridFunction u = solve_on_grid(make_problem(bc), 48);
  for (Eigen::Index i = 0; i < u.grid.ny; ++i) {
    for (Eigen::Index j = 0; j < u.grid.nx; ++j) {
      if (u.active(i, j)) CHECK(u.values(i, j) == 5.0);
    }
  }
}

TEST_CASE("solution map is linear") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  for (const std::string name : builtin_domain_names()) {
    const LinearProblem base = problem(name);
    const double a = coef(rng), b = coef(rng), k = coef(rng);
    auto data = [&](double scale) {
      LinearProblem p = base;
      const BoundaryCurve& curve = p.domain->boundary();
      p.u0 = BoundaryData::from_point_function(curve, [=](const Point& x) { return scale * (a * x.x() + b * x.y() * x.y()); });
      p.f = Rhs::constant(scale * k);
      return p;
    };
    LinearProblem zero_f = data(1.0);
    zero_f.f = Rhs::constant(0.0);
    LinearProblem zero_u = data(1.0);
    zero_u.u0 = BoundaryData::constant(0.0);
    const GridFunction sum = solve_on_grid(data(1.0), 40);
    const GridFunction u1 = solve_on_grid(zero_f, 40);
    const GridFunction u2 = solve_on_grid(zero_u, 40);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < sum.grid.ny; ++i) {
      for (Eigen::Index j = 0; j < sum.grid.nx; ++j) {
        if (sum.active(i, j)) worst = std::max(worst, std::abs(sum.values(i, j) - u1.values(i, j) - u2.values(i, j)));
      }
    }
    CHECK_MESSAGE(worst <= 1e-9, name);
  }
}

TEST_CASE("grid solve rejects tiny resolutions") { CHECK_THROWS_AS(solve_on_grid(problem("disk"), 4), Error); }

TEST_CASE("stop-set tube cells copy their own side") {
  const LinearProblem p = problem("disk-segment", "step", "zero", "vertical");
  const GridFunction u = solve_on_grid(p, 64);
  std::size_t tube = 0;
  for (Eigen::Index i = 0; i < u.grid.ny; ++i) {
    for (Eigen::Index j = 0; j < u.grid.nx; ++j) {
      if (u.mask(i, j) != CellKind::SigmaTube) continue;
      ++tube;
      const int side = side_label(p.domain->stopset(), u.grid.center(i, j));
      if (side > 0) CHECK(u.values(i, j) == 1.0);
      if (side < 0) CHECK(u.values(i, j) == 0.0);
    }
  }
  (void)tube;
}

TEST_CASE("level traces") {
  SUBCASE("radial cos data at lambda 1/2") {
    const LinearProblem p = problem("disk");
    const LevelTrace tr = trace_on_level(p, 0.5, 200);
    REQUIRE(tr.values.size() == 200);
    for (std::size_t k = 0; k < tr.values.size(); ++k) {
      CHECK(transform_time(*p.tf, tr.points[k]) == doctest::Approx(0.5).epsilon(1e-9));
      CHECK(std::abs(tr.values[k] - std::cos(std::atan2(tr.points[k].y(), tr.points[k].x()))) <= 1e-4);
    }
    // Level {T0 = 1/2} is the circle of radius 1/4; 199 equal chords of the open polyline.
    CHECK(tr.arclength.back() == doctest::Approx(199 * 0.5 * std::sin(M_PI / 200)).epsilon(1e-6));
    double var = 0.0;
    for (std::size_t k = 1; k < tr.values.size(); ++k) var += std::abs(tr.values[k] - tr.values[k - 1]);
    CHECK(var <= 4.0 + 1e-9);
  }
  SUBCASE("constant data") {
    BuiltinCase bc;
    bc.data = "const";
    bc.const_value = 2.5;
    for (double v : trace_on_level(make_problem(bc), 0.3, 50).values) CHECK(v == 2.5);
  }
  SUBCASE("lambda outside the admissible range") {
    CHECK_THROWS_AS(trace_on_level(problem("disk"), 0.01, 10), Error);
    CHECK_THROWS_AS(trace_on_level(problem("disk"), 0.99, 10), Error);
  }
}

TEST_CASE("one-sided limits on the stop set") {
  SUBCASE("split data") {
    const LinearProblem p = problem("disk-segment", "step", "zero", "vertical");
    const StopSetTraces tr = traces_on_stopset(p, 0, 50);
    REQUIRE(tr.u_plus.size() == 50);
    for (std::size_t k = 0; k < 50; ++k) {
      CHECK(tr.u_plus[k] == doctest::Approx(1.0));
      CHECK(tr.u_minus[k] == doctest::Approx(0.0));
    }
  }
  SUBCASE("symmetric data") {
    const LinearProblem p = problem("disk-segment", "cos", "zero", "vertical");
    const StopSetTraces tr = traces_on_stopset(p, 0, 50);
    for (std::size_t k = 0; k < 50; ++k) CHECK(std::abs(tr.u_plus[k] - tr.u_minus[k]) <= 1e-3);
  }
  SUBCASE("no samples") {
    const StopSetTraces tr = traces_on_stopset(problem("disk-segment"), 0, 0);
    CHECK(tr.u_plus.empty());
    CHECK(tr.u_minus.empty());
  }
  SUBCASE("isolated point") { CHECK_THROWS_AS(traces_on_stopset(problem("disk"), 0, 10), Error); }
}

TEST_CASE("restart reproduces the direct solve") {
  for (const auto& [data, rhs] : {std::pair{"cos", "zero"}, std::pair{"zero", "one"}, std::pair{"const", "zero"}}) {
    const LinearProblem p = problem("disk", data, rhs);
    const GridSpec grid = GridSpec::cover(p.domain->bbox(), 64);
    const GridFunction direct = solve_on_grid(p, grid);
    const LevelTrace tr = trace_on_level(p, 0.5, 2000);
    const GridFunction restarted = restart_solve(p, 0.5, tr, grid);
    std::size_t cells = 0;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < grid.ny; ++i) {
      for (Eigen::Index j = 0; j < grid.nx; ++j) {
        if (!restarted.active(i, j)) continue;
        CHECK(transform_time(*p.tf, grid.center(i, j)) > 0.5);
        ++cells;
        worst = std::max(worst, std::abs(restarted.values(i, j) - direct.values(i, j)));
      }
    }
    CHECK(cells > 0);
    CHECK_MESSAGE(worst <= 5e-3, data << "/" << rhs);
  }
}

TEST_CASE("L-infinity bound holds with no slack") {
  for (const std::string name : builtin_domain_names()) {
    for (const char* rhs : {"zero", "one"}) {
      const LinearProblem p = problem(name, "step", rhs);
      const GridFunction u = solve_on_grid(p, 40);
      CHECK_MESSAGE(u.max_abs() <= p.linf_bound(), name << "/" << rhs);
    }
  }
}

TEST_CASE("boundary data helpers") {
  const BoundaryData pc = BoundaryData::from_samples({0.0, 1.0, 2.0}, {3.0, -1.0, 7.0}, 0.0, 4.0);
  CHECK(pc(0.5) == 3.0);
  CHECK(pc(1.0) == -1.0);
  CHECK(pc(3.9) == 7.0);
  CHECK(pc(4.2) == 3.0);
  CHECK(BoundaryData::constant(2.0)(123.0) == 2.0);
}
