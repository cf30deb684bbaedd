#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "sombrero/grid.hpp"
#include "sombrero/iterate.hpp"
#include "sombrero/quadrature.hpp"
#include "test_support.hpp"

using namespace sombrero;

TEST_CASE("grid honors its structural contract") {
  GridConfig gc;
  const auto grid = build_grid(gc, 3.0);
  REQUIRE(grid.size() == gc.node_count);

  CHECK(grid.nodes.front() > 0.0);
  CHECK(grid.nodes.back() == Catch::Approx(grid.r_max));
  CHECK(grid.pair_right == grid.pair_left + 1);
  CHECK(grid.nodes[grid.pair_left] == 1.0);
  CHECK(grid.nodes[grid.pair_right] == 1.0);
  CHECK(std::count(grid.nodes.begin(), grid.nodes.end(), 1.0) == 2);

  for (int i = 0; i + 1 < grid.size(); ++i) {
    if (i == grid.pair_left) continue;
    CHECK(grid.nodes[i + 1] > grid.nodes[i]);
  }
  // far cutoff rule
  CHECK(2.0 * 3.0 * s0(grid.r_max) >= 60.0 - 1e-9);
}

TEST_CASE("far radius solves the cubic cutoff equation") {
  // independent bisection of (r-1)^2 (r+2) = 30
  double lo = 1.0, hi = 10.0;
  auto h = [](double r) { return (r - 1.0) * (r - 1.0) * (r + 2.0) - 30.0; };
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) < 0.0 ? lo : hi) = mid;
  }
  const double root = 0.5 * (lo + hi);

  const auto grid = build_grid(GridConfig{}, 3.0);
  CHECK(grid.r_max == Catch::Approx(root).epsilon(1e-9));
  CHECK(grid.r_max == Catch::Approx(3.36477).margin(5e-4));
}

TEST_CASE("grid overrides and origin inclusion") {
  GridConfig gc;
  gc.r_max_override = 4.5;
  const auto grid = build_grid(gc, 3.0);
  CHECK(grid.r_max == Catch::Approx(4.5));

  GridConfig go;
  go.include_origin = true;
  const auto origin_grid = build_grid(go, 3.0);
  CHECK(origin_grid.nodes.front() == 0.0);
  CHECK(origin_grid.include_origin);
}

TEST_CASE("grid configuration errors") {
  GridConfig small;
  small.node_count = 100;
  CHECK_THROWS_AS(build_grid(small, 3.0), ConfigError);

  GridConfig tight;
  tight.r_max_override = 1.5;
  CHECK_THROWS_AS(build_grid(tight, 3.0), ConfigError);
}

TEST_CASE("cell integrals refine at high order") {
  auto f = [](double r) {
    return std::exp(-2.0 * (r - 1.2) * (r - 1.2)) * (2.0 + std::sin(3.0 * r));
  };

  GridConfig gc;
  const auto coarse_err = [&](int nodes, QuadRule rule) {
    GridConfig c = gc;
    c.node_count = nodes;
    const auto grid = build_grid(c, 3.0);
    std::vector<double> F(grid.size());
    for (int i = 0; i < grid.size(); ++i) F[i] = f(grid.nodes[i]);
    const double total = sum_cells(cell_integrals(grid, F, rule));
    // the cells cover [first node, r_max]; the sliver below the first node
    // is the engine's analytic head, not the rule's business
    const double ref =
        testsup::gl_integrate(f, grid.nodes.front(), 1.0, 200) +
        testsup::gl_integrate(f, 1.0, grid.r_max, 200);
    return std::abs(total - ref);
  };

  const double e1 = coarse_err(1001, QuadRule::Parabolic);
  const double e2 = coarse_err(2001, QuadRule::Parabolic);
  CHECK(e2 < e1 / 10.0);
  CHECK(e2 < 1e-10);

  const double t1 = coarse_err(1001, QuadRule::Trapezoid);
  CHECK(t1 > e1);  // low order rule trails on the same grid
}

TEST_CASE("cumulative sums agree with the total") {
  const auto grid = build_grid(GridConfig{1001, 60.0, 0.0, false}, 3.0);
  std::vector<double> F(grid.size());
  for (int i = 0; i < grid.size(); ++i)
    F[i] = std::cos(grid.nodes[i]) + 1.5;
  const auto cells = cell_integrals(grid, F, QuadRule::Parabolic);
  const double total = sum_cells(cells);

  const auto fwd = cumulative_forward(cells, 0.0);
  const auto bwd = cumulative_backward(cells);
  REQUIRE(fwd.size() == cells.size() + 1);
  REQUIRE(bwd.size() == cells.size() + 1);
  CHECK(fwd.back() == Catch::Approx(total).epsilon(1e-14));
  CHECK(bwd.front() == Catch::Approx(total).epsilon(1e-14));
  for (size_t i = 0; i < fwd.size(); i += 97)
    CHECK(fwd[i] + bwd[i] == Catch::Approx(total).epsilon(1e-13));

  // the zero-width pair cell contributes nothing
  CHECK(cells[grid.pair_left] == 0.0);

  std::vector<double> bad(grid.size() - 1, 1.0);
  CHECK_THROWS_AS(cell_integrals(grid, bad, QuadRule::Parabolic),
                  StructuralError);
}

TEST_CASE("weighted integral with unit weight measures length") {
  const auto grid = build_grid(GridConfig{2001, 60.0, 0.0, false}, 3.0);
  const int n = grid.size();
  std::vector<double> log_one(n, 0.0), w(n, 0.5);
  const auto pb = make_problem(grid, log_one, w, 1.0, 0.0);

  std::vector<double> F(n, 1.0);
  const int ilo = 150, ihi = 1400;
  const double got = weighted_integral(pb, F, ilo, ihi);
  CHECK(got == Catch::Approx(grid.nodes[ihi] - grid.nodes[ilo])
                   .epsilon(1e-12));
}

TEST_CASE("squared trial-function norm is stable under refinement") {
  const auto dc = derive_constants(3.0, 2.0, 1.2);

  auto norm = [&](int nodes) {
    GridConfig gc;
    gc.node_count = nodes;
    const auto grid = build_grid(gc, dc.g);
    const auto pb = make_radial_problem(dc, grid);
    std::vector<double> one(grid.size(), 1.0);
    return weighted_integral(pb, one);
  };

  const double n4 = norm(4001);
  const double n8 = norm(8001);
  CHECK(n4 > 0.0);
  CHECK(std::isfinite(n4));
  CHECK(std::abs(n8 - n4) / n4 < 1e-8);
}
