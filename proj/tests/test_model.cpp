#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "sombrero/grid.hpp"
#include "sombrero/model.hpp"
#include "test_support.hpp"

using namespace sombrero;

namespace {

// Single-branch factor and the full piecewise product, formed directly in
// doubles. Valid while exp(-g s0) stays in range; the tests stay at g <= 6
// and r <= 3.
double phi_direct(const DerivedConstants& dc, double r) {
  const double plus = 2.0 * std::pow(r, dc.k) / (r + 1.0) *
                      std::pow((1.0 + dc.a) / (r + dc.a), dc.k) *
                      std::exp(-dc.g * s0(r));
  const double branch =
      r <= 1.0 ? dc.g_plus + dc.g_minus * std::exp(-branch_exponent(dc.g, r))
               : dc.g_plus + dc.g_minus * std::exp(-4.0 * dc.g / 3.0);
  return plus * branch;
}

double w_direct(const DerivedConstants& dc, double r, Side side) {
  const double g = dc.g, k = dc.k, a = dc.a;
  const double gp = dc.g_plus, gm = dc.g_minus;
  double w = k * a * gm / (r * (r + a)) + k * a * a * g / (r + a) +
             1.0 / ((r + 1.0) * (r + 1.0)) +
             0.5 * k * (k + 1.0) / ((r + a) * (r + a)) +
             k * a / ((r + a) * (r + 1.0));
  if (side == Side::Left) {
    const double denom = gp * std::exp(branch_exponent(g, r)) + gm;
    const double g6 = 2.0 * g * gm / denom;
    w += g6 + g6 * k * a * r / (r + a) - g6 * k * a / (r * (r + a));
  }
  return w;
}

}  // namespace

TEST_CASE("derived constants basic identities") {
  const auto dc = derive_constants(3.0, 2.0, 1.2, 5, 0);
  CHECK(dc.K == Catch::Approx(2.0));
  CHECK(dc.g_plus == Catch::Approx(3.0 + 2.0 / 1.2 + 1.0));
  CHECK(dc.g_minus == Catch::Approx(3.0 - (2.0 / 1.2 + 1.0)));
  CHECK(dc.E0 == Catch::Approx(3.0 * (1.0 + 2.0 * 1.2)));
  CHECK(dc.g_min == Catch::Approx(2.0 / 1.2 + 1.0));
  CHECK(dc.g_max_sq ==
        Catch::Approx((1.0 + 2.0 / 1.2) * (1.0 + 3.0 / 1.2)));
  CHECK(dc.a_min == Catch::Approx(2.0 / (3.0 - 1.0)));
  CHECK(dc.hierarchy_valid);
}

TEST_CASE("a_max matches a bisection of the window equation") {
  for (double k : {0.5, 1.0, 2.0, 3.5}) {
    for (double g : {2.2, 3.0, 4.0}) {
      const auto dc = derive_constants(g, k, 1.0);
      auto h = [&](double a) {
        return g * g - (1.0 + k / a) * (1.0 + (k + 1.0) / a);
      };
      double lo = 1e-6, hi = 50.0;
      REQUIRE(h(lo) < 0.0);
      REQUIRE(h(hi) > 0.0);
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) < 0.0 ? lo : hi) = mid;
      }
      CHECK(dc.a_max == Catch::Approx(0.5 * (lo + hi)).epsilon(1e-10));
    }
  }
}

TEST_CASE("window validity routes through the a-interval") {
  // interior of the window
  CHECK(derive_constants(3.0, 2.0, 1.1).hierarchy_valid);
  // below a_min = 1, above a_max ~ 1.233
  CHECK_FALSE(derive_constants(3.0, 2.0, 0.9).hierarchy_valid);
  CHECK_FALSE(derive_constants(3.0, 2.0, 1.3).hierarchy_valid);
  // weak coupling never qualifies
  CHECK_FALSE(derive_constants(1.0, 2.0, 0.5).hierarchy_valid);
}

TEST_CASE("validate_params rejects malformed tuples") {
  CHECK_THROWS_AS(validate_params({0.0, 3, 0, 0.5}), StructuralError);
  CHECK_THROWS_AS(validate_params({3.0, 1, 0, 0.5}), StructuralError);
  CHECK_THROWS_AS(validate_params({3.0, 3, -1, 0.5}), StructuralError);
  CHECK_THROWS_AS(validate_params({3.0, 3, 0, 0.0}), StructuralError);

  const auto dc = validate_params({3.0, 5, 0, 1.2});
  CHECK(dc.k == Catch::Approx(2.0));
  CHECK(dc.N == 5);
}

TEST_CASE("derive_constants rejects nonpositive g, a and negative k") {
  CHECK_THROWS_AS(derive_constants(-1.0, 2.0, 1.0), StructuralError);
  CHECK_THROWS_AS(derive_constants(3.0, -0.5, 1.0), StructuralError);
  CHECK_THROWS_AS(derive_constants(3.0, 2.0, 0.0), StructuralError);
}

TEST_CASE("trial function matches the direct product form") {
  for (double k : {0.5, 1.0, 2.0, 4.0}) {
    const auto dc = derive_constants(3.0, k, 1.2);
    const TrialFunction phi(dc);
    for (int i = 0; i < 60; ++i) {
      const double r = testsup::uniform(0.01, 3.0);
      const double direct = phi_direct(dc, r);
      const double logmag = phi.log_phi(r);
      CHECK(std::exp(logmag) ==
            Catch::Approx(direct).epsilon(1e-12).margin(0.0));
    }
  }
}

TEST_CASE("trial function log magnitude survives the deep tail") {
  const auto dc = derive_constants(3.0, 2.0, 1.2);
  const TrialFunction phi(dc);
  const double lm = phi.log_phi(12.0);
  CHECK(std::isfinite(lm));
  CHECK(lm < -700.0);  // exp would underflow here
  CHECK(std::isfinite(phi.dlog_phi(12.0)));
}

TEST_CASE("trial function is continuous across the matching radius") {
  const auto dc = derive_constants(3.0, 2.0, 1.2);
  const TrialFunction phi(dc);
  const double eps = 1e-9;
  CHECK(phi.log_phi(1.0 - eps) ==
        Catch::Approx(phi.log_phi(1.0 + eps)).margin(1e-7));
  CHECK(phi.dlog_phi(1.0 - eps) ==
        Catch::Approx(phi.dlog_phi(1.0 + eps)).margin(1e-6));
}

TEST_CASE("log-derivative agrees with a finite difference of log phi") {
  const auto dc = derive_constants(3.0, 1.5, 0.8);
  const TrialFunction phi(dc);
  for (double r : {0.2, 0.7, 1.4, 2.3}) {
    const double h = 1e-6 * std::max(1.0, r);
    const double fd =
        (phi.log_phi(r + h) - phi.log_phi(r - h)) / (2.0 * h);
    CHECK(phi.dlog_phi(r) == Catch::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("trial function at the origin") {
  const auto dc = derive_constants(3.0, 2.0, 1.2);
  const TrialFunction phi(dc);
  CHECK(phi.log_phi(0.0) == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(phi.log_phi(-0.1), DomainError);

  // k = 0 leaves a finite origin value 2 e^{-2g/3} (g_plus + g_minus)
  const auto dc0 = derive_constants(3.0, 0.0, 1.0);
  const TrialFunction phi0(dc0);
  CHECK(std::exp(phi0.log_phi(0.0)) ==
        Catch::Approx(2.0 * std::exp(-2.0 * dc0.g / 3.0) *
                      (dc0.g_plus + dc0.g_minus))
            .epsilon(1e-12));
}

TEST_CASE("residual potential matches the direct term sums") {
  for (double k : {0.5, 2.0, 3.0}) {
    const auto dc = derive_constants(3.0, k, 1.2);
    for (int i = 0; i < 40; ++i) {
      const double r = testsup::uniform(0.02, 0.999);
      const auto t = eval_w(dc, r, Side::Left);
      CHECK(t.w == Catch::Approx(w_direct(dc, r, Side::Left)).epsilon(1e-11));
      // regrouped terms close onto the raw ones
      CHECK(t.wI == Catch::Approx(t.h1 + t.g8).epsilon(1e-9).margin(1e-12));
      CHECK(t.wII + t.wVI ==
            Catch::Approx(t.h2 + t.g6 + t.g7).epsilon(1e-9).margin(1e-12));
    }
    for (int i = 0; i < 40; ++i) {
      const double r = testsup::uniform(1.001, 3.5);
      const auto t = eval_w(dc, r, Side::Right);
      CHECK(t.w == Catch::Approx(w_direct(dc, r, Side::Right)).epsilon(1e-11));
    }
  }
}

TEST_CASE("residual potential stays finite at the origin") {
  const auto dc = derive_constants(3.0, 2.0, 1.2);
  const auto t = eval_w(dc, 0.0, Side::Left);
  CHECK(std::isfinite(t.w));
  // wI(0) = k a g_plus g_minus / a = k g_plus g_minus
  CHECK(t.wI == Catch::Approx(dc.k * dc.g_plus * dc.g_minus).epsilon(1e-12));
  CHECK(t.w > 0.0);
}

TEST_CASE("residual potential side bookkeeping") {
  const auto dc = derive_constants(3.0, 2.0, 1.2);
  CHECK(default_side(0.5) == Side::Left);
  CHECK(default_side(1.5) == Side::Right);
  CHECK_THROWS_AS(eval_w(dc, 1.5, Side::Left), DomainError);
  CHECK_THROWS_AS(eval_w(dc, 0.5, Side::Right), DomainError);
  CHECK_THROWS_AS(eval_w(dc, -1.0, Side::Left), DomainError);
}

TEST_CASE("matching-radius step equals its closed form") {
  for (double k : {0.5, 1.0, 2.0, 2.5, 4.0}) {
    const auto dc = derive_constants(3.0, k, 1.2);
    const double left = eval_w(dc, 1.0, Side::Left).w;
    const double right = eval_w(dc, 1.0, Side::Right).w;
    // left - right cancels down from the w(1) scale, so the difference
    // carries rounding at that scale, not at the step scale
    CHECK(left - right ==
          Catch::Approx(w_jump(dc)).epsilon(1e-13).margin(1e-14 * left));
    if (dc.g_minus > 0.0) CHECK(w_jump(dc) > 0.0);
  }
}

TEST_CASE("residual potential is positive and falling on a dense scan") {
  const auto dc = derive_constants(3.0, 2.0, 1.2);
  GridConfig gc;
  gc.node_count = 10001;
  const auto grid = build_grid(gc, dc.g);
  const auto rep = check_w_properties(dc, grid);
  CHECK(rep.window_valid);
  CHECK(rep.positive_ok);
  CHECK(rep.decreasing_ok);
  CHECK(rep.jump_ok);
  CHECK(rep.all_ok);
}

TEST_CASE("trial function solves its defining equation") {
  const auto dc = derive_constants(3.0, 2.0, 1.2);
  const TrialFunction phi(dc);

  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const double r = testsup::uniform(0.08, 2.8);
    if (std::abs(r - 1.0) < 0.02) continue;  // keep the stencil one-sided
    const double h = 4e-4;
    std::vector<double> xs, lp;
    for (int j = -3; j <= 3; ++j) {
      xs.push_back(r + j * h);
      lp.push_back(phi.log_phi(r + j * h));
    }
    const double base = lp[3];
    std::vector<double> vals(xs.size());
    for (size_t j = 0; j < xs.size(); ++j) vals[j] = std::exp(lp[j] - base);

    const auto wts = testsup::fd_weights(r, xs, 2);
    double d2 = 0.0;
    for (size_t j = 0; j < xs.size(); ++j) d2 += wts[2][j] * vals[j];

    const double w = eval_w(dc, r).w;
    const double centrifugal = 0.5 * dc.k * (dc.k - 1.0) / (r * r);
    const double lhs = -0.5 * d2 +
                       (centrifugal + well_potential(dc.g, r) + w - dc.E0) *
                           vals[3];
    CHECK(std::abs(lhs) / (std::abs(dc.E0) * vals[3]) < 1e-6);
    ++checked;
  }
  CHECK(checked >= 80);
}
