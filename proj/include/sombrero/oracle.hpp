#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sombrero/errors.hpp"
#include "sombrero/grid.hpp"
#include "sombrero/iterate.hpp"
#include "sombrero/model.hpp"

// Independent checks on the iteration engine.
//
// fd_ground_energy solves the radial equation
//   -psi''/2 + [k(k-1)/(2r^2) + V(r)] psi = E psi
// directly: RK4 shooting from both ends of a uniform grid and a bisection
// on an eigenvalue predicate that is exact for simple spectra. Nothing is
// shared with the iteration path beyond the potential itself.
//
// prototype1d_solve runs the same iteration kernel on the half-line
// problem with phi = 2 e^{-g S0(x)} / (1+x) and w = 1/(1+x)^2, whose
// first-shift expansion and geometric convergence bounds are known in
// closed form, so the kernel can be judged against pencil-and-paper
// results.

namespace sombrero {

struct FdConfig {
  int node_count = 24001;  // uniform nodes on [0, r_max]
  double tail_threshold = 60.0;
  double r_max_override = 0.0;
  double bisect_tol = 1e-12;
  double energy_hi = 0.0;  // 0 means start from E0
};

namespace detail {

struct Shot {
  int nodes = 0;        // interior sign changes, both sweeps combined
  double wronskian = 0.0;  // psi_out psi_in' - psi_out' psi_in at the match
};

// One two-sided pass at trial energy E. The outward solution starts from
// the r^k series at the first node past 0.05 (the series keeps the
// irregular r^{1-k} branch out to machine accuracy there); the inward
// solution starts from psi(r_max) = 0, psi' = -1.
inline Shot fd_shot(const DerivedConstants& dc, double E, double h,
                    int node_count, int i_start, int i_match) {
  const double g = dc.g;
  const double kk1 = dc.k * (dc.k - 1.0);
  auto q = [&](double r) {
    const double d = r * r - 1.0;
    return kk1 / (r * r) + g * g * d * d - 2.0 * E;
  };
  auto rk4 = [&](double r, double& psi, double& dpsi, double step) {
    const double k1p = dpsi, k1d = q(r) * psi;
    const double k2p = dpsi + 0.5 * step * k1d,
                 k2d = q(r + 0.5 * step) * (psi + 0.5 * step * k1p);
    const double k3p = dpsi + 0.5 * step * k2d,
                 k3d = q(r + 0.5 * step) * (psi + 0.5 * step * k2p);
    const double k4p = dpsi + step * k3d,
                 k4d = q(r + step) * (psi + step * k3p);
    psi += step / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    dpsi += step / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
  };

  Shot shot;
  int prev_sign = 0;
  auto count_node = [&](double v) {
    const int s = (v > 0.0) - (v < 0.0);
    if (s != 0) {
      if (prev_sign != 0 && s != prev_sign) ++shot.nodes;
      prev_sign = s;
    }
  };

  // outward
  const double r0 = i_start * h;
  const double c2 = (g * g - 2.0 * E) / (2.0 * (2.0 * dc.k + 1.0));
  const double c4 =
      ((g * g - 2.0 * E) * c2 - 2.0 * g * g) / (4.0 * (2.0 * dc.k + 3.0));
  const double c6 = ((g * g - 2.0 * E) * c4 - 2.0 * g * g * c2 + g * g) /
                    (6.0 * (2.0 * dc.k + 5.0));
  const double r2 = r0 * r0;
  double psi = std::pow(r0, dc.k) * (1.0 + r2 * (c2 + r2 * (c4 + r2 * c6)));
  double dpsi = std::pow(r0, dc.k - 1.0) *
                (dc.k + r2 * ((dc.k + 2.0) * c2 +
                              r2 * ((dc.k + 4.0) * c4 +
                                    r2 * (dc.k + 6.0) * c6)));
  prev_sign = 0;
  count_node(psi);
  for (int i = i_start; i < i_match; ++i) {
    rk4(i * h, psi, dpsi, h);
    count_node(psi);
  }
  const double po = psi, dpo = dpsi;

  // inward
  psi = 0.0;
  dpsi = -1.0;
  prev_sign = 0;
  for (int i = node_count - 1; i > i_match; --i) {
    rk4(i * h, psi, dpsi, -h);
    count_node(psi);
  }
  shot.wronskian = po * dpsi - dpo * psi;
  return shot;
}

}  // namespace detail

// Lowest eigenvalue by bisection on the predicate
//   P(E) = [node count >= 1] or [wronskian sign differs from E = 0].
// Node counts alone locate the half-interval Dirichlet eigenvalues, which
// sit above the true one; the wronskian changes sign exactly at the
// eigenvalues, and interlacing keeps the predicate monotone, so the
// false-to-true boundary is the ground energy.
inline double fd_ground_energy(const DerivedConstants& dc,
                               const FdConfig& cfg = {}) {
  if (cfg.node_count < 2000)
    throw ConfigError("fd_ground_energy: node_count must be at least 2000");
  const double r_max = cfg.r_max_override > 0.0
                           ? cfg.r_max_override
                           : tail_radius(cfg.tail_threshold / (2.0 * dc.g));
  if (r_max <= 1.5)
    throw ConfigError("fd_ground_energy: r_max too small");
  const int nc = cfg.node_count;
  const double h = r_max / (nc - 1);
  int i_start = static_cast<int>(std::ceil(0.05 / h));
  i_start = std::max(1, i_start);
  int i_match = static_cast<int>(std::lround(1.0 / h));
  i_match = std::clamp(i_match, i_start + 5, nc - 10);

  auto shot = [&](double E) {
    return detail::fd_shot(dc, E, h, nc, i_start, i_match);
  };

  const double w_base = shot(0.0).wronskian;
  auto predicate = [&](double E) {
    const auto s = shot(E);
    if (s.nodes >= 1) return true;
    return s.wronskian == 0.0 || std::signbit(s.wronskian) !=
                                     std::signbit(w_base);
  };

  double e_hi = cfg.energy_hi > 0.0 ? cfg.energy_hi : dc.E0;
  if (!predicate(e_hi)) {
    e_hi = 2.0 * e_hi + 10.0;
    if (!predicate(e_hi))
      throw NoBracket("fd_ground_energy: no eigenvalue below " +
                      std::to_string(e_hi));
  }
  double e_lo = 0.0;
  if (predicate(e_lo))
    throw NoBracket("fd_ground_energy: predicate already true at E = 0");

  while (e_hi - e_lo > cfg.bisect_tol) {
    const double mid = 0.5 * (e_lo + e_hi);
    (predicate(mid) ? e_hi : e_lo) = mid;
  }
  return 0.5 * (e_lo + e_hi);
}

// Half-line prototype. Identical kernel, known answers.

struct PrototypeConfig {
  int n_max = 6;
  GridConfig grid{4001, 60.0, 0.0, true};
  QuadRule rule = QuadRule::Parabolic;
};

inline Problem make_prototype_problem(double g, const RadialGrid& grid) {
  const int n = grid.size();
  std::vector<double> lp2(n), w(n);
  for (int i = 0; i < n; ++i) {
    const double x = grid.nodes[i];
    lp2[i] = 2.0 * (std::log(2.0) - std::log1p(x) - g * s0(x));
    w[i] = 1.0 / ((1.0 + x) * (1.0 + x));
  }
  return make_problem(grid, std::move(lp2), std::move(w), g, 0.0);
}

struct PrototypeResult {
  double g = 0.0;
  SolveResult run;  // far-normalized passes; convergence flag not used
  std::vector<double> gaps;           // e_1 = shift_1 - 1/4, e_n = diff
  std::vector<double> f0_increments;  // f_n(0) - f_{n-1}(0)
};

// First-shift large-g expansion, through 1/g^2.
inline double prototype_shift1_expansion(double g) {
  return 0.25 + 9.0 / (64.0 * g) + 85.0 / (512.0 * g * g);
}

inline PrototypeResult prototype1d_solve(double g,
                                         const PrototypeConfig& cfg = {}) {
  if (!(g > 2.0))
    throw StructuralError(
        "prototype1d_solve: needs g > 2 for the convergence bounds");
  GridConfig gc = cfg.grid;
  gc.include_origin = true;
  const RadialGrid grid = build_grid(gc, g);
  const Problem pb = make_prototype_problem(g, grid);

  SolveConfig sc;
  sc.rule = cfg.rule;
  sc.tol = 0.0;  // fixed pass count; the gap table needs every pass
  sc.max_iter = std::max(1, cfg.n_max);

  DerivedConstants dc{};
  dc.g = g;
  dc.E0 = g;
  dc.hierarchy_valid = true;
  PrototypeResult out;
  out.g = g;
  out.run = solve_problem(pb, BoundaryCondition::Far, sc, dc);

  const auto& sh = out.run.shifts;
  out.gaps.resize(sh.size());
  for (size_t i = 0; i < sh.size(); ++i)
    out.gaps[i] = i == 0 ? sh[0] - 0.25 : sh[i] - sh[i - 1];
  out.f0_increments.resize(sh.size());
  for (size_t i = 0; i < sh.size(); ++i)
    out.f0_increments[i] =
        out.run.f_history[i + 1].front() - out.run.f_history[i].front();
  return out;
}

struct GapBoundRow {
  int n = 0;
  double gap = 0.0;
  double bound = 0.0;      // (5/24) (9/g)^n
  double f0_increment = 0.0;
  double f0_bound = 0.0;   // (9/g)^n
  bool gap_positive = false;
  bool gap_below = false;
  bool f0_below = false;
};

struct GapBoundReport {
  double g = 0.0;
  std::vector<GapBoundRow> rows;
  bool gaps_all_positive = false;
  bool gaps_all_below = false;
  bool f0_all_below = false;
  bool all_ok = false;
};

inline GapBoundReport check_gap_bounds(const PrototypeResult& pr) {
  GapBoundReport rep;
  rep.g = pr.g;
  rep.gaps_all_positive = true;
  rep.gaps_all_below = true;
  rep.f0_all_below = true;
  const double ratio = 9.0 / pr.g;
  double pw = 1.0;
  for (size_t i = 0; i < pr.gaps.size(); ++i) {
    pw *= ratio;
    GapBoundRow row;
    row.n = static_cast<int>(i) + 1;
    row.gap = pr.gaps[i];
    row.bound = 5.0 / 24.0 * pw;
    row.f0_increment = pr.f0_increments[i];
    row.f0_bound = pw;
    row.gap_positive = row.gap > 0.0;
    row.gap_below = row.gap < row.bound;
    row.f0_below = row.f0_increment < row.f0_bound;
    rep.gaps_all_positive &= row.gap_positive;
    rep.gaps_all_below &= row.gap_below;
    rep.f0_all_below &= row.f0_below;
    rep.rows.push_back(row);
  }
  rep.all_ok =
      rep.gaps_all_positive && rep.gaps_all_below && rep.f0_all_below;
  return rep;
}

}  // namespace sombrero
