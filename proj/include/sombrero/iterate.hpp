#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sombrero/errors.hpp"
#include "sombrero/grid.hpp"
#include "sombrero/model.hpp"
#include "sombrero/quadrature.hpp"

// Iteration engine. Starting from f_0 = 1, each pass solves
//
//   -(phi^2 f_m')'/2 = (w - shift_m) phi^2 f_{m-1},
//   shift_m = int w phi^2 f_{m-1} / int phi^2 f_{m-1},
//
// with the normalization either f_m(r_max) = 1 (far condition, energies
// approach the ground state from above) or f_m(first node) = 1 (origin
// condition, energies alternate around it). E_m = E0 - shift_m.
//
// The shift definition makes the total charge int (w - shift) phi^2 f
// vanish, so both normalizations integrate the same first-order equation.

namespace sombrero {

enum class BoundaryCondition {
  Far,     // f -> 1 at the last node
  Origin,  // f = 1 at the first node
};

// Discrete problem: nodal log phi^2 and w samples over a grid, with the
// phi^2 weights handled as exp(log - offset) so tail values keep full
// relative precision.
struct Problem {
  RadialGrid grid;
  std::vector<double> log_phi2;
  std::vector<double> w;
  double E0 = 0.0;
  // Leading power p of phi^2 ~ r^p at the origin; closes the integrals
  // over [0, first node] analytically. Ignored when the grid includes 0.
  double head_power = 0.0;

  // derived
  std::vector<double> s;  // exp(log_phi2 - offset)
  double offset = 0.0;
  int peak = 0;  // argmax of log_phi2; accumulation splits here
};

inline Problem make_problem(RadialGrid grid, std::vector<double> log_phi2,
                            std::vector<double> w, double E0,
                            double head_power) {
  const int n = grid.size();
  if (static_cast<int>(log_phi2.size()) != n ||
      static_cast<int>(w.size()) != n)
    throw StructuralError("make_problem: sample count does not match grid");
  Problem pb;
  pb.grid = std::move(grid);
  pb.log_phi2 = std::move(log_phi2);
  pb.w = std::move(w);
  pb.E0 = E0;
  pb.head_power = head_power;

  pb.peak = 0;
  for (int i = 1; i < n; ++i)
    if (pb.log_phi2[i] > pb.log_phi2[pb.peak]) pb.peak = i;
  pb.offset = pb.log_phi2[pb.peak];
  pb.s.resize(n);
  for (int i = 0; i < n; ++i) pb.s[i] = std::exp(pb.log_phi2[i] - pb.offset);
  return pb;
}

inline Problem make_radial_problem(const DerivedConstants& dc,
                                   const RadialGrid& grid) {
  if (grid.include_origin && dc.k > 0.0)
    throw ConfigError("make_radial_problem: grid must exclude the origin");
  const TrialFunction phi(dc);
  const int n = grid.size();
  std::vector<double> lp2(n), w(n);
  for (int i = 0; i < n; ++i) {
    lp2[i] = 2.0 * phi.log_phi(grid.nodes[i]);
    w[i] = eval_w(dc, grid.nodes[i], node_side(grid, i)).w;
  }
  return make_problem(grid, std::move(lp2), std::move(w), dc.E0,
                      2.0 * dc.k);
}

namespace detail {

// [0, first node] closure of int F phi^2 using phi^2 ~ r^p, in s units.
inline double head_integral(const Problem& pb, double F0) {
  if (pb.grid.include_origin) return 0.0;
  const double r0 = pb.grid.nodes.front();
  return F0 * pb.s.front() * r0 / (pb.head_power + 1.0);
}

}  // namespace detail

// int F phi^2 dr over [nodes[ilo], nodes[ihi]] in natural units. The
// default full range includes the analytic [0, first node] head.
inline double weighted_integral(const Problem& pb,
                                const std::vector<double>& F, int ilo,
                                int ihi) {
  const int n = pb.grid.size();
  if (ilo < 0 || ihi >= n || ilo > ihi)
    throw StructuralError("weighted_integral: bad node range");
  if (static_cast<int>(F.size()) != n)
    throw StructuralError("weighted_integral: sample count mismatch");
  std::vector<double> prod(n);
  for (int i = 0; i < n; ++i) prod[i] = F[i] * pb.s[i];
  const auto cells = cell_integrals(pb.grid, prod, QuadRule::Parabolic);
  long double acc = 0.0;
  for (int j = ilo; j < ihi; ++j) acc += cells[j];
  return std::exp(pb.offset) * static_cast<double>(acc);
}

inline double weighted_integral(const Problem& pb,
                                const std::vector<double>& F) {
  const double body = weighted_integral(pb, F, 0, pb.grid.size() - 1);
  return body + std::exp(pb.offset) * detail::head_integral(pb, F.front());
}

namespace detail {

struct ShiftCore {
  std::vector<double> cells_sig;  // per-cell integrals of (w - shift) f s
  double head_sig = 0.0;
  double shift = 0.0;
  double sig_abs = 0.0;  // scale for the zero-charge residual
};

inline ShiftCore shift_core(const Problem& pb, const std::vector<double>& f,
                            QuadRule rule, bool allow_nonpositive = false) {
  const int n = pb.grid.size();
  if (static_cast<int>(f.size()) != n)
    throw StructuralError("energy shift: iterate size mismatch");
  if (!allow_nonpositive)
    for (int i = 0; i < n; ++i)
      if (!(f[i] > 0.0))
        throw NonpositiveIterate(
            "energy shift: iterate must be strictly positive (f <= 0 at r = " +
            std::to_string(pb.grid.nodes[i]) + ")");

  std::vector<double> fs(n), wfs(n);
  for (int i = 0; i < n; ++i) {
    fs[i] = f[i] * pb.s[i];
    wfs[i] = pb.w[i] * fs[i];
  }
  const auto cells_num = cell_integrals(pb.grid, wfs, rule);
  const auto cells_den = cell_integrals(pb.grid, fs, rule);
  const double head_num = head_integral(pb, pb.w.front() * f.front());
  const double head_den = head_integral(pb, f.front());
  const double num = head_num + sum_cells(cells_num);
  const double den = head_den + sum_cells(cells_den);
  if (!(den > 0.0))
    throw NonpositiveIterate("energy shift: nonpositive norm integral");

  ShiftCore core;
  core.shift = num / den;
  core.cells_sig.resize(cells_num.size());
  for (size_t j = 0; j < cells_num.size(); ++j)
    core.cells_sig[j] = cells_num[j] - core.shift * cells_den[j];
  core.head_sig = head_num - core.shift * head_den;
  core.sig_abs = std::abs(core.head_sig) + sum_abs_cells(core.cells_sig) +
                 std::numeric_limits<double>::min();
  return core;
}

// Running integral of the charge, exact at both boundaries: forward partial
// sums serve the origin side, backward sums the far side, switching at the
// phi^2 peak. The switch hides the summation residue where phi^2 is
// largest instead of letting it blow up under division by the tail.
struct ChargeProfile {
  std::vector<double> outward;  // int_0^{r_i} (w - shift) phi^2 f, s units
  std::vector<double> inward;   // int_{r_i}^{r_max} of the same
  double residue = 0.0;         // total charge relative to sum |cells|
};

inline ChargeProfile charge_profile(const Problem& pb, const ShiftCore& core) {
  const auto fwd = cumulative_forward(core.cells_sig, core.head_sig);
  const auto bwd = cumulative_backward(core.cells_sig);
  const int n = pb.grid.size();
  ChargeProfile cp;
  cp.outward.resize(n);
  cp.inward.resize(n);
  for (int i = 0; i < n; ++i) {
    if (i <= pb.peak) {
      cp.outward[i] = fwd[i];
      cp.inward[i] = -fwd[i];
    } else {
      cp.outward[i] = -bwd[i];
      cp.inward[i] = bwd[i];
    }
  }
  cp.residue = std::abs(fwd[n - 1]) / core.sig_abs;
  return cp;
}

}  // namespace detail

inline double compute_energy_shift(const Problem& pb,
                                   const std::vector<double>& f,
                                   QuadRule rule = QuadRule::Parabolic) {
  return detail::shift_core(pb, f, rule).shift;
}

// Diagnostic variant: accepts sign-indefinite iterates (the quadratures are
// well defined either way; only the orderings lose their guarantees).
inline double compute_energy_shift_signed(const Problem& pb,
                                          const std::vector<double>& f,
                                          QuadRule rule = QuadRule::Parabolic) {
  return detail::shift_core(pb, f, rule, true).shift;
}

struct IterationState {
  int m = 0;
  std::vector<double> f;
  double shift = 0.0;
  double zero_charge_residue = 0.0;
  double f_far = 0.0;  // value at the last node
};

// Thrown when the origin-normalized iterate loses positivity; the far end
// goes first as the normalization runs outside its admissible range.
struct BoundaryBreakdown : std::runtime_error {
  BoundaryBreakdown(const std::string& msg, int iteration_, double f_far_)
      : std::runtime_error(msg), iteration(iteration_), f_far(f_far_) {}
  int iteration = -1;
  double f_far = 0.0;
  std::shared_ptr<struct SolveResult> partial;  // attached by solve()
};

inline IterationState step_bc_infinity(const Problem& pb,
                                       const std::vector<double>& f_prev,
                                       QuadRule rule = QuadRule::Parabolic,
                                       bool allow_nonpositive = false) {
  const auto core = detail::shift_core(pb, f_prev, rule, allow_nonpositive);
  const auto cp = detail::charge_profile(pb, core);
  const int n = pb.grid.size();

  std::vector<double> O(n);
  for (int i = 0; i < n; ++i) O[i] = cp.inward[i] / pb.s[i];
  const auto cells = cell_integrals(pb.grid, O, rule);
  const auto tail = cumulative_backward(cells);

  IterationState st;
  st.f.resize(n);
  for (int i = 0; i < n; ++i) st.f[i] = 1.0 - 2.0 * tail[i];
  st.shift = core.shift;
  st.zero_charge_residue = cp.residue;
  st.f_far = st.f.back();
  if (!allow_nonpositive)
    for (int i = 0; i < n; ++i)
      if (!(st.f[i] > 0.0))
        throw NonpositiveIterate(
            "far-normalized step lost positivity at r = " +
            std::to_string(pb.grid.nodes[i]));
  return st;
}

inline IterationState step_bc_origin(const Problem& pb,
                                     const std::vector<double>& f_prev,
                                     QuadRule rule = QuadRule::Parabolic,
                                     bool allow_nonpositive = false) {
  const auto core = detail::shift_core(pb, f_prev, rule, allow_nonpositive);
  const auto cp = detail::charge_profile(pb, core);
  const int n = pb.grid.size();

  std::vector<double> O(n);
  for (int i = 0; i < n; ++i) O[i] = cp.outward[i] / pb.s[i];
  const auto cells = cell_integrals(pb.grid, O, rule);
  // The outward charge is linear in r below the first node, so the [0, r0]
  // closure of the outer integral is a half cell.
  const double outer_head =
      pb.grid.include_origin ? 0.0 : 0.5 * O[0] * pb.grid.nodes.front();
  const auto run = cumulative_forward(cells, outer_head);

  IterationState st;
  st.f.resize(n);
  for (int i = 0; i < n; ++i) st.f[i] = 1.0 - 2.0 * run[i];
  st.shift = core.shift;
  st.zero_charge_residue = cp.residue;
  st.f_far = st.f.back();
  if (!allow_nonpositive) {
    if (!(st.f_far > 0.0))
      throw BoundaryBreakdown(
          "origin normalization broke down: f(r_max) = " +
              std::to_string(st.f_far),
          -1, st.f_far);
    for (int i = 0; i < n; ++i)
      if (!(st.f[i] > 0.0))
        throw BoundaryBreakdown(
            "origin normalization broke down: f <= 0 at r = " +
                std::to_string(pb.grid.nodes[i]),
            -1, st.f_far);
  }
  return st;
}

struct Bracket {
  double lower = 0.0;  // best even-pass energy (below the limit)
  double upper = 0.0;  // best odd-pass energy (above the limit)
  double width() const { return upper - lower; }
};

struct HierarchyReport {
  BoundaryCondition bc = BoundaryCondition::Far;
  bool window_valid = false;
  bool forced_outside_window = false;
  int pairs_checked = 0;  // consecutive-iterate pairs with resolvable change

  // far normalization
  bool shifts_ascending = false;
  bool f_at_least_one = false;
  bool f_increasing_in_m = false;
  bool ratios_decreasing = false;

  // origin normalization
  bool odd_shifts_ascending = false;
  bool even_shifts_descending = false;
  bool even_above_odd = false;
  bool ratio_signs_alternate = false;

  bool all_ok = false;
  std::string note;
};

struct SolveResult {
  DerivedConstants dc;
  BoundaryCondition bc = BoundaryCondition::Far;
  RadialGrid grid;
  std::vector<double> log_phi;  // log phi at nodes, for psi emission

  std::vector<double> shifts;    // shift_m, m = 1..iterations
  std::vector<double> energies;  // E0 - shift_m
  std::vector<std::vector<double>> f_history;  // f_0 = 1 at index 0
  std::vector<double> f_final;
  double E_final = 0.0;
  bool converged = false;
  int iterations = 0;
  double max_zero_charge_residue = 0.0;
  std::optional<Bracket> bracket;  // origin runs with both parities present
  HierarchyReport hierarchy;
};

struct SolveConfig {
  GridConfig grid;
  QuadRule rule = QuadRule::Parabolic;
  double tol = 1e-10;  // stop when |E_m - E_{m-1}| < tol
  int max_iter = 50;
  int min_iter = 0;  // run at least this many passes before the tol stop
  bool force = false;  // run outside the sufficient window anyway
  // Diagnostic: keep iterating through sign-indefinite iterates instead of
  // flagging breakdown. Orderings are no longer guaranteed; never the
  // default.
  bool allow_nonpositive = false;
};

inline HierarchyReport check_hierarchy(const SolveResult& res);

namespace detail {

inline void finish_result(SolveResult& res) {
  res.iterations = static_cast<int>(res.shifts.size());
  if (!res.f_history.empty()) res.f_final = res.f_history.back();
  if (!res.energies.empty()) res.E_final = res.energies.back();
  if (res.bc == BoundaryCondition::Origin) {
    std::optional<double> lo, hi;
    for (size_t j = 0; j < res.energies.size(); ++j) {
      const int m = static_cast<int>(j) + 1;
      if (m % 2 == 0)
        lo = lo ? std::max(*lo, res.energies[j]) : res.energies[j];
      else
        hi = hi ? std::min(*hi, res.energies[j]) : res.energies[j];
    }
    if (lo && hi) res.bracket = Bracket{*lo, *hi};
  }
  res.hierarchy = check_hierarchy(res);
}

}  // namespace detail

// Iterates on an explicit problem. Used directly by the half-line
// prototype; the radial entry point below adds the window gate.
inline SolveResult solve_problem(const Problem& pb, BoundaryCondition bc,
                                 const SolveConfig& cfg,
                                 const DerivedConstants& dc) {
  if (cfg.max_iter < 1)
    throw ConfigError("solve: max_iter must be at least 1");
  SolveResult res;
  res.dc = dc;
  res.bc = bc;
  res.grid = pb.grid;
  res.log_phi.resize(pb.grid.size());
  for (int i = 0; i < pb.grid.size(); ++i)
    res.log_phi[i] = 0.5 * pb.log_phi2[i];

  std::vector<double> f(pb.grid.size(), 1.0);
  res.f_history.push_back(f);

  for (int m = 1; m <= cfg.max_iter; ++m) {
    IterationState st;
    try {
      st = (bc == BoundaryCondition::Far)
               ? step_bc_infinity(pb, f, cfg.rule, cfg.allow_nonpositive)
               : step_bc_origin(pb, f, cfg.rule, cfg.allow_nonpositive);
    } catch (BoundaryBreakdown& bd) {
      bd.iteration = m;
      detail::finish_result(res);
      bd.partial = std::make_shared<SolveResult>(res);
      throw;
    }
    res.shifts.push_back(st.shift);
    res.energies.push_back(pb.E0 - st.shift);
    res.f_history.push_back(st.f);
    res.max_zero_charge_residue =
        std::max(res.max_zero_charge_residue, st.zero_charge_residue);
    f = std::move(st.f);

    if (m >= 2 && m >= cfg.min_iter) {
      const double de =
          std::abs(res.energies[m - 1] - res.energies[m - 2]);
      if (de < cfg.tol) {
        res.converged = true;
        break;
      }
    }
  }
  detail::finish_result(res);
  return res;
}

inline SolveResult solve(const DerivedConstants& dc, BoundaryCondition bc,
                         const SolveConfig& cfg = {}) {
  if (!dc.hierarchy_valid && !cfg.force)
    throw InvalidWindow(
        "solve: (g, k, a) outside the sufficient window; pass force to run "
        "anyway");
  GridConfig gc = cfg.grid;
  gc.include_origin = false;
  const RadialGrid grid = build_grid(gc, dc.g);
  const Problem pb = make_radial_problem(dc, grid);
  SolveResult res = solve_problem(pb, bc, cfg, dc);
  return res;
}

inline HierarchyReport check_hierarchy(const SolveResult& res) {
  HierarchyReport rep;
  rep.bc = res.bc;
  rep.window_valid = res.dc.hierarchy_valid;
  rep.forced_outside_window = !res.dc.hierarchy_valid;
  if (rep.forced_outside_window)
    rep.note = "outside the sufficient window; orderings not guaranteed";

  const auto& hist = res.f_history;
  const auto& sh = res.shifts;
  const int M = static_cast<int>(sh.size());
  if (M == 0) return rep;

  // Consecutive-iterate comparisons are meaningful only while the change
  // exceeds roundoff; late plateau pairs are skipped.
  const double resolve_floor = 1e-9;
  const double slack = 1e-12;

  auto ratio_slope_sign = [&](int m) {
    // +1 nondecreasing beyond slack somewhere, -1 nonincreasing likewise,
    // 0 monotone both ways within slack (flat)
    const auto& fa = hist[m];
    const auto& fb = hist[m + 1];
    double span = 0.0;
    const int n = static_cast<int>(fa.size());
    std::vector<double> ratio(n);
    for (int i = 0; i < n; ++i) {
      ratio[i] = fb[i] / fa[i];
      span = std::max(span, std::abs(ratio[i] - 1.0));
    }
    const double tol = std::max(slack, 1e-9 * span);
    bool up = false, down = false;
    for (int i = 0; i + 1 < n; ++i) {
      if (i == res.grid.pair_left) continue;
      const double d = ratio[i + 1] - ratio[i];
      if (d > tol) up = true;
      if (d < -tol) down = true;
    }
    if (up && down) return 2;  // not monotone
    if (up) return 1;
    if (down) return -1;
    return 0;
  };

  auto resolvable = [&](int m) {
    const auto& fa = hist[m];
    const auto& fb = hist[m + 1];
    double d = 0.0;
    for (size_t i = 0; i < fa.size(); ++i)
      d = std::max(d, std::abs(fb[i] - fa[i]));
    return d > resolve_floor;
  };

  if (res.bc == BoundaryCondition::Far) {
    rep.shifts_ascending = true;
    for (int m = 1; m < M; ++m)
      if (!(sh[m] > sh[m - 1])) rep.shifts_ascending = false;

    rep.f_at_least_one = true;
    for (int m = 1; m <= M; ++m)
      for (double v : hist[m])
        if (v < 1.0 - slack) rep.f_at_least_one = false;

    rep.f_increasing_in_m = true;
    rep.ratios_decreasing = true;
    for (int m = 0; m < M; ++m) {
      if (!resolvable(m)) continue;
      ++rep.pairs_checked;
      for (size_t i = 0; i < hist[m].size(); ++i)
        if (hist[m + 1][i] < hist[m][i] - slack) rep.f_increasing_in_m = false;
      if (ratio_slope_sign(m) > 0) rep.ratios_decreasing = false;
    }
    rep.all_ok = rep.shifts_ascending && rep.f_at_least_one &&
                 rep.f_increasing_in_m && rep.ratios_decreasing;
  } else {
    rep.odd_shifts_ascending = true;
    rep.even_shifts_descending = true;
    std::optional<double> prev_odd, prev_even;
    double max_odd = -std::numeric_limits<double>::infinity();
    double min_even = std::numeric_limits<double>::infinity();
    bool any_even = false;
    for (int m = 1; m <= M; ++m) {
      const double v = sh[m - 1];
      if (m % 2 == 1) {
        if (prev_odd && !(v > *prev_odd)) rep.odd_shifts_ascending = false;
        prev_odd = v;
        max_odd = std::max(max_odd, v);
      } else {
        if (prev_even && !(v < *prev_even)) rep.even_shifts_descending = false;
        prev_even = v;
        min_even = std::min(min_even, v);
        any_even = true;
      }
    }
    rep.even_above_odd = !any_even || (min_even > max_odd);

    rep.ratio_signs_alternate = true;
    for (int m = 0; m < M; ++m) {
      if (!resolvable(m)) continue;
      ++rep.pairs_checked;
      const int sign = ratio_slope_sign(m);
      // even-index source: ratio must fall; odd-index source: must rise
      if (m % 2 == 0 && sign > 0) rep.ratio_signs_alternate = false;
      if (m % 2 == 1 && sign < 0) rep.ratio_signs_alternate = false;
      if (sign == 2) rep.ratio_signs_alternate = false;
    }
    rep.all_ok = rep.odd_shifts_ascending && rep.even_shifts_descending &&
                 rep.even_above_odd && rep.ratio_signs_alternate;
  }
  return rep;
}

}  // namespace sombrero
