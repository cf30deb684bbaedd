#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "sombrero/errors.hpp"
#include "sombrero/model.hpp"

namespace sombrero {

struct GridConfig {
  int node_count = 4001;        // total nodes, including both r = 1 copies
  double tail_threshold = 60.0; // far cutoff from 2 g s0(r_max) >= threshold
  double r_max_override = 0.0;  // > 0 replaces the tail rule
  bool include_origin = false;  // first node at exactly 0 (regular problems only)
};

// Two smooth panels (0,1] and [1,r_max] with a duplicated node at r = 1 so
// one-sided samples of discontinuous integrands stay per panel. Composite
// quadrature never crosses the pair; the zero-width pair cell contributes
// nothing.
struct RadialGrid {
  std::vector<double> nodes;
  int pair_left = -1;   // index of the r = 1 node belonging to the left panel
  int pair_right = -1;  // its duplicate opening the right panel
  double r_max = 0.0;
  bool include_origin = false;

  int size() const { return static_cast<int>(nodes.size()); }
};

// Root of s0(r) = target on r > 1 (s0 is strictly increasing there).
inline double tail_radius(double target) {
  double lo = 1.0, hi = 2.0;
  while (s0(hi) < target) hi *= 2.0;
  for (int it = 0; it < 200 && (hi - lo) > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (s0(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace detail {
// Panel map with vanishing first and second endpoint derivatives, so panel
// totals of the composite rules superconverge and nodes cluster at both
// panel ends.
inline double smooth_ramp(double u) {
  return u - std::sin(2.0 * M_PI * u) / (2.0 * M_PI);
}
}  // namespace detail

inline RadialGrid build_grid(const GridConfig& cfg, double g) {
  if (cfg.node_count < 500)
    throw ConfigError("build_grid: node_count must be >= 500");
  if (!(g > 0.0)) throw StructuralError("build_grid: g must be > 0");

  double r_max = cfg.r_max_override;
  if (r_max <= 0.0) r_max = tail_radius(cfg.tail_threshold / (2.0 * g));
  if (r_max < 2.0)
    throw ConfigError("build_grid: r_max < 2; shorten the tail threshold or override");

  const int n = cfg.node_count;
  int n_left = static_cast<int>(std::lround(n / r_max));
  const int min_panel = 8;
  if (n_left < min_panel) n_left = min_panel;
  if (n_left > n - min_panel) n_left = n - min_panel;
  const int n_right = n - n_left;

  RadialGrid grid;
  grid.nodes.reserve(n);
  grid.include_origin = cfg.include_origin;
  grid.r_max = r_max;

  for (int i = 0; i < n_left; ++i) {
    // include_origin keeps u = 0; otherwise the first node sits strictly
    // inside so 1/r and r^{-2k} factors stay finite.
    const double u = cfg.include_origin
                         ? static_cast<double>(i) / (n_left - 1)
                         : static_cast<double>(i + 1) / n_left;
    grid.nodes.push_back(detail::smooth_ramp(u));
  }
  grid.nodes.back() = 1.0;
  grid.pair_left = n_left - 1;
  grid.pair_right = n_left;

  for (int j = 0; j < n_right; ++j) {
    const double u = static_cast<double>(j) / (n_right - 1);
    grid.nodes.push_back(1.0 + (r_max - 1.0) * detail::smooth_ramp(u));
  }
  grid.nodes.back() = r_max;
  return grid;
}

inline Side node_side(const RadialGrid& grid, int i) {
  return i <= grid.pair_left ? Side::Left : Side::Right;
}

// Scan of the residual potential over a grid: positivity, monotone decrease
// through one-sided slopes (the jump pair excluded), and the r = 1 step
// against its closed form. Outside the sufficient window the booleans are
// reported but not guaranteed.
struct WPropertyReport {
  bool window_valid = false;
  double min_w = 0.0;
  double argmin_r = 0.0;
  double max_slope = 0.0;  // most positive one-sided difference quotient
  double argmax_slope_r = 0.0;
  double jump = 0.0;
  double jump_closed = 0.0;
  double jump_rel_err = 0.0;
  bool positive_ok = false;
  bool decreasing_ok = false;
  bool jump_ok = false;
  bool all_ok = false;
};

inline WPropertyReport check_w_properties(const DerivedConstants& dc,
                                          const RadialGrid& grid) {
  WPropertyReport rep;
  rep.window_valid = dc.hierarchy_valid;

  const int n = grid.size();
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i)
    w[i] = eval_w(dc, grid.nodes[i], node_side(grid, i)).w;

  rep.min_w = w[0];
  rep.argmin_r = grid.nodes[0];
  for (int i = 1; i < n; ++i) {
    if (w[i] < rep.min_w) {
      rep.min_w = w[i];
      rep.argmin_r = grid.nodes[i];
    }
  }

  rep.max_slope = -std::numeric_limits<double>::infinity();
  for (int i = 0; i + 1 < n; ++i) {
    if (i == grid.pair_left) continue;  // zero-width jump cell
    const double dr = grid.nodes[i + 1] - grid.nodes[i];
    if (dr <= 0.0) continue;
    const double slope = (w[i + 1] - w[i]) / dr;
    if (slope > rep.max_slope) {
      rep.max_slope = slope;
      rep.argmax_slope_r = grid.nodes[i];
    }
  }

  rep.jump = w[grid.pair_left] - w[grid.pair_right];
  rep.jump_closed = w_jump(dc);
  rep.jump_rel_err =
      std::abs(rep.jump - rep.jump_closed) / std::abs(rep.jump_closed);

  rep.positive_ok = rep.min_w > 0.0;
  rep.decreasing_ok = rep.max_slope < 1e-10;
  rep.jump_ok = rep.jump_rel_err < 1e-10;
  rep.all_ok = rep.positive_ok && rep.decreasing_ok && rep.jump_ok;
  return rep;
}

}  // namespace sombrero
