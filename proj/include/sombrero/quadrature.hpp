#pragma once

#include <cmath>
#include <vector>

#include "sombrero/errors.hpp"
#include "sombrero/grid.hpp"

namespace sombrero {

enum class QuadRule {
  Trapezoid,  // positive weights, second order
  Parabolic,  // averaged overlapping 3-point parabolas, ~fourth order
};

namespace detail {

// Integral over [a,b] of the quadratic interpolating (x0,f0),(x1,f1),(x2,f2),
// Newton form, [a,b] inside [x0,x2].
inline double quad3_segment(double x0, double x1, double x2, double f0,
                            double f1, double f2, double a, double b) {
  const double d01 = (f1 - f0) / (x1 - x0);
  const double d12 = (f2 - f1) / (x2 - x1);
  const double d012 = (d12 - d01) / (x2 - x0);
  const double ua = a - x0, ub = b - x0;
  const double c = x1 - x0;
  // integral of u(u - c) du
  const double q = (ub * ub * ub - ua * ua * ua) / 3.0 -
                   c * 0.5 * (ub * ub - ua * ua);
  return f0 * (b - a) + d01 * 0.5 * (ub * ub - ua * ua) + d012 * q;
}

}  // namespace detail

// Per-cell integrals of nodal samples F over the grid. Cells never span the
// r = 1 pair; the zero-width pair cell integrates to zero. The parabolic
// rule averages the two 3-point interpolants overlapping each cell and
// falls back to the one available at panel edges.
inline std::vector<double> cell_integrals(const RadialGrid& grid,
                                          const std::vector<double>& F,
                                          QuadRule rule) {
  const int n = grid.size();
  if (static_cast<int>(F.size()) != n)
    throw StructuralError("cell_integrals: sample count does not match grid");
  std::vector<double> cells(n > 0 ? n - 1 : 0, 0.0);
  const auto& x = grid.nodes;

  const std::pair<int, int> panels[2] = {{0, grid.pair_left},
                                         {grid.pair_right, n - 1}};
  for (const auto& [b, e] : panels) {
    for (int j = b; j < e; ++j) {
      const double h = x[j + 1] - x[j];
      if (rule == QuadRule::Trapezoid || e - b < 2) {
        cells[j] = 0.5 * h * (F[j] + F[j + 1]);
        continue;
      }
      double acc = 0.0;
      int cnt = 0;
      if (j - 1 >= b) {
        acc += detail::quad3_segment(x[j - 1], x[j], x[j + 1], F[j - 1], F[j],
                                     F[j + 1], x[j], x[j + 1]);
        ++cnt;
      }
      if (j + 2 <= e) {
        acc += detail::quad3_segment(x[j], x[j + 1], x[j + 2], F[j], F[j + 1],
                                     F[j + 2], x[j], x[j + 1]);
        ++cnt;
      }
      cells[j] = acc / cnt;
    }
  }
  return cells;
}

// Running sums over nodes. forward[i] = head + sum of cells left of node i;
// backward[i] = sum of cells right of node i. Long double accumulation keeps
// the summation error below the zero-total-charge budget.
inline std::vector<double> cumulative_forward(const std::vector<double>& cells,
                                              double head = 0.0) {
  std::vector<double> out(cells.size() + 1);
  long double acc = head;
  out[0] = static_cast<double>(acc);
  for (size_t j = 0; j < cells.size(); ++j) {
    acc += cells[j];
    out[j + 1] = static_cast<double>(acc);
  }
  return out;
}

inline std::vector<double> cumulative_backward(
    const std::vector<double>& cells) {
  std::vector<double> out(cells.size() + 1);
  long double acc = 0.0;
  out[cells.size()] = 0.0;
  for (size_t j = cells.size(); j-- > 0;) {
    acc += cells[j];
    out[j] = static_cast<double>(acc);
  }
  return out;
}

inline double sum_cells(const std::vector<double>& cells) {
  long double acc = 0.0;
  for (double c : cells) acc += c;
  return static_cast<double>(acc);
}

inline double sum_abs_cells(const std::vector<double>& cells) {
  long double acc = 0.0;
  for (double c : cells) acc += std::abs(c);
  return static_cast<double>(acc);
}

}  // namespace sombrero
