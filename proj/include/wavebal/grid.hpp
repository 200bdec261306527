#pragma once

#include "wavebal/types.hpp"

namespace wavebal {

// Uniform periodic 1D cell grid; cell centers x_i = x_min + (i + 1/2) dx.
struct Grid1D {
  double x_min = 0.0;
  double x_max = 1.0;
  int n_cells = 0;

  Grid1D() = default;
  Grid1D(double a, double b, int n) : x_min(a), x_max(b), n_cells(n) {
    if (!(n > 0) || !(b > a))
      throw std::invalid_argument("Grid1D: need x_max > x_min, n_cells > 0");
  }

  double dx() const { return (x_max - x_min) / n_cells; }
  double length() const { return x_max - x_min; }
  double center(int i) const { return x_min + (i + 0.5) * dx(); }
};

// Cumulative trapezoid of cell-center values g, based at x_min with
// value 0 there: out(0) = dx/2 g_0, out(i) = out(i-1) + dx/2 (g_{i-1} + g_i).
// Exact at centers for integrands affine in x up to the constant O(dx^2)
// shift from the first half cell.
inline Mat cumulative_from_xmin(const Mat& g, double dx) {
  Mat out(g.rows(), g.cols());
  if (g.cols() == 0) return out;
  out.col(0) = 0.5 * dx * g.col(0);
  for (int i = 1; i < g.cols(); ++i)
    out.col(i) = out.col(i - 1) + 0.5 * dx * (g.col(i - 1) + g.col(i));
  return out;
}

// Total accumulated integral over one period (the seam jump of the
// antiderivative).
inline Vec cumulative_total(const Mat& g, const Mat& cumulative, double dx) {
  const int last = static_cast<int>(g.cols()) - 1;
  return cumulative.col(last) + 0.5 * dx * g.col(last);
}

}  // namespace wavebal
