#pragma once

#include <functional>

#include "wavebal/grid.hpp"
#include "wavebal/system.hpp"
#include "wavebal/types.hpp"

namespace wavebal {

// Frozen seam offsets: how the initial profile continues across the
// periodic seam. Zero for genuinely periodic data; for non-periodic data
// (e.g. the exponential steady state of the balance law) they carry the
// structural jump so ghost cells see the line continuation instead of the
// wrap. Columns indexed by ghost depth.
struct SeamOffsets {
  Mat u_right;  // n x depth, ghost g sits at x_max + (g + 1/2) dx
  Mat u_left;   // n x depth, ghost k sits at x_min - (k + 1/2) dx

  static SeamOffsets zero(int n, int depth = 2) {
    SeamOffsets s;
    s.u_right = Mat::Zero(n, depth);
    s.u_left = Mat::Zero(n, depth);
    return s;
  }

  bool trivial() const {
    return u_right.isZero(0.0) && u_left.isZero(0.0);
  }
};

using Profile = std::function<Vec(double)>;

inline SeamOffsets make_seam_offsets(const Grid1D& grid, const Profile& u0,
                                     int n, int depth = 2) {
  SeamOffsets s = SeamOffsets::zero(n, depth);
  const double dx = grid.dx(), L = grid.length();
  for (int g = 0; g < depth; ++g) {
    const double xr = grid.x_max + (g + 0.5) * dx;
    const double xl = grid.x_min - (g + 0.5) * dx;
    s.u_right.col(g) = u0(xr) - u0(xr - L);
    s.u_left.col(g) = u0(xl) - u0(xl + L);
  }
  if (s.u_right.lpNorm<Eigen::Infinity>() < 1e-13 &&
      s.u_left.lpNorm<Eigen::Infinity>() < 1e-13)
    return SeamOffsets::zero(n, depth);
  return s;
}

// Discrete pair (u, v) on the grid plus the cached global term.
struct RelaxationField {
  Mat u;  // n x n_cells
  Mat v;  // n x n_cells
  Mat r;  // n x n_cells, global term at cell centers
  double time = 0.0;

  int n() const { return static_cast<int>(u.rows()); }
  int cells() const { return static_cast<int>(u.cols()); }
};

inline Mat apply_cellwise(const VecFn& f, const Mat& u) {
  Mat out(u.rows(), u.cols());
  for (int i = 0; i < u.cols(); ++i) out.col(i) = f(u.col(i));
  return out;
}

// Global term at cell centers: trapezoid antiderivative of G(u) from
// x_min with R(x_min) = 0.
inline Mat compute_global_term(const SystemDefinition& sys, const Mat& u,
                               const Grid1D& grid) {
  return cumulative_from_xmin(apply_cellwise(sys.source, u), grid.dx());
}

// Well-prepared initial data: u from the midpoint rule, v on the
// relaxation equilibrium manifold v = F(u) - R. The alternative model's
// equilibrium omits R.
inline RelaxationField init_well_prepared(const SystemDefinition& sys,
                                          const Grid1D& grid,
                                          const Profile& u0,
                                          bool with_global_term = true) {
  RelaxationField f;
  f.u.resize(sys.n, grid.n_cells);
  for (int i = 0; i < grid.n_cells; ++i) {
    const Vec ui = u0(grid.center(i));
    if (!all_finite(ui))
      throw std::invalid_argument(
          "init_well_prepared: non-finite initial value at x = " +
          std::to_string(grid.center(i)));
    f.u.col(i) = ui;
  }
  f.r = with_global_term ? compute_global_term(sys, f.u, grid)
                         : Mat::Zero(sys.n, grid.n_cells);
  f.v = apply_cellwise(sys.flux, f.u) - f.r;
  f.time = 0.0;
  return f;
}

// ---------------------------------------------------------------------------
// Ghosted view. Interior cells are wrapped periodically; u picks up the
// frozen seam offsets and v the current jump of the global term, so the
// stencils see the quasi-periodic structure v ~ F(u) - R with
// R(x + L) = R(x) + closed-loop integral of G. The antiderivative is
// continued across the seam by the same trapezoid rule (this is the
// affine extension of R over the seam ghost cells).
// ---------------------------------------------------------------------------
struct GhostView {
  static constexpr int depth = 2;
  Mat u;  // n x (cells + 2 depth)
  Mat v;
  int cells = 0;

  // Access by interior index i in [-depth, cells + depth).
  Eigen::Block<const Mat> interior_u() const {
    return u.block(0, depth, u.rows(), cells);
  }
};

inline GhostView build_ghosts(const SystemDefinition& sys, const Grid1D& grid,
                              const Mat& u, const Mat& v, const Mat& r,
                              const SeamOffsets& seam,
                              bool with_global_term = true) {
  const int n = static_cast<int>(u.rows());
  const int N = static_cast<int>(u.cols());
  const int d = GhostView::depth;
  const double dx = grid.dx();

  GhostView g;
  g.cells = N;
  g.u.resize(n, N + 2 * d);
  g.v.resize(n, N + 2 * d);
  g.u.block(0, d, n, N) = u;
  g.v.block(0, d, n, N) = v;

  Vec total = Vec::Zero(n);
  if (with_global_term) {
    total = r.col(N - 1) + 0.5 * dx * sys.source(u.col(N - 1));
  }

  // right ghosts, partners are the first interior cells
  Vec r_ext = total;
  Vec g_prev;  // source at previous ghost (start value set below)
  for (int k = 0; k < d; ++k) {
    const Vec up = u.col(k);
    const Vec ug = up + seam.u_right.col(k);
    g.u.col(d + N + k) = ug;
    Vec vg = v.col(k);
    if (with_global_term) {
      const Vec gk = sys.source(ug);
      if (k == 0)
        r_ext += 0.5 * dx * gk;
      else
        r_ext += 0.5 * dx * (g_prev + gk);
      g_prev = gk;
      vg += sys.flux(ug) - sys.flux(up) - (r_ext - r.col(k));
    } else {
      vg += sys.flux(ug) - sys.flux(up);
    }
    g.v.col(d + N + k) = vg;
  }

  // left ghosts, partners are the last interior cells
  Vec r_ext_l = Vec::Zero(n);
  for (int k = 0; k < d; ++k) {
    const Vec up = u.col(N - 1 - k);
    const Vec ug = up + seam.u_left.col(k);
    g.u.col(d - 1 - k) = ug;
    Vec vg = v.col(N - 1 - k);
    if (with_global_term) {
      const Vec gk = sys.source(ug);
      if (k == 0)
        r_ext_l -= 0.5 * dx * gk;
      else
        r_ext_l -= 0.5 * dx * (g_prev + gk);
      g_prev = gk;
      vg += sys.flux(ug) - sys.flux(up) - (r_ext_l - r.col(N - 1 - k));
    } else {
      vg += sys.flux(ug) - sys.flux(up);
    }
    g.v.col(d - 1 - k) = vg;
  }
  return g;
}

// Periodic ghosting for a single cell-array (used by derivative stencils
// on genuinely periodic fields).
inline Mat wrap_ghosts(const Mat& a, int depth = 2) {
  const int n = static_cast<int>(a.rows());
  const int N = static_cast<int>(a.cols());
  Mat out(n, N + 2 * depth);
  out.block(0, depth, n, N) = a;
  for (int k = 0; k < depth; ++k) {
    out.col(depth - 1 - k) = a.col(N - 1 - k);
    out.col(depth + N + k) = a.col(k);
  }
  return out;
}

// Central difference of a ghosted array, returning the interior columns.
inline Mat central_diff(const Mat& ghosted, int cells, double dx) {
  const int n = static_cast<int>(ghosted.rows());
  const int d = (static_cast<int>(ghosted.cols()) - cells) / 2;
  Mat out(n, cells);
  for (int i = 0; i < cells; ++i)
    out.col(i) =
        (ghosted.col(d + i + 1) - ghosted.col(d + i - 1)) / (2.0 * dx);
  return out;
}

inline Mat central_second_diff(const Mat& ghosted, int cells, double dx) {
  const int n = static_cast<int>(ghosted.rows());
  const int d = (static_cast<int>(ghosted.cols()) - cells) / 2;
  Mat out(n, cells);
  for (int i = 0; i < cells; ++i)
    out.col(i) = (ghosted.col(d + i + 1) - 2.0 * ghosted.col(d + i) +
                  ghosted.col(d + i - 1)) /
                 (dx * dx);
  return out;
}

}  // namespace wavebal
