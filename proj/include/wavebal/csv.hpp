#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "wavebal/field.hpp"
#include "wavebal/functionals.hpp"
#include "wavebal/grid.hpp"
#include "wavebal/harness.hpp"

namespace wavebal {

// Shortest round-trip decimal formatting, stable across runs.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Snapshot CSV: columns x, u_1..u_n, v_1..v_n, R_1..R_n.
inline void write_snapshot_csv(const std::string& file, const Grid1D& grid,
                               const RelaxationField& f) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file);
  const int n = f.n();
  out << "x";
  for (int k = 1; k <= n; ++k) out << ",u_" << k;
  for (int k = 1; k <= n; ++k) out << ",v_" << k;
  for (int k = 1; k <= n; ++k) out << ",R_" << k;
  out << "\n";
  for (int i = 0; i < f.cells(); ++i) {
    out << fmt_double(grid.center(i));
    for (int k = 0; k < n; ++k) out << "," << fmt_double(f.u(k, i));
    for (int k = 0; k < n; ++k) out << "," << fmt_double(f.v(k, i));
    for (int k = 0; k < n; ++k) out << "," << fmt_double(f.r(k, i));
    out << "\n";
  }
}

// Equilibrium snapshot CSV: x, u_1..u_n (prefixed equilibrium_ by callers).
inline void write_equilibrium_csv(const std::string& file, const Grid1D& grid,
                                  const EquilibriumSnapshot& s) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file);
  const int n = static_cast<int>(s.u.rows());
  out << "x";
  for (int k = 1; k <= n; ++k) out << ",u_" << k;
  out << "\n";
  for (int i = 0; i < s.u.cols(); ++i) {
    out << fmt_double(grid.center(i));
    for (int k = 0; k < n; ++k) out << "," << fmt_double(s.u(k, i));
    out << "\n";
  }
}

inline void write_functional_csv(const std::string& file,
                                 const FunctionalTrace& trace) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file);
  out << "t,phi,psi,lyapunov_G,int_R,int_R_rel,energy_residual_L1,"
         "rel_entropy_residual_L1,d1\n";
  for (const auto& r : trace.rows) {
    out << fmt_double(r.t) << "," << fmt_double(r.phi) << ","
        << fmt_double(r.psi) << "," << fmt_double(r.lyapunov_g) << ","
        << fmt_double(r.int_r) << "," << fmt_double(r.int_r_rel) << ","
        << fmt_double(r.energy_residual_l1) << ","
        << fmt_double(r.rel_entropy_residual_l1) << "," << fmt_double(r.d1)
        << "\n";
  }
}

inline void write_table_csv(const std::string& file,
                            const ConvergenceTable& t) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file);
  out << t.param_name << ",error\n";
  for (const auto& r : t.rows)
    out << fmt_double(r.param) << "," << fmt_double(r.error) << "\n";
}

// Plot-ready two-column file (whitespace separated).
inline void write_xy(const std::string& file, const ConvergenceTable& t) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file);
  for (const auto& r : t.rows)
    out << fmt_double(r.param) << " " << fmt_double(r.error) << "\n";
}

}  // namespace wavebal
