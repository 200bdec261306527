#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "wavebal/equilibrium.hpp"
#include "wavebal/functionals.hpp"
#include "wavebal/hypotheses.hpp"
#include "wavebal/solver.hpp"
#include "wavebal/system.hpp"

namespace wavebal {

enum class ErrorMeasure { sup_t_psi, final_l2_vs_exact, residual_l1 };

inline const char* to_string(ErrorMeasure m) {
  switch (m) {
    case ErrorMeasure::sup_t_psi: return "sup_t_Psi";
    case ErrorMeasure::final_l2_vs_exact: return "final_L2_vs_exact";
    case ErrorMeasure::residual_l1: return "residual_L1";
  }
  return "?";
}

struct ConvergenceRow {
  double param = 0.0;
  double error = 0.0;
};

struct ConvergenceTable {
  std::string param_name;  // "eps" or "dx"
  std::vector<ConvergenceRow> rows;  // sorted descending in param
  double slope = 0.0;
  double r2 = 0.0;
  ErrorMeasure error_measure = ErrorMeasure::sup_t_psi;
  bool floor_suspected = false;
  bool degenerate = false;
  bool monotone = true;
};

// Least-squares fit of log(error) against log(param).
inline std::pair<double, double> fit_rate(
    const std::vector<ConvergenceRow>& rows) {
  if (rows.size() < 3)
    throw std::invalid_argument("fit_rate: need at least 3 rows");
  const int m = static_cast<int>(rows.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& r : rows) {
    if (!(r.error > 0.0) || !(r.param > 0.0))
      throw std::invalid_argument("fit_rate: nonpositive entries");
    const double x = std::log(r.param), y = std::log(r.error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    syy += y * y;
  }
  const double denom = m * sxx - sx * sx;
  const double slope = (m * sxy - sx * sy) / denom;
  const double ss_tot = syy - sy * sy / m;
  const double intercept = (sy - slope * sx) / m;
  double ss_res = 0.0;
  for (const auto& r : rows) {
    const double pred = intercept + slope * std::log(r.param);
    ss_res += sqr(std::log(r.error) - pred);
  }
  const double r2 = ss_tot > 1e-30 ? 1.0 - ss_res / ss_tot : 1.0;
  return {slope, r2};
}

inline void finalize_table(ConvergenceTable& t) {
  std::sort(t.rows.begin(), t.rows.end(),
            [](const ConvergenceRow& a, const ConvergenceRow& b) {
              return a.param > b.param;
            });
  t.degenerate = true;
  for (const auto& r : t.rows)
    if (std::abs(r.error) >= 1e-12) t.degenerate = false;
  if (t.degenerate) {
    t.slope = 0.0;
    t.r2 = 0.0;
    return;
  }
  auto [slope, r2] = fit_rate(t.rows);
  t.slope = slope;
  t.r2 = r2;
  t.floor_suspected = r2 < 0.98;
  t.monotone = true;
  for (std::size_t k = 0; k + 1 < t.rows.size(); ++k)
    if (t.rows[k + 1].error > t.rows[k].error * (1.0 + 1e-9))
      t.monotone = false;
}

// ---------------------------------------------------------------------------
// Scenarios: a system with initial data, domain, horizon and the rate
// class the theory predicts for it.
// ---------------------------------------------------------------------------
enum class RateClass {
  general,   // Lipschitz source: slope 2 window
  wd_c2,     // weakly dissipative, C^2 source: slope 2 window
  wd_c0,     // weakly dissipative, C^0 source: at least slope ~1
};

struct Scenario {
  std::string name;
  SystemDefinition sys;
  Grid1D grid;
  Profile u0;
  double t_end = 0.5;
  int order = 2;
  double cfl = 0.45;
  RateClass rate_class = RateClass::general;
  bool reference_exact = false;  // characteristics oracle (linear reaction)
  int reference_refine = 4;
  int snapshot_count = 11;
  std::optional<ManufacturedSolution> mms;
};

inline Scenario builtin_scenario(const std::string& name) {
  Scenario sc;
  sc.name = name;
  if (name == "linear_reaction") {
    sc.sys = make_linear_reaction(1.0, 1.0);
    sc.grid = Grid1D(0.0, 1.0, 2048);
    sc.u0 = [](double x) { return Vec{{std::sin(2.0 * M_PI * x)}}; };
    sc.rate_class = RateClass::general;
    sc.reference_exact = true;
    return sc;
  }
  if (name == "elasticity_damped" || name == "elasticity_ramp") {
    ElasticityOptions opt;
    opt.damping = name == "elasticity_ramp" ? Damping::ramp : Damping::linear;
    sc.sys = make_elasticity(opt);
    sc.grid = Grid1D(0.0, 1.0, 2048);
    sc.u0 = [](double x) {
      Vec w(2);
      w[0] = 0.1 * std::sin(2.0 * M_PI * x);
      w[1] = 0.05 * std::cos(2.0 * M_PI * x);
      return w;
    };
    sc.rate_class =
        name == "elasticity_ramp" ? RateClass::wd_c0 : RateClass::wd_c2;
    return sc;
  }
  if (name == "combustion") {
    sc.sys = make_combustion();
    sc.grid = Grid1D(0.0, 1.0, 512);
    sc.u0 = [](double x) {
      Vec w(3);
      w[0] = 0.1 * std::sin(2.0 * M_PI * x);
      w[1] = 0.1 * std::cos(2.0 * M_PI * x);
      w[2] = 0.5 + 0.45 * std::sin(2.0 * M_PI * x);
      return w;
    };
    sc.rate_class = RateClass::general;
    return sc;
  }
  if (name == "manufactured_linear") {
    sc.sys = make_linear_reaction(1.0, 1.0);
    sc.grid = Grid1D(0.0, 1.0, 256);
    sc.t_end = 0.3;
    ManufacturedSolution mms;
    const double w = 2.0 * M_PI;
    mms.value = [w](double x, double t) {
      return Vec{{std::exp(-0.5 * t) * std::sin(w * (x - t))}};
    };
    mms.d_t = [w](double x, double t) {
      return Vec{{std::exp(-0.5 * t) * (-0.5 * std::sin(w * (x - t)) -
                                        w * std::cos(w * (x - t)))}};
    };
    mms.d_x = [w](double x, double t) {
      return Vec{{std::exp(-0.5 * t) * w * std::cos(w * (x - t))}};
    };
    mms.d_tt = [w](double x, double t) {
      return Vec{{std::exp(-0.5 * t) *
                  ((0.25 - w * w) * std::sin(w * (x - t)) +
                   w * std::cos(w * (x - t)))}};
    };
    mms.d_xx = [w](double x, double t) {
      return Vec{{-std::exp(-0.5 * t) * w * w * std::sin(w * (x - t))}};
    };
    sc.mms = mms;
    sc.u0 = [mms](double x) { return mms.value(x, 0.0); };
    sc.reference_exact = false;
    return sc;
  }
  if (name == "steady_linear_reaction") {
    sc.sys = make_linear_reaction(1.0, 1.0);
    sc.grid = Grid1D(0.0, 1.0, 128);
    sc.t_end = 1.0;
    // steady state of the balance law: a u_x = -lambda u
    sc.u0 = [](double x) { return Vec{{std::exp(-x)}}; };
    return sc;
  }
  throw std::invalid_argument("unknown scenario: " + name);
}

// ---------------------------------------------------------------------------
// Reference solution shared by all runs of one sweep (snapshot times are
// eps-independent targets).
// ---------------------------------------------------------------------------
inline std::vector<double> snapshot_targets(double t_end, int count) {
  std::vector<double> t;
  for (int j = 1; j < count; ++j) t.push_back(t_end * j / (count - 1));
  return t;
}

inline EquilibriumTrace reference_solution(const Scenario& sc,
                                           const Grid1D& grid,
                                           const std::vector<double>& targets) {
  if (sc.reference_exact) {
    EquilibriumConfig cfg;
    cfg.use_exact_linear_reaction = true;
    return solve_balance_law(sc.sys, grid, sc.u0, targets, cfg);
  }
  Grid1D fine(grid.x_min, grid.x_max, grid.n_cells * sc.reference_refine);
  EquilibriumConfig cfg;
  cfg.order = 2;
  cfg.cfl = sc.cfl;
  const EquilibriumTrace ft = solve_balance_law(sc.sys, fine, sc.u0, targets, cfg);
  return restrict_trace(sc.sys, ft, grid);
}

// ---------------------------------------------------------------------------
// eps sweep: well-prepared run + reference solve + sup_t Psi per eps.
// ---------------------------------------------------------------------------
struct EpsRunData {
  double eps = 0.0;
  double sup_psi = 0.0;
  double phi0 = 0.0;
  double sup_phi = 0.0;
  double phi_r0 = 0.0;     // phi + eps int R at t = 0
  double sup_phi_r = 0.0;  // sup_t of the same
  double int_deta_g = 0.0;  // int int |Deta(u) G(u)| dx dt
  SolutionTrace trace;
};

struct EpsSweepResult {
  ConvergenceTable table;
  std::vector<EpsRunData> runs;
  EquilibriumTrace reference;
  RateClass effective_class = RateClass::general;
  bool downgraded = false;  // weak-dissipation gate failed, 5.4 asserted
  double floor_proxy = 0.0;
  double floor_threshold = 0.0;
};

inline EpsRunData run_eps_case(const Scenario& sc, const Grid1D& grid,
                               const EquilibriumTrace& ref, double eps,
                               const RelaxationMatrix& A) {
  SolverConfig cfg(eps, sc.t_end, sc.order);
  cfg.cfl = sc.cfl;
  cfg.snapshots = SnapshotSpec::times(sc.snapshot_count);

  EpsRunData data;
  data.eps = eps;
  data.trace = run(sc.sys, grid, sc.u0, A, cfg);

  std::vector<double> deta_g_series, times;
  for (const auto& snap : data.trace.snaps) {
    const RingFields rf =
        relax_ring_fields(sc.sys, grid, snap, data.trace.seam);
    const RingFields ef =
        equilibrium_ring_fields(sc.sys, grid, ref.at_time(snap.time),
                                ref.seam);
    const double p = phi(rf, eps, grid);
    const double ps = psi(rf, ef, eps, grid);
    const double ir = integral_potential(sc.sys, snap.u, grid);
    if (snap.time == 0.0) {
      data.phi0 = p;
      data.phi_r0 = p + eps * ir;
    }
    data.sup_phi = std::max(data.sup_phi, p);
    data.sup_psi = std::max(data.sup_psi, ps);
    data.sup_phi_r = std::max(data.sup_phi_r, p + eps * ir);
    double s = 0.0;
    for (int i = 0; i < grid.n_cells; ++i)
      s += std::abs(
          sc.sys.entropy_grad(snap.u.col(i)).dot(sc.sys.source(snap.u.col(i))));
    deta_g_series.push_back(s * grid.dx());
    times.push_back(snap.time);
  }
  for (std::size_t k = 0; k + 1 < times.size(); ++k)
    data.int_deta_g += 0.5 * (deta_g_series[k] + deta_g_series[k + 1]) *
                       (times[k + 1] - times[k]);
  return data;
}

inline EpsSweepResult eps_sweep(const Scenario& sc,
                                const std::vector<double>& eps_list,
                                int jobs = 1, bool check_floor = true) {
  if (eps_list.size() < 3)
    throw std::invalid_argument("eps_sweep: need at least 3 eps values");
  for (std::size_t k = 0; k + 1 < eps_list.size(); ++k)
    if (!(eps_list[k] > eps_list[k + 1]))
      throw std::invalid_argument("eps_sweep: eps must be strictly decreasing");

  EpsSweepResult result;
  result.effective_class = sc.rate_class;

  // gate: the 5.3-class assertion requires certified weak dissipation
  if (sc.rate_class == RateClass::wd_c2 || sc.rate_class == RateClass::wd_c0) {
    const auto wd =
        check_weak_dissipation(sc.sys, sc.sys.default_box, 1000);
    const auto pot = check_potential(sc.sys, sc.sys.default_box, 1000);
    if (wd.verdict != Verdict::holds || pot.verdict != Verdict::holds) {
      result.effective_class = RateClass::general;
      result.downgraded = true;
    }
  }

  const RelaxationMatrix A = suggest_A(sc.sys);
  const auto targets = snapshot_targets(sc.t_end, sc.snapshot_count);
  result.reference = reference_solution(sc, sc.grid, targets);

  result.runs.resize(eps_list.size());
  auto work = [&](std::size_t k) {
    result.runs[k] =
        run_eps_case(sc, sc.grid, result.reference, eps_list[k], A);
  };
  if (jobs > 1) {
    std::vector<std::future<void>> fut;
    for (std::size_t k = 0; k < eps_list.size(); ++k)
      fut.push_back(std::async(std::launch::async, work, k));
    for (auto& f : fut) f.get();
  } else {
    for (std::size_t k = 0; k < eps_list.size(); ++k) work(k);
  }

  result.table.param_name = "eps";
  result.table.error_measure = ErrorMeasure::sup_t_psi;
  for (const auto& r : result.runs)
    result.table.rows.push_back({r.eps, r.sup_psi});
  finalize_table(result.table);

  if (check_floor) {
    // dx-floor proxy: rerun the smallest eps on a half-resolution grid and
    // require the change in sup_t Psi to stay below 10% of the coarsest-eps
    // error.
    Scenario half = sc;
    half.grid = Grid1D(sc.grid.x_min, sc.grid.x_max, sc.grid.n_cells / 2);
    const EquilibriumTrace ref_half =
        reference_solution(half, half.grid, targets);
    const EpsRunData coarse =
        run_eps_case(half, half.grid, ref_half, eps_list.back(), A);
    result.floor_proxy = std::abs(coarse.sup_psi - result.runs.back().sup_psi);
    result.floor_threshold = 0.1 * result.runs.front().sup_psi;
    if (result.floor_proxy > result.floor_threshold)
      throw std::runtime_error(
          "dx-floor: grid too coarse for the smallest eps (proxy " +
          std::to_string(result.floor_proxy) + " > threshold " +
          std::to_string(result.floor_threshold) + ")");
  }
  return result;
}

// Slope window asserted for a rate class.
inline std::pair<double, double> rate_window(RateClass c) {
  switch (c) {
    case RateClass::general:
    case RateClass::wd_c2:
      return {1.7, 2.3};
    case RateClass::wd_c0:
      return {0.8, 2.3};
  }
  return {0.0, 10.0};
}

// ---------------------------------------------------------------------------
// dx sweep with a manufactured solution at fixed eps.
// ---------------------------------------------------------------------------
inline ConvergenceTable dx_sweep(const Scenario& sc,
                                 const std::vector<int>& n_cells_list,
                                 double eps) {
  if (!sc.mms)
    throw std::invalid_argument("dx_sweep: scenario has no manufactured solution");
  ConvergenceTable table;
  table.param_name = "dx";
  table.error_measure = ErrorMeasure::final_l2_vs_exact;
  for (int n : n_cells_list) {
    Grid1D grid(sc.grid.x_min, sc.grid.x_max, n);
    const RelaxationMatrix A = suggest_A(sc.sys);
    SolverConfig cfg(eps, sc.t_end, sc.order);
    cfg.cfl = sc.cfl;
    cfg.snapshots = SnapshotSpec::times(2);
    const RelaxationForcing forcing =
        manufactured_relaxation_forcing(sc.sys, *sc.mms, A);
    const SolutionTrace trace = run(sc.sys, grid, sc.u0, A, cfg, forcing);
    const Mat& u = trace.final_field().u;
    double err2 = 0.0;
    for (int i = 0; i < n; ++i)
      err2 +=
          (u.col(i) - sc.mms->value(grid.center(i), sc.t_end)).squaredNorm();
    table.rows.push_back({grid.dx(), std::sqrt(err2 * grid.dx())});
  }
  finalize_table(table);
  return table;
}

// ---------------------------------------------------------------------------
// Stability report: per-eps sup_t phi / phi(0) and sup_t (phi + eps int R)
// over its initial value, plus the accumulated |Deta G| integral.
// ---------------------------------------------------------------------------
struct StabilityRow {
  double eps = 0.0;
  double phi_ratio = 0.0;
  double phi_r_ratio = 0.0;
  double int_deta_g = 0.0;
};

struct StabilityReport {
  std::vector<StabilityRow> rows;
  double ratio_spread = 0.0;  // (max - min) / min of phi_ratio
};

inline StabilityReport stability_report(const EpsSweepResult& sweep) {
  StabilityReport rep;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (const auto& r : sweep.runs) {
    StabilityRow row;
    row.eps = r.eps;
    row.phi_ratio = r.sup_phi / r.phi0;
    row.phi_r_ratio = r.sup_phi_r / r.phi_r0;
    row.int_deta_g = r.int_deta_g;
    lo = std::min(lo, row.phi_ratio);
    hi = std::max(hi, row.phi_ratio);
    rep.rows.push_back(row);
  }
  rep.ratio_spread = lo > 0.0 ? (hi - lo) / lo : 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Identity-residual protocol: run to a fixed time, then capture three
// consecutive steps (window spacing dt, so the time stencil refines with
// the grid).
// ---------------------------------------------------------------------------
struct ResidualWindowData {
  IdentityWindow relax;
  std::array<double, 3> times{};
  SolutionTrace short_trace;  // the three fields, for reuse
};

inline ResidualWindowData capture_residual_window(
    const SystemDefinition& sys, const Grid1D& grid, const Profile& u0,
    const RelaxationMatrix& A, const SolverConfig& cfg, double t_window,
    const RelaxationForcing& forcing = {}) {
  const SeamOffsets seam = make_seam_offsets(grid, u0, sys.n);
  RelaxationSolver solver(sys, grid, A, cfg, seam, forcing);
  RelaxationField f = init_well_prepared(
      sys, grid, u0, cfg.model == RelaxModel::global_term);
  const double dt = std::min(solver.cfl_dt(), cfg.dt_max);
  const long warm = static_cast<long>(std::floor(t_window / dt));
  for (long s = 0; s < warm; ++s) solver.step(f, dt);

  ResidualWindowData out;
  out.short_trace.grid = grid;
  out.short_trace.seam = seam;
  out.short_trace.eps = cfg.eps;
  out.short_trace.model = cfg.model;
  for (int k = 0; k < 3; ++k) {
    out.relax.snaps[k] = relax_ring_fields(
        sys, grid, f, seam, cfg.model == RelaxModel::global_term);
    out.times[k] = f.time;
    out.short_trace.snaps.push_back(f);
    if (k < 2) solver.step(f, dt);
  }
  return out;
}

}  // namespace wavebal
