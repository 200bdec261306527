#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "wavebal/field.hpp"
#include "wavebal/grid.hpp"
#include "wavebal/hypotheses.hpp"
#include "wavebal/system.hpp"

namespace wavebal {

enum class RelaxModel { global_term, alternative };

// Snapshot schedule: either every k accepted steps (spacing k dt, exact),
// or a fixed count of evenly spaced target times hit by clipping dt.
struct SnapshotSpec {
  enum class Mode { every_steps, target_times };
  Mode mode = Mode::every_steps;
  int every = 100;
  int count = 11;

  static SnapshotSpec steps(int every) {
    SnapshotSpec s;
    s.mode = Mode::every_steps;
    s.every = every;
    return s;
  }
  static SnapshotSpec times(int count) {
    SnapshotSpec s;
    s.mode = Mode::target_times;
    s.count = count;
    return s;
  }
};

struct SolverConfig {
  double eps = 1e-2;
  double cfl = 0.45;
  double t_end = 0.0;
  int order = 1;  // 1: upwind, 2: MUSCL/minmod with SSP2 stepping
  RelaxModel model = RelaxModel::global_term;
  SnapshotSpec snapshots;
  double dt_max = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 12345;
  double blowup_factor = 1e3;

  SolverConfig() = default;
  SolverConfig(double eps_, double t_end_, int order_)
      : eps(eps_), t_end(t_end_), order(order_) {}
};

// Space-time forcing for the relaxation system: f_u on the u-equation,
// f_v on the v-equation (see manufactured_forcing in equilibrium.hpp).
struct RelaxationForcing {
  std::function<void(const Grid1D&, double, Mat&, Mat&)> eval;
  bool present() const { return static_cast<bool>(eval); }
};

struct SolutionTrace {
  Grid1D grid;
  std::vector<RelaxationField> snaps;
  std::vector<double> dt_history;
  SeamOffsets seam;
  double eps = 0.0;
  int order = 1;
  RelaxModel model = RelaxModel::global_term;

  const RelaxationField& final_field() const { return snaps.back(); }
};

struct StepError : std::runtime_error {
  double time;
  explicit StepError(const std::string& msg, double t)
      : std::runtime_error(msg + " at t = " + std::to_string(t)), time(t) {}
};

// ---------------------------------------------------------------------------
// One relaxation run. Hyperbolic fluxes are upwinded in the characteristic
// variables w_k(+-) = e_k.v +- sqrt(mu_k) e_k.u of the frozen wave system
// u_t + v_x = 0, v_t + A u_x = 0; the stiff source is solved exactly
// (affine in v for frozen u), with the global term recomputed from the
// stage's u before each implicit solve.
// ---------------------------------------------------------------------------
class RelaxationSolver {
 public:
  RelaxationSolver(const SystemDefinition& sys, const Grid1D& grid,
                   const RelaxationMatrix& A, const SolverConfig& cfg,
                   SeamOffsets seam = {}, RelaxationForcing forcing = {})
      : sys_(sys),
        grid_(grid),
        A_(A),
        cfg_(cfg),
        seam_(std::move(seam)),
        forcing_(std::move(forcing)) {
    if (!(cfg.eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (!(cfg.t_end >= 0.0)) throw std::invalid_argument("t_end must be >= 0");
    if (seam_.u_right.size() == 0) seam_ = SeamOffsets::zero(sys.n);
    dt_cfl_ = cfg.cfl * grid.dx() / A_.max_speed();
  }

  double cfl_dt() const { return dt_cfl_; }

  SolutionTrace run(const RelaxationField& init) const {
    SolutionTrace trace;
    trace.grid = grid_;
    trace.seam = seam_;
    trace.eps = cfg_.eps;
    trace.order = cfg_.order;
    trace.model = cfg_.model;

    RelaxationField f = init;
    init_scale_ = 1.0 + f.u.lpNorm<Eigen::Infinity>();
    trace.snaps.push_back(f);
    if (cfg_.t_end <= 0.0) return trace;

    std::vector<double> targets;
    std::size_t next_target = 0;
    if (cfg_.snapshots.mode == SnapshotSpec::Mode::target_times) {
      const int m = std::max(cfg_.snapshots.count, 2);
      for (int j = 1; j < m; ++j)
        targets.push_back(cfg_.t_end * j / (m - 1));
    }

    long steps = 0;
    const double t_eps = 1e-12 * std::max(1.0, cfg_.t_end);
    while (f.time < cfg_.t_end - t_eps) {
      double dt = std::min(dt_cfl_, cfg_.dt_max);
      dt = std::min(dt, cfg_.t_end - f.time);
      bool at_target = false;
      if (next_target < targets.size()) {
        const double gap = targets[next_target] - f.time;
        if (gap <= dt * (1.0 + 1e-12)) {
          dt = gap;
          at_target = true;
        }
      }
      step(f, dt);
      trace.dt_history.push_back(dt);
      ++steps;
      if (at_target) {
        f.time = targets[next_target];
        ++next_target;
        trace.snaps.push_back(f);
      } else if (cfg_.snapshots.mode == SnapshotSpec::Mode::every_steps &&
                 steps % cfg_.snapshots.every == 0 &&
                 f.time < cfg_.t_end - t_eps) {
        trace.snaps.push_back(f);
      }
    }
    f.time = cfg_.t_end;
    if (std::abs(trace.snaps.back().time - cfg_.t_end) > t_eps)
      trace.snaps.push_back(f);
    return trace;
  }

  // Advance one step in place (IMEX: explicit fluxes, implicit source).
  void step(RelaxationField& f, double dt) const {
    if (cfg_.order >= 2)
      step_ssp2(f, dt);
    else
      step_imex1(f, dt);
    f.time += dt;
    guard(f);
  }

 private:
  struct Rhs {
    Mat du, dv;
  };

  bool uses_global_term() const {
    return cfg_.model == RelaxModel::global_term;
  }

  Mat global_term(const Mat& u) const {
    if (uses_global_term()) return compute_global_term(sys_, u, grid_);
    return Mat::Zero(u.rows(), u.cols());
  }

  // Explicit part: hyperbolic flux differences, the u-equation source of
  // the alternative model, and any forcing.
  Rhs explicit_rhs(const Mat& u, const Mat& v, const Mat& r, double t) const {
    const int n = sys_.n, N = grid_.n_cells;
    const double dx = grid_.dx();
    const GhostView gh =
        build_ghosts(sys_, grid_, u, v, r, seam_, uses_global_term());

    const Mat& Q = A_.eigenvectors();
    const Vec& s = A_.sqrt_eigenvalues();
    const Mat wu = Q.transpose() * gh.u;
    const Mat wv = Q.transpose() * gh.v;
    Mat wp = wv, wm = wv;
    for (int k = 0; k < n; ++k) {
      wp.row(k) += s[k] * wu.row(k);
      wm.row(k) -= s[k] * wu.row(k);
    }

    // interface m = i - 1/2 for i = 0..N lives between ext cols 1+m, 2+m
    Mat fu_char(n, N + 1), fv_char(n, N + 1);
    for (int k = 0; k < n; ++k) {
      for (int m = 0; m <= N; ++m) {
        double wpi, wmi;
        if (cfg_.order >= 2) {
          wpi = wp(k, 1 + m) +
                0.5 * minmod(wp(k, 1 + m) - wp(k, m),
                             wp(k, 2 + m) - wp(k, 1 + m));
          wmi = wm(k, 2 + m) -
                0.5 * minmod(wm(k, 2 + m) - wm(k, 1 + m),
                             wm(k, 3 + m) - wm(k, 2 + m));
        } else {
          wpi = wp(k, 1 + m);
          wmi = wm(k, 2 + m);
        }
        fu_char(k, m) = 0.5 * (wpi + wmi);
        fv_char(k, m) = 0.5 * s[k] * (wpi - wmi);
      }
    }
    const Mat flux_u = Q * fu_char;
    const Mat flux_v = Q * fv_char;

    Rhs rhs;
    rhs.du.resize(n, N);
    rhs.dv.resize(n, N);
    for (int i = 0; i < N; ++i) {
      rhs.du.col(i) = -(flux_u.col(i + 1) - flux_u.col(i)) / dx;
      rhs.dv.col(i) = -(flux_v.col(i + 1) - flux_v.col(i)) / dx;
    }
    if (cfg_.model == RelaxModel::alternative)
      rhs.du += apply_cellwise(sys_.source, u);
    if (forcing_.present()) {
      Mat fu(n, N), fv(n, N);
      forcing_.eval(grid_, t, fu, fv);
      rhs.du += fu;
      rhs.dv += fv;
    }
    return rhs;
  }

  // Closed-form solve of v = rhs + (w/eps) (F(u) - R(u)) scaled implicitly:
  //   v = (rhs + (w/eps)(F(u) - R)) / (1 + w/eps)
  Mat implicit_v(const Mat& rhs_v, const Mat& u, const Mat& r,
                 double w) const {
    const double q = w / cfg_.eps;
    return (rhs_v + q * (apply_cellwise(sys_.flux, u) - r)) / (1.0 + q);
  }

  void step_imex1(RelaxationField& f, double dt) const {
    const Rhs e = explicit_rhs(f.u, f.v, f.r, f.time);
    const Mat u1 = f.u + dt * e.du;
    const Mat r1 = global_term(u1);
    const Mat v1 = implicit_v(f.v + dt * e.dv, u1, r1, dt);
    f.u = u1;
    f.v = v1;
    f.r = r1;
  }

  // IMEX-SSP2(2,2,2), gamma = 1 - 1/sqrt(2); the implicit part is
  // L-stable and each stage is the same exact affine solve.
  void step_ssp2(RelaxationField& f, double dt) const {
    const double g = 1.0 - 1.0 / std::sqrt(2.0);

    // stage 1: u unchanged, v implicit
    const Mat& u1 = f.u;
    const Mat r1 = f.r;
    const Mat v1 = implicit_v(f.v, u1, r1, dt * g);
    const Mat k_i1 = (v1 - f.v) / (dt * g);
    const Rhs e1 = explicit_rhs(u1, v1, r1, f.time);

    // stage 2
    const Mat u2 = f.u + dt * e1.du;
    const Mat r2 = global_term(u2);
    const Mat rhs_v2 = f.v + dt * e1.dv + dt * (1.0 - 2.0 * g) * k_i1;
    const Mat v2 = implicit_v(rhs_v2, u2, r2, dt * g);
    const Mat k_i2 = (v2 - rhs_v2) / (dt * g);
    const Rhs e2 = explicit_rhs(u2, v2, r2, f.time + dt);

    f.u += 0.5 * dt * (e1.du + e2.du);
    f.v += 0.5 * dt * (e1.dv + e2.dv) + 0.5 * dt * (k_i1 + k_i2);
    f.r = global_term(f.u);
  }

  void guard(const RelaxationField& f) const {
    if (!all_finite(f.u) || !all_finite(f.v))
      throw StepError("solver: non-finite state", f.time);
    if (f.u.lpNorm<Eigen::Infinity>() > cfg_.blowup_factor * init_scale_)
      throw StepError(
          "solver: state left the working range (subcharacteristic "
          "condition may be violated)",
          f.time);
  }

  const SystemDefinition& sys_;
  Grid1D grid_;
  RelaxationMatrix A_;
  SolverConfig cfg_;
  SeamOffsets seam_;
  RelaxationForcing forcing_;
  double dt_cfl_ = 0.0;
  mutable double init_scale_ = 1.0;
};

inline SolutionTrace run(const SystemDefinition& sys, const Grid1D& grid,
                         const Profile& u0, const RelaxationMatrix& A,
                         const SolverConfig& cfg,
                         RelaxationForcing forcing = {}) {
  const SeamOffsets seam = make_seam_offsets(grid, u0, sys.n);
  RelaxationSolver solver(sys, grid, A, cfg, seam, std::move(forcing));
  const RelaxationField init = init_well_prepared(
      sys, grid, u0, cfg.model == RelaxModel::global_term);
  return solver.run(init);
}

}  // namespace wavebal
