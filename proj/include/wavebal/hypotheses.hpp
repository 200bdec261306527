#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "wavebal/quasirandom.hpp"
#include "wavebal/system.hpp"
#include "wavebal/types.hpp"

namespace wavebal {

enum class HypothesisId { H1, H2, H3a, H3b, H4, H5, D2R_psd };
enum class Verdict { holds, fails, not_applicable };

inline const char* to_string(HypothesisId id) {
  switch (id) {
    case HypothesisId::H1: return "H1";
    case HypothesisId::H2: return "H2";
    case HypothesisId::H3a: return "H3a";
    case HypothesisId::H3b: return "H3b";
    case HypothesisId::H4: return "H4";
    case HypothesisId::H5: return "H5";
    case HypothesisId::D2R_psd: return "D2R_psd";
  }
  return "?";
}

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::fails: return "fails";
    case Verdict::not_applicable: return "not_applicable";
  }
  return "?";
}

struct HypothesisReport {
  HypothesisId hypothesis_id = HypothesisId::H1;
  Verdict verdict = Verdict::not_applicable;
  double margin = 0.0;          // minimum slack found (sign per check)
  std::vector<Vec> witness;     // state(s) where the margin is attained
  long samples_used = 0;
  std::string note;
};

// Absolute slack below which "<= 0" style verdicts are still accepted.
inline constexpr double kVerdictTol = 1e-9;

// ---------------------------------------------------------------------------
// Relaxation matrix A (symmetric positive definite) with cached
// eigendecomposition; characteristic speeds are +-sqrt(mu_k).
// ---------------------------------------------------------------------------
class RelaxationMatrix {
 public:
  explicit RelaxationMatrix(const Mat& a) : a_(0.5 * (a + a.transpose())) {
    Eigen::SelfAdjointEigenSolver<Mat> es(a_);
    mu_ = es.eigenvalues();
    q_ = es.eigenvectors();
    if (mu_.minCoeff() <= 0.0)
      throw std::invalid_argument(
          "RelaxationMatrix: matrix is not positive definite");
    sqrt_mu_ = mu_.cwiseSqrt();
    const Mat rebuilt = q_ * mu_.asDiagonal() * q_.transpose();
    if ((rebuilt - a_).norm() > 1e-12 * std::max(1.0, a_.norm()))
      throw std::runtime_error(
          "RelaxationMatrix: eigendecomposition failed to reproduce A");
  }

  static RelaxationMatrix scaled_identity(int n, double s) {
    return RelaxationMatrix(s * Mat::Identity(n, n));
  }

  const Mat& matrix() const { return a_; }
  const Vec& eigenvalues() const { return mu_; }
  const Vec& sqrt_eigenvalues() const { return sqrt_mu_; }
  const Mat& eigenvectors() const { return q_; }
  double max_speed() const { return sqrt_mu_.maxCoeff(); }
  int dim() const { return static_cast<int>(mu_.size()); }

 private:
  Mat a_;
  Vec mu_;
  Vec sqrt_mu_;
  Mat q_;
};

// A = 2 alpha I; the caller should confirm via check_subcharacteristic.
inline RelaxationMatrix suggest_A(const SystemDefinition& sys) {
  return RelaxationMatrix::scaled_identity(sys.n, 2.0 * sys.constants.alpha);
}

// ---------------------------------------------------------------------------
// Hypothesis checks. All are sampled minima over corner + low-discrepancy
// points of the box, deterministic for a fixed seed.
// ---------------------------------------------------------------------------

// Entropy structure: beta I <= D2eta <= alpha/2 I, eta >= 0, Dq = Deta DF.
inline HypothesisReport check_entropy(const SystemDefinition& sys,
                                      const Box& box, int n_samples,
                                      std::uint64_t seed = 12345) {
  HypothesisReport rep;
  rep.hypothesis_id = HypothesisId::H1;
  BoxSampler sampler(box, seed, /*stream=*/1);
  const long total = sampler.corner_count() + n_samples;
  rep.samples_used = total;

  const double alpha = sys.constants.alpha, beta = sys.constants.beta;
  const double fd_tol = 1e-5;
  double worst = std::numeric_limits<double>::infinity();
  Vec worst_u;
  bool compat_ok = true, positive_ok = true;
  for (long k = 0; k < total; ++k) {
    const Vec u = sampler.point(k);
    const Vec ev = sym_eigenvalues(sys.entropy_hess(u));
    const double slack =
        std::min(ev.minCoeff() - beta, 0.5 * alpha - ev.maxCoeff());
    if (slack < worst) {
      worst = slack;
      worst_u = u;
    }
    if (sys.entropy(u) < -kVerdictTol) positive_ok = false;
    const Vec dq = fd_gradient(sys.entropy_flux, u);
    const Vec prod = sys.flux_jacobian(u).transpose() * sys.entropy_grad(u);
    if ((dq - prod).lpNorm<Eigen::Infinity>() >
        fd_tol * (1.0 + prod.lpNorm<Eigen::Infinity>()))
      compat_ok = false;
  }
  rep.margin = worst;
  rep.witness = {worst_u};
  rep.verdict = (worst >= -kVerdictTol && compat_ok && positive_ok)
                    ? Verdict::holds
                    : Verdict::fails;
  if (!compat_ok) rep.note = "entropy flux compatibility Dq = Deta DF failed";
  if (!positive_ok) rep.note = "entropy takes negative values";
  return rep;
}

// Subcharacteristic condition at d = 1:
//   M(u) = (A D2eta + D2eta A)/2 - alpha DF^T DF >= nu I with nu > 0.
inline Mat subcharacteristic_form(const SystemDefinition& sys,
                                  const RelaxationMatrix& A, const Vec& u) {
  const Mat h = sys.entropy_hess(u);
  const Mat df = sys.flux_jacobian(u);
  const Mat& a = A.matrix();
  return 0.5 * (a * h + h * a) - sys.constants.alpha * df.transpose() * df;
}

inline HypothesisReport check_subcharacteristic(const SystemDefinition& sys,
                                                const RelaxationMatrix& A,
                                                const Box& box, int n_samples,
                                                std::uint64_t seed = 12345) {
  HypothesisReport rep;
  rep.hypothesis_id = HypothesisId::H2;
  BoxSampler sampler(box, seed, /*stream=*/2);
  const long total = sampler.corner_count() + n_samples;
  rep.samples_used = total;

  double nu = std::numeric_limits<double>::infinity();
  Vec worst_u;
  for (long k = 0; k < total; ++k) {
    const Vec u = sampler.point(k);
    const double lmin = sym_eigenvalues(subcharacteristic_form(sys, A, u))
                            .minCoeff();
    if (lmin < nu) {
      nu = lmin;
      worst_u = u;
    }
  }
  rep.margin = nu;
  rep.witness = {worst_u};
  rep.verdict = nu > 0.0 ? Verdict::holds : Verdict::fails;
  return rep;
}

// General-d form of the subcharacteristic condition, evaluated over random
// unit direction tuples (exercised at d = 1 only in this build):
//   sum_j xi_j^T (A_j D2eta + D2eta A_j)/2 xi_j
//     - alpha |sum_j DF_j^T xi_j|^2 >= nu sum_j |xi_j|^2.
inline HypothesisReport check_subcharacteristic_md(
    const SystemDefinition& sys, const std::vector<RelaxationMatrix>& As,
    const std::vector<MatFn>& flux_jacobians, const Box& box, int n_samples,
    int n_directions, std::uint64_t seed = 12345) {
  HypothesisReport rep;
  rep.hypothesis_id = HypothesisId::H2;
  const int d = static_cast<int>(As.size());
  BoxSampler sampler(box, seed, /*stream=*/3);
  BoxSampler dir_sampler(Box::cube(sys.n * d, 1.0), seed, /*stream=*/4);
  const long total = sampler.corner_count() + n_samples;
  rep.samples_used = total;

  double nu = std::numeric_limits<double>::infinity();
  Vec worst_u;
  for (long k = 0; k < total; ++k) {
    const Vec u = sampler.point(k);
    for (int m = 0; m < n_directions; ++m) {
      Vec xi_all = dir_sampler.point(dir_sampler.corner_count() + m);
      double denom = 0.0, quad = 0.0;
      Vec flux_dir = Vec::Zero(sys.n);
      for (int j = 0; j < d; ++j) {
        Vec xi = xi_all.segment(j * sys.n, sys.n);
        if (xi.norm() < 1e-12) xi = Vec::Ones(sys.n);
        xi /= xi.norm();
        denom += xi.squaredNorm();
        const Mat h = sys.entropy_hess(u);
        quad += xi.dot(0.5 * (As[j].matrix() * h + h * As[j].matrix()) * xi);
        flux_dir += flux_jacobians[j](u).transpose() * xi;
      }
      quad -= sys.constants.alpha * flux_dir.squaredNorm();
      const double ratio = quad / denom;
      if (ratio < nu) {
        nu = ratio;
        worst_u = u;
      }
    }
  }
  rep.margin = nu;
  rep.witness = {worst_u};
  rep.verdict = nu > 0.0 ? Verdict::holds : Verdict::fails;
  return rep;
}

// Weak dissipation (pairwise): (Deta(U) - Deta(Ub)) (G(U) - G(Ub)) <= 0.
// margin is the sampled maximum, so holds iff margin <= tol.
inline HypothesisReport check_weak_dissipation(const SystemDefinition& sys,
                                               const Box& box, int n_pairs,
                                               std::uint64_t seed = 12345) {
  HypothesisReport rep;
  rep.hypothesis_id = HypothesisId::H3a;
  BoxSampler sa(box, seed, /*stream=*/5);
  BoxSampler sb(box, seed, /*stream=*/6);
  const long total = sa.corner_count() + n_pairs;
  rep.samples_used = total;

  double worst = -std::numeric_limits<double>::infinity();
  Vec wa, wb;
  for (long k = 0; k < total; ++k) {
    const Vec ua = sa.point(k);
    const Vec ub = sb.point(total - 1 - k);
    const double val = (sys.entropy_grad(ua) - sys.entropy_grad(ub))
                           .dot(sys.source(ua) - sys.source(ub));
    if (val > worst) {
      worst = val;
      wa = ua;
      wb = ub;
    }
  }
  rep.margin = worst;
  rep.witness = {wa, wb};
  rep.verdict = worst <= kVerdictTol ? Verdict::holds : Verdict::fails;
  return rep;
}

// Lipschitz source: |G(U) - G(Ub)| <= L |U - Ub| with the declared L.
inline HypothesisReport check_lipschitz_source(const SystemDefinition& sys,
                                               const Box& box, int n_pairs,
                                               std::uint64_t seed = 12345) {
  HypothesisReport rep;
  rep.hypothesis_id = HypothesisId::H3b;
  BoxSampler sa(box, seed, /*stream=*/11);
  BoxSampler sb(box, seed, /*stream=*/12);
  const long total = sa.corner_count() + n_pairs;
  rep.samples_used = total;

  const double L = sys.constants.lipschitz;
  double worst = std::numeric_limits<double>::infinity();
  Vec wa, wb;
  for (long k = 0; k < total; ++k) {
    const Vec ua = sa.point(k);
    const Vec ub = sb.point(total - 1 - k);
    const double du = (ua - ub).norm();
    if (du < 1e-14) continue;
    const double slack = L * du - (sys.source(ua) - sys.source(ub)).norm();
    if (slack < worst) {
      worst = slack;
      wa = ua;
      wb = ub;
    }
  }
  rep.margin = worst;
  rep.witness = {wa, wb};
  rep.verdict = worst >= -kVerdictTol ? Verdict::holds : Verdict::fails;
  return rep;
}

// Source potential: G = -DR^T, R >= 0, R(0) = 0, |DR| <= C_R (1 + R).
// margin is the minimum slack of the growth inequality.
inline HypothesisReport check_potential(const SystemDefinition& sys,
                                        const Box& box, int n_samples,
                                        std::uint64_t seed = 12345) {
  HypothesisReport rep;
  rep.hypothesis_id = HypothesisId::H4;
  if (!sys.has_potential()) {
    rep.verdict = Verdict::not_applicable;
    rep.note = "no potential";
    return rep;
  }
  BoxSampler sampler(box, seed, /*stream=*/13);
  const long total = sampler.corner_count() + n_samples;
  rep.samples_used = total;

  const auto& R = *sys.potential;
  const auto& DR = *sys.potential_grad;
  const double c_r = sys.constants.c_r;

  if (std::abs(R(Vec::Zero(sys.n))) > kVerdictTol) {
    rep.verdict = Verdict::fails;
    rep.note = "R(0) != 0";
    rep.witness = {Vec::Zero(sys.n)};
    rep.margin = -std::abs(R(Vec::Zero(sys.n)));
    return rep;
  }

  double worst = std::numeric_limits<double>::infinity();
  Vec worst_u;
  bool grad_ok = true, nonneg_ok = true;
  for (long k = 0; k < total; ++k) {
    const Vec u = sampler.point(k);
    const double r = R(u);
    const Vec dr = DR(u);
    if (r < -kVerdictTol) nonneg_ok = false;
    if ((sys.source(u) + dr).lpNorm<Eigen::Infinity>() >
        1e-6 * (1.0 + dr.lpNorm<Eigen::Infinity>()))
      grad_ok = false;
    // cross-check the analytic gradient against finite differences
    if ((fd_gradient(R, u) - dr).lpNorm<Eigen::Infinity>() >
        1e-4 * (1.0 + dr.lpNorm<Eigen::Infinity>()))
      grad_ok = false;
    const double slack = c_r * (1.0 + r) - dr.norm();
    if (slack < worst) {
      worst = slack;
      worst_u = u;
    }
  }
  rep.margin = worst;
  rep.witness = {worst_u};
  rep.verdict = (worst >= -kVerdictTol && grad_ok && nonneg_ok)
                    ? Verdict::holds
                    : Verdict::fails;
  if (!grad_ok) rep.note = "G != -DR^T on samples";
  if (!nonneg_ok) rep.note = "R takes negative values";
  return rep;
}

// Gradient-source checks:
//   (i)  D2R = -DG symmetric positive semidefinite (D2R_psd),
//   (ii) the row field Deta DG is a gradient (curl test), which certifies
//        a source entropy S with Deta DG = -DS; S is reconstructed by a
//        line integral and sampled for nonnegativity (H5).
struct GradientSourceReports {
  HypothesisReport d2r_psd;
  HypothesisReport h5;
};

inline GradientSourceReports check_H5_and_gradient_psd(
    const SystemDefinition& sys, const Box& box, int n_samples,
    std::uint64_t seed = 12345) {
  GradientSourceReports out;
  out.d2r_psd.hypothesis_id = HypothesisId::D2R_psd;
  out.h5.hypothesis_id = HypothesisId::H5;
  if (!sys.source_jacobian) {
    out.d2r_psd.verdict = Verdict::not_applicable;
    out.d2r_psd.note = "no source Jacobian";
    out.h5.verdict = Verdict::not_applicable;
    out.h5.note = "no source Jacobian";
    return out;
  }
  BoxSampler sampler(box, seed, /*stream=*/14);
  const long total = sampler.corner_count() + n_samples;
  out.d2r_psd.samples_used = total;
  out.h5.samples_used = total;

  const auto& DG = *sys.source_jacobian;

  // (i) -DG symmetric psd
  {
    double worst = std::numeric_limits<double>::infinity();
    Vec worst_u;
    bool sym_ok = true;
    for (long k = 0; k < total; ++k) {
      const Vec u = sampler.point(k);
      const Mat m = -DG(u);
      if ((m - m.transpose()).lpNorm<Eigen::Infinity>() >
          1e-6 * (1.0 + m.lpNorm<Eigen::Infinity>()))
        sym_ok = false;
      const double lmin =
          sym_eigenvalues(0.5 * (m + m.transpose())).minCoeff();
      if (lmin < worst) {
        worst = lmin;
        worst_u = u;
      }
    }
    out.d2r_psd.margin = worst;
    out.d2r_psd.witness = {worst_u};
    out.d2r_psd.verdict =
        (worst >= -kVerdictTol && sym_ok) ? Verdict::holds : Verdict::fails;
    if (!sym_ok) out.d2r_psd.note = "DG not symmetric (no potential)";
  }

  // (ii) curl test on w(u) = (Deta(u) DG(u))^T plus S >= 0 along rays
  {
    auto w_field = [&](const Vec& u) -> Vec {
      return DG(u).transpose() * sys.entropy_grad(u);
    };
    double worst_curl = 0.0;
    Vec curl_u;
    for (long k = 0; k < total; ++k) {
      const Vec u = sampler.point(k);
      const Mat jw = fd_jacobian(w_field, u);
      const double asym =
          (jw - jw.transpose()).lpNorm<Eigen::Infinity>() /
          (1.0 + jw.lpNorm<Eigen::Infinity>());
      if (asym > worst_curl) {
        worst_curl = asym;
        curl_u = u;
      }
    }
    const bool is_gradient = worst_curl <= 1e-4;

    // S(u) = -int_0^1 w(t u) . u dt, so that DS = -w when curl-free.
    auto S = [&](const Vec& u) {
      double s = 0.0;
      for (int g = 0; g < 3; ++g)
        s -= Gauss3::weight(g) * w_field(Gauss3::node(g) * u).dot(u);
      return s;
    };
    double worst_s = std::numeric_limits<double>::infinity();
    Vec s_u;
    for (long k = 0; k < total; ++k) {
      const Vec u = sampler.point(k);
      const double sv = S(u);
      if (sv < worst_s) {
        worst_s = sv;
        s_u = u;
      }
    }
    out.h5.margin = is_gradient ? worst_s : -worst_curl;
    out.h5.witness = {is_gradient ? s_u : curl_u};
    out.h5.verdict = (is_gradient && worst_s >= -kVerdictTol)
                         ? Verdict::holds
                         : Verdict::fails;
    if (!is_gradient) out.h5.note = "Deta DG is not a gradient (curl test)";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full per-system suite: the seven reports, plus which of them the
// system's declared source class actually requires.
// ---------------------------------------------------------------------------
struct HypothesisSuite {
  std::vector<HypothesisReport> reports;
  std::uint64_t seed = 0;

  const HypothesisReport& get(HypothesisId id) const {
    for (const auto& r : reports)
      if (r.hypothesis_id == id) return r;
    throw std::logic_error("missing hypothesis report");
  }

  bool required(HypothesisId id, const SystemDefinition& sys) const {
    if (id == HypothesisId::H1 || id == HypothesisId::H2) return true;
    switch (sys.source_class) {
      case SourceClass::none:
        return false;
      case SourceClass::weakly_dissipative:
        return id == HypothesisId::H3a || id == HypothesisId::H4;
      case SourceClass::lipschitz:
        return id == HypothesisId::H3b;
    }
    return false;
  }

  bool strict_pass(const SystemDefinition& sys) const {
    for (const auto& r : reports)
      if (required(r.hypothesis_id, sys) && r.verdict == Verdict::fails)
        return false;
    return true;
  }
};

inline HypothesisSuite run_hypothesis_suite(const SystemDefinition& sys,
                                            const RelaxationMatrix& A,
                                            const Box& box, int n_samples,
                                            std::uint64_t seed = 12345) {
  HypothesisSuite suite;
  suite.seed = seed;
  suite.reports.push_back(check_entropy(sys, box, n_samples, seed));
  suite.reports.push_back(
      check_subcharacteristic(sys, A, box, n_samples, seed));
  suite.reports.push_back(check_weak_dissipation(sys, box, n_samples, seed));
  suite.reports.push_back(check_lipschitz_source(sys, box, n_samples, seed));
  suite.reports.push_back(check_potential(sys, box, n_samples, seed));
  auto grad = check_H5_and_gradient_psd(sys, box, n_samples, seed);
  suite.reports.push_back(grad.h5);
  suite.reports.push_back(grad.d2r_psd);
  return suite;
}

}  // namespace wavebal
