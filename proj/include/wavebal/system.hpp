#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "wavebal/quasirandom.hpp"
#include "wavebal/types.hpp"

namespace wavebal {

enum class SystemKind { linear_reaction, elasticity, combustion, custom };

// Classification of the production term, used to pick which hypothesis
// set is required and which convergence rate the harness asserts.
enum class SourceClass { none, weakly_dissipative, lipschitz };
enum class SourceSmoothness { c2, c0_lipschitz };

struct SystemConstants {
  double alpha = 0.0;      // entropy Hessian upper bound: D2eta <= alpha/2 I
  double beta = 0.0;       // entropy Hessian lower bound: D2eta >= beta I
  double c_r = 0.0;        // potential growth constant |DR| <= c_r (1 + R)
  double lipschitz = 0.0;  // Lipschitz constant of the source on the box
};

// A balance law u_t + F(u)_x = G(u) together with its entropy pair and
// the structural constants the checks and functionals consume.
struct SystemDefinition {
  int n = 0;
  SystemKind kind = SystemKind::custom;
  std::string name;

  VecFn flux;
  MatFn flux_jacobian;
  VecFn source;
  std::optional<MatFn> source_jacobian;

  ScalarFn entropy;
  VecFn entropy_grad;
  MatFn entropy_hess;
  ScalarFn entropy_flux;

  std::optional<ScalarFn> potential;
  std::optional<VecFn> potential_grad;

  SystemConstants constants;
  SourceClass source_class = SourceClass::none;
  SourceSmoothness source_smoothness = SourceSmoothness::c2;

  Box default_box;
  std::map<std::string, double> params;

  // Cheap upper bound on the spectral radius of DF over the box,
  // used for the equilibrium solver's CFL condition.
  std::function<double(const Vec&)> max_wave_speed;

  bool has_potential() const { return potential.has_value(); }
};

namespace detail {

inline void check_zero_state(const SystemDefinition& sys) {
  const Vec zero = Vec::Zero(sys.n);
  const double tol = 1e-12;
  if (std::abs(sys.entropy(zero)) > tol)
    throw std::invalid_argument(sys.name + ": entropy(0) != 0");
  if (sys.entropy_grad(zero).norm() > tol)
    throw std::invalid_argument(sys.name + ": Deta(0) != 0");
  if (sys.source(zero).norm() > tol)
    throw std::invalid_argument(sys.name + ": G(0) != 0");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Linear advection-reaction: u_t + a u_x = -lambda u (n = 1).
// Serves as the exactly solvable oracle system.
// ---------------------------------------------------------------------------
inline SystemDefinition make_linear_reaction(double a, double lambda) {
  if (!std::isfinite(a) || !std::isfinite(lambda))
    throw std::invalid_argument("linear_reaction: a, lambda must be finite");

  SystemDefinition sys;
  sys.n = 1;
  sys.kind = SystemKind::linear_reaction;
  sys.name = "linear_reaction";
  sys.params = {{"a", a}, {"lambda", lambda}};

  sys.flux = [a](const Vec& u) { return Vec{a * u}; };
  sys.flux_jacobian = [a](const Vec&) {
    Mat j(1, 1);
    j(0, 0) = a;
    return j;
  };
  sys.source = [lambda](const Vec& u) { return Vec{-lambda * u}; };
  sys.source_jacobian = [lambda](const Vec&) {
    Mat j(1, 1);
    j(0, 0) = -lambda;
    return j;
  };

  sys.entropy = [](const Vec& u) { return 0.5 * u[0] * u[0]; };
  sys.entropy_grad = [](const Vec& u) { return u; };
  sys.entropy_hess = [](const Vec&) { return Mat::Identity(1, 1); };
  sys.entropy_flux = [a](const Vec& u) { return 0.5 * a * u[0] * u[0]; };

  if (lambda >= 0.0) {
    sys.potential = [lambda](const Vec& u) {
      return 0.5 * lambda * u[0] * u[0];
    };
    sys.potential_grad = [lambda](const Vec& u) { return Vec{lambda * u}; };
    sys.source_class =
        (lambda > 0.0) ? SourceClass::weakly_dissipative : SourceClass::none;
  } else {
    sys.source_class = SourceClass::lipschitz;
  }

  sys.constants.alpha = 2.0;
  sys.constants.beta = 1.0;
  sys.constants.lipschitz = std::abs(lambda);
  // sup |DR|/(1+R) = sqrt(lambda/2), attained at u = sqrt(2/lambda)
  sys.constants.c_r = std::max(1.0, std::sqrt(std::max(lambda, 0.0) / 2.0));

  sys.default_box = Box::cube(1, 5.0);
  sys.max_wave_speed = [a](const Vec&) { return std::abs(a); };

  detail::check_zero_state(sys);
  return sys;
}

// Exact solution of the linear advection-reaction law by characteristics.
inline Vec exact_solution_linear_reaction(
    const SystemDefinition& sys, const std::function<Vec(double)>& u0,
    double x, double t) {
  if (sys.kind != SystemKind::linear_reaction)
    throw std::invalid_argument(
        "exact_solution_linear_reaction: system is not of linear-reaction "
        "kind");
  const double a = sys.params.at("a");
  const double lambda = sys.params.at("lambda");
  return std::exp(-lambda * t) * u0(x - a * t);
}

// ---------------------------------------------------------------------------
// Damped elasticity (p-system form), state (u, v) = (strain, velocity):
//   u_t - v_x = 0,  v_t - sigma(u)_x = g(v).
// Flux is stored with the leading sign, F(u,v) = (-v, -sigma(u)), so the
// entropy pair eta = v^2/2 + Sigma(u), q = -sigma(u) v is compatible and
// the constants alpha = max(2 Gamma, 1), beta = min(gamma, 1) apply.
// ---------------------------------------------------------------------------
enum class Damping { none, linear, ramp, custom };

struct ElasticityOptions {
  double gamma = 1.35;  // declared lower bound on sigma'
  double Gamma = 1.65;  // declared upper bound on sigma'
  // sigma(u) = s_lin * u + s_sin * sin(u); sigma(0) = 0 by construction.
  double s_lin = 1.5;
  double s_sin = 0.1;
  Damping damping = Damping::linear;
  double damping_k = 1.0;  // g(v) = -k v (linear) or -k max(v, 0) (ramp)
  // Custom damping hook; used only with Damping::custom. The caller
  // declares whether it is weakly dissipative and whether a potential
  // applies (none is attached for custom g).
  std::function<double(double)> g_custom;
  bool custom_weakly_dissipative = false;
  double box_half_width = 5.0;
};

inline SystemDefinition make_elasticity(const ElasticityOptions& opt = {}) {
  if (!(0.0 < opt.gamma && opt.gamma < opt.Gamma))
    throw std::invalid_argument("elasticity: need 0 < gamma < Gamma");

  const double s_lin = opt.s_lin, s_sin = opt.s_sin;
  auto sigma = [s_lin, s_sin](double u) {
    return s_lin * u + s_sin * std::sin(u);
  };
  auto dsigma = [s_lin, s_sin](double u) {
    return s_lin + s_sin * std::cos(u);
  };
  auto Sigma = [s_lin, s_sin](double u) {
    return 0.5 * s_lin * u * u + s_sin * (1.0 - std::cos(u));
  };

  // Reject a stress law whose sampled derivative leaves (gamma, Gamma).
  {
    const double tol = 1e-12;
    Box ubox = Box::cube(1, opt.box_half_width);
    BoxSampler sampler(ubox, /*seed=*/1, /*stream=*/7);
    for (int k = 0; k < 2 + 512; ++k) {
      const double du = dsigma(sampler.point(k)[0]);
      if (du <= opt.gamma - tol || du >= opt.Gamma + tol)
        throw std::invalid_argument(
            "elasticity: sampled sigma' leaves (gamma, Gamma)");
    }
  }

  std::function<double(double)> g;
  std::function<double(double)> dg;  // a.e. derivative
  switch (opt.damping) {
    case Damping::none:
      g = [](double) { return 0.0; };
      dg = [](double) { return 0.0; };
      break;
    case Damping::linear: {
      const double k = opt.damping_k;
      g = [k](double v) { return -k * v; };
      dg = [k](double) { return -k; };
      break;
    }
    case Damping::ramp: {
      const double k = opt.damping_k;
      g = [k](double v) { return -k * std::max(v, 0.0); };
      dg = [k](double v) { return v > 0.0 ? -k : 0.0; };
      break;
    }
    case Damping::custom:
      g = opt.g_custom;
      dg = [gf = opt.g_custom](double v) {
        const double h = fd_step1(v);
        return (gf(v + h) - gf(v - h)) / (2.0 * h);
      };
      break;
  }
  if (std::abs(g(0.0)) > 1e-12)
    throw std::invalid_argument("elasticity: damping must satisfy g(0) = 0");

  SystemDefinition sys;
  sys.n = 2;
  sys.kind = SystemKind::elasticity;
  sys.name = "elasticity";
  sys.params = {{"gamma", opt.gamma},
                {"Gamma", opt.Gamma},
                {"s_lin", s_lin},
                {"s_sin", s_sin},
                {"damping_k", opt.damping_k}};

  sys.flux = [sigma](const Vec& w) {
    Vec f(2);
    f[0] = -w[1];
    f[1] = -sigma(w[0]);
    return f;
  };
  sys.flux_jacobian = [dsigma](const Vec& w) {
    Mat j = Mat::Zero(2, 2);
    j(0, 1) = -1.0;
    j(1, 0) = -dsigma(w[0]);
    return j;
  };
  sys.source = [g](const Vec& w) {
    Vec s(2);
    s[0] = 0.0;
    s[1] = g(w[1]);
    return s;
  };
  sys.source_jacobian = [dg](const Vec& w) {
    Mat j = Mat::Zero(2, 2);
    j(1, 1) = dg(w[1]);
    return j;
  };

  sys.entropy = [Sigma](const Vec& w) {
    return 0.5 * w[1] * w[1] + Sigma(w[0]);
  };
  sys.entropy_grad = [sigma](const Vec& w) {
    Vec d(2);
    d[0] = sigma(w[0]);
    d[1] = w[1];
    return d;
  };
  sys.entropy_hess = [dsigma](const Vec& w) {
    Mat h = Mat::Zero(2, 2);
    h(0, 0) = dsigma(w[0]);
    h(1, 1) = 1.0;
    return h;
  };
  sys.entropy_flux = [sigma](const Vec& w) { return -sigma(w[0]) * w[1]; };

  const bool monotone_damping =
      opt.damping == Damping::linear || opt.damping == Damping::ramp ||
      opt.damping == Damping::none ||
      (opt.damping == Damping::custom && opt.custom_weakly_dissipative);
  if (monotone_damping && opt.damping != Damping::custom) {
    // g = g(v) nonincreasing: potential R(u,v) = -int_0^v g.
    switch (opt.damping) {
      case Damping::none:
        sys.potential = [](const Vec&) { return 0.0; };
        sys.potential_grad = [](const Vec&) { return Vec::Zero(2).eval(); };
        break;
      case Damping::linear: {
        const double k = opt.damping_k;
        sys.potential = [k](const Vec& w) { return 0.5 * k * w[1] * w[1]; };
        sys.potential_grad = [k](const Vec& w) {
          Vec d(2);
          d[0] = 0.0;
          d[1] = k * w[1];
          return d;
        };
        break;
      }
      case Damping::ramp: {
        const double k = opt.damping_k;
        sys.potential = [k](const Vec& w) {
          const double vp = std::max(w[1], 0.0);
          return 0.5 * k * vp * vp;
        };
        sys.potential_grad = [k](const Vec& w) {
          Vec d(2);
          d[0] = 0.0;
          d[1] = k * std::max(w[1], 0.0);
          return d;
        };
        break;
      }
      default:
        break;
    }
  }

  sys.source_class = monotone_damping && opt.damping != Damping::none
                         ? SourceClass::weakly_dissipative
                         : (opt.damping == Damping::none
                                ? SourceClass::none
                                : SourceClass::lipschitz);
  sys.source_smoothness = (opt.damping == Damping::ramp)
                              ? SourceSmoothness::c0_lipschitz
                              : SourceSmoothness::c2;

  sys.constants.alpha = std::max(2.0 * opt.Gamma, 1.0);
  sys.constants.beta = std::min(opt.gamma, 1.0);
  sys.constants.c_r = std::max(1.0, std::sqrt(opt.damping_k / 2.0));
  sys.constants.lipschitz = opt.damping_k;

  sys.default_box = Box::cube(2, opt.box_half_width);
  const double Gamma = opt.Gamma;
  sys.max_wave_speed = [Gamma](const Vec&) { return std::sqrt(Gamma); };

  detail::check_zero_state(sys);
  return sys;
}

// ---------------------------------------------------------------------------
// Isentropic combustion, state (v, u, Z) = (specific volume, velocity,
// reactant mass fraction):
//   v_t - u_x = 0,  u_t + P(v,Z)_x = 0,  Z_t = -K phi(Theta(v,Z)) Z.
// Defaults: P(v,Z) = -p_v v + p_z Z, Theta = v, phi = max(0, tanh),
// B(Z) = b Z^2. The entropy eta = u^2/2 - int_0^v P(.,Z) + B(Z) is
// quadratic for this family, q = P(v,Z) u.
// ---------------------------------------------------------------------------
struct CombustionOptions {
  double gamma = 1.4;  // declared bounds on -dP/dv
  double Gamma = 1.6;
  double p_v = 1.5;   // -dP/dv
  double p_z = 0.3;   // dP/dZ
  double cbar = 0.4;  // bound of the pressure-coupling condition
  double b = 0.85;    // convexifier B(Z) = b Z^2
  double K = 1.0;     // reaction rate constant
  double box_half_width = 5.0;  // for (v, u); Z is sampled on [0, 1]
};

inline SystemDefinition make_combustion(const CombustionOptions& opt = {}) {
  const double pv = opt.p_v, pz = opt.p_z, b = opt.b, K = opt.K;
  const double tol = 1e-12;

  if (!(opt.gamma < pv && pv < opt.Gamma))
    throw std::invalid_argument("combustion: need gamma < -dP/dv < Gamma");
  if (!(std::abs(pz) < opt.cbar + tol))
    throw std::invalid_argument("combustion: need |dP/dZ| < cbar");
  // int_0^v P_ZZ = 0 for the linear pressure family, within cbar trivially.
  const double b_min =
      0.5 * (1.0 + (2.0 / opt.Gamma) * opt.cbar * opt.cbar + opt.cbar);
  if (!(2.0 * b > 2.0 * b_min - tol))
    throw std::invalid_argument(
        "combustion: B'' too small for entropy convexity");

  auto P = [pv, pz](double v, double Z) { return -pv * v + pz * Z; };
  auto phi = [](double theta) { return std::max(0.0, std::tanh(theta)); };

  SystemDefinition sys;
  sys.n = 3;
  sys.kind = SystemKind::combustion;
  sys.name = "combustion";
  sys.params = {{"gamma", opt.gamma}, {"Gamma", opt.Gamma}, {"p_v", pv},
                {"p_z", pz},          {"cbar", opt.cbar},   {"b", b},
                {"K", K}};

  sys.flux = [P](const Vec& w) {
    Vec f(3);
    f[0] = -w[1];
    f[1] = P(w[0], w[2]);
    f[2] = 0.0;
    return f;
  };
  sys.flux_jacobian = [pv, pz](const Vec&) {
    Mat j = Mat::Zero(3, 3);
    j(0, 1) = -1.0;
    j(1, 0) = -pv;
    j(1, 2) = pz;
    return j;
  };
  sys.source = [K, phi](const Vec& w) {
    Vec s = Vec::Zero(3);
    s[2] = -K * phi(w[0]) * w[2];
    return s;
  };
  // phi = max(0, tanh) is only C^0 at theta = 0; no Jacobian is attached,
  // so the gradient-source checks report not_applicable.

  sys.entropy = [pv, pz, b](const Vec& w) {
    const double v = w[0], u = w[1], Z = w[2];
    // -int_0^v P(tau, Z) dtau = pv v^2 / 2 - pz Z v
    return 0.5 * u * u + 0.5 * pv * v * v - pz * Z * v + b * Z * Z;
  };
  sys.entropy_grad = [pv, pz, b](const Vec& w) {
    Vec d(3);
    d[0] = pv * w[0] - pz * w[2];
    d[1] = w[1];
    d[2] = -pz * w[0] + 2.0 * b * w[2];
    return d;
  };
  sys.entropy_hess = [pv, pz, b](const Vec&) {
    Mat h = Mat::Zero(3, 3);
    h(0, 0) = pv;
    h(1, 1) = 1.0;
    h(0, 2) = h(2, 0) = -pz;
    h(2, 2) = 2.0 * b;
    return h;
  };
  sys.entropy_flux = [P](const Vec& w) { return P(w[0], w[2]) * w[1]; };

  sys.source_class = SourceClass::lipschitz;
  sys.source_smoothness = SourceSmoothness::c0_lipschitz;

  // The displayed Hessian bound max(1, Gamma + cbar, 2 cbar^2 / Gamma
  // + 2 cbar) caps the eigenvalues of D2eta themselves; alpha carries
  // the extra factor 2 so that D2eta <= alpha/2 I as the entropy
  // hypothesis requires (for elasticity the factor is already inside
  // max(2 Gamma, 1)).
  const double hess_cap =
      std::max({1.0, opt.Gamma + opt.cbar,
                (2.0 / opt.Gamma) * opt.cbar * opt.cbar + 2.0 * opt.cbar});
  sys.constants.alpha = 2.0 * hess_cap;
  sys.constants.beta = std::min(opt.gamma / 2.0, 1.0);
  sys.constants.lipschitz = K;  // Lip(phi o Theta) = 1 for max(0, tanh)

  sys.default_box.lo = Vec(3);
  sys.default_box.hi = Vec(3);
  sys.default_box.lo << -opt.box_half_width, -opt.box_half_width, 0.0;
  sys.default_box.hi << opt.box_half_width, opt.box_half_width, 1.0;
  const double Gamma = opt.Gamma;
  sys.max_wave_speed = [Gamma](const Vec&) { return std::sqrt(Gamma); };

  // Reject a configuration whose sampled entropy Hessian dips below beta I.
  {
    BoxSampler sampler(sys.default_box, /*seed=*/1, /*stream=*/9);
    for (int k = 0; k < 8 + 256; ++k) {
      const Vec ev = sym_eigenvalues(sys.entropy_hess(sampler.point(k)));
      if (ev.minCoeff() < sys.constants.beta - 1e-9)
        throw std::invalid_argument(
            "combustion: sampled entropy Hessian falls below beta I");
    }
  }

  detail::check_zero_state(sys);
  return sys;
}

inline SystemDefinition make_system(const std::string& name) {
  if (name == "linear_reaction") return make_linear_reaction(1.0, 1.0);
  if (name == "elasticity") return make_elasticity();
  if (name == "combustion") return make_combustion();
  throw std::invalid_argument("unknown system: " + name);
}

}  // namespace wavebal
