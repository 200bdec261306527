#include <gtest/gtest.h>

#include <cmath>

#include "wavebal/hypotheses.hpp"
#include "wavebal/quasirandom.hpp"
#include "wavebal/system.hpp"

using namespace wavebal;

namespace {

Vec sample_in(const Box& box, const BoxSampler& s, long k) {
  (void)box;
  return s.point(k);
}

}  // namespace

TEST(LinearReaction, ExactSolutionExamples) {
  auto sin0 = [](double x) { return Vec{{std::sin(2.0 * M_PI * x)}}; };
  auto step = [](double x) { return Vec{{x < 0.3 ? 1.0 : 0.0}}; };
  auto three = [](double) { return Vec{{3.0}}; };

  // t = 0 identity
  const auto s11 = make_linear_reaction(1.0, 1.0);
  EXPECT_NEAR(exact_solution_linear_reaction(s11, sin0, 0.5, 0.0)[0],
              std::sin(M_PI), 1e-15);

  // pure transport
  const auto s10 = make_linear_reaction(1.0, 0.0);
  EXPECT_DOUBLE_EQ(exact_solution_linear_reaction(s10, step, 0.9, 0.4)[0],
                   step(0.5)[0]);

  // spatially homogeneous decay: u = 3 e^{-2} at t = 1 for lambda = 2
  const auto s02 = make_linear_reaction(0.0, 2.0);
  EXPECT_NEAR(exact_solution_linear_reaction(s02, three, 0.1, 1.0)[0],
              3.0 * std::exp(-2.0), 1e-14);

  // modulated transport: u = e^{-t} sin(2 pi (x - t))
  EXPECT_NEAR(exact_solution_linear_reaction(s11, sin0, 0.7, 0.25)[0],
              std::exp(-0.25) * std::sin(2.0 * M_PI * 0.45), 1e-14);
}

TEST(LinearReaction, ConstantsAndClass) {
  const auto sys = make_linear_reaction(1.0, 1.0);
  EXPECT_EQ(sys.n, 1);
  EXPECT_DOUBLE_EQ(sys.constants.alpha, 2.0);
  EXPECT_DOUBLE_EQ(sys.constants.beta, 1.0);
  EXPECT_DOUBLE_EQ(sys.constants.lipschitz, 1.0);
  EXPECT_EQ(sys.source_class, SourceClass::weakly_dissipative);
  EXPECT_TRUE(sys.has_potential());
}

TEST(LinearReaction, RejectsWrongKindForExactSolution) {
  const auto el = make_elasticity();
  auto u0 = [](double) { return Vec::Zero(2).eval(); };
  EXPECT_THROW(exact_solution_linear_reaction(el, u0, 0.0, 0.0),
               std::invalid_argument);
}

TEST(Elasticity, PaperConstantsForSteepStress) {
  ElasticityOptions opt;
  opt.gamma = 1.9;
  opt.Gamma = 2.1;
  opt.s_lin = 2.0;
  opt.s_sin = 0.1;
  const auto sys = make_elasticity(opt);
  EXPECT_DOUBLE_EQ(sys.constants.alpha, 4.2);  // max(2 Gamma, 1)
  EXPECT_DOUBLE_EQ(sys.constants.beta, 1.0);   // min(gamma, 1)
  const auto A = suggest_A(sys);
  EXPECT_NEAR(A.matrix()(0, 0), 8.4, 1e-14);
  EXPECT_NEAR(A.matrix()(1, 1), 8.4, 1e-14);
  EXPECT_NEAR(A.matrix()(0, 1), 0.0, 1e-14);
}

TEST(Elasticity, RejectsStressOutsideDeclaredBounds) {
  ElasticityOptions opt;
  opt.gamma = 1.45;
  opt.Gamma = 1.55;  // sigma' reaches 1.6 with the default stress
  EXPECT_THROW(make_elasticity(opt), std::invalid_argument);
}

TEST(Elasticity, WeakDissipationPairingIsExact) {
  const auto sys = make_elasticity();
  BoxSampler sa(sys.default_box, 7, 1), sb(sys.default_box, 7, 2);
  for (long k = 0; k < 1000; ++k) {
    const Vec ua = sa.point(k), ub = sb.point(k + 3);
    const double pair = (sys.entropy_grad(ua) - sys.entropy_grad(ub))
                            .dot(sys.source(ua) - sys.source(ub));
    // (v - vb)(g(v) - g(vb)) = -(v - vb)^2 for g(v) = -v
    EXPECT_NEAR(pair, -sqr(ua[1] - ub[1]), 1e-12);
    EXPECT_LE(pair, 1e-12);
  }
}

TEST(Elasticity, RampDampingIsC0WithPiecewisePotential) {
  ElasticityOptions opt;
  opt.damping = Damping::ramp;
  const auto sys = make_elasticity(opt);
  EXPECT_EQ(sys.source_smoothness, SourceSmoothness::c0_lipschitz);
  ASSERT_TRUE(sys.has_potential());
  Vec w(2);
  w << 0.3, 2.0;
  EXPECT_NEAR((*sys.potential)(w), 0.5 * 4.0, 1e-15);
  w[1] = -2.0;
  EXPECT_NEAR((*sys.potential)(w), 0.0, 1e-15);
  // DR is continuous at the kink
  w[1] = 1e-9;
  const Vec drp = (*sys.potential_grad)(w);
  w[1] = -1e-9;
  const Vec drm = (*sys.potential_grad)(w);
  EXPECT_NEAR((drp - drm).norm(), 0.0, 1e-8);
}

TEST(Combustion, DefaultHessianEigenvaluesWithinEntropyBounds) {
  const auto sys = make_combustion();
  const double beta = sys.constants.beta;
  const double half_alpha = 0.5 * sys.constants.alpha;
  BoxSampler sampler(sys.default_box, 42, 3);
  for (long k = 0; k < 8 + 2000; ++k) {
    const Vec ev = sym_eigenvalues(sys.entropy_hess(sampler.point(k)));
    EXPECT_GE(ev.minCoeff(), beta - 1e-12);
    EXPECT_LE(ev.maxCoeff(), half_alpha + 1e-12);
  }
}

TEST(Combustion, ZeroRateFreezesReactant) {
  CombustionOptions opt;
  opt.K = 0.0;
  const auto sys = make_combustion(opt);
  Vec w(3);
  w << 0.4, -0.2, 0.7;
  EXPECT_DOUBLE_EQ(sys.source(w).norm(), 0.0);
}

TEST(Combustion, DecoupledQuadraticEntropyWhenPressureIgnoresReactant) {
  CombustionOptions opt;
  opt.gamma = 1.9;
  opt.Gamma = 2.1;
  opt.p_v = 2.0;
  opt.p_z = 0.0;
  opt.b = 1.2;
  const auto sys = make_combustion(opt);
  Vec w(3);
  w << 0.5, -0.3, 0.8;
  EXPECT_NEAR(sys.entropy(w), 0.5 * sqr(w[1]) + sqr(w[0]) + 1.2 * sqr(w[2]),
              1e-14);
  const Mat h = sys.entropy_hess(w);
  EXPECT_DOUBLE_EQ(h(0, 2), 0.0);
}

TEST(Combustion, LipschitzBoundWithDeclaredConstant) {
  const auto sys = make_combustion();
  const double L = sys.constants.lipschitz;
  BoxSampler sa(sys.default_box, 11, 4), sb(sys.default_box, 11, 5);
  for (long k = 0; k < 1000; ++k) {
    const Vec ua = sa.point(k), ub = sb.point(k + 5);
    const double du = (ua - ub).norm();
    const double dg = (sys.source(ua) - sys.source(ub)).norm();
    EXPECT_LE(dg, L * du + 1e-12);
  }
}

TEST(AllSystems, FluxJacobianMatchesFiniteDifferences) {
  for (const auto* name : {"linear_reaction", "elasticity", "combustion"}) {
    const auto sys = make_system(name);
    BoxSampler sampler(sys.default_box, 5, 6);
    for (long k = 0; k < 100; ++k) {
      const Vec u = sample_in(sys.default_box, sampler, k);
      const Mat fd = fd_jacobian(sys.flux, u);
      const Mat an = sys.flux_jacobian(u);
      EXPECT_LE((fd - an).lpNorm<Eigen::Infinity>(),
                1e-6 * (1.0 + an.lpNorm<Eigen::Infinity>()))
          << name;
    }
  }
}

TEST(AllSystems, EntropyFluxCompatibility) {
  for (const auto* name : {"linear_reaction", "elasticity", "combustion"}) {
    const auto sys = make_system(name);
    BoxSampler sampler(sys.default_box, 9, 8);
    for (long k = 0; k < 100; ++k) {
      const Vec u = sampler.point(k);
      const Vec dq = fd_gradient(sys.entropy_flux, u);
      const Vec prod = sys.flux_jacobian(u).transpose() * sys.entropy_grad(u);
      EXPECT_LE((dq - prod).lpNorm<Eigen::Infinity>(),
                1e-6 * (1.0 + prod.lpNorm<Eigen::Infinity>()))
          << name;
    }
  }
}

TEST(AllSystems, ZeroStateIdentities) {
  for (const auto* name : {"linear_reaction", "elasticity", "combustion"}) {
    const auto sys = make_system(name);
    const Vec zero = Vec::Zero(sys.n);
    EXPECT_DOUBLE_EQ(sys.entropy(zero), 0.0) << name;
    EXPECT_DOUBLE_EQ(sys.entropy_grad(zero).norm(), 0.0) << name;
    EXPECT_DOUBLE_EQ(sys.source(zero).norm(), 0.0) << name;
  }
}
