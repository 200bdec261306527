#include <gtest/gtest.h>

#include <cmath>

#include "wavebal/hypotheses.hpp"
#include "wavebal/system.hpp"

using namespace wavebal;

TEST(RelaxationMatrix, DecompositionRoundTrip) {
  Mat a(2, 2);
  a << 4.0, 1.0, 1.0, 3.0;
  const RelaxationMatrix A(a);
  const Mat rebuilt = A.eigenvectors() * A.eigenvalues().asDiagonal() *
                      A.eigenvectors().transpose();
  EXPECT_LE((rebuilt - A.matrix()).norm(), 1e-12 * A.matrix().norm());
  EXPECT_GT(A.eigenvalues().minCoeff(), 0.0);
}

TEST(RelaxationMatrix, RejectsIndefinite) {
  Mat a(2, 2);
  a << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(RelaxationMatrix A(a), std::invalid_argument);
}

TEST(SuggestA, MatchesTwoAlphaIdentity) {
  // scalar oracle: alpha = 2 -> A = [4]
  const auto lr = make_linear_reaction(1.0, 1.0);
  EXPECT_NEAR(suggest_A(lr).matrix()(0, 0), 4.0, 1e-14);

  ElasticityOptions eo;
  eo.gamma = 1.9;
  eo.Gamma = 2.1;
  eo.s_lin = 2.0;
  const auto el = make_elasticity(eo);
  EXPECT_NEAR(suggest_A(el).matrix()(0, 0), 8.4, 1e-12);

  const auto cb = make_combustion();
  EXPECT_NEAR(suggest_A(cb).matrix()(0, 0), 2.0 * cb.constants.alpha, 1e-12);
}

TEST(CheckEntropy, ScalarBoundsAreTight) {
  const auto lr = make_linear_reaction(1.0, 0.0);
  const auto rep = check_entropy(lr, lr.default_box, 200);
  EXPECT_EQ(rep.verdict, Verdict::holds);
  EXPECT_NEAR(rep.margin, 0.0, 1e-12);  // D2eta = 1 sits on both bounds
}

TEST(CheckEntropy, ElasticityHoldsAndMisdeclaredBetaFails) {
  const auto sys = make_elasticity();
  const auto rep = check_entropy(sys, sys.default_box, 500);
  EXPECT_EQ(rep.verdict, Verdict::holds);
  EXPECT_NEAR(rep.margin, 0.0, 1e-9);  // velocity direction sits on beta = 1

  auto bad = sys;
  bad.constants.beta = 3.0;
  const auto rep2 = check_entropy(bad, bad.default_box, 500);
  EXPECT_EQ(rep2.verdict, Verdict::fails);
  ASSERT_EQ(rep2.witness.size(), 1u);
  // re-evaluating the defining inequality at the witness reproduces the
  // negative margin
  const Vec ev = sym_eigenvalues(bad.entropy_hess(rep2.witness[0]));
  const double slack = std::min(ev.minCoeff() - bad.constants.beta,
                                0.5 * bad.constants.alpha - ev.maxCoeff());
  EXPECT_NEAR(slack, rep2.margin, 1e-12);
  EXPECT_LT(slack, 0.0);
}

TEST(CheckSubcharacteristic, ScalarArithmetic) {
  const auto lr = make_linear_reaction(1.0, 1.0);
  // M = A - alpha a^2 = A - 2
  const auto good = check_subcharacteristic(
      lr, RelaxationMatrix::scaled_identity(1, 4.0), lr.default_box, 100);
  EXPECT_EQ(good.verdict, Verdict::holds);
  EXPECT_NEAR(good.margin, 2.0, 1e-12);

  const auto bad = check_subcharacteristic(
      lr, RelaxationMatrix::scaled_identity(1, 1.5), lr.default_box, 100);
  EXPECT_EQ(bad.verdict, Verdict::fails);
  EXPECT_NEAR(bad.margin, -0.5, 1e-12);
}

TEST(CheckSubcharacteristic, DefaultElasticityHoldsWithSuggestedA) {
  const auto sys = make_elasticity();
  const auto rep = check_subcharacteristic(sys, suggest_A(sys),
                                           sys.default_box, 2000);
  EXPECT_EQ(rep.verdict, Verdict::holds);
  // closed form: nu = alpha * min(sigma'(2 - sigma'), 1) over sigma' range
  const double alpha = sys.constants.alpha;
  const double expect_nu = alpha * std::min(1.6 * (2.0 - 1.6), 1.0);
  EXPECT_NEAR(rep.margin, expect_nu, 1e-2);
}

// With A = 2 alpha I the form reduces to alpha (2 D2eta - DF^T DF); for
// the elasticity entropy this is positive only while sigma' < 2, so wave
// speeds beyond sqrt(2) break the suggested matrix.
TEST(CheckSubcharacteristic, SuggestedAFailsOnceStressSlopeExceedsTwo) {
  ElasticityOptions opt;
  opt.gamma = 1.9;
  opt.Gamma = 2.1;
  opt.s_lin = 2.0;
  const auto sys = make_elasticity(opt);
  const auto rep =
      check_subcharacteristic(sys, suggest_A(sys), sys.default_box, 2000);
  EXPECT_EQ(rep.verdict, Verdict::fails);
  // nu = alpha sigma'(2 - sigma') at sigma' = 2.1: 4.2 * 2.1 * (-0.1)
  EXPECT_NEAR(rep.margin, -0.882, 5e-3);
  // witness reproduces the negative eigenvalue
  const double lmin =
      sym_eigenvalues(subcharacteristic_form(sys, suggest_A(sys),
                                             rep.witness[0]))
          .minCoeff();
  EXPECT_NEAR(lmin, rep.margin, 1e-12);
}

TEST(CheckSubcharacteristic, CombustionDefaultsHold) {
  const auto sys = make_combustion();
  const auto rep =
      check_subcharacteristic(sys, suggest_A(sys), sys.default_box, 2000);
  EXPECT_EQ(rep.verdict, Verdict::holds);
  EXPECT_GT(rep.margin, 1.0);
}

TEST(CheckSubcharacteristic, GeneralFormAgreesAtDOne) {
  const auto sys = make_elasticity();
  const auto A = suggest_A(sys);
  const auto md = check_subcharacteristic_md(
      sys, {A}, {sys.flux_jacobian}, sys.default_box, 200, 16);
  EXPECT_EQ(md.verdict, Verdict::holds);
}

TEST(CheckWeakDissipation, ElasticitySigns) {
  const auto good = make_elasticity();
  EXPECT_EQ(check_weak_dissipation(good, good.default_box, 1000).verdict,
            Verdict::holds);

  ElasticityOptions anti;
  anti.damping = Damping::custom;
  anti.g_custom = [](double v) { return +v; };
  anti.custom_weakly_dissipative = false;
  const auto bad = make_elasticity(anti);
  const auto rep = check_weak_dissipation(bad, bad.default_box, 1000);
  EXPECT_EQ(rep.verdict, Verdict::fails);
  ASSERT_EQ(rep.witness.size(), 2u);
  const double at_witness =
      (bad.entropy_grad(rep.witness[0]) - bad.entropy_grad(rep.witness[1]))
          .dot(bad.source(rep.witness[0]) - bad.source(rep.witness[1]));
  EXPECT_GT(at_witness, 0.0);
  EXPECT_NEAR(at_witness, rep.margin, 1e-12);
}

TEST(CheckWeakDissipation, CombustionFailsAndRoutesToLipschitz) {
  const auto sys = make_combustion();
  EXPECT_EQ(check_weak_dissipation(sys, sys.default_box, 1000).verdict,
            Verdict::fails);
  EXPECT_EQ(check_lipschitz_source(sys, sys.default_box, 1000).verdict,
            Verdict::holds);
  EXPECT_EQ(sys.source_class, SourceClass::lipschitz);
}

TEST(CheckPotential, ElasticityGrowthConstantOne) {
  const auto sys = make_elasticity();  // R = v^2/2, C_R = 1
  const auto rep = check_potential(sys, sys.default_box, 1000);
  EXPECT_EQ(rep.verdict, Verdict::holds);
  EXPECT_GE(rep.margin, -1e-9);
}

TEST(CheckPotential, ShiftedPotentialFailsZeroCondition) {
  auto sys = make_elasticity();
  auto base = *sys.potential;
  sys.potential = [base](const Vec& u) { return base(u) + 1.0; };
  const auto rep = check_potential(sys, sys.default_box, 200);
  EXPECT_EQ(rep.verdict, Verdict::fails);
  EXPECT_EQ(rep.note, "R(0) != 0");
}

TEST(CheckPotential, NotApplicableWithoutPotential) {
  const auto sys = make_combustion();
  const auto rep = check_potential(sys, sys.default_box, 200);
  EXPECT_EQ(rep.verdict, Verdict::not_applicable);
  EXPECT_EQ(rep.note, "no potential");
}

TEST(GradientSource, LinearDampingSatisfiesBothChecks) {
  const auto sys = make_elasticity();
  const auto rep = check_H5_and_gradient_psd(sys, sys.default_box, 500);
  EXPECT_EQ(rep.d2r_psd.verdict, Verdict::holds);
  EXPECT_EQ(rep.h5.verdict, Verdict::holds);
  // S(u, v) = v^2/2 >= 0; the sampled minimum sits near v = 0
  EXPECT_GE(rep.h5.margin, -1e-9);
}

TEST(GradientSource, QuadraticEntropyGradientSourceHolds) {
  const auto sys = make_linear_reaction(0.0, 1.5);
  const auto rep = check_H5_and_gradient_psd(sys, sys.default_box, 200);
  EXPECT_EQ(rep.d2r_psd.verdict, Verdict::holds);
  EXPECT_EQ(rep.h5.verdict, Verdict::holds);
}

TEST(GradientSource, RotationFieldFailsCurlTest) {
  // custom source G(u) = (-u2, u1): DG is antisymmetric
  auto sys = make_elasticity();
  sys.source = [](const Vec& u) {
    Vec g(2);
    g[0] = -u[1];
    g[1] = u[0];
    return g;
  };
  sys.source_jacobian = [](const Vec&) {
    Mat j(2, 2);
    j << 0.0, -1.0, 1.0, 0.0;
    return j;
  };
  sys.potential.reset();
  sys.potential_grad.reset();
  const auto rep = check_H5_and_gradient_psd(sys, sys.default_box, 200);
  EXPECT_EQ(rep.d2r_psd.verdict, Verdict::fails);
  EXPECT_EQ(rep.h5.verdict, Verdict::fails);
}

TEST(Suite, DeterministicForFixedSeed) {
  const auto sys = make_elasticity();
  const auto A = suggest_A(sys);
  const auto s1 = run_hypothesis_suite(sys, A, sys.default_box, 500, 99);
  const auto s2 = run_hypothesis_suite(sys, A, sys.default_box, 500, 99);
  for (std::size_t k = 0; k < s1.reports.size(); ++k) {
    EXPECT_EQ(s1.reports[k].verdict, s2.reports[k].verdict);
    EXPECT_DOUBLE_EQ(s1.reports[k].margin, s2.reports[k].margin);
  }
}

TEST(Suite, MarginsMonotoneInSampleCount) {
  const auto sys = make_elasticity();
  const auto A = suggest_A(sys);
  // minima over prefixes can only decrease as the sample count grows
  const auto small = check_subcharacteristic(sys, A, sys.default_box, 100);
  const auto large = check_subcharacteristic(sys, A, sys.default_box, 1000);
  EXPECT_LE(large.margin, small.margin + 1e-15);

  const auto h1s = check_entropy(sys, sys.default_box, 100);
  const auto h1l = check_entropy(sys, sys.default_box, 1000);
  EXPECT_LE(h1l.margin, h1s.margin + 1e-15);
}

TEST(Suite, SuggestedAPassesSubcharacteristicForAllBuiltins) {
  for (const auto* name : {"linear_reaction", "elasticity", "combustion"}) {
    const auto sys = make_system(name);
    const auto rep = check_subcharacteristic(sys, suggest_A(sys),
                                             sys.default_box, 1000);
    EXPECT_EQ(rep.verdict, Verdict::holds) << name;
  }
}

TEST(Suite, WeakDissipationAgreesWithConvexPotential) {
  // gradient source with convex R on the box: H4 holds -> H3a margin <= tol
  for (double k : {0.5, 1.0, 2.0}) {
    ElasticityOptions opt;
    opt.damping_k = k;
    const auto sys = make_elasticity(opt);
    const auto h4 = check_potential(sys, sys.default_box, 500);
    const auto h3a = check_weak_dissipation(sys, sys.default_box, 500);
    ASSERT_EQ(h4.verdict, Verdict::holds);
    EXPECT_LE(h3a.margin, 1e-9);
  }
}

TEST(Suite, StrictGatingPerSourceClass) {
  const auto el = make_elasticity();
  const auto suite_el =
      run_hypothesis_suite(el, suggest_A(el), el.default_box, 500);
  EXPECT_TRUE(suite_el.strict_pass(el));

  const auto cb = make_combustion();
  const auto suite_cb =
      run_hypothesis_suite(cb, suggest_A(cb), cb.default_box, 500);
  // H3a fails for combustion but is not required for a Lipschitz source
  EXPECT_EQ(suite_cb.get(HypothesisId::H3a).verdict, Verdict::fails);
  EXPECT_TRUE(suite_cb.strict_pass(cb));

  // an undersized matrix must fail strict mode through H2
  const auto tiny = RelaxationMatrix::scaled_identity(cb.n, 0.1);
  const auto suite_bad = run_hypothesis_suite(cb, tiny, cb.default_box, 500);
  EXPECT_EQ(suite_bad.get(HypothesisId::H2).verdict, Verdict::fails);
  EXPECT_FALSE(suite_bad.strict_pass(cb));
}
