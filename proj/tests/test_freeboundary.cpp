#include <gtest/gtest.h>

#include <cmath>

#include "cylstefan/expint.hpp"
#include "cylstefan/freeboundary.hpp"
#include "cylstefan/physical.hpp"
#include "fixtures.hpp"

using namespace cylstefan;

namespace {
struct UnitLaw {
    double conductivity(Phase, double, double) const { return 1.0; }
    double capacity(Phase, double, double) const { return 1.0; }
};
Problem<UnitLaw> classical(double D, double M) { return Problem<UnitLaw>{UnitLaw{}, 1.0, D, M}; }
}  // namespace

TEST(EvalPhi, ConstantCoefficientOracle) {
    const auto pb = classical(10, 0);
    const auto ctx = pb.context(1.0);
    const auto fp = solve_pair(ctx, pb.grid, 1e-11);
    const double expected = std::exp(-1.0) * (10 - 1 / expint_e1(1.0));
    EXPECT_NEAR(eval_Phi(ctx, fp.pair), expected, 1e-8);
    EXPECT_NEAR(expected, 2.0019, 1e-4);
}

TEST(EvalPhi, ConstructedCancellation) {
    // E1(alpha0) = e^{-k} and F2(alpha0, inf) = e^{k} E1(k) with k = a alpha0^2, so D* = 1/E1(k) cancels
    const double D = 1.0 / expint_e1(1.0);
    const auto pb = classical(D, 0);
    const auto ctx = pb.context(1.0);
    const auto fp = solve_pair(ctx, pb.grid, 1e-11);
    EXPECT_NEAR(eval_Phi(ctx, fp.pair), 0.0, 1e-8);
}

TEST(StefanResidual, ClassicalSignsAndValue) {
    const auto pb = classical(10, 1);
    EXPECT_GT(stefan_residual(pb, 0.3, 1e-10), 0.0);
    EXPECT_LT(stefan_residual(pb, 2.0, 1e-10), 0.0);
    const auto pb0 = classical(10, 0);
    EXPECT_NEAR(stefan_residual(pb0, 1.0, 1e-10), 2.0019, 1e-4);
}

TEST(StefanResidual, RejectsNonpositiveAlpha0) {
    EXPECT_THROW(stefan_residual(classical(10, 1), 0.0, 1e-10), std::invalid_argument);
}

TEST(StefanResidual, ContinuousAlongProbes) {
    const auto pb = fixtures::power_problem();
    for (double x : {0.4, 0.7, 1.2}) {
        const double r0 = stefan_residual(pb, x, 1e-11);
        const double d1 = std::abs(stefan_residual(pb, x + 1e-3, 1e-11) - r0);
        const double d2 = std::abs(stefan_residual(pb, x + 1e-5, 1e-11) - r0);
        EXPECT_LT(d2, d1);
        EXPECT_LT(d2, 1e-3);
    }
}

TEST(SolveAlpha0, ClassicalMatchesScalarOracle) {
    const auto pb = classical(10, 1);
    const auto sol = solve_alpha0(pb, {0.3, 2.0}, 1e-8);
    const auto oracle = classical_oracle(10, 1, 1.0);
    EXPECT_NEAR(sol.alpha0_star, oracle.alpha0_star, 1e-6 * oracle.alpha0_star);
    EXPECT_LE(std::abs(sol.stefan_residual), 1e-8);
    EXPECT_GE(sol.alpha0_star, 0.3);
    EXPECT_LE(sol.alpha0_star, 2.0);
}

TEST(SolveAlpha0, NoSignChangeIsReported) {
    const auto pb = classical(10, 1);
    try {
        solve_alpha0(pb, {0.1, 0.3}, 1e-8);
        FAIL();
    } catch (const RootError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("R(lo)"), std::string::npos);
        EXPECT_NE(msg.find("R(hi)"), std::string::npos);
    }
}

TEST(SolveAlpha0, EitherOrientation) {
    // a negative M* has no physical meaning but makes R rise through zero, the reverse of the usual pattern
    const auto pb = classical(0.1, -2.0);
    ASSERT_LT(stefan_residual(pb, 0.3, 1e-10), 0.0);
    ASSERT_GT(stefan_residual(pb, 3.0, 1e-10), 0.0);
    const auto s = solve_alpha0(pb, {0.3, 3.0}, 1e-8);
    // the scalar oracle has a second, smaller root, so check its residual at the returned point
    const ClassicalOracle o{1.0, 0.1, -2.0, 0.0};
    EXPECT_NEAR(o.R(s.alpha0_star), 0.0, 1e-7);
}

TEST(SolveAlpha0, StefanConditionAtRoot) {
    const auto pb = fixtures::power_problem();
    const double tol = 1e-8;
    const auto s = solve_alpha0(pb, {0.2, 2.0}, tol);
    const auto ctx = pb.context(s.alpha0_star);
    LiquidKernels<PowerLaw> L(ctx, s.pair.f1);
    SolidKernels<PowerLaw> S(ctx, s.pair.f2);
    const double a0 = s.alpha0_star;
    const double lhs = -L.conductivity(a0) * L.prime(a0) + S.conductivity_u(1.0) * S.prime(a0);
    EXPECT_NEAR(lhs, pb.Mstar * a0, tol / a0);
}

TEST(SolveAlpha0, CertifiedBracketContainsRoot) {
    const auto cert = fixtures::Certified::certificate();
    ASSERT_TRUE(cert.bracket_certified());
    const auto pb = fixtures::Certified::problem();
    const auto s = solve_alpha0(pb, {*cert.alpha01, *cert.alpha02}, 1e-8);
    EXPECT_GT(s.alpha0_star, *cert.alpha01);
    EXPECT_LT(s.alpha0_star, *cert.alpha02);
}
