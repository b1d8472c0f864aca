#include <gtest/gtest.h>

#include <cmath>

#include "cylstefan/expint.hpp"
#include "cylstefan/fixpoint.hpp"
#include "fixtures.hpp"

using namespace cylstefan;
using fixtures::power_case;

namespace {

GridFunction zero_liquid(double alpha0, std::size_t n = 129) {
    GridSpec g;
    g.nodes = n;
    return initial_pair(alpha0, g, 4.0).f1;
}
GridFunction solid_guess(double alpha0, double beta = 4.0, std::size_t n = 129) {
    GridSpec g;
    g.nodes = n;
    return initial_pair(alpha0, g, beta).f2;
}

// temperature-independent law with constant coefficients
struct UnitLaw {
    double conductivity(Phase, double, double) const { return 1.0; }
    double capacity(Phase, double, double) const { return 1.0; }
};

}  // namespace

TEST(KernelE1, EmptyIntegralIsOne) {
    const auto law = power_case();
    const auto f1 = zero_liquid(1.0);
    EXPECT_EQ(E1(fixtures::power_ctx(law), 0.0, f1), 1.0);
}

TEST(KernelE1, PowerCaseClosedForm) {
    const auto law = power_case();
    const auto f1 = zero_liquid(1.0);
    EXPECT_NEAR(E1(fixtures::power_ctx(law), 1.0, f1), std::exp(-0.5), 1e-9);
}

TEST(KernelE1, TightEnvelopeSandwich) {
    const auto law = power_case();
    const auto f1 = zero_liquid(1.0);
    const EnvelopeParams env{2, 1, 4, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0};
    const auto b = E1_bounds(env, 1.0, 1.0, 1.0);
    EXPECT_NEAR(b.lo, std::exp(-0.5), 1e-15);
    EXPECT_NEAR(b.hi, std::exp(-0.5), 1e-15);
    EXPECT_TRUE(b.contains(E1(fixtures::power_ctx(law), 1.0, f1), 1e-9));
}

TEST(KernelE2, InterfaceValueIsOne) {
    const auto law = power_case();
    const auto f2 = solid_guess(1.0);
    EXPECT_EQ(E2(fixtures::power_ctx(law), 1.0, f2), 1.0);
}

TEST(KernelE2, PowerCaseClosedForms) {
    const auto law = power_case();
    const auto f2 = solid_guess(1.0);
    const auto ctx = fixtures::power_ctx(law);
    EXPECT_NEAR(E2(ctx, std::numeric_limits<double>::infinity(), f2), std::exp(-0.5), 1e-9);
    EXPECT_NEAR(E2(ctx, 2.0, f2), std::exp(-0.375), 1e-9);
    EXPECT_NEAR(E2(ctx, 2.0, f2), 0.6872892787909722, 1e-9);
}

TEST(KernelF1, PowerCaseClosedForm) {
    const auto law = power_case();
    const auto f1 = zero_liquid(1.0);
    const auto ctx = fixtures::power_ctx(law);
    EXPECT_NEAR(F1(ctx, 1.0, f1), 1 - std::exp(-0.5), 1e-9);
    EXPECT_NEAR(F1(ctx, 1.0, f1), 0.3934693402873666, 1e-9);
    EXPECT_EQ(F1(ctx, 0.0, f1), 0.0);
}

TEST(KernelF1, EnvelopeBracketAtOne) {
    const auto law = power_case();
    const auto f1 = zero_liquid(1.0);
    const EnvelopeParams env{2, 1, 4, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0};
    const auto b = F1_bounds(env, 1.0, 1.0, 1.0);
    EXPECT_NEAR(b.lo, 0.3032653298563167, 1e-12);
    EXPECT_NEAR(b.hi, 0.5, 1e-15);
    EXPECT_TRUE(b.contains(F1(fixtures::power_ctx(law), 1.0, f1), 1e-9));
}

TEST(KernelF1, DivergesForConstantCoefficients) {
    const UnitLaw law;
    const KernelContext<UnitLaw> ctx(law, 1.0, 1.0, 1.0, 1e-10);
    const auto f1 = zero_liquid(1.0);
    LiquidKernels<UnitLaw> L(ctx, f1);
    EXPECT_FALSE(L.F1_converges());
    EXPECT_THROW(L.F1(0.5), KernelError);
}

TEST(KernelF2, DegenerateZeroDiffusivity) {
    const auto law = power_case();
    const KernelContext<PowerLaw> ctx(law, 1.0, 0.0, 1.0, 1e-12);
    const auto f2 = solid_guess(1.0);
    EXPECT_NEAR(F2(ctx, 2.0, f2), 0.234375, 1e-9);
    EXPECT_NEAR(F2(ctx, std::numeric_limits<double>::infinity(), f2), 0.25, 1e-9);
    EXPECT_EQ(F2(ctx, 1.0, f2), 0.0);
}

TEST(KernelF2, ConstantCoefficientOracle) {
    const UnitLaw law;
    const KernelContext<UnitLaw> ctx(law, 1.0, 1.0, 1.0, 1e-12);
    const auto f2 = solid_guess(1.0);
    const double expected = std::exp(1.0) * expint_e1(1.0);
    EXPECT_NEAR(F2(ctx, std::numeric_limits<double>::infinity(), f2), expected, 1e-9);
    EXPECT_NEAR(expected, 0.5963473623231940, 1e-12);
}

TEST(KernelDifference, PowerCase) {
    const auto law = power_case();
    const auto f1 = zero_liquid(1.0);
    const auto ctx = fixtures::power_ctx(law);
    EXPECT_EQ(f1_difference(ctx, 1.0, f1), 0.0);
    EXPECT_NEAR(f1_difference(ctx, 0.5, f1), std::exp(-0.125) - std::exp(-0.5), 1e-9);
    EXPECT_NEAR(f1_difference(ctx, 0.5, f1), 0.2759662, 1e-7);
}

TEST(KernelDifference, ConstantCoefficientOracle) {
    const UnitLaw law;
    const KernelContext<UnitLaw> ctx(law, 1.0, 1.0, 1.0, 1e-12);
    const auto f1 = zero_liquid(1.0);
    EXPECT_NEAR(f1_difference(ctx, 0.5, f1), expint_e1(0.5) - expint_e1(1.0), 1e-9);
    EXPECT_NEAR(f1_difference(ctx, 0.5, f1), 0.3403896, 1e-7);
}

TEST(KernelDifference, ConsistentWithF1) {
    const auto law = power_case();
    const auto f1 = zero_liquid(1.0);
    const auto ctx = fixtures::power_ctx(law);
    for (double eta : {0.01, 0.2, 0.5, 0.9})
        EXPECT_NEAR(f1_difference(ctx, eta, f1) + F1(ctx, eta, f1), F1(ctx, 1.0, f1), 2e-12);
}

TEST(KernelPrime, FluxLimitAtAxis) {
    const auto law = power_case();
    const auto f1 = zero_liquid(1.0);
    const double D = 3.0;
    const auto ctx = fixtures::power_ctx(law, 1.0, 1.0, D);
    const double eta = 1e-5;
    const double flux = -4 * std::numbers::pi * eta * std::pow(eta, -2) * f1_prime(ctx, eta, f1);
    EXPECT_NEAR(flux, 4 * std::numbers::pi * D, 1e-6);
    EXPECT_THROW(f1_prime(ctx, 0.0, f1), KernelError);
}

TEST(KernelPrime, SolidSlopeClosedForms) {
    const auto law = power_case();
    const KernelContext<PowerLaw> ctx(law, 1.0, 0.0, 1.0, 1e-12);
    const auto f2 = solid_guess(1.0);
    EXPECT_NEAR(f2_prime(ctx, 2.0, f2), -0.125, 1e-9);
    // E2 = 1 at the interface
    EXPECT_NEAR(f2_prime(ctx, 1.0, f2), -1.0 / (1.0 * 1.0 * 0.25), 1e-9);
}

TEST(KernelInvariants, MonotoneAndBounded) {
    const auto law = power_case();
    const auto f1 = zero_liquid(1.5);
    const auto f2 = solid_guess(1.5);
    const auto ctx = fixtures::power_ctx(law, 1.5);
    double pe = 1, pf = 0;
    for (int i = 1; i <= 30; ++i) {
        const double eta = 1.5 * i / 30.0;
        const double e = E1(ctx, eta, f1), f = F1(ctx, eta, f1);
        EXPECT_GT(e, 0);
        EXPECT_LE(e, pe);
        EXPECT_GE(f, pf);
        pe = e, pf = f;
    }
    pe = 1, pf = 0;
    for (int i = 0; i <= 30; ++i) {
        const double xi = 1.5 * std::pow(1.3, i);
        const double e = E2(ctx, xi, f2), f = F2(ctx, xi, f2);
        EXPECT_GT(e, 0);
        EXPECT_LE(e, pe);
        EXPECT_GE(f, pf);
        pe = e, pf = f;
    }
}
