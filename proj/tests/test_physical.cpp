#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "cylstefan/expint.hpp"
#include "cylstefan/physical.hpp"
#include "fixtures.hpp"

using namespace cylstefan;

namespace {
struct UnitLaw {
    double conductivity(Phase, double, double) const { return 1.0; }
    double capacity(Phase, double, double) const { return 1.0; }
};

struct Solved {
    Problem<PowerLaw> pb;
    Solution sol;
    PhysicalField<PowerLaw> field(double theta_m = 1.0) const { return {&sol, &pb, theta_m}; }
};

const Solved& power_solved() {
    static const Solved s = [] {
        Solved out{fixtures::power_problem(), {}};
        out.sol = solve_alpha0(out.pb, {0.2, 2.0}, 1e-10);
        return out;
    }();
    return s;
}

const Solved& certified_solved() {
    static const Solved s = [] {
        Solved out{fixtures::Certified::problem(), {}};
        const auto c = fixtures::Certified::certificate();
        out.sol = solve_alpha0(out.pb, {*c.alpha01, *c.alpha02}, 1e-10);
        return out;
    }();
    return s;
}

GridFunction shifted(const GridFunction& f, double by) {
    auto v = f.values();
    for (auto& x : v) x += by;
    return GridFunction(f.domain(), f.lo(), f.hi(), f.nodes(), v, f.input_slopes(), f.grading());
}

double r_at_eta(double eta, double t, double alpha0, double a) {
    return free_boundary(t, alpha0, a) * std::sqrt(eta / alpha0);
}
}  // namespace

TEST(Similarity, EtaAndFront) {
    EXPECT_DOUBLE_EQ(similarity_eta(2.0, 1.0, 1.0, 1.0), 1.0);
    EXPECT_EQ(similarity_eta(0.0, 3.0, 1.0, 1.0), 0.0);
    EXPECT_THROW(similarity_eta(1.0, 0.0, 1.0, 1.0), std::domain_error);
    EXPECT_THROW(similarity_eta(-1.0, 1.0, 1.0, 1.0), std::domain_error);
    EXPECT_DOUBLE_EQ(free_boundary(1.0, 0.5, 1.0), 1.0);
    EXPECT_EQ(free_boundary(0.0, 0.5, 1.0), 0.0);
    EXPECT_THROW(free_boundary(-1.0, 0.5, 1.0), std::domain_error);
    for (double t : {1e-6, 0.3, 1.0, 17.0, 1e5}) EXPECT_EQ(free_boundary(4 * t, 0.7, 1.3), 2 * free_boundary(t, 0.7, 1.3));
}

TEST(Temperature, InterfaceAndLimits) {
    const auto& s = power_solved();
    const auto F = s.field(3.0);
    for (double t : {0.01, 1.0, 50.0}) {
        EXPECT_NEAR(temperature(F, free_boundary(t, F.alpha0(), F.a()), t), 3.0, 1e-12);
        EXPECT_NEAR(temperature(F, 1e8, t), 0.0, 1e-9);
    }
    EXPECT_NEAR(temperature(F, 1.0, 1e-14), 0.0, 1e-9);
}

TEST(Temperature, SelfSimilarAtRandomPoints) {
    const auto& s = power_solved();
    const auto F = s.field(2.0);
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> lr(-3, 1), lt(-3, 2);
    for (int i = 0; i < 100; ++i) {
        const double r = std::pow(10.0, lr(rng)), t = std::pow(10.0, lt(rng));
        EXPECT_NEAR(temperature(F, 2 * r, 4 * t), temperature(F, r, t), 1e-9);
    }
}

TEST(Temperature, DecreasesOutward) {
    const auto& s = power_solved();
    const auto F = s.field();
    double prev = temperature(F, 1e-3, 1.0);
    for (int i = 1; i <= 200; ++i) {
        const double th = temperature(F, 1e-3 + 0.02 * i, 1.0);
        EXPECT_LE(th, prev + 1e-12);
        prev = th;
    }
}

TEST(ExportProfiles, PhaseFlipsOnceAtTheFront) {
    const auto& s = power_solved();
    const auto F = s.field(2.0);
    const double front = free_boundary(1.0, F.alpha0(), F.a());
    std::vector<double> radii;
    for (int i = 0; i <= 40; ++i) radii.push_back(front * i / 10);
    std::ostringstream prof, fr;
    export_profiles(F, {1.0}, radii, prof, fr);
    std::istringstream in(prof.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "t,r,eta,phase,theta");
    int flips = 0, rows = 0;
    std::string last;
    while (std::getline(in, line)) {
        ++rows;
        std::vector<std::string> cols;
        std::stringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cols.push_back(c);
        ASSERT_EQ(cols.size(), 5u);
        if (!last.empty() && cols[3] != last) ++flips;
        last = cols[3];
        if (rows == 11) {
            EXPECT_NEAR(std::stod(cols[4]), 2.0, 1e-12);  // r = front
        }
    }
    EXPECT_EQ(rows, 41);
    EXPECT_EQ(flips, 1);
    EXPECT_EQ(fr.str().substr(0, 8), "t,alpha\n");
}

TEST(ExportProfiles, NoRadiiGivesHeaderOnly) {
    const auto F = power_solved().field();
    std::ostringstream prof, fr;
    export_profiles(F, {1.0, 2.0}, {}, prof, fr);
    EXPECT_EQ(prof.str(), "t,r,eta,phase,theta\n");
}

TEST(OdeResidual, PowerCase) {
    const auto [l, s] = ode_residual(power_solved().field());
    EXPECT_LE(l, 1e-6);
    EXPECT_LE(s, 1e-6);
}

TEST(OdeResidual, InjectedClassicalSolution) {
    const auto o = classical_oracle(10, 1, 1.0);
    const double a0 = o.alpha0_star;
    Problem<UnitLaw> pb{UnitLaw{}, 1.0, 10, 1};
    const auto lg = pb.grid.liquid(a0);
    std::vector<double> v1, d1;
    for (double eta : lg.nodes) {
        v1.push_back(o.f1(eta));
        d1.push_back(-o.Dstar * std::exp(-a0 * eta) / eta);
    }
    v1.back() = 0.0;
    const auto sg = pb.grid.solid();
    std::vector<double> v2, d2;
    const double E = expint_e1(a0 * a0);
    for (double u : sg.nodes) {
        const double xi = u == 0 ? INFINITY : a0 / u;
        v2.push_back(o.f2(xi));
        d2.push_back(u == 0 ? 0.0 : std::exp(-a0 * xi) / (xi * E) * a0 / (u * u));
    }
    v2.back() = 0.0;
    Solution sol;
    sol.alpha0_star = a0;
    sol.pair = {GridFunction::finite(0.0, a0, lg.nodes, v1, d1, lg.grading),
                GridFunction::half_line(a0, sg.nodes, v2, d2, sg.grading), a0};
    const PhysicalField<UnitLaw> F{&sol, &pb, 1.0};
    const auto [l, s] = ode_residual(F);
    EXPECT_LE(l, 1e-6);
    EXPECT_LE(s, 1e-6);
}

TEST(OdeResidual, PerturbationIsVisible) {
    // temperature-dependent coefficients, so a constant shift is not a solution any more
    const auto& c = certified_solved();
    const auto base = ode_residual(c.field());
    Solution bumped = c.sol;
    bumped.pair.f1 = shifted(c.sol.pair.f1, 0.01);
    const PhysicalField<PowerLaw> F{&bumped, &c.pb, 1.0};
    const auto pert = ode_residual(F);
    EXPECT_GE(pert.first, 10 * base.first);
    EXPECT_GT(pert.first, 0.0);
}

TEST(PdeResidual, PowerCaseAtHalf) {
    const auto F = power_solved().field();
    const double a0 = F.alpha0();
    const auto [l, s] = pde_residual(F, {{r_at_eta(0.5, 1.0, a0, 1.0), 1.0}, {r_at_eta(1.5, 1.0, a0, 1.0), 1.0}});
    EXPECT_LE(l, 1e-4);
    EXPECT_LE(s, 1e-4);
    const auto all = residual_report(F);
    EXPECT_LE(all.pde_liquid_max, 1e-4);
    EXPECT_LE(all.pde_solid_max, 1e-4);
}

TEST(PdeResidual, ConvergesUnderHalving) {
    // coarse enough that interpolation error sits above the finite-difference floor
    auto pb = fixtures::power_problem();
    pb.grid.nodes = 33;
    pb.grid.ratio = std::pow(1.15, 8.0);
    double res[2];
    for (int k = 0; k < 2; ++k) {
        const auto sol = solve_alpha0(pb, {0.2, 2.0}, 1e-10);
        const PhysicalField<PowerLaw> F{&sol, &pb, 1.0};
        const auto [l, s] = pde_residual(F, default_pde_points(F));
        res[k] = std::max(l, s);
        pb.grid = pb.grid.refined();
    }
    EXPECT_GE(std::log2(res[0] / res[1]), 1.8);
}

TEST(PdeResidual, MirroredPointsAgree) {
    const auto F = certified_solved().field();
    for (double eta : {0.3 * F.alpha0(), 2.0 * F.alpha0()}) {
        const double r = r_at_eta(eta, 1.0, F.alpha0(), F.a());
        const auto p1 = pde_residual(F, {{r, 1.0}});
        const auto p2 = pde_residual(F, {{2 * r, 4.0}});
        EXPECT_NEAR(p1.first, p2.first, 1e-8 * std::max(1.0, p1.first));
        EXPECT_NEAR(p1.second, p2.second, 1e-8 * std::max(1.0, p1.second));
    }
}

TEST(PdeResidual, PerturbedFieldIsWorse) {
    const auto& c = certified_solved();
    const auto F = c.field();
    const double r = r_at_eta(0.3 * F.alpha0(), 1.0, F.alpha0(), F.a());
    Solution bumped = c.sol;
    bumped.pair.f1 = shifted(c.sol.pair.f1, 0.01);
    const PhysicalField<PowerLaw> G{&bumped, &c.pb, 1.0};
    EXPECT_GT(pde_residual(G, {{r, 1.0}}).first, pde_residual(F, {{r, 1.0}}).first);
}

TEST(PdeResidual, InterfacePointRejected) {
    const auto F = power_solved().field();
    EXPECT_THROW(pde_residual(F, {{free_boundary(1.0, F.alpha0(), F.a()), 1.0}}), std::invalid_argument);
}

TEST(BoundaryResiduals, PowerCase) {
    const auto& s = power_solved();
    const auto rep = residual_report(s.field());
    EXPECT_EQ(rep.bc_melt_f1, 0.0);
    EXPECT_EQ(rep.bc_melt_f2, 0.0);
    EXPECT_EQ(rep.bc_infinity, 0.0);
    EXPECT_LE(rep.bc_flux, 1e-6);
    EXPECT_LE(rep.stefan, 1e-10 / s.sol.alpha0_star);
    EXPECT_LE(rep.integral_liquid, 1e-8);
    EXPECT_LE(rep.integral_solid, 1e-8);
}

TEST(ClassicalOracle, ExponentialIntegralAndLimits) {
    EXPECT_NEAR(expint_e1(1.0), 0.2193839, 1e-7);
    const auto o = classical_oracle(10, 1, 1.0);
    EXPECT_NEAR(o.R(o.alpha0_star), 0.0, 1e-12);
    EXPECT_NEAR(o.f2(o.alpha0_star), 0.0, 1e-15);
    EXPECT_EQ(o.f2(INFINITY), -1.0);
    EXPECT_NEAR(o.f2(1e6), -1.0, 1e-12);
    EXPECT_NEAR(o.f1(o.alpha0_star), 0.0, 1e-15);
}
