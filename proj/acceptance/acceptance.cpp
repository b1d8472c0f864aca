// One line per acceptance criterion; exit status is nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cylstefan/commands.hpp"
#include "cylstefan/expint.hpp"

using namespace cylstefan;
namespace fs = std::filesystem;

namespace {

const fs::path samples = CYLSTEFAN_SAMPLES_DIR;
constexpr double inf = std::numeric_limits<double>::infinity();

// collects the first few failures of a criterion
struct Check {
    bool ok = true;
    std::vector<std::string> why;
    void expect(bool cond, const std::string& what) {
        if (cond) return;
        ok = false;
        if (why.size() < 3) why.push_back(what);
    }
    void near(double got, double want, double tol, const std::string& what) {
        expect(std::abs(got - want) <= tol,
               what + ": " + format_double(got) + " vs " + format_double(want) + " (tol " + format_double(tol) + ")");
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct UnitLaw {
    double conductivity(Phase, double, double) const { return 1.0; }
    double capacity(Phase, double, double) const { return 1.0; }
};

PowerLaw power_case() { return PowerLaw::pure(2, 1, 4, 1); }

Problem<PowerLaw> power_problem() {
    Problem<PowerLaw> pb{power_case(), 1.0, 1.0, 0.1};
    pb.beta_guess = 4.0;
    return pb;
}

// weakly temperature-dependent powers whose envelope certifies a bracket
struct Certified {
    static constexpr double a = 0.0184, Dstar = 2.05, Mstar = 4.0;
    static PowerLaw law() {
        PowerLaw l = PowerLaw::pure(2, 1, 3, 0);
        l.liquid_L.kappa = 1.15e-4;
        l.liquid_N.kappa = 1.93e-3;
        l.solid_L.kappa = 1.63e-4;
        l.solid_N.kappa = 2.08e-3;
        return l;
    }
    static EnvelopeParams envelope() { return law().envelope(0.0596, 8.38, 0.5); }
    static Problem<PowerLaw> problem() {
        Problem<PowerLaw> pb{law(), a, Dstar, Mstar};
        pb.beta_guess = 3.0;
        return pb;
    }
};

fs::path work_dir() {
    auto d = fs::temp_directory_path() / ("cylstefan_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Check classical_equivalence() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    for (const char* name : {"cc1.cfg", "cc2.cfg", "cc3.cfg"}) {
        const Config cfg = parse_config(samples / name);
        const auto fs = solve_full(cfg);
        const auto o = classical_oracle(cfg.params.Dstar, cfg.params.Mstar, cfg.params.a);
        const double a0 = fs.solution.alpha0_star;
        c.near(a0, o.alpha0_star, 1e-6 * o.alpha0_star, std::string(name) + " alpha0*");
        const auto& pair = fs.solution.pair;
        double e1 = 0, e2 = 0;
        for (double eta : detail::doubled(pair.f1)) e1 = std::max(e1, std::abs(pair.f1(eta) - o.f1(eta)));
        for (double u : detail::doubled(pair.f2)) {
            const double xi = u == 0 ? inf : a0 / u;
            e2 = std::max(e2, std::abs(pair.f2(xi) - o.f2(xi)));
        }
        c.expect(e1 <= 1e-6, std::string(name) + " sup|f1 - oracle| = " + format_double(e1));
        c.expect(e2 <= 1e-6, std::string(name) + " sup|f2 - oracle| = " + format_double(e2));
    }
    const double t = seconds_since(t0);
    c.expect(t < 30, "runtime " + format_double(t) + " s");
    return c;
}

Check kernel_closed_forms() {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    const auto law = power_case();
    GridSpec g;
    g.nodes = 129;
    const auto start = initial_pair(1.0, g, 4.0);
    const KernelContext<PowerLaw> ctx(law, 1.0, 1.0, 1.0, 1e-12);
    const KernelContext<PowerLaw> flat(law, 1.0, 0.0, 1.0, 1e-12);
    const double tol = 1e-9;
    c.near(E1(ctx, 0.0, start.f1), 1.0, tol, "E1(0)");
    c.near(E1(ctx, 1.0, start.f1), std::exp(-0.5), tol, "E1(1)");
    c.near(E2(ctx, 1.0, start.f2), 1.0, tol, "E2(alpha0)");
    c.near(E2(ctx, inf, start.f2), std::exp(-0.5), tol, "E2(inf)");
    c.near(E2(ctx, 2.0, start.f2), std::exp(-0.375), tol, "E2(2)");
    c.near(F1(ctx, 1.0, start.f1), 1 - std::exp(-0.5), tol, "F1(1)");
    c.near(F1(ctx, 0.0, start.f1), 0.0, tol, "F1(0)");
    c.near(F2(flat, 2.0, start.f2), 0.234375, tol, "F2(2), a = 0");
    c.near(F2(flat, inf, start.f2), 0.25, tol, "F2(inf), a = 0");
    c.near(f1_difference(ctx, 1.0, start.f1), 0.0, tol, "f1_difference(alpha0)");
    c.near(f1_difference(ctx, 0.5, start.f1), std::exp(-0.125) - std::exp(-0.5), tol, "f1_difference(0.5)");
    c.near(f2_prime(flat, 2.0, start.f2), -0.125, tol, "f2'(2), a = 0");
    c.near(f2_prime(flat, 1.0, start.f2), -4.0, tol, "f2'(alpha0), a = 0");
    const double eta = 1e-5, D = 3.0;
    const KernelContext<PowerLaw> src(law, 1.0, 1.0, D, 1e-12);
    const double flux = -4 * std::numbers::pi * eta * std::pow(eta, -2) * f1_prime(src, eta, start.f1);
    c.near(flux, 4 * std::numbers::pi * D * E1(src, eta, start.f1), 1e-9 * flux, "axis flux");
    const auto u = apply_U(ctx, start.f1);
    c.near(u(0.5), std::exp(-0.125) - std::exp(-0.5), tol, "U(0)(0.5)");
    c.near(u(1.0), 0.0, tol, "U(0)(alpha0)");
    const auto w = apply_W(flat, start.f2);
    c.near(w(2.0), -0.9375, tol, "W(f2)(2), a = 0");
    c.near(w(1.0), 0.0, tol, "W(f2)(alpha0), a = 0");
    const UnitLaw unit;
    const KernelContext<UnitLaw> uctx(unit, 1.0, 1.0, 1.0, 1e-12);
    c.near(F2(uctx, inf, start.f2), std::exp(1.0) * expint_e1(1.0), tol, "F2(inf), constant coefficients");
    c.near(f1_difference(uctx, 0.5, start.f1), expint_e1(0.5) - expint_e1(1.0), tol,
           "f1_difference(0.5), constant coefficients");
    const double t = seconds_since(t0);
    c.expect(t < 5, "runtime " + format_double(t) + " s");
    return c;
}

template <CoefficientLaw Law>
void sandwich(Check& c, const Problem<Law>& pb, const EnvelopeParams& env, double x, double tol, bool tight,
              const std::string& tag) {
    const auto ctx = pb.context(x);
    const auto fp = solve_pair(ctx, pb.grid, 1e-11, pb.max_iter, pb.beta_guess);
    const bool env_ok = check_envelopes(fp.pair.f1, Phase::liquid, env, pb.law, x).pass &&
                        check_envelopes(fp.pair.f2, Phase::solid, env, pb.law, x).pass;
    c.expect(env_ok, tag + ": envelope check failed, fixture unusable");
    if (!env_ok) return;
    LiquidKernels<Law> L(ctx, fp.pair.f1);
    SolidKernels<Law> S(ctx, fp.pair.f2);
    for (std::size_t i = 0; i < fp.pair.f1.size(); ++i) {
        const double eta = fp.pair.f1.nodes()[i];
        const auto b1 = E1_bounds(env, pb.a, x, eta);
        const double e = L.E1(eta);
        c.expect(b1.contains(e, tol), tag + ": E1 outside bounds at eta = " + format_double(eta));
        if (tight) c.expect(std::abs(e - b1.lo) <= tol && std::abs(e - b1.hi) <= tol, tag + ": E1 not tight");
        c.expect(F1_bounds(env, pb.a, x, eta).contains(L.F1(eta), tol),
                 tag + ": F1 outside bounds at eta = " + format_double(eta));
    }
    for (std::size_t i = 0; i < fp.pair.f2.size(); ++i) {
        const double xi = fp.pair.f2.node_position(i);
        const auto b2 = E2_bounds(env, pb.a, x, xi);
        const double e = S.E2(xi);
        c.expect(b2.contains(e, tol), tag + ": E2 outside bounds at xi = " + format_double(xi));
        if (tight) c.expect(std::abs(e - b2.lo) <= tol && std::abs(e - b2.hi) <= tol, tag + ": E2 not tight");
        c.expect(F2_bounds(env, pb.a, x, xi).contains(S.F2(xi), tol),
                 tag + ": F2 outside bounds at xi = " + format_double(xi));
    }
}

Check envelope_sandwich() {
    Check c;
    const EnvelopeParams exact{2, 1, 4, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0};
    for (double x : {0.5, 1.0, 2.0}) sandwich(c, power_problem(), exact, x, 1e-9, true, "power");
    const auto pb = Certified::problem();
    for (double x : {0.1, 0.5, 2.0, 6.0}) sandwich(c, pb, Certified::envelope(), x, 1e-9, false, "certified");
    return c;
}

Check contraction() {
    Check c;
    const auto cert = certify(Certified::envelope(), Certified::a, Certified::Dstar, Certified::Mstar);
    c.expect(cert.bracket_certified(), "fixture bracket not certified");
    if (!cert.bracket_certified()) return c;
    const double lo = *cert.alpha01, hi = *cert.alpha02;
    const auto pb = Certified::problem();
    for (int i = 1; i <= 10; ++i) {
        const double x = lo * std::pow(hi / lo, i / 11.0);
        try {
            const auto fp = solve_pair(pb.context(x), pb.grid, 1e-10, 200, pb.beta_guess);
            c.expect(fp.report.converged && fp.report.iterations <= 200, "no convergence at " + format_double(x));
            const double eps = cert.epsilon(x);
            for (double r : fp.report.contraction_estimates)
                c.expect(r <= eps + 0.05, "ratio " + format_double(r) + " > eps + 0.05 = " + format_double(eps + 0.05) +
                                              " at alpha0 = " + format_double(x));
        } catch (const FixedPointFailure& e) {
            c.expect(false, std::string("alpha0 = ") + format_double(x) + ": " + e.what());
        }
    }
    return c;
}

Check certificate_consistency() {
    Check c;
    const auto cert = certify(Certified::envelope(), Certified::a, Certified::Dstar, Certified::Mstar);
    c.expect(cert.alpha01 && cert.alpha02, "bracket endpoints unavailable");
    if (!(cert.alpha01 && cert.alpha02)) return c;
    c.near(cert.phi(*cert.alpha02), 1.0, 1e-9, "phi(alpha02)");
    c.near(cert.phihat(*cert.alpha01), 1.0, 1e-9, "phihat(alpha01)");
    c.expect(cert.existence_ok, "existence check does not pass on the fixture");
    const auto pb = Certified::problem();
    const auto sol = solve_alpha0(pb, {*cert.alpha01, *cert.alpha02}, 1e-8);
    for (const auto& p : sol.probes) {
        const auto b = cert.bounds(p.alpha0);
        const double slack = 1e-8 * std::max({std::abs(p.Phi), std::abs(b.Phi1), std::abs(b.Phi2), 1e-300});
        c.expect(b.Phi1 <= p.Phi + slack && p.Phi <= b.Phi2 + slack,
                 "Phi = " + format_double(p.Phi) + " outside [" + format_double(b.Phi1) + ", " +
                     format_double(b.Phi2) + "] at alpha0 = " + format_double(p.alpha0));
    }
    if (cert.existence_ok) {
        const double r1 = stefan_residual(pb, *cert.alpha01, 1e-10), r2 = stefan_residual(pb, *cert.alpha02, 1e-10);
        c.expect((r1 > 0) != (r2 > 0), "R does not change sign across the bracket");
    }
    return c;
}

Check residuals() {
    Check c;
    auto pb = power_problem();
    const auto sol = solve_alpha0(pb, {0.2, 2.0}, 1e-8);
    const PhysicalField<PowerLaw> F{&sol, &pb, 1.0};
    const auto r = residual_report(F);
    c.expect(r.bc_melt_f1 == 0 && r.bc_melt_f2 == 0, "bc_melt = " + format_double(r.bc_melt_f1 + r.bc_melt_f2));
    c.expect(r.bc_infinity == 0, "bc_infinity = " + format_double(r.bc_infinity));
    c.expect(r.bc_flux <= 1e-6, "bc_flux = " + format_double(r.bc_flux));
    c.expect(r.stefan <= 1e-8, "stefan = " + format_double(r.stefan));
    c.expect(std::max(r.ode_liquid_max, r.ode_solid_max) <= 1e-6,
             "ode = " + format_double(std::max(r.ode_liquid_max, r.ode_solid_max)));
    c.expect(std::max(r.pde_liquid_max, r.pde_solid_max) <= 1e-4,
             "pde = " + format_double(std::max(r.pde_liquid_max, r.pde_solid_max)));
    // at the default grid the PDE residual sits on the finite-difference floor, so the order is
    // measured where interpolation error dominates
    pb.grid.nodes = 33;
    pb.grid.ratio = std::pow(1.15, 8.0);
    double res[2];
    for (double& v : res) {
        const auto s = solve_alpha0(pb, {0.2, 2.0}, 1e-10);
        const PhysicalField<PowerLaw> G{&s, &pb, 1.0};
        const auto [l, so] = pde_residual(G, default_pde_points(G));
        v = std::max(l, so);
        pb.grid = pb.grid.refined();
    }
    const double order = std::log2(res[0] / res[1]);
    c.expect(order >= 1.8, "pde order " + format_double(order));
    return c;
}

Check similarity() {
    Check c;
    const auto pb = power_problem();
    const auto sol = solve_alpha0(pb, {0.2, 2.0}, 1e-8);
    const PhysicalField<PowerLaw> F{&sol, &pb, 2.0};
    std::mt19937_64 rng(20261016);
    std::uniform_real_distribution<double> lr(-3, 1), lt(-3, 2);
    for (int i = 0; i < 100; ++i) {
        const double r = std::pow(10.0, lr(rng)), t = std::pow(10.0, lt(rng));
        c.near(temperature(F, 2 * r, 4 * t), temperature(F, r, t), 1e-9,
               "T at r = " + format_double(r) + ", t = " + format_double(t));
    }
    for (double t : {1e-8, 1e-3, 0.7, 1.0, 3.0, 1e6})
        c.expect(free_boundary(4 * t, sol.alpha0_star, pb.a) == 2 * free_boundary(t, sol.alpha0_star, pb.a),
                 "free_boundary(4t) != 2 free_boundary(t) at t = " + format_double(t));
    return c;
}

Check determinism() {
    Check c;
    const auto dir = work_dir();
    fs::copy_file(samples / "cc1.cfg", dir / "cc1.cfg");
    std::ostringstream out, err;
    const int r1 = cmd_solve(dir / "cc1.cfg", dir / "one.solution", {out, err});
    const int r2 = cmd_solve(dir / "cc1.cfg", dir / "two.solution", {out, err});
    c.expect(r1 == exit_ok && r2 == exit_ok, "solve failed: " + err.str());
    const auto a = slurp(dir / "one.solution"), b = slurp(dir / "two.solution");
    c.expect(!a.empty() && a == b, "solution files differ");
    fs::remove_all(dir);
    return c;
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Check()>> criteria[] = {
        {"classical oracle equivalence", classical_equivalence},
        {"closed-form kernels", kernel_closed_forms},
        {"envelope sandwich bounds", envelope_sandwich},
        {"contraction inside certified bracket", contraction},
        {"certificate self-consistency", certificate_consistency},
        {"boundary, Stefan, ODE and PDE residuals", residuals},
        {"similarity invariance", similarity},
        {"determinism", determinism},
    };
    int failed = 0, k = 0;
    for (const auto& [name, run] : criteria) {
        ++k;
        const auto t0 = std::chrono::steady_clock::now();
        Check c;
        try {
            c = run();
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        std::printf("%s %d %s (%.2f s)", c.ok ? "PASS" : "FAIL", k, name, seconds_since(t0));
        for (const auto& w : c.why) std::printf(" | %s", w.c_str());
        std::printf("\n");
        failed += !c.ok;
    }
    return failed == 0 ? 0 : 1;
}
