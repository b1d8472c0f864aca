#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fixpoint.hpp"
#include "kernels.hpp"

namespace cylstefan {

// Dimensionless problem: law, diffusivity, D*, M* and the numerics used at every probe.
template <CoefficientLaw Law>
struct Problem {
    Law law;
    double a = 1.0;
    double Dstar = 1.0;
    double Mstar = 1.0;
    GridSpec grid{};
    double quad_tol = 1e-10;
    std::size_t max_iter = 200;
    double beta_guess = 1.0;  // exponent of the initial solid guess

    KernelContext<Law> context(double alpha0) const { return {law, alpha0, a, Dstar, quad_tol}; }
};

// D* E1(alpha0) - 1/F2(alpha0, inf)
template <CoefficientLaw Law>
double eval_Phi(const KernelContext<Law>& ctx, const PhasePair& pair) {
    LiquidKernels<Law> L(ctx, pair.f1);
    SolidKernels<Law> S(ctx, pair.f2);
    const double f2inf = S.F2_inf();
    if (!(f2inf > 0)) throw KernelError("F2(alpha0, inf) must be positive");
    return ctx.Dstar * L.E1(ctx.alpha0) - 1.0 / f2inf;
}

struct Probe {
    double alpha0 = 0.0;
    double R = 0.0;
    double Phi = 0.0;
    FixedPointReport report;
};

class RootError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ProbeResult {
    Probe probe;
    PhasePair pair;
};

template <CoefficientLaw Law>
ProbeResult stefan_probe(const Problem<Law>& pb, double alpha0, double tol_fp) {
    if (!(alpha0 > 0)) throw std::invalid_argument("stefan_residual: alpha0 must be positive");
    const auto ctx = pb.context(alpha0);
    try {
        auto fp = solve_pair(ctx, pb.grid, tol_fp, pb.max_iter, pb.beta_guess);
        const double Phi = eval_Phi(ctx, fp.pair);
        return {{alpha0, Phi - pb.Mstar * alpha0 * alpha0, Phi, std::move(fp.report)}, std::move(fp.pair)};
    } catch (const FixedPointFailure& e) {
        throw;
    } catch (const std::exception& e) {
        throw RootError("probe at alpha0 = " + format_double(alpha0) + ": " + e.what());
    }
}

// R(alpha0) = Phi(alpha0) - M* alpha0^2 at the fixed point for alpha0
template <CoefficientLaw Law>
double stefan_residual(const Problem<Law>& pb, double alpha0, double tol_fp) {
    return stefan_probe(pb, alpha0, tol_fp).probe.R;
}

struct Solution {
    PhasePair pair;
    double alpha0_star = 0.0;
    double stefan_residual = 0.0;
    double Phi = 0.0;
    std::pair<double, double> bracket{0.0, 0.0};
    std::vector<Probe> probes;
    FixedPointReport final_report;
    std::vector<std::string> notes;
};

// Bisection down to a bracket of a few percent, then Illinois false position.  Either sign
// orientation across the bracket is accepted.
template <CoefficientLaw Law>
Solution solve_alpha0(const Problem<Law>& pb, std::pair<double, double> bracket, double tol_root = 1e-8,
                      double tol_fp = -1.0) {
    if (tol_fp <= 0) tol_fp = tol_root / 100.0;
    double a = bracket.first, b = bracket.second;
    if (!(a > 0 && a < b)) throw std::invalid_argument("solve_alpha0: need 0 < lo < hi");
    Solution sol;
    sol.bracket = bracket;
    auto take = [&](ProbeResult&& pr) {
        sol.pair = std::move(pr.pair);
        sol.alpha0_star = pr.probe.alpha0;
        sol.stefan_residual = pr.probe.R;
        sol.Phi = pr.probe.Phi;
        sol.final_report = pr.probe.report;
        return std::move(sol);
    };

    ProbeResult pa = stefan_probe(pb, a, tol_fp);
    sol.probes.push_back(pa.probe);
    if (std::abs(pa.probe.R) <= tol_root) return take(std::move(pa));
    ProbeResult pbr = stefan_probe(pb, b, tol_fp);
    sol.probes.push_back(pbr.probe);
    if (std::abs(pbr.probe.R) <= tol_root) return take(std::move(pbr));
    double Ra = pa.probe.R, Rb = pbr.probe.R;
    if ((Ra > 0) == (Rb > 0))
        throw RootError("no sign change of R on [" + format_double(a) + ", " + format_double(b) +
                        "]: R(lo) = " + format_double(Ra) + ", R(hi) = " + format_double(Rb));
    int side = 0;
    std::optional<ProbeResult> best;
    for (int it = 0; it < 200; ++it) {
        const double width = b - a;
        double m;
        if (width > 0.05 * a) {
            m = 0.5 * (a + b);
        } else {
            m = (a * Rb - b * Ra) / (Rb - Ra);
            if (!(m > a && m < b)) m = 0.5 * (a + b);
        }
        ProbeResult pm = stefan_probe(pb, m, tol_fp);
        sol.probes.push_back(pm.probe);
        const double Rm = pm.probe.R;
        if (std::abs(Rm) <= tol_root) return take(std::move(pm));
        if (!best || std::abs(Rm) < std::abs(best->probe.R)) best = std::move(pm);
        if ((Rm > 0) == (Rb > 0)) {
            b = m, Rb = Rm;
            if (side == 1) Ra *= 0.5;
            side = 1;
        } else {
            a = m, Ra = Rm;
            if (side == -1) Rb *= 0.5;
            side = -1;
        }
        if (b - a <= 4e-16 * b) break;
    }
    throw RootError("root tolerance " + format_double(tol_root) + " not reached; best |R| = " +
                    format_double(best ? std::abs(best->probe.R) : NAN) + " at alpha0 = " +
                    format_double(best ? best->probe.alpha0 : NAN));
}

}  // namespace cylstefan
