#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"
#include "kernels.hpp"
#include "props.hpp"

namespace cylstefan {

// Solver grids.  The liquid grid runs from eta_min to alpha0 (graded toward the axis); the solid
// grid runs over u = alpha0/xi in [0, 1] (graded toward the interface u = 1).
struct GridSpec {
    std::size_t nodes = 257;
    double ratio = 1.15;
    double eta_min = 1e-4;
    double solid_shift = 1e-3;

    double liquid_start(double alpha0) const { return std::min(eta_min, 1e-2 * alpha0); }
    GradedNodes liquid(double alpha0) const {
        return graded_toward_lower(liquid_start(alpha0), alpha0, nodes, ratio);
    }
    GradedNodes solid() const { return graded_toward_upper(nodes, ratio, solid_shift); }

    // same mapped coordinate, every spacing halved
    GridSpec refined() const {
        GridSpec g = *this;
        g.nodes = 2 * nodes - 1;
        g.ratio = std::sqrt(ratio);
        return g;
    }
};

struct PhasePair {
    GridFunction f1;
    GridFunction f2;
    double alpha0 = 0.0;
};

struct FixedPointReport {
    std::size_t iterations = 0;
    double final_delta = 0.0;
    std::vector<double> deltas;
    std::vector<double> contraction_estimates;
    bool converged = false;
};

class FixedPointFailure : public std::runtime_error {
public:
    FixedPointFailure(const std::string& what, FixedPointReport rep)
        : std::runtime_error(what), report_(std::move(rep)) {}
    const FixedPointReport& report() const { return report_; }

private:
    FixedPointReport report_;
};

template <CoefficientLaw Law>
GridFunction apply_U(const KernelContext<Law>& ctx, const GridFunction& f1) {
    LiquidKernels<Law> K(ctx, f1);
    const auto& x = f1.nodes();
    const std::size_t shift = x.front() > 0.0 ? 1 : 0;  // breakpoint index offset
    std::vector<double> v(x.size()), d(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) {
            v[i] = ctx.Dstar * K.F1(ctx.alpha0);
            d[i] = std::numeric_limits<double>::quiet_NaN();
            continue;
        }
        const std::size_t jb = i + shift;
        v[i] = ctx.Dstar * K.node_difference(jb);
        d[i] = -ctx.Dstar * K.node_E1(jb) / (x[i] * K.conductivity(x[i]));
    }
    v.back() = 0.0;
    return GridFunction::finite(f1.lo(), f1.hi(), x, std::move(v), std::move(d), f1.grading());
}

template <CoefficientLaw Law>
GridFunction apply_W(const KernelContext<Law>& ctx, const GridFunction& f2) {
    SolidKernels<Law> K(ctx, f2);
    const auto& u = f2.nodes();
    const double c0 = K.F2_inf();
    std::vector<double> v(u.size()), d(u.size());
    v[0] = -1.0;
    d[0] = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t j = 1; j < u.size(); ++j) {
        v[j] = -K.node_F2(j) / c0;
        d[j] = K.node_E2(j) / (u[j] * K.conductivity_u(u[j])) / c0;
    }
    v.back() = 0.0;
    return GridFunction::half_line(ctx.alpha0, u, std::move(v), std::move(d), f2.grading());
}

// f1 = 0 and f2 = (alpha0/xi)^beta - 1 on the solver grids
inline PhasePair initial_pair(double alpha0, const GridSpec& grid, double beta) {
    auto lg = grid.liquid(alpha0);
    std::vector<double> z1(lg.nodes.size(), 0.0);
    GridFunction f1 = GridFunction::finite(0.0, alpha0, lg.nodes, z1, z1, lg.grading);
    auto sg = grid.solid();
    std::vector<double> v(sg.nodes.size()), d(sg.nodes.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        v[j] = std::pow(sg.nodes[j], beta) - 1.0;
        d[j] = beta * std::pow(sg.nodes[j], beta - 1.0);
    }
    v.front() = -1.0;
    v.back() = 0.0;
    GridFunction f2 = GridFunction::half_line(alpha0, sg.nodes, std::move(v), std::move(d), sg.grading);
    return {std::move(f1), std::move(f2), alpha0};
}

inline double sup_difference(const GridFunction& a, const GridFunction& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

inline double sup_norm(const GridFunction& a) {
    double m = 0.0;
    for (double v : a.values()) m = std::max(m, std::abs(v));
    return m;
}

struct FixedPointResult {
    PhasePair pair;
    FixedPointReport report;
};

// Banach iteration of Psi = (U, W) from a given start.  'iterations' counts the applications
// needed before the confirming one, so constant maps report a single iteration.
template <CoefficientLaw Law>
FixedPointResult solve_pair(const KernelContext<Law>& ctx, PhasePair start, double tol_fp,
                            std::size_t max_iter) {
    if (!(tol_fp > 0)) throw std::invalid_argument("solve_pair: tol_fp must be positive");
    FixedPointReport rep;
    PhasePair cur = std::move(start);
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t it = 1; it <= max_iter; ++it) {
        GridFunction n1 = apply_U(ctx, cur.f1);
        GridFunction n2 = apply_W(ctx, cur.f2);
        const double delta = std::max(sup_difference(n1, cur.f1), sup_difference(n2, cur.f2));
        rep.deltas.push_back(delta);
        // ratios are meaningless once the update is at quadrature noise level
        const double floor = 1e3 * ctx.tol * std::max(1.0, sup_norm(n1));
        if (std::isfinite(prev) && prev > floor) rep.contraction_estimates.push_back(delta / prev);
        prev = delta;
        cur.f1 = std::move(n1);
        cur.f2 = std::move(n2);
        if (delta <= tol_fp) {
            rep.iterations = it == 1 ? 1 : it - 1;
            rep.final_delta = delta;
            rep.converged = true;
            return {std::move(cur), std::move(rep)};
        }
    }
    rep.iterations = max_iter;
    rep.final_delta = rep.deltas.empty() ? 0.0 : rep.deltas.back();
    throw FixedPointFailure("fixed point: no convergence after " + std::to_string(max_iter) +
                                " iterations at alpha0 = " + format_double(ctx.alpha0) +
                                " (last update " + format_double(rep.final_delta) + ")",
                            std::move(rep));
}

template <CoefficientLaw Law>
FixedPointResult solve_pair(const KernelContext<Law>& ctx, const GridSpec& grid, double tol_fp = 1e-9,
                            std::size_t max_iter = 200, double beta = 1.0) {
    return solve_pair(ctx, initial_pair(ctx.alpha0, grid, beta), tol_fp, max_iter);
}

}  // namespace cylstefan
