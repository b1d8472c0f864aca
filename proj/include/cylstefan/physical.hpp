#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "expint.hpp"
#include "fixpoint.hpp"
#include "freeboundary.hpp"
#include "kernels.hpp"

namespace cylstefan {

// alpha(t) = 2 a alpha0 sqrt(t)
inline double free_boundary(double t, double alpha0, double a) {
    if (t < 0) throw std::domain_error("free_boundary: t must be nonnegative");
    return 2.0 * a * alpha0 * std::sqrt(t);
}

// eta = r^2/(4 a^2 alpha0 t), written as alpha0 (r/alpha(t))^2 so the front maps to alpha0 exactly
inline double similarity_eta(double r, double t, double alpha0, double a) {
    if (r < 0) throw std::domain_error("similarity_eta: r must be nonnegative");
    if (!(t > 0)) throw std::domain_error("similarity_eta: t must be positive");
    if (r == 0.0) return 0.0;
    const double rho = r / free_boundary(t, alpha0, a);
    return alpha0 * rho * rho;
}

template <CoefficientLaw Law>
struct PhysicalField {
    const Solution* solution;
    const Problem<Law>* problem;
    double theta_m = 1.0;

    double alpha0() const { return solution->alpha0_star; }
    double a() const { return problem->a; }

    // dimensionless temperature at similarity coordinate eta (liquid on the closed interval)
    double T_of_eta(double eta) const {
        const double a0 = alpha0();
        if (eta <= a0) return solution->pair.f1(std::max(eta, 0.0));
        return solution->pair.f2(eta);
    }
    Phase phase_of_eta(double eta) const { return eta <= alpha0() ? Phase::liquid : Phase::solid; }
};

template <CoefficientLaw Law>
double temperature(const PhysicalField<Law>& F, double r, double t) {
    const double eta = similarity_eta(r, t, F.alpha0(), F.a());
    return F.theta_m * F.T_of_eta(eta) + F.theta_m;
}

struct ResidualReport {
    double ode_liquid_max = 0, ode_solid_max = 0;
    double bc_flux = 0, bc_melt_f1 = 0, bc_melt_f2 = 0, bc_infinity = 0, stefan = 0;
    double pde_liquid_max = 0, pde_solid_max = 0;
    double integral_liquid = 0, integral_solid = 0;
    std::string grid_meta;
};

namespace detail {
// Richardson-extrapolated central difference of g at x with step h
template <class G>
double central_derivative(G&& g, double x, double h) {
    auto d = [&](double s) { return (g(x + s) - g(x - s)) / (2 * s); };
    return (4 * d(0.5 * h) - d(h)) / 3;
}

// 5-point first derivative, Richardson-combined with the half step
template <class G>
double five_point(G&& g, double x, double h) {
    auto d = [&](double s) {
        return (g(x - 2 * s) - 8 * g(x - s) + 8 * g(x + s) - g(x + 2 * s)) / (12 * s);
    };
    return (16 * d(0.5 * h) - d(h)) / 15;
}

inline std::vector<double> doubled(const GridFunction& f) {
    const auto& x = f.nodes();
    const auto& g = f.grading();
    std::vector<double> out;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        out.push_back(x[i]);
        const double zm = 0.5 * (g.z(x[i]) + g.z(x[i + 1]));
        double m = g.invert(zm, x[i], x[i + 1]);
        if (!(m > x[i] && m < x[i + 1])) m = 0.5 * (x[i] + x[i + 1]);
        out.push_back(m);
    }
    out.push_back(x.back());
    return out;
}
}  // namespace detail

// Weighted residual of [L* eta f']' + alpha0 a eta N* f' = 0 on the doubled grid, written in
// t = ln eta so it stays well scaled near the axis.  The profile is taken from its integral
// representation over the stored iterate; f' from the kernel formula.
template <CoefficientLaw Law>
std::pair<double, double> ode_residual(const PhysicalField<Law>& F) {
    const auto& pb = *F.problem;
    const double a0 = F.alpha0();
    const auto ctx = pb.context(a0);
    const auto& law = pb.law;
    const double h = 1e-3;
    double liquid = 0.0, solid = 0.0;

    LiquidKernels<Law> LK(ctx, F.solution->pair.f1);
    auto gl = [&](double t, double* extra) {
        const double eta = std::exp(t);
        const double f = ctx.Dstar * LK.difference(eta);
        const double efp = -ctx.Dstar * LK.E1(eta) / LK.conductivity(eta);  // eta f'
        if (extra) *extra = ctx.alpha0 * ctx.a * eta * law.capacity(Phase::liquid, eta, f) * efp;
        return law.conductivity(Phase::liquid, eta, f) * efp;
    };
    const auto xl = detail::doubled(F.solution->pair.f1);
    for (std::size_t i = 1; i < xl.size(); ++i) {
        const double eta = xl[i];
        if (eta * std::exp(h) >= a0) continue;
        const double t = std::log(eta);
        double src = 0.0;
        gl(t, &src);
        const double dg = detail::central_derivative([&](double s) { return gl(s, nullptr); }, t, h);
        liquid = std::max(liquid, std::abs(dg + src) / (1.0 + std::abs(dg)));
    }

    SolidKernels<Law> SK(ctx, F.solution->pair.f2);
    const double c0 = SK.F2_inf();
    auto gs = [&](double t, double* extra) {
        const double xi = std::exp(t);
        const double f = -SK.F2(xi) / c0;
        const double v = a0 / xi;
        const double xfp = -SK.E2_u(v) / (SK.conductivity_u(v) * c0);  // xi f'
        if (extra) *extra = ctx.alpha0 * ctx.a * xi * law.capacity(Phase::solid, xi, f) * xfp;
        return law.conductivity(Phase::solid, xi, f) * xfp;
    };
    const auto us = detail::doubled(F.solution->pair.f2);
    for (double u : us) {
        if (u == 0.0) continue;
        const double xi = a0 / u;
        if (xi * std::exp(-h) <= a0) continue;
        const double t = std::log(xi);
        double src = 0.0;
        gs(t, &src);
        const double dg = detail::central_derivative([&](double s) { return gs(s, nullptr); }, t, h);
        solid = std::max(solid, std::abs(dg + src) / (1.0 + std::abs(dg)));
    }
    return {liquid, solid};
}

template <CoefficientLaw Law>
void boundary_residuals(const PhysicalField<Law>& F, ResidualReport& rep) {
    const auto& pb = *F.problem;
    const double a0 = F.alpha0();
    const auto ctx = pb.context(a0);
    const auto& pair = F.solution->pair;
    LiquidKernels<Law> LK(ctx, pair.f1);
    SolidKernels<Law> SK(ctx, pair.f2);
    const double eta_min = pair.f1.nodes().front();
    const double source = 4.0 * std::numbers::pi * pb.Dstar;  // Q0/(lambda0 theta_m)
    rep.bc_flux = std::abs(source * LK.E1(eta_min) - source);
    rep.bc_melt_f1 = std::abs(pair.f1.values().back());
    rep.bc_melt_f2 = std::abs(pair.f2.values().back());
    rep.bc_infinity = std::abs(pair.f2.values().front() + 1.0);
    const double liquid_flux = -LK.conductivity(a0) * LK.prime(a0);
    const double solid_flux = SK.conductivity_u(1.0) * SK.prime(a0);
    rep.stefan = std::abs(liquid_flux + solid_flux - pb.Mstar * a0);
}

// sup over nodes of |f - Psi(f)|
template <CoefficientLaw Law>
std::pair<double, double> integral_residual(const PhysicalField<Law>& F) {
    const auto ctx = F.problem->context(F.alpha0());
    const auto& pair = F.solution->pair;
    return {sup_difference(apply_U(ctx, pair.f1), pair.f1), sup_difference(apply_W(ctx, pair.f2), pair.f2)};
}

// N T_t - (a/r) d/dr[L r T_r] on the reconstructed field, normalized by the larger term
template <CoefficientLaw Law>
std::pair<double, double> pde_residual(const PhysicalField<Law>& F,
                                       const std::vector<std::pair<double, double>>& points,
                                       double rel_step = 1e-3) {
    const auto& law = F.problem->law;
    const double a = F.a(), a0 = F.alpha0();
    double liquid = 0.0, solid = 0.0;
    for (auto [r, t] : points) {
        const double eta = similarity_eta(r, t, a0, a);
        if (eta == a0) throw std::invalid_argument("pde_residual: sample point on the interface");
        const Phase ph = F.phase_of_eta(eta);
        auto T = [&](double rr, double tt) { return F.T_of_eta(similarity_eta(rr, tt, a0, a)); };
        const double hr = rel_step * r, ht = rel_step * t;
        const double Tt = detail::five_point([&](double tt) { return T(r, tt); }, t, ht);
        auto flux = [&](double rr) {
            const double Tr = detail::five_point([&](double q) { return T(q, t); }, rr, hr);
            const double e = similarity_eta(rr, t, a0, a);
            return law.conductivity(ph, e, T(rr, t)) * rr * Tr;
        };
        const double lhs = law.capacity(ph, eta, T(r, t)) * Tt;
        const double rhs = a / r * detail::five_point(flux, r, hr);
        const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-300});
        const double res = std::abs(lhs - rhs) / scale;
        (ph == Phase::liquid ? liquid : solid) = std::max(ph == Phase::liquid ? liquid : solid, res);
    }
    return {liquid, solid};
}

// sample points at t = 1 away from the axis and the front
template <CoefficientLaw Law>
std::vector<std::pair<double, double>> default_pde_points(const PhysicalField<Law>& F) {
    const double t = 1.0;
    const double front = free_boundary(t, F.alpha0(), F.a());
    std::vector<std::pair<double, double>> pts;
    for (double q : {0.3, 0.5, 0.75, 0.9}) pts.push_back({front * std::sqrt(q), t});
    for (double q : {1.25, 1.5, 2.0, 3.0}) pts.push_back({front * std::sqrt(q), t});
    return pts;
}

template <CoefficientLaw Law>
ResidualReport residual_report(const PhysicalField<Law>& F) {
    ResidualReport rep;
    boundary_residuals(F, rep);
    std::tie(rep.ode_liquid_max, rep.ode_solid_max) = ode_residual(F);
    std::tie(rep.integral_liquid, rep.integral_solid) = integral_residual(F);
    std::tie(rep.pde_liquid_max, rep.pde_solid_max) = pde_residual(F, default_pde_points(F));
    const auto& g = F.problem->grid;
    rep.grid_meta = "nodes=" + std::to_string(g.nodes) + " ratio=" + format_double(g.ratio) +
                    " eta_min=" + format_double(F.solution->pair.f1.nodes().front()) +
                    " verification=doubled";
    return rep;
}

// Constant coefficients: closed forms through the exponential integral.
struct ClassicalOracle {
    double a = 1, Dstar = 1, Mstar = 1;
    double alpha0_star = 0;

    // e^{-k}(D* - 1/E1(k)) - M* alpha0^2 with k = a alpha0^2
    double R(double alpha0) const {
        const double k = a * alpha0 * alpha0;
        return std::exp(-k) * (Dstar - 1.0 / expint_e1(k)) - Mstar * alpha0 * alpha0;
    }
    double f1(double eta) const {
        return Dstar * (expint_e1(a * alpha0_star * eta) - expint_e1(a * alpha0_star * alpha0_star));
    }
    double f2(double xi) const {
        if (std::isinf(xi)) return -1.0;
        const double k = a * alpha0_star * alpha0_star;
        return -(expint_e1(k) - expint_e1(a * alpha0_star * xi)) / expint_e1(k);
    }
    double F2_inf() const { return expint_e1_scaled(a * alpha0_star * alpha0_star); }
};

inline ClassicalOracle classical_oracle(double Dstar, double Mstar, double a, double tol = 1e-15) {
    ClassicalOracle o{a, Dstar, Mstar, 0.0};
    // R > 0 near 0 (source dominates) and R < 0 for large alpha0; scan for the first change
    double lo = 1e-4, Rlo = o.R(lo);
    double hi = lo;
    bool found = false;
    for (int i = 1; i <= 600; ++i) {
        hi = 1e-4 * std::pow(10.0, i / 100.0);
        const double Rhi = o.R(hi);
        if ((Rhi > 0) != (Rlo > 0)) {
            found = true;
            break;
        }
        lo = hi, Rlo = Rhi;
    }
    if (!found) throw std::runtime_error("classical_oracle: no root in [1e-4, 1e2]");
    for (int it = 0; it < 300 && hi - lo > tol * hi; ++it) {
        const double m = 0.5 * (lo + hi);
        if (!(m > lo && m < hi)) break;
        if ((o.R(m) > 0) == (Rlo > 0)) lo = m; else hi = m;
    }
    o.alpha0_star = 0.5 * (lo + hi);
    return o;
}

inline ClassicalOracle classical_oracle(const ProblemParams& p, double a, double tol = 1e-15) {
    return classical_oracle(p.Dstar, p.Mstar, a, tol);
}

// rows t,r,eta,phase,theta (t-major) and companion t,alpha
template <CoefficientLaw Law>
void export_profiles(const PhysicalField<Law>& F, const std::vector<double>& times,
                     const std::vector<double>& radii, std::ostream& profile, std::ostream& front) {
    profile << "t,r,eta,phase,theta\n";
    front << "t,alpha\n";
    for (double t : times) {
        front << format_double(t) << ',' << format_double(free_boundary(t, F.alpha0(), F.a())) << '\n';
        for (double r : radii) {
            const double eta = similarity_eta(r, t, F.alpha0(), F.a());
            profile << format_double(t) << ',' << format_double(r) << ',' << format_double(eta) << ','
                    << phase_name(F.phase_of_eta(eta)) << ',' << format_double(temperature(F, r, t)) << '\n';
        }
    }
}

}  // namespace cylstefan
