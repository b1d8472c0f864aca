#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "grid.hpp"
#include "props.hpp"
#include "quadrature.hpp"

namespace cylstefan {

class KernelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <CoefficientLaw Law>
struct KernelContext {
    const Law* law = nullptr;
    double alpha0 = 1.0;
    double a = 1.0;
    double Dstar = 1.0;
    double tol = 1e-10;

    KernelContext(const Law& l, double alpha0_, double a_, double Dstar_, double tol_ = 1e-10)
        : law(&l), alpha0(alpha0_), a(a_), Dstar(Dstar_), tol(tol_) {
        if (!(alpha0 > 0)) throw std::invalid_argument("KernelContext: alpha0 must be positive");
        // a = 0 is admitted as the degenerate E == 1 case
        if (!(a >= 0)) throw std::invalid_argument("KernelContext: a must be nonnegative");
        if (!(tol > 0)) throw std::invalid_argument("KernelContext: tol must be positive");
    }

    QuadOptions panel_options() const { return {tol * 1e-3, tol, 2000}; }
};

namespace detail {
inline std::size_t panel_of(const std::vector<double>& b, double x) {
    auto it = std::upper_bound(b.begin(), b.end(), x);
    std::size_t j = static_cast<std::size_t>(it - b.begin());
    if (j == 0) return 0;
    return std::min(j - 1, b.size() - 2);
}
}  // namespace detail

// Per-iterate cache for the liquid kernels on [0, alpha0].
template <CoefficientLaw Law>
class LiquidKernels {
public:
    LiquidKernels(const KernelContext<Law>& ctx, const GridFunction& f1) : ctx_(ctx), f1_(&f1) {
        if (f1.domain() != GridFunction::Domain::finite)
            throw std::invalid_argument("liquid iterate must live on a finite domain");
        if (f1.nodes().back() != ctx.alpha0)
            throw std::invalid_argument("liquid iterate must end at alpha0");
        b_.push_back(0.0);
        for (double x : f1.nodes())
            if (x > 0.0) b_.push_back(x);
        const std::size_t m = b_.size();
        const QuadOptions opt = ctx.panel_options();
        G_.assign(m, 0.0);
        for (std::size_t j = 0; j + 1 < m; ++j)
            G_[j + 1] = G_[j] + integrate_finite([&](double s) { return ratio(s); }, b_[j], b_[j + 1], opt).value;
        P_.assign(m, 0.0);
        for (std::size_t j = m - 1; j-- > 1;)
            P_[j] = P_[j + 1] + integrate_finite([&](double s) { return h(s); }, b_[j], b_[j + 1], opt).value;
    }

    const KernelContext<Law>& context() const { return ctx_; }

    double temperature(double s) const { return f1_->at_sample(s); }
    double conductivity(double s) const { return ctx_.law->conductivity(Phase::liquid, s, temperature(s)); }
    double capacity(double s) const { return ctx_.law->capacity(Phase::liquid, s, temperature(s)); }
    double ratio(double s) const {
        const double T = temperature(s);
        return ctx_.law->capacity(Phase::liquid, s, T) / ctx_.law->conductivity(Phase::liquid, s, T);
    }

    // ∫_0^eta N*/L*
    double exponent(double eta) const {
        check(eta);
        const std::size_t j = detail::panel_of(b_, eta);
        if (eta == b_[j]) return G_[j];
        if (eta == b_[j + 1]) return G_[j + 1];
        return G_[j] + integrate_finite([&](double s) { return ratio(s); }, b_[j], eta, ctx_.panel_options()).value;
    }

    double E1(double eta) const {
        if (eta == 0.0 || ctx_.a == 0.0) return 1.0;
        return std::exp(-ctx_.alpha0 * ctx_.a * exponent(eta));
    }

    // integrand of F1 and of the difference form
    double h(double s) const { return E1(s) / (s * conductivity(s)); }

    // ∫_eta^alpha0 E1/(s L*)
    double difference(double eta) const {
        check(eta);
        if (!(eta > 0)) throw KernelError("f1_difference: eta must be positive");
        const std::size_t j = detail::panel_of(b_, eta);
        if (j > 0 && eta == b_[j]) return P_[j];
        if (eta == b_[j + 1]) return P_[j + 1];
        return P_[j + 1] + integrate_finite([&](double s) { return h(s); }, eta, b_[j + 1], ctx_.panel_options()).value;
    }

    // ∫_0^eta E1/(s L*); finite only when L* grows faster than 1/s at the axis
    double F1(double eta) const {
        check(eta);
        if (eta == 0.0) return 0.0;
        const double head_end = b_[1];
        double head;
        try {
            head = integrate_finite([&](double s) { return h(s); }, 0.0, std::min(eta, head_end),
                                    ctx_.panel_options()).value;
        } catch (const QuadratureFailure& e) {
            throw KernelError(std::string("F1 diverges at the axis (difference form only): ") + e.what());
        }
        if (eta <= head_end) return head;
        return head + (P_[1] - difference(eta));
    }

    bool F1_converges() const {
        try {
            (void)F1(b_[1]);
            return true;
        } catch (const KernelError&) {
            return false;
        }
    }

    // f1' = -D* E1/(eta L*)
    double prime(double eta) const {
        if (!(eta > 0)) throw KernelError("f1_prime: eta = 0 is singular");
        check(eta);
        return -ctx_.Dstar * h(eta);
    }

    const std::vector<double>& breakpoints() const { return b_; }
    double node_difference(std::size_t j) const { return P_[j]; }
    double node_E1(std::size_t j) const {
        return ctx_.a == 0.0 ? 1.0 : std::exp(-ctx_.alpha0 * ctx_.a * G_[j]);
    }

private:
    void check(double eta) const {
        if (!(eta >= 0.0 && eta <= ctx_.alpha0))
            throw KernelError("liquid kernel argument " + format_double(eta) + " outside [0, alpha0]");
    }

    KernelContext<Law> ctx_;
    const GridFunction* f1_;
    std::vector<double> b_;  // 0 followed by the positive nodes of f1
    std::vector<double> G_;  // ∫_0^{b_j} N*/L*
    std::vector<double> P_;  // ∫_{b_j}^{alpha0} E1/(s L*), j >= 1
};

// Per-iterate cache for the solid kernels on [alpha0, inf), computed in u = alpha0/xi.
template <CoefficientLaw Law>
class SolidKernels {
public:
    SolidKernels(const KernelContext<Law>& ctx, const GridFunction& f2) : ctx_(ctx), f2_(&f2) {
        if (f2.domain() != GridFunction::Domain::half_line || f2.lo() != ctx.alpha0)
            throw std::invalid_argument("solid iterate must live on [alpha0, inf)");
        const auto& u = f2.nodes();
        if (u.front() != 0.0 || u.back() != 1.0)
            throw std::invalid_argument("solid iterate nodes must span u in [0, 1]");
        const std::size_t m = u.size();
        const QuadOptions opt = ctx.panel_options();
        H_.assign(m, 0.0);
        for (std::size_t j = m - 1; j-- > 1;)
            H_[j] = H_[j + 1] + integrate_finite([&](double v) { return Q(v); }, u[j], u[j + 1], opt).value;
        if (ctx.a == 0.0) {
            E2inf_ = 1.0;
        } else {
            try {
                H_[0] = H_[1] + integrate_finite([&](double v) { return Q(v); }, 0.0, u[1], opt).value;
                E2inf_ = std::exp(-ctx.alpha0 * ctx.a * H_[0]);
            } catch (const QuadratureFailure&) {
                H_[0] = std::numeric_limits<double>::infinity();
                E2inf_ = 0.0;
            }
        }
        C_.assign(m, 0.0);
        for (std::size_t j = m - 1; j-- > 0;) {
            try {
                C_[j] = C_[j + 1] + integrate_finite([&](double v) { return w(v); }, u[j], u[j + 1], opt).value;
            } catch (const QuadratureFailure& e) {
                throw KernelError(std::string("F2(alpha0, inf) diverges: ") + e.what());
            }
        }
        if (!(C_[0] > 0) || !std::isfinite(C_[0]))
            throw KernelError("F2(alpha0, inf) is not finite and positive");
    }

    const KernelContext<Law>& context() const { return ctx_; }

    double temperature_u(double v) const { return f2_->at_sample(v); }
    double conductivity_u(double v) const {
        return ctx_.law->conductivity(Phase::solid, ctx_.alpha0 / v, temperature_u(v));
    }
    double capacity_u(double v) const {
        return ctx_.law->capacity(Phase::solid, ctx_.alpha0 / v, temperature_u(v));
    }
    // N*/L* transported to u, including the Jacobian alpha0/v^2
    double Q(double v) const {
        const double xi = ctx_.alpha0 / v;
        const double T = temperature_u(v);
        return ctx_.law->capacity(Phase::solid, xi, T) / ctx_.law->conductivity(Phase::solid, xi, T) *
               ctx_.alpha0 / (v * v);
    }

    double E2_u(double v) const {
        if (ctx_.a == 0.0 || v == 1.0) return 1.0;
        if (v == 0.0) return E2inf_;
        const auto& u = f2_->nodes();
        const std::size_t j = detail::panel_of(u, v);
        double ex = H_[j + 1];
        if (v == u[j]) ex = H_[j];
        else ex += integrate_finite([&](double x) { return Q(x); }, v, u[j + 1], ctx_.panel_options()).value;
        return std::exp(-ctx_.alpha0 * ctx_.a * ex);
    }

    // F2 integrand in u: E2/(xi L*) * dxi/du = E2/(v L*)
    double w(double v) const {
        const double e = E2_u(v);
        if (e == 0.0) return 0.0;
        return e / (v * conductivity_u(v));
    }

    double F2_u(double v) const {
        const auto& u = f2_->nodes();
        if (v == 1.0) return 0.0;
        const std::size_t j = detail::panel_of(u, v);
        if (v == u[j]) return C_[j];
        return C_[j + 1] + integrate_finite([&](double x) { return w(x); }, v, u[j + 1], ctx_.panel_options()).value;
    }

    double E2(double xi) const { return E2_u(to_u(xi)); }
    double F2(double xi) const { return F2_u(to_u(xi)); }
    double F2_inf() const { return C_[0]; }
    double E2_inf() const { return E2inf_; }
    bool E2_tail_finite() const { return std::isfinite(H_[0]); }

    // f2' = -E2/(xi L* F2(inf))
    double prime(double xi) const {
        const double v = to_u(xi);
        if (v == 0.0) return 0.0;
        return -E2_u(v) / (xi * conductivity_u(v) * C_[0]);
    }

    double node_F2(std::size_t j) const { return C_[j]; }
    double node_E2(std::size_t j) const {
        if (ctx_.a == 0.0) return 1.0;
        return j == 0 ? E2inf_ : std::exp(-ctx_.alpha0 * ctx_.a * H_[j]);
    }

private:
    double to_u(double xi) const {
        if (std::isnan(xi) || xi < ctx_.alpha0)
            throw KernelError("solid kernel argument " + format_double(xi) + " below alpha0");
        if (std::isinf(xi)) return 0.0;
        return xi == ctx_.alpha0 ? 1.0 : ctx_.alpha0 / xi;
    }

    KernelContext<Law> ctx_;
    const GridFunction* f2_;
    std::vector<double> H_;  // ∫_{u_j}^1 Q
    std::vector<double> C_;  // F2 between alpha0 and alpha0/u_j
    double E2inf_ = 0.0;
};

template <CoefficientLaw Law>
double E1(const KernelContext<Law>& ctx, double eta, const GridFunction& f1) {
    if (eta == 0.0) return 1.0;
    return LiquidKernels<Law>(ctx, f1).E1(eta);
}
template <CoefficientLaw Law>
double F1(const KernelContext<Law>& ctx, double eta, const GridFunction& f1) {
    return LiquidKernels<Law>(ctx, f1).F1(eta);
}
template <CoefficientLaw Law>
double f1_difference(const KernelContext<Law>& ctx, double eta, const GridFunction& f1) {
    return LiquidKernels<Law>(ctx, f1).difference(eta);
}
template <CoefficientLaw Law>
double f1_prime(const KernelContext<Law>& ctx, double eta, const GridFunction& f1) {
    return LiquidKernels<Law>(ctx, f1).prime(eta);
}
template <CoefficientLaw Law>
double E2(const KernelContext<Law>& ctx, double xi, const GridFunction& f2) {
    return SolidKernels<Law>(ctx, f2).E2(xi);
}
template <CoefficientLaw Law>
double F2(const KernelContext<Law>& ctx, double xi, const GridFunction& f2) {
    return SolidKernels<Law>(ctx, f2).F2(xi);
}
template <CoefficientLaw Law>
double f2_prime(const KernelContext<Law>& ctx, double xi, const GridFunction& f2) {
    return SolidKernels<Law>(ctx, f2).prime(xi);
}

}  // namespace cylstefan
