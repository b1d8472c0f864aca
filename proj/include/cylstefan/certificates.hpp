#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "props.hpp"

namespace cylstefan {

struct ContractionConstants {
    double Ebar1, Fbar1, Ebar2, Fbar2;
};

inline ContractionConstants contraction_constants(const EnvelopeParams& e, double a, double x) {
    const double mu = e.mu, nu = e.nu, be = e.beta, si = e.sigma;
    ContractionConstants c{};
    c.Ebar1 = x * a / e.L1m *
              (e.Nbar1 * std::pow(x, mu + 1) / (mu + 1) +
               e.Lbar1 * e.N1M / e.L1m * std::pow(x, 2 * mu - nu + 1) / (2 * mu - nu + 1));
    c.Fbar1 = x * a / (e.L1m * e.L1m) *
                  (e.Nbar1 * std::pow(x, 2 * mu + 1) / ((mu + 1) * (2 * mu + 1)) +
                   e.Lbar1 * e.N1M / e.L1m * std::pow(x, 3 * mu - nu + 1) /
                       ((2 * mu - nu + 1) * (3 * mu - nu + 1))) +
              e.Lbar1 / (e.L1m * e.L1m) * std::pow(x, 2 * mu) / (2 * mu);
    const double bracket = e.Nbar2 / (be - 1) * std::pow(x, 1 - be) +
                           e.Lbar2 * e.N2M / (e.L2m * (2 * be - si - 1)) * std::pow(x, -(2 * be - si - 1));
    c.Ebar2 = x * a / e.L2m * bracket;
    c.Fbar2 = x * a / (be * e.L2m * e.L2m) * bracket * std::pow(x, -be) +
              e.Lbar2 / (2 * be * e.L2m * e.L2m) * std::pow(x, -2 * be);
    return c;
}

namespace detail {
// exponent of the solid-side exponential factor: a N2M / ((beta - sigma - 1) L2m x^(beta - sigma - 2))
inline double solid_exponent(const EnvelopeParams& e, double a, double x) {
    return a * e.N2M / ((e.beta - e.sigma - 1) * e.L2m * std::pow(x, e.beta - e.sigma - 2));
}
}  // namespace detail

inline double phi(const EnvelopeParams& e, double a, double Dstar, double x) {
    return 2.0 * Dstar * contraction_constants(e, a, x).Fbar1;
}

inline double phihat(const EnvelopeParams& e, double a, double x) {
    const double f = contraction_constants(e, a, x).Fbar2;
    if (f == 0.0) return 0.0;
    return 2.0 * e.L2M * std::pow(x, e.beta) * e.beta * f * std::exp(detail::solid_exponent(e, a, x));
}

inline double contraction_modulus(const EnvelopeParams& e, double a, double Dstar, double x) {
    return std::max(phi(e, a, Dstar, x), phihat(e, a, x));
}

class CertificateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {
// g is sampled on a log grid over [1e-6, 1e6]; it must be monotone in the given direction and
// cross 1 exactly once.  The crossing is then bisected to the resolution of binary64.
template <class G>
double unit_crossing(G&& g, bool increasing, const char* name) {
    constexpr int n = 200;
    const double lo = 1e-6, hi = 1e6;
    std::vector<double> x(n), y(n);
    for (int i = 0; i < n; ++i) {
        x[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
        y[i] = g(x[i]);
    }
    for (int i = 1; i < n; ++i) {
        const bool bad = increasing ? (y[i] < y[i - 1]) : (y[i] > y[i - 1]);
        if (bad || std::isnan(y[i])) {
            std::ostringstream os;
            os << name << " is not " << (increasing ? "increasing" : "decreasing") << " between alpha0 = "
               << format_double(x[i - 1]) << " (" << format_double(y[i - 1]) << ") and "
               << format_double(x[i]) << " (" << format_double(y[i]) << ")";
            throw CertificateError(os.str());
        }
    }
    int k = -1;
    for (int i = 1; i < n; ++i)
        if ((y[i - 1] < 1.0) != (y[i] < 1.0)) {
            k = i;
            break;
        }
    if (k < 0) throw CertificateError(std::string(name) + " = 1 has no solution in [1e-6, 1e6]");
    double a = x[k - 1], b = x[k];
    const bool below_at_a = y[k - 1] < 1.0;
    for (int it = 0; it < 300; ++it) {
        const double m = 0.5 * (a + b);
        if (!(m > a && m < b)) break;
        if ((g(m) < 1.0) == below_at_a) a = m; else b = m;
    }
    // pick the endpoint whose value is closer to 1
    return std::abs(g(a) - 1.0) <= std::abs(g(b) - 1.0) ? a : b;
}
}  // namespace detail

struct BracketEndpoints {
    double alpha01, alpha02;
};

// alpha01 solves phihat = 1 (phihat decreasing), alpha02 solves phi = 1 (phi increasing)
inline double alpha01_of(const EnvelopeParams& e, double a) {
    return detail::unit_crossing([&](double x) { return phihat(e, a, x); }, false, "phihat");
}
inline double alpha02_of(const EnvelopeParams& e, double a, double Dstar) {
    return detail::unit_crossing([&](double x) { return phi(e, a, Dstar, x); }, true, "phi");
}
inline BracketEndpoints bracket_endpoints(const EnvelopeParams& e, double a, double Dstar) {
    return {alpha01_of(e, a), alpha02_of(e, a, Dstar)};
}

// Q0 < 2 pi lambda0 theta_m / Fbar1(alpha01); the bound is +inf when Fbar1 vanishes
inline double q0_bound(const ProblemParams& p, const EnvelopeParams& e, double a, double alpha01) {
    const double f = contraction_constants(e, a, alpha01).Fbar1;
    if (f == 0.0) return std::numeric_limits<double>::infinity();
    return 2.0 * std::numbers::pi * p.lambda0 * p.theta_m / f;
}

inline bool check_q0(const ProblemParams& p, const EnvelopeParams& e, double a) {
    return p.Q0 < q0_bound(p, e, a, alpha01_of(e, a));
}

// the same hypothesis in dimensionless form: D* < 1/(2 Fbar1(alpha01))
inline bool check_q0_dimensionless(double Dstar, const EnvelopeParams& e, double a, double alpha01) {
    const double f = contraction_constants(e, a, alpha01).Fbar1;
    return f == 0.0 || 2.0 * Dstar * f < 1.0;
}

// Pointwise kernel enclosures implied by the envelopes, for a fixed alpha0.
struct KernelBounds {
    double lo, hi;
    bool contains(double v, double tol) const { return v >= lo - tol && v <= hi + tol; }
};

inline KernelBounds E1_bounds(const EnvelopeParams& e, double a, double alpha0, double eta) {
    const double p = e.mu - e.nu + 1.0;
    const double w = alpha0 * a * std::pow(eta, p) / p;
    return {std::exp(-w * e.N1M / e.L1m), std::exp(-w * e.N1m / e.L1M)};
}

inline KernelBounds F1_bounds(const EnvelopeParams& e, double a, double alpha0, double eta) {
    const double em = std::pow(eta, e.mu) / e.mu;
    return {E1_bounds(e, a, alpha0, eta).lo * em / e.L1M, em / e.L1m};
}

// xi >= alpha0
inline KernelBounds E2_bounds(const EnvelopeParams& e, double a, double alpha0, double xi) {
    const double q = e.beta - e.sigma - 1.0;
    const double w = alpha0 * a / q * (std::pow(alpha0, -q) - (std::isinf(xi) ? 0.0 : std::pow(xi, -q)));
    return {std::exp(-w * e.N2M / e.L2m), std::exp(-w * e.N2m / e.L2M)};
}

inline KernelBounds F2_bounds(const EnvelopeParams& e, double a, double alpha0, double xi) {
    const double q = e.beta - e.sigma - 1.0;
    const double span = std::pow(alpha0, -e.beta) - (std::isinf(xi) ? 0.0 : std::pow(xi, -e.beta));
    const double damp = std::exp(-a / q * e.N2M / e.L2m * std::pow(alpha0, -(q - 1.0)));
    return {damp / (e.L2M * e.beta) * span, span / (e.beta * e.L2m)};
}

struct PhiBounds {
    double Phi1, Phi2;
};

inline PhiBounds phi_bounds(const EnvelopeParams& e, double a, double Dstar, double x) {
    const double x2 = x * x;
    PhiBounds b{};
    b.Phi1 = Dstar * std::exp(-x2 * a * e.N1M / e.L1m) -
             e.L2M * e.beta * std::pow(x, e.beta) * std::exp(detail::solid_exponent(e, a, x));
    b.Phi2 = Dstar * std::exp(-x2 * a * e.N1m / e.L1M);
    return b;
}

enum class ExistenceOrientation { none, as_proved, reversed };

inline const char* orientation_name(ExistenceOrientation o) {
    switch (o) {
        case ExistenceOrientation::as_proved: return "R(alpha01) < 0 < R(alpha02)";
        case ExistenceOrientation::reversed: return "R(alpha01) > 0 > R(alpha02)";
        default: return "none";
    }
}

// Either orientation of a Bolzano certificate on [alpha01, alpha02]:
//   as proved:  Phi2(alpha01) < M* alpha01^2  and  Phi1(alpha02) > M* alpha02^2
//   reversed:   Phi1(alpha01) > M* alpha01^2  and  Phi2(alpha02) < M* alpha02^2
// Since Phi2/alpha0^2 decreases and Phi1 <= Phi2, the first can only hold when alpha01 > alpha02.
inline ExistenceOrientation existence_orientation(const EnvelopeParams& e, double a, double Dstar,
                                                  double Mstar, double alpha01, double alpha02) {
    const PhiBounds b1 = phi_bounds(e, a, Dstar, alpha01);
    const PhiBounds b2 = phi_bounds(e, a, Dstar, alpha02);
    const double m1 = Mstar * alpha01 * alpha01, m2 = Mstar * alpha02 * alpha02;
    if (b1.Phi2 < m1 && b2.Phi1 > m2) return ExistenceOrientation::as_proved;
    if (b1.Phi1 > m1 && b2.Phi2 < m2) return ExistenceOrientation::reversed;
    return ExistenceOrientation::none;
}

inline bool check_existence(const EnvelopeParams& e, double a, double Dstar, double Mstar) {
    const auto br = bracket_endpoints(e, a, Dstar);
    return existence_orientation(e, a, Dstar, Mstar, br.alpha01, br.alpha02) != ExistenceOrientation::none;
}

inline bool check_existence(const EnvelopeParams& e, double a, const ProblemParams& p) {
    return check_existence(e, a, p.Dstar, p.Mstar);
}

struct UniquenessConstants {
    double A1 = 0, A2 = 0;
    std::optional<double> B1, B2, margin;
};

inline UniquenessConstants uniqueness_constants(const EnvelopeParams& e, double a, double Dstar,
                                                double Mstar, double alpha01, double alpha02) {
    const double mu = e.mu, nu = e.nu, be = e.beta;
    const auto c01 = contraction_constants(e, a, alpha01);
    const auto c02 = contraction_constants(e, a, alpha02);
    const double X = detail::solid_exponent(e, a, alpha01);
    UniquenessConstants u;
    u.A1 = c02.Ebar1 * std::pow(alpha02, mu) / (e.L1m * mu) +
           e.Lbar1 / (e.L1m * e.L1m) * std::pow(alpha02, 2 * mu) / (2 * mu);
    u.A2 = 2.0 * c01.Fbar2 * e.L2M * be * std::pow(alpha02, be) * std::exp(X);
    if (u.A1 < 1.0 / Dstar && u.A2 < 1.0) {
        const double B1 = c02.Ebar1 * Dstar / (1.0 - Dstar * u.A1) * std::pow(alpha02, mu - 1) / e.L1m +
                          2.0 * a * (e.N1M / e.L1m) * std::pow(alpha02, mu - nu + 1) / (mu - nu + 1);
        const double B2 =
            (2.0 * c02.Fbar2 * e.L2M * be * std::pow(alpha02, be) * std::exp(X) /
                 (e.L2m * std::pow(alpha01, be - 1) * (1.0 - u.A2)) +
             1.0 / (e.L2m * std::pow(alpha01, be + 1))) *
            e.L2M * e.L2M * std::pow(alpha02, 2 * be) * std::exp(2 * X);
        u.B1 = B1;
        u.B2 = B2;
        u.margin = 2.0 * alpha01 * Mstar - Dstar * B1 - B2;
    }
    return u;
}

inline UniquenessConstants uniqueness_constants(const EnvelopeParams& e, double a, const ProblemParams& p,
                                                double alpha01, double alpha02) {
    return uniqueness_constants(e, a, p.Dstar, p.Mstar, alpha01, alpha02);
}

struct Certificate {
    EnvelopeParams env{};
    double a = 0, Dstar = 0, Mstar = 0;
    std::optional<double> Q0, Q0_bound;
    std::optional<double> alpha01, alpha02;
    bool q0_ok = false, existence_ok = false, uniqueness_ok = false;
    ExistenceOrientation orientation = ExistenceOrientation::none;
    std::optional<double> A1, A2, B1, B2, margin;
    std::vector<std::string> notes;

    ContractionConstants constants(double x) const { return contraction_constants(env, a, x); }
    double Ebar1(double x) const { return constants(x).Ebar1; }
    double Fbar1(double x) const { return constants(x).Fbar1; }
    double Ebar2(double x) const { return constants(x).Ebar2; }
    double Fbar2(double x) const { return constants(x).Fbar2; }
    double phi(double x) const { return cylstefan::phi(env, a, Dstar, x); }
    double phihat(double x) const { return cylstefan::phihat(env, a, x); }
    double epsilon(double x) const { return contraction_modulus(env, a, Dstar, x); }
    PhiBounds bounds(double x) const { return phi_bounds(env, a, Dstar, x); }
    bool bracket_certified() const { return q0_ok && existence_ok && alpha01 && alpha02; }
};

// Every hypothesis in dependency order; nothing is skipped because an earlier check failed.
// 'physical' supplies Q0, lambda0 and theta_m for the dimensional form of the source bound.
inline Certificate certify(const EnvelopeParams& env, double a, double Dstar, double Mstar,
                           const std::optional<ProblemParams>& physical = std::nullopt) {
    Certificate c;
    c.env = env;
    c.a = a;
    c.Dstar = Dstar;
    c.Mstar = Mstar;
    env.validate();
    try {
        c.alpha01 = alpha01_of(env, a);
    } catch (const CertificateError& e) {
        c.notes.push_back(std::string("alpha01 unavailable: ") + e.what());
    }
    try {
        c.alpha02 = alpha02_of(env, a, Dstar);
    } catch (const CertificateError& e) {
        c.notes.push_back(std::string("alpha02 unavailable: ") + e.what());
    }
    if (c.alpha01) {
        if (physical) {
            c.Q0 = physical->Q0;
            c.Q0_bound = q0_bound(*physical, env, a, *c.alpha01);
            c.q0_ok = physical->Q0 < *c.Q0_bound;
        } else {
            const double f = contraction_constants(env, a, *c.alpha01).Fbar1;
            c.q0_ok = check_q0_dimensionless(Dstar, env, a, *c.alpha01);
            if (f > 0) c.Q0_bound = 1.0 / (2.0 * f);  // bound on D* in this form
        }
        if (c.Q0_bound && std::isinf(*c.Q0_bound))
            c.notes.push_back("source bound is vacuous: Fbar1(alpha01) = 0");
    }
    c.notes.push_back(
        "existence: Phi2(alpha01) < M* alpha01^2 with Phi1(alpha02) > M* alpha02^2 cannot hold when "
        "alpha01 < alpha02, so the reversed sign pattern is accepted as well");
    if (c.alpha01 && c.alpha02) {
        c.orientation = existence_orientation(env, a, Dstar, Mstar, *c.alpha01, *c.alpha02);
        c.existence_ok = c.orientation != ExistenceOrientation::none;
        if (c.existence_ok)
            c.notes.push_back(std::string("existence certified with ") + orientation_name(c.orientation));
        const auto u = uniqueness_constants(env, a, Dstar, Mstar, *c.alpha01, *c.alpha02);
        c.A1 = u.A1;
        c.A2 = u.A2;
        c.B1 = u.B1;
        c.B2 = u.B2;
        c.margin = u.margin;
        if (!u.B1)
            c.notes.push_back("B1, B2 and margin not applicable: A1 >= 1/D* or A2 >= 1");
        if (*c.alpha01 < *c.alpha02 && u.A2 >= 1.0)
            c.notes.push_back("A2 = (alpha02/alpha01)^beta * phihat(alpha01) exceeds 1 whenever alpha01 < alpha02");
        c.uniqueness_ok = u.A1 < 1.0 / Dstar && u.A2 < 1.0 && u.margin && *u.margin > 0;
    }
    return c;
}

inline Certificate certify(const EnvelopeParams& env, const ProblemParams& p) {
    return certify(env, p.a, p.Dstar, p.Mstar, p);
}

inline void write_certificate(std::ostream& os, const Certificate& c) {
    auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("n/a"); };
    auto flag = [](bool b) { return b ? "true" : "false"; };
    const auto& e = c.env;
    os << "mu = " << format_double(e.mu) << "\nnu = " << format_double(e.nu) << "\nbeta = "
       << format_double(e.beta) << "\nsigma = " << format_double(e.sigma) << "\n";
    os << "a = " << format_double(c.a) << "\nDstar = " << format_double(c.Dstar)
       << "\nMstar = " << format_double(c.Mstar) << "\n";
    os << "alpha01 = " << opt(c.alpha01) << "\nalpha02 = " << opt(c.alpha02) << "\n";
    if (c.alpha01) {
        const auto k = c.constants(*c.alpha01);
        os << "Ebar1_at_alpha01 = " << format_double(k.Ebar1) << "\nFbar1_at_alpha01 = " << format_double(k.Fbar1)
           << "\nEbar2_at_alpha01 = " << format_double(k.Ebar2) << "\nFbar2_at_alpha01 = " << format_double(k.Fbar2)
           << "\nphihat_at_alpha01 = " << format_double(c.phihat(*c.alpha01)) << "\n";
    }
    if (c.alpha02) {
        const auto k = c.constants(*c.alpha02);
        os << "Ebar1_at_alpha02 = " << format_double(k.Ebar1) << "\nFbar1_at_alpha02 = " << format_double(k.Fbar1)
           << "\nEbar2_at_alpha02 = " << format_double(k.Ebar2) << "\nFbar2_at_alpha02 = " << format_double(k.Fbar2)
           << "\nphi_at_alpha02 = " << format_double(c.phi(*c.alpha02)) << "\n";
    }
    os << "Q0 = " << opt(c.Q0) << "\nQ0_bound = " << opt(c.Q0_bound) << "\n";
    os << "q0_ok = " << flag(c.q0_ok) << "\nexistence_ok = " << flag(c.existence_ok)
       << "\nexistence_orientation = " << orientation_name(c.orientation)
       << "\nuniqueness_ok = " << flag(c.uniqueness_ok) << "\n";
    os << "A1 = " << opt(c.A1) << "\nA2 = " << opt(c.A2) << "\nB1 = " << opt(c.B1) << "\nB2 = " << opt(c.B2)
       << "\nmargin = " << opt(c.margin) << "\n";
    for (const auto& n : c.notes) os << "# " << n << "\n";
}

}  // namespace cylstefan
