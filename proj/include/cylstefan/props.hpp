#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdio>
#include <cstdlib>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "grid.hpp"

namespace cylstefan {

enum class Phase { liquid, solid };

inline const char* phase_name(Phase p) { return p == Phase::liquid ? "liquid" : "solid"; }

class ModelDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// One thermal coefficient as a function of physical temperature theta.
class Coefficient {
public:
    struct Const { double k; };
    struct Affine { double k0, k1; };
    struct Power { double k, p; };
    struct Table {
        std::string source;
        std::vector<double> theta, value;
    };

    Coefficient() : rep_(Const{1.0}) {}
    static Coefficient constant(double k) { return Coefficient(Const{k}); }
    static Coefficient affine(double k0, double k1) { return Coefficient(Affine{k0, k1}); }
    static Coefficient power(double k, double p) { return Coefficient(Power{k, p}); }
    static Coefficient table(std::vector<double> theta, std::vector<double> value,
                             std::string source = "inline") {
        if (theta.size() < 2 || theta.size() != value.size())
            throw std::invalid_argument("table coefficient needs >= 2 rows of (theta, value)");
        for (std::size_t i = 1; i < theta.size(); ++i)
            if (!(theta[i] > theta[i - 1]))
                throw std::invalid_argument("table coefficient: theta column must increase");
        return Coefficient(Table{std::move(source), std::move(theta), std::move(value)});
    }

    double operator()(double theta) const {
        return std::visit([theta](const auto& r) { return eval(r, theta); }, rep_);
    }

    std::string describe() const;

private:
    using Rep = std::variant<Const, Affine, Power, Table>;
    explicit Coefficient(Rep r) : rep_(std::move(r)) {}

    static double eval(const Const& c, double) { return c.k; }
    static double eval(const Affine& c, double t) { return c.k0 + c.k1 * t; }
    static double eval(const Power& c, double t) { return c.k * std::pow(t, c.p); }
    static double eval(const Table& c, double t) {
        if (t < c.theta.front() || t > c.theta.back())
            throw ModelDomainError("table coefficient '" + c.source + "' evaluated outside [" +
                                   std::to_string(c.theta.front()) + ", " +
                                   std::to_string(c.theta.back()) + "]");
        auto it = std::upper_bound(c.theta.begin(), c.theta.end(), t);
        std::size_t k = static_cast<std::size_t>(it - c.theta.begin());
        if (k == c.theta.size()) return c.value.back();
        k -= 1;
        const double w = (t - c.theta[k]) / (c.theta[k + 1] - c.theta[k]);
        return c.value[k] + w * (c.value[k + 1] - c.value[k]);
    }

    Rep rep_;
};

inline std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string Coefficient::describe() const {
    struct V {
        std::string operator()(const Const& c) const { return "const " + format_double(c.k); }
        std::string operator()(const Affine& c) const {
            return "affine " + format_double(c.k0) + " " + format_double(c.k1);
        }
        std::string operator()(const Power& c) const {
            return "power " + format_double(c.k) + " " + format_double(c.p);
        }
        std::string operator()(const Table& c) const { return "table " + c.source; }
    };
    return std::visit(V{}, rep_);
}

inline double parse_number(const std::string& tok) {
    // strtod rather than stod: subnormal values must round-trip instead of throwing
    if (tok.empty() || std::isspace(static_cast<unsigned char>(tok.front())))
        throw std::invalid_argument("malformed number '" + tok + "'");
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) throw std::invalid_argument("malformed number '" + tok + "'");
    return v;
}

inline Coefficient load_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open table '" + path.string() + "'");
    std::vector<double> th, val;
    std::string line;
    while (std::getline(in, line)) {
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        std::string a, b, extra;
        ss >> a >> b;
        if (b.empty() || (ss >> extra))
            throw std::invalid_argument("table '" + path.string() + "': expected two columns");
        double x, y;
        try {
            x = parse_number(a);
            y = parse_number(b);
        } catch (const std::invalid_argument&) {
            if (th.empty()) continue;  // header row
            throw;
        }
        th.push_back(x);
        val.push_back(y);
    }
    return Coefficient::table(std::move(th), std::move(val), path.string());
}

// Grammar: const <k> | affine <k0> <k1> | power <k> <p> | table <path>
inline Coefficient parse_coefficient(const std::string& text,
                                     const std::filesystem::path& base = {}) {
    std::istringstream ss(text);
    std::string kind;
    ss >> kind;
    std::vector<std::string> args;
    for (std::string t; ss >> t;) args.push_back(t);
    auto need = [&](std::size_t n) {
        if (args.size() != n)
            throw std::invalid_argument("coefficient '" + kind + "' expects " +
                                        std::to_string(n) + " argument(s)");
    };
    if (kind == "const") {
        need(1);
        return Coefficient::constant(parse_number(args[0]));
    }
    if (kind == "affine") {
        need(2);
        return Coefficient::affine(parse_number(args[0]), parse_number(args[1]));
    }
    if (kind == "power") {
        need(2);
        return Coefficient::power(parse_number(args[0]), parse_number(args[1]));
    }
    if (kind == "table") {
        need(1);
        std::filesystem::path p(args[0]);
        if (p.is_relative() && !base.empty()) p = base / p;
        return load_table(p);
    }
    throw std::invalid_argument("unknown coefficient form '" + kind +
                                "' (expected const, affine, power or table)");
}

struct Interval {
    double lo, hi;
};

class ThermalModel {
public:
    ThermalModel(Coefficient c, Coefficient gamma, Coefficient lambda, double c0, double gamma0,
                 double lambda0, double theta_m, double theta_lo, double theta_hi)
        : c_(std::move(c)), gamma_(std::move(gamma)), lambda_(std::move(lambda)), c0_(c0),
          gamma0_(gamma0), lambda0_(lambda0), theta_m_(theta_m), lo_(theta_lo), hi_(theta_hi) {
        if (!(c0 > 0 && gamma0 > 0 && lambda0 > 0))
            throw std::invalid_argument("reference constants c0, gamma0, lambda0 must be positive");
        if (!(theta_m > 0)) throw std::invalid_argument("theta_m must be positive");
        if (!(theta_lo < theta_hi)) throw std::invalid_argument("empty temperature range");
        a_ = lambda0 / (c0 * gamma0);
    }

    // default validity range [0, 10 theta_m]
    ThermalModel(Coefficient c, Coefficient gamma, Coefficient lambda, double c0, double gamma0,
                 double lambda0, double theta_m)
        : ThermalModel(std::move(c), std::move(gamma), std::move(lambda), c0, gamma0, lambda0,
                       theta_m, 0.0, 10.0 * theta_m) {}

    static ThermalModel constant(double c0, double gamma0, double lambda0, double theta_m) {
        return ThermalModel(Coefficient::constant(c0), Coefficient::constant(gamma0),
                            Coefficient::constant(lambda0), c0, gamma0, lambda0, theta_m);
    }

    double a() const { return a_; }
    double c0() const { return c0_; }
    double gamma0() const { return gamma0_; }
    double lambda0() const { return lambda0_; }
    double theta_m() const { return theta_m_; }
    Interval range() const { return {lo_, hi_}; }
    const Coefficient& c() const { return c_; }
    const Coefficient& gamma() const { return gamma_; }
    const Coefficient& lambda() const { return lambda_; }

    double physical(double T) const { return T * theta_m_ + theta_m_; }

    double N(double T) const {
        const double th = checked(T);
        const double v = c_(th) * gamma_(th) / (c0_ * gamma0_);
        return positive(v, "N", th);
    }
    double L(double T) const {
        const double th = checked(T);
        return positive(lambda_(th) / lambda0_, "L", th);
    }

private:
    double checked(double T) const {
        double th = physical(T);
        // quadrature rounding can push f2 a hair past -1; clamp excursions at that level
        const double slack = 1e-8 * theta_m_;
        if (th < lo_ && th >= lo_ - slack) th = lo_;
        if (th > hi_ && th <= hi_ + slack) th = hi_;
        if (!(th >= lo_ && th <= hi_))
            throw ModelDomainError("temperature " + format_double(th) + " (T = " +
                                   format_double(T) + ") outside model range [" +
                                   format_double(lo_) + ", " + format_double(hi_) + "]");
        return th;
    }
    static double positive(double v, const char* what, double th) {
        if (!(v > 0) || !std::isfinite(v))
            throw ModelDomainError(std::string(what) + " not positive at theta = " +
                                   format_double(th));
        return v;
    }

    Coefficient c_, gamma_, lambda_;
    double c0_, gamma0_, lambda0_, theta_m_, lo_, hi_;
    double a_;
};

inline double dimensionless_N(const ThermalModel& m, double T) { return m.N(T); }
inline double dimensionless_L(const ThermalModel& m, double T) { return m.L(T); }

struct ProblemParams {
    double Q0, theta_m, l_m, gamma_m;
    double lambda0, a;
    double Dstar, Mstar;

    static ProblemParams make(double Q0, double theta_m, double l_m, double gamma_m,
                              const ThermalModel& model) {
        if (!(Q0 > 0)) throw std::invalid_argument("Q0 must be positive");
        if (!(theta_m > 0)) throw std::invalid_argument("theta_m must be positive");
        if (!(l_m > 0)) throw std::invalid_argument("l_m must be positive");
        if (!(gamma_m > 0)) throw std::invalid_argument("gamma_m must be positive");
        ProblemParams p{Q0, theta_m, l_m, gamma_m, model.lambda0(), model.a(), 0, 0};
        p.Dstar = Q0 / (4.0 * std::numbers::pi * p.lambda0 * theta_m);
        p.Mstar = l_m * gamma_m * p.a * p.a / (p.lambda0 * theta_m);
        return p;
    }
};

struct EnvelopeParams {
    double mu, nu, beta, sigma;
    double L1m, L1M, N1m, N1M, L2m, L2M, N2m, N2M;
    double Lbar1, Nbar1, Lbar2, Nbar2;

    void validate() const {
        if (!(mu > std::max(1.0, nu))) throw std::invalid_argument("mu > max(1, nu) violated");
        if (!(beta > sigma + 2)) throw std::invalid_argument("beta > sigma + 2 violated");
        const std::pair<double, double> pairs[] = {{L1m, L1M}, {N1m, N1M}, {L2m, L2M}, {N2m, N2M}};
        const char* names[] = {"L1m <= L1M", "N1m <= N1M", "L2m <= L2M", "N2m <= N2M"};
        for (int i = 0; i < 4; ++i) {
            if (!(pairs[i].first > 0 && pairs[i].second > 0))
                throw std::invalid_argument("envelope constants must be positive");
            if (!(pairs[i].first <= pairs[i].second))
                throw std::invalid_argument(std::string(names[i]) + " violated");
        }
        if (!(Lbar1 >= 0 && Nbar1 >= 0 && Lbar2 >= 0 && Nbar2 >= 0))
            throw std::invalid_argument("Lipschitz constants must be nonnegative");
    }
};

// A composed coefficient law: dimensionless conductivity L* and capacity N* as functions of
// the phase, the similarity coordinate s and the dimensionless temperature T.
template <class Law>
concept CoefficientLaw = requires(const Law& law, Phase p, double s, double T) {
    { law.conductivity(p, s, T) } -> std::convertible_to<double>;
    { law.capacity(p, s, T) } -> std::convertible_to<double>;
};

// Physical law: coefficients depend on temperature only.
struct TemperatureLaw {
    ThermalModel model;
    double conductivity(Phase, double, double T) const { return model.L(T); }
    double capacity(Phase, double, double T) const { return model.N(T); }
};

// scale * s^exponent + kappa * (1 + tanh T)/2.  The temperature part is bounded in [0, kappa]
// with Lipschitz constant kappa/2, which makes envelope and Lipschitz constants explicit.
struct PowerTerm {
    double scale = 1.0, exponent = 0.0, kappa = 0.0;
    double operator()(double s, double T) const {
        double v = scale * std::pow(s, exponent);
        if (kappa != 0.0) v += kappa * 0.5 * (1.0 + std::tanh(T));
        return v;
    }
};

struct PowerLaw {
    PowerTerm liquid_L, liquid_N, solid_L, solid_N;
    double conductivity(Phase p, double s, double T) const {
        return p == Phase::liquid ? liquid_L(s, T) : solid_L(s, T);
    }
    double capacity(Phase p, double s, double T) const {
        return p == Phase::liquid ? liquid_N(s, T) : solid_N(s, T);
    }

    // L* = s^-mu, N* = s^-nu in the liquid; L* = xi^beta, N* = xi^sigma in the solid
    static PowerLaw pure(double mu, double nu, double beta, double sigma) {
        return {{1.0, -mu, 0.0}, {1.0, -nu, 0.0}, {1.0, beta, 0.0}, {1.0, sigma, 0.0}};
    }

    // Envelope constants valid for every alpha0 in [alpha_lo, alpha_hi]; 'loose' < 1 widens
    // the N bounds by that factor on each side.
    EnvelopeParams envelope(double alpha_lo, double alpha_hi, double loose = 1.0) const {
        EnvelopeParams e{};
        e.mu = -liquid_L.exponent;
        e.nu = -liquid_N.exponent;
        e.beta = solid_L.exponent;
        e.sigma = solid_N.exponent;
        e.L1m = liquid_L.scale;
        e.L1M = liquid_L.scale + liquid_L.kappa * std::pow(alpha_hi, e.mu);
        e.N1m = liquid_N.scale * loose;
        e.N1M = (liquid_N.scale + liquid_N.kappa * std::pow(alpha_hi, e.nu)) / loose;
        e.L2m = solid_L.scale;
        e.L2M = solid_L.scale + solid_L.kappa * std::pow(alpha_lo, -e.beta);
        e.N2m = solid_N.scale * loose;
        e.N2M = (solid_N.scale + solid_N.kappa * std::pow(alpha_lo, -e.sigma)) / loose;
        e.Lbar1 = 0.5 * liquid_L.kappa;
        e.Nbar1 = 0.5 * liquid_N.kappa;
        e.Lbar2 = 0.5 * solid_L.kappa;
        e.Nbar2 = 0.5 * solid_N.kappa;
        return e;
    }
};

struct EnvelopeReport {
    struct Entry {
        double s;        // eta or xi
        double L, N;     // composed coefficients at the node
        double L_margin, N_margin;  // distance to the nearer bound, negative when violated
    };
    Phase phase = Phase::liquid;
    std::vector<Entry> entries;
    bool pass = true;
    double min_L_margin = std::numeric_limits<double>::infinity();
    double min_N_margin = std::numeric_limits<double>::infinity();
};

// Tests the power-law sandwich of the composed coefficients at every node of f.
template <CoefficientLaw Law>
EnvelopeReport check_envelopes(const GridFunction& f, Phase phase, const EnvelopeParams& env,
                               const Law& law, double alpha0) {
    if (!(alpha0 > 0)) throw std::invalid_argument("check_envelopes: alpha0 must be positive");
    EnvelopeReport rep;
    rep.phase = phase;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double s = f.node_position(i);
        if (!std::isfinite(s) || s <= 0) continue;
        const double T = f.values()[i];
        const double L = law.conductivity(phase, s, T);
        const double N = law.capacity(phase, s, T);
        double wL, wN, Lm, LM, Nm, NM;
        if (phase == Phase::liquid) {
            wL = std::pow(s, -env.mu), wN = std::pow(s, -env.nu);
            Lm = env.L1m, LM = env.L1M, Nm = env.N1m, NM = env.N1M;
        } else {
            wL = std::pow(s, env.beta), wN = std::pow(s, env.sigma);
            Lm = env.L2m, LM = env.L2M, Nm = env.N2m, NM = env.N2M;
        }
        const double lm = std::min(L - Lm * wL, LM * wL - L);
        const double nm = std::min(N - Nm * wN, NM * wN - N);
        rep.entries.push_back({s, L, N, lm, nm});
        rep.min_L_margin = std::min(rep.min_L_margin, lm / wL);
        rep.min_N_margin = std::min(rep.min_N_margin, nm / wN);
        const double slackL = 1e-12 * std::max(std::abs(L), LM * wL);
        const double slackN = 1e-12 * std::max(std::abs(N), NM * wN);
        if (lm < -slackL || nm < -slackN) rep.pass = false;
    }
    return rep;
}

struct LipschitzEstimate {
    double Lbar, Nbar;
};

// Largest difference quotient over a uniform sample; every pairwise quotient is a convex
// combination of neighbouring ones, so neighbours suffice.  A lower estimate by nature.
template <class FL, class FN>
LipschitzEstimate estimate_lipschitz(FL&& L, FN&& N, Interval range, std::size_t n_samples) {
    if (n_samples < 2) throw std::invalid_argument("estimate_lipschitz: need >= 2 samples");
    if (!(range.hi > range.lo))
        throw std::invalid_argument("estimate_lipschitz: degenerate temperature range");
    LipschitzEstimate est{0.0, 0.0};
    const double h = (range.hi - range.lo) / static_cast<double>(n_samples - 1);
    double t0 = range.lo, l0 = L(t0), n0 = N(t0);
    for (std::size_t i = 1; i < n_samples; ++i) {
        const double t1 = (i + 1 == n_samples) ? range.hi : range.lo + h * static_cast<double>(i);
        const double l1 = L(t1), n1 = N(t1);
        est.Lbar = std::max(est.Lbar, std::abs(l1 - l0) / (t1 - t0));
        est.Nbar = std::max(est.Nbar, std::abs(n1 - n0) / (t1 - t0));
        t0 = t1, l0 = l1, n0 = n1;
    }
    return est;
}

inline LipschitzEstimate estimate_lipschitz(const ThermalModel& m, Interval T_range,
                                            std::size_t n_samples) {
    return estimate_lipschitz([&](double T) { return m.L(T); }, [&](double T) { return m.N(T); },
                              T_range, n_samples);
}

}  // namespace cylstefan
