#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "certificates.hpp"
#include "config.hpp"
#include "freeboundary.hpp"
#include "physical.hpp"

namespace cylstefan {

// failure inside solve_full, prefixed with the stage that raised it
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, const std::string& msg)
        : std::runtime_error(stage + ": " + msg), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

enum class BracketSource { certificate, user };

inline const char* bracket_source_name(BracketSource s) {
    return s == BracketSource::certificate ? "certificate" : "user";
}

template <CoefficientLaw Law>
struct FullSolution {
    Problem<Law> problem;
    Solution solution;
    std::optional<Certificate> certificate;
    std::vector<EnvelopeReport> envelopes;
    ResidualReport residuals;
    BracketSource bracket_source = BracketSource::user;
    double theta_m = 1.0;

    PhysicalField<Law> field() const { return {&solution, &problem, theta_m}; }
};

inline Problem<TemperatureLaw> make_problem(const Config& cfg) {
    Problem<TemperatureLaw> pb{TemperatureLaw{cfg.model}, cfg.params.a, cfg.params.Dstar, cfg.params.Mstar};
    pb.grid = cfg.numerics.grid;
    pb.quad_tol = cfg.numerics.quad_tol;
    pb.max_iter = cfg.numerics.max_iter;
    pb.beta_guess = cfg.beta_guess();
    return pb;
}

inline std::optional<Certificate> certify_config(const Config& cfg) {
    if (!cfg.envelope) return std::nullopt;
    try {
        return certify(*cfg.envelope, cfg.params);
    } catch (const std::exception& e) {
        throw StageError("certificate", e.what());
    }
}

// Certificate (when an envelope is given), bracket choice, root search, then the residual suite.
template <CoefficientLaw Law>
FullSolution<Law> solve_full(Problem<Law> pb, const std::optional<EnvelopeParams>& envelope,
                             const std::optional<ProblemParams>& physical,
                             const std::optional<std::pair<double, double>>& user_bracket, double tol_root,
                             double tol_fp, double theta_m = 1.0) {
    FullSolution<Law> out{std::move(pb), {}, std::nullopt, {}, {}, BracketSource::user, theta_m};
    if (envelope) {
        try {
            out.certificate = certify(*envelope, out.problem.a, out.problem.Dstar, out.problem.Mstar, physical);
        } catch (const std::exception& e) {
            throw StageError("certificate", e.what());
        }
    }
    std::pair<double, double> bracket;
    if (out.certificate && out.certificate->bracket_certified()) {
        bracket = {*out.certificate->alpha01, *out.certificate->alpha02};
        if (bracket.first > bracket.second) std::swap(bracket.first, bracket.second);
        out.bracket_source = BracketSource::certificate;
    } else if (user_bracket) {
        bracket = *user_bracket;
    } else {
        throw StageError("bracket", out.certificate
                                        ? "certificate hypotheses fail and no [numerics] bracket was given"
                                        : "no envelope certificate; set 'bracket = lo hi' in [numerics]");
    }
    try {
        out.solution = solve_alpha0(out.problem, bracket, tol_root, tol_fp);
    } catch (const FixedPointFailure& e) {
        throw StageError("fixed point", e.what());
    } catch (const RootError& e) {
        throw StageError("root", e.what());
    } catch (const std::exception& e) {
        throw StageError("root", e.what());
    }
    out.solution.notes.push_back(std::string("bracket source: ") + bracket_source_name(out.bracket_source));
    if (!envelope)
        out.solution.notes.push_back("no envelope constants given: certificate absent, user bracket used");
    if (envelope) {
        const double a0 = out.solution.alpha0_star;
        out.envelopes.push_back(
            check_envelopes(out.solution.pair.f1, Phase::liquid, *envelope, out.problem.law, a0));
        out.envelopes.push_back(
            check_envelopes(out.solution.pair.f2, Phase::solid, *envelope, out.problem.law, a0));
    }
    try {
        out.residuals = residual_report(out.field());
    } catch (const std::exception& e) {
        throw StageError("residuals", e.what());
    }
    return out;
}

inline FullSolution<TemperatureLaw> solve_full(const Config& cfg) {
    return solve_full(make_problem(cfg), cfg.envelope, cfg.params, cfg.numerics.bracket, cfg.numerics.tol_root,
                      cfg.numerics.fp_tolerance(), cfg.params.theta_m);
}

// residual thresholds from [numerics]; stefan defaults to tol_root/alpha0*
struct ResidualCheck {
    std::string name;
    double value;
    double limit;
    bool pass;
};

inline std::vector<ResidualCheck> check_residuals(const ResidualReport& r, const NumericsConfig& n,
                                                  double alpha0_star) {
    const double stefan_tol = n.stefan_tol > 0 ? n.stefan_tol : n.tol_root / alpha0_star;
    std::vector<ResidualCheck> out = {
        {"ode_liquid_max", r.ode_liquid_max, n.ode_tol, false},
        {"ode_solid_max", r.ode_solid_max, n.ode_tol, false},
        {"bc_flux", r.bc_flux, n.flux_tol, false},
        {"bc_melt_f1", r.bc_melt_f1, 0.0, false},
        {"bc_melt_f2", r.bc_melt_f2, 0.0, false},
        {"bc_infinity", r.bc_infinity, 0.0, false},
        {"stefan", r.stefan, stefan_tol, false},
        {"pde_liquid_max", r.pde_liquid_max, n.pde_tol, false},
        {"pde_solid_max", r.pde_solid_max, n.pde_tol, false},
        {"integral_liquid", r.integral_liquid, n.integral_tol, false},
        {"integral_solid", r.integral_solid, n.integral_tol, false},
    };
    for (auto& c : out) c.pass = std::isfinite(c.value) && c.value <= c.limit;
    return out;
}

}  // namespace cylstefan
