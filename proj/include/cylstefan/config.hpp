#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fixpoint.hpp"
#include "props.hpp"

namespace cylstefan {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& where, int line, const std::string& msg)
        : std::runtime_error(where + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + msg),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

// [section] headers, key = value lines, '#' comments
struct RawConfig {
    struct Entry {
        std::string value;
        int line;
    };
    struct Section {
        int line = 0;
        std::map<std::string, Entry> keys;
        std::vector<std::string> order;
    };
    std::string source;
    std::map<std::string, Section> sections;

    const Entry* find(const std::string& sec, const std::string& key) const {
        auto s = sections.find(sec);
        if (s == sections.end()) return nullptr;
        auto k = s->second.keys.find(key);
        return k == s->second.keys.end() ? nullptr : &k->second;
    }
    void set(const std::string& sec, const std::string& key, const std::string& value) {
        auto& s = sections[sec];
        auto it = s.keys.find(key);
        if (it == s.keys.end()) {
            s.keys[key] = {value, 0};
            s.order.push_back(key);
        } else {
            it->second.value = value;
        }
    }
};

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline RawConfig parse_raw_config(std::istream& in, const std::string& source) {
    RawConfig raw;
    raw.source = source;
    std::string line, current;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ConfigError(source, n, "malformed section header");
            current = trim(line.substr(1, line.size() - 2));
            if (raw.sections.count(current)) throw ConfigError(source, n, "duplicate section [" + current + "]");
            raw.sections[current].line = n;
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(source, n, "expected 'key = value'");
        if (current.empty()) throw ConfigError(source, n, "key outside of any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(source, n, "empty key");
        auto& sec = raw.sections[current];
        if (sec.keys.count(key)) throw ConfigError(source, n, "duplicate key '" + key + "'");
        sec.keys[key] = {value, n};
        sec.order.push_back(key);
    }
    return raw;
}

struct NumericsConfig {
    GridSpec grid{};
    double quad_tol = 1e-10;
    double tol_root = 1e-8;
    double tol_fp = 0.0;  // 0: tol_root/100
    std::size_t max_iter = 200;
    double beta_guess = 0.0;  // 0: envelope beta when present, else 1
    std::optional<std::pair<double, double>> bracket;
    double ode_tol = 1e-6;
    double pde_tol = 1e-4;
    double flux_tol = 1e-6;
    double stefan_tol = 0.0;  // 0: tol_root/alpha0*
    double integral_tol = 1e-8;

    double fp_tolerance() const { return tol_fp > 0 ? tol_fp : tol_root / 100.0; }
};

struct OutputConfig {
    std::filesystem::path solution, certificate, residuals, profile, front, sweep;
};

struct Config {
    std::filesystem::path path;
    std::filesystem::path base_dir;
    RawConfig raw;
    ThermalModel model;
    ProblemParams params;
    std::optional<EnvelopeParams> envelope;
    NumericsConfig numerics;
    OutputConfig output;

    double beta_guess() const {
        if (numerics.beta_guess > 0) return numerics.beta_guess;
        return envelope ? envelope->beta : 1.0;
    }
};

namespace detail {

struct Reader {
    const RawConfig& raw;
    std::set<std::pair<std::string, std::string>> used;

    int section_line(const std::string& sec) const {
        auto s = raw.sections.find(sec);
        return s == raw.sections.end() ? 0 : s->second.line;
    }
    [[noreturn]] void fail(int line, const std::string& msg) const { throw ConfigError(raw.source, line, msg); }

    const RawConfig::Entry& need(const std::string& sec, const std::string& key) {
        const auto* e = raw.find(sec, key);
        if (!e) {
            if (!raw.sections.count(sec)) fail(0, "missing section [" + sec + "]");
            fail(section_line(sec), "missing key '" + key + "' in [" + sec + "]");
        }
        used.insert({sec, key});
        return *e;
    }
    const RawConfig::Entry* maybe(const std::string& sec, const std::string& key) {
        const auto* e = raw.find(sec, key);
        if (e) used.insert({sec, key});
        return e;
    }
    double number(const RawConfig::Entry& e, const std::string& key) const {
        try {
            return parse_number(e.value);
        } catch (const std::invalid_argument&) {
            fail(e.line, "malformed number for '" + key + "': '" + e.value + "'");
        }
    }
    double num(const std::string& sec, const std::string& key) { return number(need(sec, key), key); }
    double positive(const std::string& sec, const std::string& key) {
        const auto& e = need(sec, key);
        const double v = number(e, key);
        if (!(v > 0)) fail(e.line, "'" + key + "' must be positive");
        return v;
    }
    double opt_positive(const std::string& sec, const std::string& key, double def) {
        const auto* e = maybe(sec, key);
        if (!e) return def;
        const double v = number(*e, key);
        if (!(v > 0)) fail(e->line, "'" + key + "' must be positive");
        return v;
    }
};

}  // namespace detail

inline Config build_config(const RawConfig& raw, const std::filesystem::path& path) {
    detail::Reader R{raw, {}};
    const std::filesystem::path base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");

    static const std::map<std::string, std::set<std::string>> allowed = {
        {"thermal", {"c", "gamma", "lambda", "c0", "gamma0", "lambda0", "theta_min", "theta_max"}},
        {"problem", {"Q0", "theta_m", "l_m", "gamma_m"}},
        {"envelope", {"mu", "nu", "beta", "sigma", "L1m", "L1M", "N1m", "N1M", "L2m", "L2M", "N2m", "N2M",
                      "Lbar1", "Nbar1", "Lbar2", "Nbar2"}},
        {"numerics", {"nodes", "grading_ratio", "eta_min", "solid_shift", "quad_tol", "tol_root", "tol_fp",
                      "max_iter", "beta_guess", "bracket", "ode_tol", "pde_tol", "flux_tol", "stefan_tol",
                      "integral_tol"}},
        {"output", {"solution", "certificate", "residuals", "profile", "front", "sweep"}},
    };
    for (const auto& [name, sec] : raw.sections) {
        auto a = allowed.find(name);
        if (a == allowed.end()) R.fail(sec.line, "unknown section [" + name + "]");
        for (const auto& key : sec.order)
            if (!a->second.count(key))
                R.fail(sec.keys.at(key).line, "unknown key '" + key + "' in [" + name + "]");
    }

    auto coefficient = [&](const std::string& key) {
        const auto& e = R.need("thermal", key);
        try {
            return parse_coefficient(e.value, base);
        } catch (const std::invalid_argument& ex) {
            R.fail(e.line, "'" + key + "': " + ex.what());
        }
    };
    const double theta_m = R.positive("problem", "theta_m");
    Coefficient c = coefficient("c"), gamma = coefficient("gamma"), lambda = coefficient("lambda");
    const double c0 = R.positive("thermal", "c0");
    const double gamma0 = R.positive("thermal", "gamma0");
    const double lambda0 = R.positive("thermal", "lambda0");
    double tlo = 0.0, thi = 10.0 * theta_m;
    if (const auto* e = R.maybe("thermal", "theta_min")) tlo = R.number(*e, "theta_min");
    if (const auto* e = R.maybe("thermal", "theta_max")) thi = R.number(*e, "theta_max");
    if (!(tlo < thi)) R.fail(R.section_line("thermal"), "theta_min must be below theta_max");
    if (tlo > 0.0) R.fail(R.section_line("thermal"), "temperature range must include 0 (the far field)");
    ThermalModel model(std::move(c), std::move(gamma), std::move(lambda), c0, gamma0, lambda0, theta_m, tlo, thi);

    const double Q0 = R.positive("problem", "Q0");
    const double l_m = R.positive("problem", "l_m");
    const double gamma_m = R.positive("problem", "gamma_m");
    ProblemParams params = ProblemParams::make(Q0, theta_m, l_m, gamma_m, model);

    std::optional<EnvelopeParams> env;
    if (raw.sections.count("envelope")) {
        // the exponent relations are checked first so the message names the real problem
        const auto* mu = R.maybe("envelope", "mu");
        const auto* nu = R.maybe("envelope", "nu");
        if (mu && nu && !(R.number(*mu, "mu") > std::max(1.0, R.number(*nu, "nu"))))
            R.fail(mu->line, "invariant violated: mu > max(1, nu)");
        const auto* be = R.maybe("envelope", "beta");
        const auto* si = R.maybe("envelope", "sigma");
        if (be && si && !(R.number(*be, "beta") > R.number(*si, "sigma") + 2))
            R.fail(be->line, "invariant violated: beta > sigma + 2");
        EnvelopeParams e{};
        e.mu = R.num("envelope", "mu");
        e.nu = R.num("envelope", "nu");
        e.beta = R.num("envelope", "beta");
        e.sigma = R.num("envelope", "sigma");
        e.L1m = R.positive("envelope", "L1m");
        e.L1M = R.positive("envelope", "L1M");
        e.N1m = R.positive("envelope", "N1m");
        e.N1M = R.positive("envelope", "N1M");
        e.L2m = R.positive("envelope", "L2m");
        e.L2M = R.positive("envelope", "L2M");
        e.N2m = R.positive("envelope", "N2m");
        e.N2M = R.positive("envelope", "N2M");
        e.Lbar1 = R.num("envelope", "Lbar1");
        e.Nbar1 = R.num("envelope", "Nbar1");
        e.Lbar2 = R.num("envelope", "Lbar2");
        e.Nbar2 = R.num("envelope", "Nbar2");
        try {
            e.validate();
        } catch (const std::invalid_argument& ex) {
            R.fail(R.section_line("envelope"), std::string("invariant violated: ") + ex.what());
        }
        env = e;
    }

    NumericsConfig num;
    const std::string ns = "numerics";
    if (const auto* e = R.maybe(ns, "nodes")) {
        const double v = R.number(*e, "nodes");
        if (!(v >= 6) || v != std::floor(v)) R.fail(e->line, "'nodes' must be an integer >= 6");
        num.grid.nodes = static_cast<std::size_t>(v);
    }
    num.grid.ratio = R.opt_positive(ns, "grading_ratio", num.grid.ratio);
    if (!(num.grid.ratio > 1)) R.fail(R.maybe(ns, "grading_ratio")->line, "'grading_ratio' must exceed 1");
    num.grid.eta_min = R.opt_positive(ns, "eta_min", num.grid.eta_min);
    num.grid.solid_shift = R.opt_positive(ns, "solid_shift", num.grid.solid_shift);
    num.quad_tol = R.opt_positive(ns, "quad_tol", num.quad_tol);
    num.tol_root = R.opt_positive(ns, "tol_root", num.tol_root);
    num.tol_fp = R.opt_positive(ns, "tol_fp", 0.0);
    if (const auto* e = R.maybe(ns, "max_iter")) {
        const double v = R.number(*e, "max_iter");
        if (!(v >= 1) || v != std::floor(v)) R.fail(e->line, "'max_iter' must be a positive integer");
        num.max_iter = static_cast<std::size_t>(v);
    }
    num.beta_guess = R.opt_positive(ns, "beta_guess", 0.0);
    if (const auto* e = R.maybe(ns, "bracket")) {
        std::istringstream ss(e->value);
        std::string a, b, extra;
        ss >> a >> b;
        if (b.empty() || (ss >> extra)) R.fail(e->line, "'bracket' expects two numbers");
        double lo, hi;
        try {
            lo = parse_number(a);
            hi = parse_number(b);
        } catch (const std::invalid_argument&) {
            R.fail(e->line, "malformed number in 'bracket'");
        }
        if (!(lo > 0 && lo < hi)) R.fail(e->line, "'bracket' needs 0 < lo < hi");
        num.bracket = std::make_pair(lo, hi);
    }
    num.ode_tol = R.opt_positive(ns, "ode_tol", num.ode_tol);
    num.pde_tol = R.opt_positive(ns, "pde_tol", num.pde_tol);
    num.flux_tol = R.opt_positive(ns, "flux_tol", num.flux_tol);
    num.stefan_tol = R.opt_positive(ns, "stefan_tol", 0.0);
    num.integral_tol = R.opt_positive(ns, "integral_tol", num.integral_tol);

    OutputConfig out;
    const std::string stem = path.stem().string();
    auto out_path = [&](const std::string& key, const std::string& suffix) {
        if (const auto* e = R.maybe("output", key)) {
            if (e->value.empty()) R.fail(e->line, "empty path for '" + key + "'");
            std::filesystem::path p(e->value);
            return p.is_relative() ? base / p : p;
        }
        return base / (stem + suffix);
    };
    out.solution = out_path("solution", ".solution");
    out.certificate = out_path("certificate", ".certificate");
    out.residuals = out_path("residuals", ".residuals");
    out.profile = out_path("profile", "_profile.csv");
    out.front = out_path("front", "_front.csv");
    out.sweep = out_path("sweep", "_sweep.csv");

    return Config{path, base, raw, std::move(model), params, env, num, out};
}

inline Config parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
    return build_config(parse_raw_config(in, path.string()), path);
}

}  // namespace cylstefan
