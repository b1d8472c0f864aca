#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "config.hpp"
#include "pipeline.hpp"
#include "solution_io.hpp"

namespace cylstefan {

// 0 success, 1 usage/IO/parse error, 2 a check failed
enum ExitCode : int { exit_ok = 0, exit_error = 1, exit_check_failed = 2 };

struct Streams {
    std::ostream& out = std::cout;
    std::ostream& err = std::cerr;
};

namespace detail {

inline std::filesystem::path or_default(const std::optional<std::filesystem::path>& p,
                                        const std::filesystem::path& def) {
    return p ? *p : def;
}

inline bool all_pass(const std::vector<ResidualCheck>& checks) {
    return std::all_of(checks.begin(), checks.end(), [](const ResidualCheck& c) { return c.pass; });
}

inline void print_checks(std::ostream& os, const std::vector<ResidualCheck>& checks) {
    for (const auto& c : checks)
        os << (c.pass ? "  ok    " : "  FAIL  ") << c.name << " = " << format_double(c.value)
           << " (limit " << format_double(c.limit) << ")\n";
}

inline std::string csv_safe(std::string s) {
    std::replace(s.begin(), s.end(), ',', ';');
    std::replace(s.begin(), s.end(), '\n', ' ');
    return s;
}

}  // namespace detail

inline int cmd_certify(const std::filesystem::path& config_path,
                       const std::optional<std::filesystem::path>& out_path = std::nullopt, Streams io = {}) {
    try {
        const Config cfg = parse_config(config_path);
        if (!cfg.envelope) {
            io.err << "error: " << config_path.string() << " has no [envelope] section to certify\n";
            return exit_error;
        }
        const Certificate c = *certify_config(cfg);
        std::ostringstream os;
        write_certificate(os, c);
        const auto target = detail::or_default(out_path, cfg.output.certificate);
        write_atomic(target, os.str());
        io.out << "certificate written to " << target.string() << "\n"
               << "q0_ok = " << (c.q0_ok ? "true" : "false") << ", existence_ok = "
               << (c.existence_ok ? "true" : "false") << ", uniqueness_ok = " << (c.uniqueness_ok ? "true" : "false")
               << "\n";
        return c.q0_ok && c.existence_ok && c.uniqueness_ok ? exit_ok : exit_check_failed;
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << "\n";
        return exit_error;
    }
}

inline int cmd_solve(const std::filesystem::path& config_path,
                     const std::optional<std::filesystem::path>& out_path = std::nullopt, Streams io = {}) {
    std::optional<Config> cfg;
    try {
        cfg.emplace(parse_config(config_path));
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << "\n";
        return exit_error;
    }
    std::optional<FullSolution<TemperatureLaw>> fs;
    try {
        fs.emplace(solve_full(*cfg));
    } catch (const StageError& e) {
        io.err << "error: " << e.what() << "\n";
        return e.stage() == "bracket" ? exit_error : exit_check_failed;
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << "\n";
        return exit_error;
    }
    const auto target = detail::or_default(out_path, cfg->output.solution);
    try {
        write_solution(target, *fs, config_path);
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << "\n";
        return exit_error;
    }
    const auto checks = check_residuals(fs->residuals, cfg->numerics, fs->solution.alpha0_star);
    io.out << "alpha0* = " << format_double(fs->solution.alpha0_star) << " (bracket from "
           << bracket_source_name(fs->bracket_source) << ", " << fs->solution.probes.size() << " probes)\n"
           << "solution written to " << target.string() << "\n";
    detail::print_checks(io.out, checks);
    return detail::all_pass(checks) ? exit_ok : exit_check_failed;
}

struct LoadedField {
    LoadedSolution loaded;
    Config config;
    Problem<TemperatureLaw> problem;

    PhysicalField<TemperatureLaw> field() const { return {&loaded.solution, &problem, loaded.theta_m}; }
};

// solution plus the problem rebuilt from its config; the stored scalars must agree with it
inline LoadedField load_field(const std::filesystem::path& solution_path) {
    LoadedSolution ls = read_solution(solution_path);
    Config cfg = parse_config(ls.config_path);
    Problem<TemperatureLaw> pb = make_problem(cfg);
    auto same = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(std::abs(x), std::abs(y)); };
    if (!same(pb.a, ls.a) || !same(pb.Dstar, ls.Dstar) || !same(pb.Mstar, ls.Mstar) ||
        !same(cfg.params.theta_m, ls.theta_m))
        throw std::runtime_error("config '" + ls.config_path.string() +
                                 "' no longer matches the problem stored in the solution file");
    pb.grid = ls.grid;
    pb.quad_tol = ls.quad_tol;
    return {std::move(ls), std::move(cfg), std::move(pb)};
}

inline int cmd_verify(const std::filesystem::path& solution_path,
                      const std::optional<std::filesystem::path>& out_path = std::nullopt, Streams io = {}) {
    std::optional<LoadedField> lf;
    try {
        lf.emplace(load_field(solution_path));
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << "\n";
        return exit_error;
    }
    ResidualReport rep;
    std::vector<ResidualCheck> checks;
    try {
        rep = residual_report(lf->field());
        checks = check_residuals(rep, lf->config.numerics, lf->loaded.solution.alpha0_star);
    } catch (const std::exception& e) {
        // a file that cannot even be evaluated fails verification
        io.err << "verification failed: " << e.what() << "\n";
        return exit_check_failed;
    }
    std::ostringstream os;
    write_residual_report(os, rep);
    for (const auto& c : checks) os << c.name << "_pass = " << (c.pass ? "true" : "false") << "\n";
    os << "all_pass = " << (detail::all_pass(checks) ? "true" : "false") << "\n";
    auto target = out_path;
    if (!target) {
        target = solution_path;
        target->replace_extension(".residuals");
    }
    try {
        write_atomic(*target, os.str());
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << "\n";
        return exit_error;
    }
    detail::print_checks(io.out, checks);
    io.out << "residual report written to " << target->string() << "\n";
    return detail::all_pass(checks) ? exit_ok : exit_check_failed;
}

struct ProfileOptions {
    std::vector<double> times;
    std::vector<double> radii;
    bool autogen = false;
    double t_max = 1.0;
    std::optional<std::filesystem::path> profile_out, front_out;
};

// 5 log-spaced times ending at t_max and 50 radii over [0, 3 alpha(t_max)]
inline void auto_profile_points(double t_max, double alpha0, double a, std::vector<double>& times,
                                std::vector<double>& radii) {
    times.clear();
    radii.clear();
    for (int i = 0; i < 5; ++i) times.push_back(t_max * std::pow(10.0, i - 4));
    const double rmax = 3.0 * free_boundary(t_max, alpha0, a);
    for (int i = 0; i < 50; ++i) radii.push_back(rmax * i / 49.0);
}

inline int cmd_profile(const std::filesystem::path& solution_path, ProfileOptions opt, Streams io = {}) {
    try {
        if (!opt.autogen && opt.times.empty()) {
            io.err << "error: give --times (and --radii) or --auto\n";
            return exit_error;
        }
        for (double t : opt.times)
            if (!(t > 0)) {
                io.err << "error: times must be positive\n";
                return exit_error;
            }
        for (double r : opt.radii)
            if (!(r >= 0)) {
                io.err << "error: radii must be non-negative\n";
                return exit_error;
            }
        if (opt.autogen && !(opt.t_max > 0)) {
            io.err << "error: --t-max must be positive\n";
            return exit_error;
        }
        const LoadedField lf = load_field(solution_path);
        if (opt.autogen) auto_profile_points(opt.t_max, lf.loaded.solution.alpha0_star, lf.problem.a, opt.times, opt.radii);
        std::ostringstream prof, front;
        export_profiles(lf.field(), opt.times, opt.radii, prof, front);
        const auto ppath = detail::or_default(opt.profile_out, lf.config.output.profile);
        const auto fpath = detail::or_default(opt.front_out, lf.config.output.front);
        write_atomic(ppath, prof.str());
        write_atomic(fpath, front.str());
        io.out << "profile written to " << ppath.string() << "\nfront written to " << fpath.string() << "\n";
        return exit_ok;
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << "\n";
        return exit_error;
    }
}

// 'section.key' or a key that is unique across the sweepable sections
inline std::pair<std::string, std::string> resolve_param(const RawConfig& raw, const std::string& name) {
    if (auto dot = name.find('.'); dot != std::string::npos) return {name.substr(0, dot), name.substr(dot + 1)};
    std::vector<std::string> hits;
    for (const auto& [sec, s] : raw.sections)
        if (s.keys.count(name)) hits.push_back(sec);
    if (hits.size() == 1) return {hits.front(), name};
    if (hits.empty()) throw std::invalid_argument("parameter '" + name + "' not present in the config");
    throw std::invalid_argument("parameter '" + name + "' is ambiguous; use section.key");
}

inline unsigned sweep_threads(std::size_t jobs) {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("CYLSTEFAN_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) n = static_cast<unsigned>(v);
    }
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(jobs, 1)));
}

struct SweepRow {
    std::string value;
    std::string alpha0_star = "nan", stefan = "nan", ode_liquid = "nan", ode_solid = "nan", pde_liquid = "nan",
                pde_solid = "nan", bc_flux = "nan";
    std::string q0_ok = "n/a", existence_ok = "n/a", uniqueness_ok = "n/a";
    std::string status = "ok";
    bool failed = false;
};

inline SweepRow sweep_point(const RawConfig& base, const std::filesystem::path& config_path,
                            const std::pair<std::string, std::string>& key, const std::string& value) {
    SweepRow row;
    row.value = value;
    auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
    try {
        RawConfig raw = base;
        raw.set(key.first, key.second, value);
        const Config cfg = build_config(raw, config_path);
        row.value = format_double(parse_number(value));
        if (cfg.envelope) {
            const auto c = *certify_config(cfg);
            row.q0_ok = flag(c.q0_ok);
            row.existence_ok = flag(c.existence_ok);
            row.uniqueness_ok = flag(c.uniqueness_ok);
        }
        const auto fs = solve_full(cfg);
        const auto& r = fs.residuals;
        row.alpha0_star = format_double(fs.solution.alpha0_star);
        row.stefan = format_double(r.stefan);
        row.ode_liquid = format_double(r.ode_liquid_max);
        row.ode_solid = format_double(r.ode_solid_max);
        row.pde_liquid = format_double(r.pde_liquid_max);
        row.pde_solid = format_double(r.pde_solid_max);
        row.bc_flux = format_double(r.bc_flux);
    } catch (const std::exception& e) {
        row.status = "error: " + detail::csv_safe(e.what());
        row.failed = true;
    }
    return row;
}

// One row per value in input order, whatever the thread count.
inline int cmd_sweep(const std::filesystem::path& config_path, const std::string& param,
                     const std::vector<std::string>& values,
                     const std::optional<std::filesystem::path>& out_path = std::nullopt, Streams io = {}) {
    std::optional<Config> cfg;
    std::pair<std::string, std::string> key;
    try {
        cfg.emplace(parse_config(config_path));
        key = resolve_param(cfg->raw, param);
        if (values.empty()) throw std::invalid_argument("--values is empty");
        for (const auto& v : values) parse_number(v);
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << "\n";
        return exit_error;
    }
    std::vector<SweepRow> rows(values.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < values.size();)
            rows[i] = sweep_point(cfg->raw, config_path, key, values[i]);
    };
    const unsigned nt = sweep_threads(values.size());
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::ostringstream os;
    os << "param_value,alpha0_star,stefan,ode_liquid_max,ode_solid_max,pde_liquid_max,pde_solid_max,bc_flux,"
          "q0_ok,existence_ok,uniqueness_ok,status\n";
    bool failed = false;
    for (const auto& r : rows) {
        os << r.value << ',' << r.alpha0_star << ',' << r.stefan << ',' << r.ode_liquid << ',' << r.ode_solid << ','
           << r.pde_liquid << ',' << r.pde_solid << ',' << r.bc_flux << ',' << r.q0_ok << ',' << r.existence_ok
           << ',' << r.uniqueness_ok << ',' << r.status << '\n';
        failed = failed || r.failed;
    }
    const auto target = detail::or_default(out_path, cfg->output.sweep);
    try {
        write_atomic(target, os.str());
    } catch (const std::exception& e) {
        io.err << "error: " << e.what() << "\n";
        return exit_error;
    }
    io.out << "sweep of " << key.first << "." << key.second << " over " << values.size() << " values written to "
           << target.string() << "\n";
    return failed ? exit_check_failed : exit_ok;
}

}  // namespace cylstefan
