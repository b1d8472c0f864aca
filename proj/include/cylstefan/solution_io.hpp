#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <vector>

#include "pipeline.hpp"

namespace cylstefan {

class SolutionFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Writes next to the target and renames, so readers never see a partial file.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename onto '" + path.string() + "': " + ec.message());
    }
}

inline void write_residual_report(std::ostream& os, const ResidualReport& r) {
    os << "ode_liquid_max = " << format_double(r.ode_liquid_max) << "\n"
       << "ode_solid_max = " << format_double(r.ode_solid_max) << "\n"
       << "bc_flux = " << format_double(r.bc_flux) << "\n"
       << "bc_melt_f1 = " << format_double(r.bc_melt_f1) << "\n"
       << "bc_melt_f2 = " << format_double(r.bc_melt_f2) << "\n"
       << "bc_infinity = " << format_double(r.bc_infinity) << "\n"
       << "stefan = " << format_double(r.stefan) << "\n"
       << "pde_liquid_max = " << format_double(r.pde_liquid_max) << "\n"
       << "pde_solid_max = " << format_double(r.pde_solid_max) << "\n"
       << "integral_liquid = " << format_double(r.integral_liquid) << "\n"
       << "integral_solid = " << format_double(r.integral_solid) << "\n"
       << "grid = " << r.grid_meta << "\n";
}

namespace detail {
inline const char* grading_kind_name(Grading::Kind k) {
    switch (k) {
        case Grading::Kind::lower: return "lower";
        case Grading::Kind::upper: return "upper";
        default: return "identity";
    }
}
inline Grading::Kind grading_kind_of(const std::string& s) {
    if (s == "lower") return Grading::Kind::lower;
    if (s == "upper") return Grading::Kind::upper;
    if (s == "identity") return Grading::Kind::identity;
    throw SolutionFormatError("unknown grading kind '" + s + "'");
}
}  // namespace detail

// Sectioned key = value text with embedded CSV blocks ([name:csv]).  Every double is printed with
// 17 significant digits so a reload reproduces the grid functions bit for bit.
template <CoefficientLaw Law>
std::string format_solution(const FullSolution<Law>& fs, const std::string& config_ref) {
    std::ostringstream os;
    const auto& s = fs.solution;
    const auto& pb = fs.problem;
    const auto& f1 = s.pair.f1;
    const auto& f2 = s.pair.f2;
    auto fd = [](double x) { return format_double(x); };
    os << "# cylstefan solution\n";
    os << "[meta]\nformat = cylstefan-solution\nversion = 1\nconfig = " << config_ref << "\n";
    os << "[problem]\na = " << fd(pb.a) << "\nDstar = " << fd(pb.Dstar) << "\nMstar = " << fd(pb.Mstar)
       << "\ntheta_m = " << fd(fs.theta_m) << "\n";
    os << "[solution]\nalpha0_star = " << fd(s.alpha0_star) << "\nstefan_residual = " << fd(s.stefan_residual)
       << "\nPhi = " << fd(s.Phi) << "\nbracket_lo = " << fd(s.bracket.first) << "\nbracket_hi = "
       << fd(s.bracket.second) << "\nbracket_source = " << bracket_source_name(fs.bracket_source)
       << "\nfixed_point_iterations = " << s.final_report.iterations
       << "\nfixed_point_final_delta = " << fd(s.final_report.final_delta) << "\n";
    for (const auto& n : s.notes) os << "# " << n << "\n";
    os << "[grid]\nnodes = " << pb.grid.nodes << "\nratio = " << fd(pb.grid.ratio) << "\neta_min = "
       << fd(pb.grid.eta_min) << "\nsolid_shift = " << fd(pb.grid.solid_shift) << "\nquad_tol = " << fd(pb.quad_tol)
       << "\nliquid_grading = " << detail::grading_kind_name(f1.grading().kind)
       << "\nliquid_inv_ell = " << fd(f1.grading().inv_ell) << "\nliquid_shift = " << fd(f1.grading().shift)
       << "\nsolid_grading = " << detail::grading_kind_name(f2.grading().kind)
       << "\nsolid_inv_ell = " << fd(f2.grading().inv_ell) << "\nsolid_shift_grading = " << fd(f2.grading().shift)
       << "\n";
    os << "[residuals]\n";
    write_residual_report(os, fs.residuals);
    os << "[certificate]\n";
    if (fs.certificate) {
        os << "present = true\n";
        write_certificate(os, *fs.certificate);
    } else {
        os << "present = false\n";
    }
    os << "[envelope_check]\n";
    if (fs.envelopes.empty()) os << "present = false\n";
    for (const auto& e : fs.envelopes) {
        const std::string p = phase_name(e.phase);
        os << p << "_pass = " << (e.pass ? "true" : "false") << "\n"
           << p << "_min_L_margin = " << fd(e.min_L_margin) << "\n"
           << p << "_min_N_margin = " << fd(e.min_N_margin) << "\n";
    }
    os << "[probes:csv]\nalpha0,R,Phi,iterations,final_delta,converged\n";
    for (const auto& p : s.probes)
        os << fd(p.alpha0) << ',' << fd(p.R) << ',' << fd(p.Phi) << ',' << p.report.iterations << ','
           << fd(p.report.final_delta) << ',' << (p.report.converged ? 1 : 0) << '\n';
    os << "[liquid:csv]\neta,f1,slope\n";
    for (std::size_t i = 0; i < f1.size(); ++i)
        os << fd(f1.nodes()[i]) << ',' << fd(f1.values()[i]) << ',' << fd(f1.input_slopes()[i]) << '\n';
    os << "[solid:csv]\nu,f2,slope\n";
    for (std::size_t i = 0; i < f2.size(); ++i)
        os << fd(f2.nodes()[i]) << ',' << fd(f2.values()[i]) << ',' << fd(f2.input_slopes()[i]) << '\n';
    return os.str();
}

// config path as stored: relative to the solution file's directory when possible
inline std::string config_reference(const std::filesystem::path& config, const std::filesystem::path& solution) {
    const auto cfg = std::filesystem::weakly_canonical(std::filesystem::absolute(config));
    auto dir = std::filesystem::absolute(solution).parent_path();
    dir = std::filesystem::weakly_canonical(dir);
    auto rel = cfg.lexically_relative(dir);
    return (rel.empty() ? cfg : rel).generic_string();
}

template <CoefficientLaw Law>
void write_solution(const std::filesystem::path& path, const FullSolution<Law>& fs,
                    const std::filesystem::path& config) {
    write_atomic(path, format_solution(fs, config_reference(config, path)));
}

struct LoadedSolution {
    std::filesystem::path config_path;  // resolved against the solution file
    Solution solution;
    GridSpec grid;
    double quad_tol = 1e-10;
    double a = 1, Dstar = 1, Mstar = 1, theta_m = 1;
    std::string bracket_source;
    std::map<std::string, std::map<std::string, std::string>> keys;
};

inline LoadedSolution parse_solution(std::istream& in, const std::filesystem::path& origin) {
    std::map<std::string, std::map<std::string, std::string>> keys;
    std::map<std::string, std::vector<std::vector<std::string>>> tables;
    std::string line, section;
    bool csv = false, header_pending = false;
    int n = 0;
    auto bad = [&](const std::string& msg) {
        return SolutionFormatError(origin.string() + ":" + std::to_string(n) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw bad("malformed section header");
            section = line.substr(1, line.size() - 2);
            csv = section.size() > 4 && section.substr(section.size() - 4) == ":csv";
            if (csv) {
                section.resize(section.size() - 4);
                tables[section];
                header_pending = true;
            } else {
                keys[section];
            }
            continue;
        }
        if (section.empty()) throw bad("content before first section");
        if (csv) {
            if (header_pending) {
                header_pending = false;
                continue;
            }
            std::vector<std::string> cells;
            std::stringstream ss(line);
            std::string c;
            while (std::getline(ss, c, ',')) cells.push_back(c);
            tables[section].push_back(std::move(cells));
            continue;
        }
        const auto eq = line.find(" = ");
        if (eq == std::string::npos) throw bad("expected 'key = value'");
        keys[section][line.substr(0, eq)] = line.substr(eq + 3);
    }

    auto get = [&](const std::string& sec, const std::string& key) -> const std::string& {
        auto s = keys.find(sec);
        if (s == keys.end() || !s->second.count(key))
            throw SolutionFormatError(origin.string() + ": missing '" + key + "' in [" + sec + "]");
        return s->second.at(key);
    };
    auto num = [&](const std::string& sec, const std::string& key) {
        try {
            return parse_number(get(sec, key));
        } catch (const std::invalid_argument& e) {
            throw SolutionFormatError(origin.string() + ": [" + sec + "] " + key + ": " + e.what());
        }
    };
    if (get("meta", "format") != "cylstefan-solution") throw SolutionFormatError("not a cylstefan solution file");
    if (get("meta", "version") != "1") throw SolutionFormatError("unsupported solution version");

    LoadedSolution L;
    L.keys = keys;
    std::filesystem::path cfg(get("meta", "config"));
    L.config_path = cfg.is_relative() ? origin.parent_path() / cfg : cfg;
    L.a = num("problem", "a");
    L.Dstar = num("problem", "Dstar");
    L.Mstar = num("problem", "Mstar");
    L.theta_m = num("problem", "theta_m");
    L.grid.nodes = static_cast<std::size_t>(num("grid", "nodes"));
    L.grid.ratio = num("grid", "ratio");
    L.grid.eta_min = num("grid", "eta_min");
    L.grid.solid_shift = num("grid", "solid_shift");
    L.quad_tol = num("grid", "quad_tol");
    L.bracket_source = get("solution", "bracket_source");

    auto& S = L.solution;
    S.alpha0_star = num("solution", "alpha0_star");
    S.stefan_residual = num("solution", "stefan_residual");
    S.Phi = num("solution", "Phi");
    S.bracket = {num("solution", "bracket_lo"), num("solution", "bracket_hi")};
    S.final_report.iterations = static_cast<std::size_t>(num("solution", "fixed_point_iterations"));
    S.final_report.final_delta = num("solution", "fixed_point_final_delta");
    S.final_report.converged = true;

    auto columns = [&](const std::string& name, std::size_t width) {
        auto t = tables.find(name);
        if (t == tables.end() || t->second.empty())
            throw SolutionFormatError(origin.string() + ": missing table [" + name + ":csv]");
        std::vector<std::vector<double>> cols(width);
        for (const auto& row : t->second) {
            if (row.size() != width)
                throw SolutionFormatError(origin.string() + ": wrong column count in [" + name + ":csv]");
            for (std::size_t j = 0; j < width; ++j) {
                try {
                    cols[j].push_back(parse_number(row[j]));
                } catch (const std::invalid_argument& e) {
                    throw SolutionFormatError(origin.string() + ": [" + name + ":csv] " + e.what());
                }
            }
        }
        return cols;
    };
    if (tables.count("probes"))
        for (const auto& row : tables["probes"]) {
            if (row.size() != 6) throw SolutionFormatError(origin.string() + ": wrong column count in probes");
            Probe p;
            p.alpha0 = parse_number(row[0]);
            p.R = parse_number(row[1]);
            p.Phi = parse_number(row[2]);
            p.report.iterations = static_cast<std::size_t>(parse_number(row[3]));
            p.report.final_delta = parse_number(row[4]);
            p.report.converged = row[5] == "1";
            S.probes.push_back(p);
        }
    auto liq = columns("liquid", 3);
    auto sol = columns("solid", 3);
    Grading gl{detail::grading_kind_of(get("grid", "liquid_grading")), num("grid", "liquid_inv_ell"),
               num("grid", "liquid_shift")};
    Grading gs{detail::grading_kind_of(get("grid", "solid_grading")), num("grid", "solid_inv_ell"),
               num("grid", "solid_shift_grading")};
    try {
        S.pair.f1 = GridFunction::finite(0.0, S.alpha0_star, liq[0], liq[1], liq[2], gl);
        S.pair.f2 = GridFunction::half_line(S.alpha0_star, sol[0], sol[1], sol[2], gs);
    } catch (const std::exception& e) {
        throw SolutionFormatError(origin.string() + ": invalid grid data: " + e.what());
    }
    S.pair.alpha0 = S.alpha0_star;
    return L;
}

inline LoadedSolution read_solution(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open solution file '" + path.string() + "'");
    return parse_solution(in, path);
}

}  // namespace cylstefan
