#include <CLI11.hpp>

#include <optional>
#include <string>
#include <vector>

#include "cylstefan/commands.hpp"

namespace {

std::optional<std::filesystem::path> opt_path(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::filesystem::path(s);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-similar two-phase cylindrical Stefan solver with a line heat source"};
    app.require_subcommand(1);

    std::string path, out, front_out, param;
    std::vector<double> times, radii;
    std::vector<std::string> values;
    bool autogen = false;
    double t_max = 1.0;

    auto* certify = app.add_subcommand("certify", "evaluate the envelope certificate of a config");
    certify->add_option("config", path, "config file")->required();
    certify->add_option("-o,--out", out, "certificate report path");

    auto* solve = app.add_subcommand("solve", "solve for alpha0* and the phase profiles");
    solve->add_option("config", path, "config file")->required();
    solve->add_option("-o,--out", out, "solution file path");

    auto* profile = app.add_subcommand("profile", "export temperature profiles from a solution file");
    profile->add_option("solution", path, "solution file")->required();
    profile->add_option("--times", times, "sample times")->delimiter(',');
    profile->add_option("--radii", radii, "sample radii")->delimiter(',');
    profile->add_flag("--auto", autogen, "5 log-spaced times up to --t-max, 50 radii over [0, 3 alpha(t_max)]");
    profile->add_option("--t-max", t_max, "largest time for --auto")->capture_default_str();
    profile->add_option("-o,--out", out, "profile CSV path");
    profile->add_option("--front-out", front_out, "front CSV path");

    auto* verify = app.add_subcommand("verify", "recompute residuals of a solution file");
    verify->add_option("solution", path, "solution file")->required();
    verify->add_option("-o,--out", out, "residual report path");

    auto* sweep = app.add_subcommand("sweep", "solve over a list of values of one config parameter");
    sweep->add_option("config", path, "config file")->required();
    sweep->add_option("--param", param, "parameter as key or section.key")->required();
    sweep->add_option("--values", values, "comma-separated values")->required()->delimiter(',');
    sweep->add_option("-o,--out", out, "sweep CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? cylstefan::exit_ok : cylstefan::exit_error;
    }

    using namespace cylstefan;
    if (certify->parsed()) return cmd_certify(path, opt_path(out));
    if (solve->parsed()) return cmd_solve(path, opt_path(out));
    if (verify->parsed()) return cmd_verify(path, opt_path(out));
    if (sweep->parsed()) return cmd_sweep(path, param, values, opt_path(out));
    ProfileOptions po;
    po.times = times;
    po.radii = radii;
    po.autogen = autogen;
    po.t_max = t_max;
    po.profile_out = opt_path(out);
    po.front_out = opt_path(front_out);
    return cmd_profile(path, po);
}
