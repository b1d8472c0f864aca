#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "cylstefan/commands.hpp"
#include "fixtures.hpp"

using namespace cylstefan;
namespace fs = std::filesystem;

namespace {
const fs::path samples = CYLSTEFAN_SAMPLES_DIR;

const char* minimal =
    "[thermal]\n"
    "c = const 1\n"
    "gamma = const 1\n"
    "lambda = const 1\n"
    "c0 = 1\n"
    "gamma0 = 1\n"
    "lambda0 = 1\n"
    "[problem]\n"
    "Q0 = 10\n"
    "theta_m = 1\n"
    "l_m = 1\n"
    "gamma_m = 1\n";

std::string envelope_block(const std::string& mu) {
    return "[envelope]\nmu = " + mu +
           "\nnu = 1\nbeta = 3\nsigma = 0\nL1m = 1\nL1M = 1\nN1m = 1\nN1M = 1\nL2m = 1\nL2M = 1\n"
           "N2m = 1\nN2M = 1\nLbar1 = 0\nNbar1 = 0\nLbar2 = 0\nNbar2 = 0\n";
}

Config parse_text(const std::string& text, const std::string& name = "t.cfg") {
    const auto dir = fixtures::scratch_dir("cfg");
    fixtures::write_file(dir / name, text);
    return parse_config(dir / name);
}

std::string config_error(const std::string& text, int* line = nullptr) {
    try {
        parse_text(text);
    } catch (const ConfigError& e) {
        if (line) *line = e.line();
        return e.what();
    }
    return "";
}

fs::path copy_sample(const fs::path& dir, const std::string& name) {
    fs::copy_file(samples / name, dir / name, fs::copy_options::overwrite_existing);
    return dir / name;
}

struct Quiet {
    std::ostringstream out, err;
    Streams io() { return {out, err}; }
};

// shared cc1 solution, solved once
const fs::path& cc1_solution() {
    static const fs::path p = [] {
        const auto dir = fixtures::scratch_dir("cc1");
        const auto cfg = copy_sample(dir, "cc1.cfg");
        Quiet q;
        if (cmd_solve(cfg, std::nullopt, q.io()) != exit_ok) throw std::runtime_error(q.err.str());
        return dir / "cc1.solution";
    }();
    return p;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(fixtures::read_file(p));
    for (std::string line; std::getline(in, line);) {
        std::vector<std::string> cols;
        std::stringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');) cols.push_back(c);
        rows.push_back(cols);
    }
    return rows;
}
}  // namespace

TEST(Config, MinimalUsesDefaults) {
    const auto c = parse_text(minimal, "run.cfg");
    EXPECT_FALSE(c.envelope.has_value());
    EXPECT_EQ(c.numerics.grid.nodes, 257u);
    EXPECT_EQ(c.numerics.tol_root, 1e-8);
    EXPECT_EQ(c.numerics.fp_tolerance(), 1e-10);
    EXPECT_EQ(c.numerics.max_iter, 200u);
    EXPECT_FALSE(c.numerics.bracket.has_value());
    EXPECT_EQ(c.beta_guess(), 1.0);
    EXPECT_EQ(c.output.solution.filename(), "run.solution");
    EXPECT_EQ(c.output.solution.parent_path(), c.base_dir);
    EXPECT_NEAR(c.params.Dstar, 10 / (4 * std::numbers::pi), 1e-15);
}

TEST(Config, EnvelopeBetaIsDefaultGuess) {
    const auto c = parse_text(std::string(minimal) + envelope_block("2"));
    ASSERT_TRUE(c.envelope.has_value());
    EXPECT_EQ(c.beta_guess(), 3.0);
}

TEST(Config, MuNuInvariant) {
    const auto msg = config_error(std::string(minimal) + envelope_block("1"));
    EXPECT_NE(msg.find("invariant violated: mu > max(1, nu)"), std::string::npos) << msg;
}

TEST(Config, UnknownKeyNamesLine) {
    int line = 0;
    const auto msg = config_error(std::string(minimal) + "foo = 1\n", &line);
    EXPECT_NE(msg.find("unknown key 'foo' in [problem]"), std::string::npos) << msg;
    EXPECT_EQ(line, 13);
}

TEST(Config, MissingKey) {
    std::string text = minimal;
    text.erase(text.find("Q0 = 10\n"), 8);
    const auto msg = config_error(text);
    EXPECT_NE(msg.find("Q0"), std::string::npos) << msg;
}

TEST(Config, MalformedNumber) {
    std::string text = minimal;
    text.replace(text.find("Q0 = 10"), 7, "Q0 = 10x");
    int line = 0;
    const auto msg = config_error(text, &line);
    EXPECT_FALSE(msg.empty());
    EXPECT_EQ(line, 9);
}

TEST(Config, DuplicateKeyAndStraySection) {
    EXPECT_FALSE(config_error(std::string(minimal) + "Q0 = 11\n").empty());
    EXPECT_FALSE(config_error("Q0 = 1\n" + std::string(minimal)).empty());
    EXPECT_FALSE(config_error(std::string(minimal) + "[problem\n").empty());
}

TEST(Config, ValuesParse) {
    const auto c = parse_text(std::string(minimal) + "[numerics]\nbracket = 0.3 2.0\nnodes = 129\n");
    ASSERT_TRUE(c.numerics.bracket.has_value());
    EXPECT_EQ(c.numerics.bracket->first, 0.3);
    EXPECT_EQ(c.numerics.bracket->second, 2.0);
    EXPECT_EQ(c.numerics.grid.nodes, 129u);
}

TEST(Pipeline, NoEnvelopeNoBracketIsABracketError) {
    const auto c = parse_text(minimal);
    try {
        solve_full(c);
        FAIL();
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "bracket");
    }
    const auto dir = fixtures::scratch_dir("nobracket");
    fixtures::write_file(dir / "x.cfg", minimal);
    Quiet q;
    EXPECT_EQ(cmd_solve(dir / "x.cfg", std::nullopt, q.io()), exit_error);
}

TEST(Solve, ClassicalMatchesOracle) {
    const auto loaded = read_solution(cc1_solution());
    const auto o = classical_oracle(10, 1, 1.0);
    EXPECT_NEAR(loaded.solution.alpha0_star, o.alpha0_star, 1e-6 * o.alpha0_star);
    EXPECT_EQ(loaded.bracket_source, "user");
    const auto text = fixtures::read_file(cc1_solution());
    EXPECT_NE(text.find("\n[residuals]\n"), std::string::npos);
    // constant coefficients cannot meet the envelope invariants, so no certificate, manual bracket
    EXPECT_NE(text.find("certificate absent, user bracket used"), std::string::npos);
}

TEST(Solve, RoundTripIsBitExact) {
    const auto dir = cc1_solution().parent_path();
    const auto cfg = parse_config(dir / "cc1.cfg");
    const auto full = solve_full(cfg);
    const auto loaded = read_solution(cc1_solution());
    EXPECT_EQ(loaded.solution.alpha0_star, full.solution.alpha0_star);
    EXPECT_EQ(loaded.solution.pair.f1.nodes(), full.solution.pair.f1.nodes());
    EXPECT_EQ(loaded.solution.pair.f1.values(), full.solution.pair.f1.values());
    EXPECT_EQ(loaded.solution.pair.f2.nodes(), full.solution.pair.f2.nodes());
    EXPECT_EQ(loaded.solution.pair.f2.values(), full.solution.pair.f2.values());
    for (double eta : {1e-3, 0.1, 0.5, 1.0})
        EXPECT_EQ(loaded.solution.pair.f1(eta), full.solution.pair.f1(eta));
    EXPECT_EQ(fs::weakly_canonical(loaded.config_path), fs::weakly_canonical(dir / "cc1.cfg"));
}

TEST(Solve, Deterministic) {
    const auto dir = cc1_solution().parent_path();
    Quiet q;
    ASSERT_EQ(cmd_solve(dir / "cc1.cfg", dir / "again.solution", q.io()), exit_ok);
    EXPECT_EQ(fixtures::read_file(dir / "again.solution"), fixtures::read_file(cc1_solution()));
}

TEST(Verify, GoodAndCorrupted) {
    const auto dir = cc1_solution().parent_path();
    Quiet q;
    EXPECT_EQ(cmd_verify(cc1_solution(), dir / "ok.residuals", q.io()), exit_ok);
    EXPECT_NE(fixtures::read_file(dir / "ok.residuals").find("all_pass = true"), std::string::npos);

    std::string text = fixtures::read_file(cc1_solution());
    const auto at = text.find("[liquid:csv]");
    ASSERT_NE(at, std::string::npos);
    std::size_t pos = at;
    for (int i = 0; i < 150; ++i) pos = text.find('\n', pos) + 1;
    const auto c1 = text.find(',', pos), c2 = text.find(',', c1 + 1);
    const double v = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
    text.replace(c1 + 1, c2 - c1 - 1, format_double(v * 1.01 + 1e-3));
    fixtures::write_file(dir / "bad.solution", text);
    EXPECT_EQ(cmd_verify(dir / "bad.solution", dir / "bad.residuals", q.io()), exit_check_failed);
    EXPECT_NE(fixtures::read_file(dir / "bad.residuals").find("all_pass = false"), std::string::npos);
}

TEST(Verify, MissingFileIsInputError) {
    Quiet q;
    EXPECT_EQ(cmd_verify("/nonexistent/x.solution", std::nullopt, q.io()), exit_error);
}

TEST(Profile, AutoPoints) {
    const auto dir = cc1_solution().parent_path();
    ProfileOptions opt;
    opt.autogen = true;
    opt.profile_out = dir / "p.csv";
    opt.front_out = dir / "f.csv";
    Quiet q;
    ASSERT_EQ(cmd_profile(cc1_solution(), opt, q.io()), exit_ok);
    EXPECT_EQ(read_csv(dir / "p.csv").size(), 251u);
    EXPECT_EQ(read_csv(dir / "f.csv").size(), 6u);
}

TEST(Profile, NeedsPoints) {
    Quiet q;
    EXPECT_EQ(cmd_profile(cc1_solution(), ProfileOptions{}, q.io()), exit_error);
}

TEST(Certify, ExitCodes) {
    const auto dir = fixtures::scratch_dir("certify");
    Quiet q;
    EXPECT_EQ(cmd_certify(copy_sample(dir, "cc1.cfg"), std::nullopt, q.io()), exit_error);
    EXPECT_EQ(cmd_certify(copy_sample(dir, "q0_sweep.cfg"), std::nullopt, q.io()), exit_check_failed);
    const auto report = fixtures::read_file(dir / "q0_sweep.certificate");
    EXPECT_NE(report.find("q0_ok = true"), std::string::npos);
    EXPECT_NE(report.find("uniqueness_ok = false"), std::string::npos);
}

TEST(Sweep, SourceBoundFlipsOnce) {
    const auto dir = fixtures::scratch_dir("sweep");
    const auto cfg = copy_sample(dir, "q0_sweep.cfg");
    Quiet q;
    ASSERT_EQ(cmd_sweep(cfg, "Q0", {"60", "100", "127", "128", "200"}, dir / "s.csv", q.io()), exit_ok) << q.err.str();
    const auto rows = read_csv(dir / "s.csv");
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_EQ(rows[0][0], "param_value");
    EXPECT_EQ(rows[0][8], "q0_ok");
    int flips = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].back(), "ok");
        if (i > 1 && rows[i][8] != rows[i - 1][8]) ++flips;
    }
    EXPECT_EQ(flips, 1);
    EXPECT_EQ(rows[3][8], "true");
    EXPECT_EQ(rows[4][8], "false");
    // larger source, faster front
    for (std::size_t i = 2; i < rows.size(); ++i) EXPECT_GT(std::stod(rows[i][1]), std::stod(rows[i - 1][1]));
}

TEST(Sweep, UnknownParameter) {
    const auto dir = fixtures::scratch_dir("sweep_bad");
    Quiet q;
    EXPECT_EQ(cmd_sweep(copy_sample(dir, "q0_sweep.cfg"), "nope", {"1"}, std::nullopt, q.io()), exit_error);
}
