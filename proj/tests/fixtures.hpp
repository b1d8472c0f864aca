#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include <unistd.h>

#include "cylstefan/certificates.hpp"
#include "cylstefan/freeboundary.hpp"
#include "cylstefan/physical.hpp"

namespace fixtures {

using namespace cylstefan;

// s^-2, s^-1 in the liquid, xi^4, xi in the solid, unit constants
inline PowerLaw power_case() { return PowerLaw::pure(2, 1, 4, 1); }

inline Problem<PowerLaw> power_problem() {
    Problem<PowerLaw> pb{power_case(), 1.0, 1.0, 0.1};
    pb.beta_guess = 4.0;
    return pb;
}

// Frozen certified fixture: weak tanh temperature dependence on top of pure powers.  Found by a
// parameter search with this library's certify() as the oracle.
struct Certified {
    static constexpr double a = 0.0184;
    static constexpr double Dstar = 2.05;
    static constexpr double Mstar = 4.0;

    static PowerLaw law() {
        PowerLaw l = PowerLaw::pure(2, 1, 3, 0);
        l.liquid_L.kappa = 1.15e-4;
        l.liquid_N.kappa = 1.93e-3;
        l.solid_L.kappa = 1.63e-4;
        l.solid_N.kappa = 2.08e-3;
        return l;
    }
    static EnvelopeParams envelope() { return law().envelope(0.0596, 8.38, 0.5); }
    static Problem<PowerLaw> problem() {
        Problem<PowerLaw> pb{law(), a, Dstar, Mstar};
        pb.beta_guess = 3.0;
        return pb;
    }
    static Certificate certificate() { return certify(envelope(), a, Dstar, Mstar); }
};

inline KernelContext<PowerLaw> power_ctx(const PowerLaw& law, double alpha0 = 1.0, double a = 1.0,
                                         double Dstar = 1.0) {
    return {law, alpha0, a, Dstar, 1e-12};
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("cylstefan_test_" + std::to_string(::getpid()) + "_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fixtures
