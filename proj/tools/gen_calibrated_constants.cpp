// Runs the null calibrations and writes their results as a C++ header.
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

#include "rte/builtin.hpp"
#include "rte/errors.hpp"

int main(int argc, char** argv) {
    if (argc != 4) {
        std::cerr << "usage: gen_calibrated_constants OUTPUT SEED N\n";
        return 1;
    }
    const std::string output = argv[1];
    const std::uint64_t seed = std::stoull(argv[2]);
    const std::size_t n = std::stoull(argv[3]);

    std::ostringstream body;
    body << std::setprecision(17);
    try {
        for (const auto& spec : rte::builtin::null_calibrations(seed, n)) {
            const rte::CalibrationResult r = rte::calibrate_null(spec);
            for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
            std::cerr << spec.name << " = " << r.parameter << " (theta " << r.theta << ")\n";
            body << "    {\"" << spec.name << "\", " << r.parameter << ", " << r.theta << "},\n";
        }
    } catch (const rte::Error& e) {
        std::cerr << "calibration failed: " << e.what() << "\n";
        return 4;
    }

    std::ofstream out(output);
    out << "// Generated at build time by gen_calibrated_constants. Do not edit.\n"
        << "#pragma once\n\n"
        << "#include <cstddef>\n#include <cstdint>\n\n"
        << "namespace rte::pinned::generated {\n\n"
        << "struct Row {\n    const char* name;\n    double value;\n    double theta;\n};\n\n"
        << "inline constexpr std::uint64_t seed = " << seed << "u;\n"
        << "inline constexpr std::size_t sample_size = " << n << "u;\n\n"
        << "inline constexpr Row rows[] = {\n"
        << body.str() << "};\n\n"
        << "}  // namespace rte::pinned::generated\n";
    return out ? 0 : 1;
}
