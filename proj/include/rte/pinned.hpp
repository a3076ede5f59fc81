#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rte/scenario_io.hpp"

namespace rte::pinned {

/// Calibrated null parameters fixed at build time.
struct Constant {
    std::string name;
    double value = 0.0;
    /// theta at `value` in the calibration run
    double theta = 0.0;
};

const std::vector<Constant>& constants();
std::optional<double> lookup(std::string_view name);
std::uint64_t calibration_seed();
std::size_t calibration_sample_size();

/// Resolves "@name" in scenario files against the table above.
ConstantResolver resolver();

}  // namespace rte::pinned
