#include "rte/pinned.hpp"

#include "rte/calibrated_constants.hpp"

namespace rte::pinned {

const std::vector<Constant>& constants() {
    static const std::vector<Constant> table = [] {
        std::vector<Constant> t;
        for (const auto& row : generated::rows) t.push_back({row.name, row.value, row.theta});
        return t;
    }();
    return table;
}

std::optional<double> lookup(std::string_view name) {
    for (const auto& c : constants())
        if (c.name == name) return c.value;
    return std::nullopt;
}

std::uint64_t calibration_seed() { return generated::seed; }
std::size_t calibration_sample_size() { return generated::sample_size; }

ConstantResolver resolver() {
    return [](std::string_view name) { return lookup(name); };
}

}  // namespace rte::pinned
