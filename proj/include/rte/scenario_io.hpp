#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rte/simulation.hpp"

namespace rte {

/// Looks up "@name" references in scenario files.
using ConstantResolver = std::function<std::optional<double>(std::string_view)>;

struct CensoringLevel {
    std::string name;
    double upper = 0.0;
};

/// A scenario file: one copula/marginal design crossed with censoring levels,
/// sample sizes and (for power studies) departure values.
struct Study {
    std::string name;
    std::vector<CensoringLevel> censoring;
    std::vector<std::size_t> sample_sizes;
    std::string departure_name;
    std::vector<double> departures;
    ExperimentConfig config;
    std::function<Scenario(const CensoringLevel&, std::size_t n, double departure)> scenario_at;
};

/// Throws ValidationError naming the offending field path.
Study parse_study(const std::string& json_text, const ConstantResolver& constants = {});
Study load_study(const std::filesystem::path& path, const ConstantResolver& constants = {});

/// "asy-lin", "rand-loglog", ...; "all" expands to the six combinations.
std::vector<TestSpec> parse_tests(std::string_view text);

}  // namespace rte
