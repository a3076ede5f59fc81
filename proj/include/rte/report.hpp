#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "rte/estimators.hpp"
#include "rte/inference.hpp"
#include "rte/simulation.hpp"

namespace rte {

/// Everything reported for one analyzed (sub)sample.
struct GroupAnalysis {
    std::string group;  ///< empty for the whole sample
    std::size_t n = 0;
    double tau = 0.0;
    double theta_hat = 0.0;
    double sigma_hat = 0.0;
    bool variance_degenerate = false;
    bool risk_set_exhausted = false;
    std::array<std::size_t, 4> cause_counts{};
    std::size_t pairs_with_censoring = 0;
    std::vector<InferenceReport> reports;
    /// Requested analyses that could not be carried out, with reasons.
    std::vector<std::string> refused;
};

std::array<std::size_t, 4> cause_counts(const Dataset& data);

/// Fixed-width table: one row per method/transform, one CI/p-value column
/// pair per group.
std::string format_analysis_table(const std::vector<GroupAnalysis>& groups);
std::string format_analysis_json(const std::vector<GroupAnalysis>& groups);

/// Formats p-values like "0.017" or "<0.001".
std::string format_p_value(double p);

struct StudyCell {
    std::string level;
    double censoring_upper = 0.0;
    std::size_t n = 0;
    double departure = 0.0;
    ExperimentResult result;
};

/// One row per cell and test; suitable as plot data.
std::string format_study_long_csv(const std::string& study, const std::vector<StudyCell>& cells,
                                  const std::string& departure_name = "");

/// Rows by n, columns by censoring level and test (rates and MC s.e. in %).
std::string format_size_table_csv(const std::vector<StudyCell>& cells);

/// Rows by departure value, columns by n and test.
std::string format_power_table_csv(const std::vector<StudyCell>& cells, const std::string& departure_name);

/// Console rendering of the size table.
std::string format_size_table(const std::string& study, const std::vector<StudyCell>& cells);

}  // namespace rte
