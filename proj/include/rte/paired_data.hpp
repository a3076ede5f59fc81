#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rte {

/// One matched pair of right-censored outcomes. Margin 1 is treatment 1.
struct PairedObservation {
    double x1 = 0.0;
    bool delta1 = false;
    double x2 = 0.0;
    bool delta2 = false;
    std::optional<std::string> group;

    friend bool operator==(const PairedObservation&, const PairedObservation&) = default;
};

/// Competing-risks cause. `first`: treatment-1 member observed to fail
/// first; `second`: treatment-2 member; `both`: simultaneous observed
/// failures.
enum class Cause : std::uint8_t { censored = 0, first = 1, second = 2, both = 3 };

struct CompetingRisksRecord {
    double z = 0.0;
    Cause epsilon = Cause::censored;

    friend bool operator==(const CompetingRisksRecord&, const CompetingRisksRecord&) = default;
};

/// Competing-risks sample at horizon tau. Every z is at most tau.
class Dataset {
public:
    Dataset(std::vector<CompetingRisksRecord> records, double tau);

    const std::vector<CompetingRisksRecord>& records() const noexcept { return records_; }
    std::size_t n() const noexcept { return records_.size(); }
    double tau() const noexcept { return tau_; }

private:
    std::vector<CompetingRisksRecord> records_;
    double tau_;
};

/// Throws NonFiniteTime / ValidationError for non-finite or negative times.
void validate(const PairedObservation& obs);

/// Margins at or beyond tau become events at tau.
PairedObservation truncate_at_tau(const PairedObservation& obs, double tau);

/// Total on tau-truncated input. Equal times with a single observed failure
/// are classified as censored.
CompetingRisksRecord to_competing_risks(const PairedObservation& obs);

/// Smallest |e - c| > 0 over event times e and censoring times c, with
/// `horizon` (if given) counted as an event time. +inf when undefined.
double min_event_censoring_gap(std::span<const PairedObservation> data,
                               std::optional<double> horizon = std::nullopt);

/// Adds an independent uniform(0, jitter) increment to every censored time.
/// Throws JitterTooLarge unless jitter is strictly below the smallest
/// event/censoring gap.
std::vector<PairedObservation> break_censoring_ties(std::span<const PairedObservation> data,
                                                    double jitter, std::uint64_t seed,
                                                    std::optional<double> horizon = std::nullopt);

struct TieBreaking {
    bool enabled = true;
    /// Jitter relative to the largest observed time; shrunk to half the
    /// smallest event/censoring gap if that is smaller.
    double relative_jitter = 1e-9;
    std::uint64_t seed = 0;
};

/// Truncation, censoring-tie jitter and transformation in one step.
Dataset make_dataset(std::span<const PairedObservation> data, double tau,
                     const TieBreaking& ties = {});

/// Same, but the observations are used as given (no jitter).
Dataset make_dataset_exact(std::span<const PairedObservation> data, double tau);

/// Reads `x1,delta1,x2,delta2[,group]` CSV. Row order is preserved.
std::vector<PairedObservation> read_paired_csv(const std::filesystem::path& path);
std::vector<PairedObservation> parse_paired_csv(const std::string& text);

/// Reads `z,epsilon` CSV as written by write_competing_risks_csv.
std::vector<CompetingRisksRecord> read_competing_risks_csv(const std::filesystem::path& path);
std::vector<CompetingRisksRecord> parse_competing_risks_csv(const std::string& text);

std::string format_competing_risks_csv(std::span<const CompetingRisksRecord> records);

/// Distinct group labels in first-appearance order.
std::vector<std::string> group_labels(std::span<const PairedObservation> data);

std::vector<PairedObservation> select_group(std::span<const PairedObservation> data,
                                            const std::string& label);

}  // namespace rte
