#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "rte/paired_data.hpp"
#include "rte/step_curve.hpp"

namespace rte {

/// Index 0..2 into per-cause arrays for causes first, second, both.
constexpr std::size_t cause_index(Cause c) { return static_cast<std::size_t>(c) - 1; }

/// Counting and at-risk processes on the grid of distinct event times.
struct CountingProcesses {
    std::size_t n = 0;
    std::vector<double> event_times;
    /// dN_j at each event time, j = first, second, both.
    std::array<std::vector<std::size_t>, 3> events;
    /// Y(u) = #{i : z_i >= u}.
    std::vector<std::size_t> at_risk;
    /// Records with z >= the horizon used to build the dataset (0 if unknown).
    std::size_t at_risk_at_tau = 0;

    std::size_t size() const noexcept { return event_times.size(); }
    std::size_t all_causes(std::size_t k) const { return events[0][k] + events[1][k] + events[2][k]; }
};

CountingProcesses counting_processes(const Dataset& data);

/// Records must be sorted by z. `multiplicity`, if non-empty, gives the
/// number of copies of each record (bootstrap weights).
CountingProcesses counting_processes_sorted(std::span<const CompetingRisksRecord> sorted, double tau,
                                            std::span<const std::uint32_t> multiplicity = {});

StepCurve nelson_aalen(const CountingProcesses& cp, Cause cause);
StepCurve kaplan_meier_event(const CountingProcesses& cp);
/// Product-limit estimator of the censoring survival function. Censorings
/// tied with events are ranked after the events.
StepCurve kaplan_meier_censoring(const Dataset& data);
StepCurve aalen_johansen(const CountingProcesses& cp, Cause cause);

/// F_2(tau) + F_3(tau) / 2 straight from the counting processes.
double theta_from_counts(const CountingProcesses& cp, double tau);

struct RteCurves {
    std::array<StepCurve, 3> cumulative_hazard;
    std::array<StepCurve, 3> cumulative_incidence;
    StepCurve event_survival;
    StepCurve censoring_survival;
};

struct RteEstimate {
    double theta_hat = 0.5;
    /// Plug-in estimate of the asymptotic variance of sqrt(n)(theta_hat - theta).
    double sigma2_hat = 0.0;
    /// True when sigma2_hat carries no information (too few events).
    bool variance_degenerate = false;
    /// Nobody is at risk at tau; curves are flat after the last observed time.
    bool risk_set_exhausted = false;
    std::size_t n = 0;
    double tau = 0.0;
    RteCurves curves;
};

RteEstimate estimate_rte(const Dataset& data);

/// (1/n^2) sum_{i,k} [1{x1_i > x2_k} + 1{x1_i = x2_k}/2] on fully observed
/// pairs. Throws NotFullyObserved if any margin is censored.
double mann_whitney_fully_observed(std::span<const PairedObservation> data);

struct IpcwIdentity {
    double lhs = 0.0;       ///< 1 - 2 theta_hat
    double rhs = 0.0;       ///< F_1(tau) - F_2(tau)
    double rhs_ipcw = 0.0;  ///< sum (dN_1 - dN_2)(u) / (n G(u-))
};

IpcwIdentity ipcw_identity_check(const Dataset& data);

}  // namespace rte
