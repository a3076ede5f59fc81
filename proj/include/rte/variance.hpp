#pragma once

#include <array>
#include <cstddef>
#include <span>

#include "rte/estimators.hpp"
#include "rte/step_curve.hpp"

namespace rte {

/// Greenwood-type variance and covariance curves of the normalized
/// cause-specific Nelson-Aalen estimators, with S(u-)G(u-) replaced by Y(u)/n.
struct VarianceCurves {
    std::array<StepCurve, 3> sigma2;
    StepCurve sigma_12;
    StepCurve sigma_13;
    StepCurve sigma_23;
    StepCurve sigma2_dot;
    StepCurve all_cause_hazard;

    const StepCurve& covariance(Cause a, Cause b) const;
};

VarianceCurves greenwood_curves(const CountingProcesses& cp);

/// Results at or below this are treated as carrying no variance information.
constexpr double degenerate_variance_threshold(std::size_t n) { return 1e-12 * static_cast<double>(n); }

struct SigmaThetaResult {
    double raw = 0.0;    ///< value of the nested sums before clamping
    double value = 0.0;  ///< max(raw, 0)
    bool degenerate = true;
    /// Grid atoms where every subject at risk failed (1 - dA(w) = 0); they
    /// are left out of the inner sums.
    std::size_t skipped_atoms = 0;
};

/// Plug-in estimate of the asymptotic variance of sqrt(n)(theta_hat - theta).
/// Never throws; check `degenerate`.
SigmaThetaResult sigma_theta_terms(const CountingProcesses& cp, double tau);

/// Same estimate assembled from previously computed curves (grid = the jump
/// times of the all-cause hazard). `n` is the sample size the Greenwood
/// curves were normalised with.
SigmaThetaResult sigma_theta_terms(const RteCurves& curves, const VarianceCurves& variance, std::size_t n,
                                   double tau);

/// Throws DegenerateVariance when the estimate is not strictly positive
/// beyond round-off.
double sigma_theta_plugin(const CountingProcesses& cp, double tau);
double sigma_theta_plugin(const RteCurves& curves, const VarianceCurves& variance, std::size_t n, double tau);

namespace detail {

/// Per-atom inputs of the variance functional on the event grid (u <= tau).
struct VarianceGrid {
    std::span<const double> survival_left;  ///< S(u-)
    std::array<std::span<const double>, 3> hazard_jump;  ///< dA_j(u)
    std::array<std::span<const double>, 3> sigma2_jump;  ///< d sigma2_j(u)
    std::span<const double> sigma12_jump;
    std::span<const double> sigma13_jump;
    std::span<const double> sigma23_jump;
};

SigmaThetaResult evaluate_sigma_theta(const VarianceGrid& grid, std::size_t n);

}  // namespace detail

}  // namespace rte
