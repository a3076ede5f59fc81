#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rte/estimators.hpp"
#include "rte/paired_data.hpp"
#include "rte/random.hpp"

namespace rte {

enum class Method { asymptotic, bootstrap, randomization };
enum class Sided { right, left, two };
enum class Transform { linear, loglog };

std::string_view to_string(Method m);
std::string_view to_string(Sided s);
std::string_view to_string(Transform t);

struct InferenceConfig {
    Method method = Method::asymptotic;
    Sided sided = Sided::two;
    double alpha = 0.05;
    Transform transform = Transform::linear;
    std::size_t B = 2000;
    std::uint64_t seed = 1;
    /// 0 = RTE_THREADS / hardware default.
    unsigned threads = 0;
    /// Bootstrap only: compare sqrt(n)(theta* - theta_hat) without dividing
    /// by the replicate standard error (log-log: without sigma in either
    /// the statistic or the replicates).
    bool studentized_bootstrap = true;
};

void validate(const InferenceConfig& cfg);

enum class ResampleKind { bootstrap, randomization };

/// Accepted replicates of a resampling scheme. Replicates whose variance
/// estimate is degenerate are dropped and counted in `skipped`.
struct ResampleDistribution {
    ResampleKind kind = ResampleKind::bootstrap;
    /// theta_hat for the bootstrap, 0.5 for randomization.
    double center = 0.5;
    std::size_t n = 0;
    std::size_t requested = 0;
    std::size_t skipped = 0;
    std::vector<double> theta;
    std::vector<double> sigma;
    /// sqrt(n)(theta_b - center) / sigma_b
    std::vector<double> values;
    /// sqrt(n)(theta_b - center)
    std::vector<double> unstudentized;
};

struct InferenceReport {
    Method method = Method::asymptotic;
    Transform transform = Transform::linear;
    Sided sided = Sided::two;
    double alpha = 0.05;
    double theta_hat = 0.5;
    /// Square root of the plug-in variance of sqrt(n)(theta_hat - theta).
    double sigma_hat = 0.0;
    std::size_t n = 0;
    double tau = 0.0;
    double statistic = 0.0;
    /// Critical values bounding the acceptance region; -inf / +inf when the
    /// test is one-sided.
    double critical_lower = 0.0;
    double critical_upper = 0.0;
    double p_value = 1.0;
    double ci_lower = 0.0;
    double ci_upper = 1.0;
    bool reject = false;
    std::size_t B = 0;
    std::size_t replicates_used = 0;
    std::size_t skipped = 0;
    std::uint64_t seed = 0;
};

/// Wald-type test against the standard normal.
InferenceReport asymptotic_test(const RteEstimate& est, const InferenceConfig& cfg);

ResampleDistribution bootstrap_distribution(const Dataset& data, const InferenceConfig& cfg);

/// Re-labels each cause-1/cause-2 record as cause 1 or 2 with probability
/// 1/2; times and causes 0/3 are untouched.
Dataset randomize_labels(const Dataset& data, std::uint64_t seed);
Dataset randomize_labels(const Dataset& data, Engine& rng);

/// Replicate b uses the same relabeling as randomize_labels with the
/// engine make_stream(cfg.seed, StreamTag::randomization, b).
ResampleDistribution randomization_distribution(const Dataset& data, const InferenceConfig& cfg);

/// Test and confidence interval calibrated by a replicate distribution.
InferenceReport test_and_ci(const RteEstimate& est, const ResampleDistribution& dist, const InferenceConfig& cfg);

/// Dispatches on cfg.method (resampling from `data`).
InferenceReport run_inference(const Dataset& data, const RteEstimate& est, const InferenceConfig& cfg);

/// Type-7 quantile of sorted data.
double empirical_quantile(const std::vector<double>& sorted, double p);

namespace loglog {
double phi(double theta);
double phi_derivative(double theta);
double phi_inverse(double y);
}  // namespace loglog

}  // namespace rte
