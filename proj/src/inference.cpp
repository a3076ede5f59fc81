#include "rte/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "rte/errors.hpp"
#include "rte/parallel.hpp"
#include "rte/variance.hpp"

namespace rte {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxSkippedFraction = 0.10;
constexpr std::size_t kMinReplicates = 20;

const boost::math::normal_distribution<double> kStandardNormal;

double normal_quantile(double p) { return boost::math::quantile(kStandardNormal, p); }
double normal_cdf(double x) { return boost::math::cdf(kStandardNormal, x); }
double normal_sf(double x) { return boost::math::cdf(boost::math::complement(kStandardNormal, x)); }

struct Replicate {
    double theta = 0.0;
    double sigma2 = 0.0;
    bool degenerate = true;
};

Replicate evaluate(const CountingProcesses& cp, double tau) {
    const SigmaThetaResult v = sigma_theta_terms(cp, tau);
    return {theta_from_counts(cp, tau), v.value, v.degenerate};
}

std::vector<std::size_t> sort_order(const Dataset& data) {
    const auto& recs = data.records();
    std::vector<std::size_t> order(recs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return recs[a].z < recs[b].z; });
    return order;
}

void flip_labels(std::vector<CompetingRisksRecord>& records, Engine& rng) {
    for (auto& r : records) {
        if (r.epsilon == Cause::first || r.epsilon == Cause::second)
            r.epsilon = fair_coin(rng) ? Cause::second : Cause::first;
    }
}

ResampleDistribution collect(ResampleKind kind, double center, std::size_t n, const std::vector<Replicate>& reps) {
    ResampleDistribution dist;
    dist.kind = kind;
    dist.center = center;
    dist.n = n;
    dist.requested = reps.size();
    const double root_n = std::sqrt(static_cast<double>(n));
    for (const auto& r : reps) {
        if (r.degenerate || !std::isfinite(r.theta) || !std::isfinite(r.sigma2)) {
            ++dist.skipped;
            continue;
        }
        const double sigma = std::sqrt(r.sigma2);
        dist.theta.push_back(r.theta);
        dist.sigma.push_back(sigma);
        dist.values.push_back(root_n * (r.theta - center) / sigma);
        dist.unstudentized.push_back(root_n * (r.theta - center));
    }
    if (static_cast<double>(dist.skipped) > kMaxSkippedFraction * static_cast<double>(dist.requested))
        throw DegenerateVariance(std::to_string(dist.skipped) + " of " + std::to_string(dist.requested) +
                                 " replicates have a degenerate variance estimate");
    return dist;
}

void check_resampling(const InferenceConfig& cfg) {
    validate(cfg);
    if (cfg.B < 1) throw InvalidParameter("B must be at least 1 for resampling methods");
}

// Acceptance region [lower, upper] for the studentized statistic given a
// quantile function.
template <class Quantile>
std::pair<double, double> critical_values(Sided sided, double alpha, Quantile&& q) {
    switch (sided) {
        case Sided::right: return {-kInf, q(1.0 - alpha)};
        case Sided::left: return {q(alpha), kInf};
        case Sided::two: break;
    }
    return {q(alpha / 2.0), q(1.0 - alpha / 2.0)};
}

// Inverts the acceptance region into an interval for theta.
void fill_interval(InferenceReport& rep, double scale) {
    if (rep.transform == Transform::linear) {
        rep.ci_lower = std::clamp(rep.theta_hat - scale * rep.critical_upper, 0.0, 1.0);
        rep.ci_upper = std::clamp(rep.theta_hat - scale * rep.critical_lower, 0.0, 1.0);
    } else {
        const double d = loglog::phi_derivative(rep.theta_hat) * scale;
        const double centre = loglog::phi(rep.theta_hat);
        rep.ci_lower = loglog::phi_inverse(centre - d * rep.critical_upper);
        rep.ci_upper = loglog::phi_inverse(centre - d * rep.critical_lower);
    }
    rep.reject = rep.statistic > rep.critical_upper || rep.statistic < rep.critical_lower;
}

void require_domain(const InferenceReport& rep) {
    if (rep.transform == Transform::loglog && !(rep.theta_hat > 0.0 && rep.theta_hat < 1.0))
        throw ThetaOutOfDomain("log-log transform needs 0 < theta_hat < 1");
}

double observed_statistic(double theta, double null_value, double scale, Transform t) {
    if (t == Transform::linear) return (theta - null_value) / scale;
    return (loglog::phi(theta) - loglog::phi(null_value)) / (loglog::phi_derivative(theta) * scale);
}

InferenceReport base_report(const RteEstimate& est, const InferenceConfig& cfg) {
    if (est.variance_degenerate || !(est.sigma2_hat > 0.0))
        throw DegenerateVariance("variance estimate is not positive; too few events to studentize");
    InferenceReport rep;
    rep.method = cfg.method;
    rep.transform = cfg.transform;
    rep.sided = cfg.sided;
    rep.alpha = cfg.alpha;
    rep.theta_hat = est.theta_hat;
    rep.sigma_hat = std::sqrt(est.sigma2_hat);
    rep.n = est.n;
    rep.tau = est.tau;
    rep.seed = cfg.seed;
    require_domain(rep);
    return rep;
}

}  // namespace

std::string_view to_string(Method m) {
    switch (m) {
        case Method::asymptotic: return "asymptotic";
        case Method::bootstrap: return "bootstrap";
        case Method::randomization: return "randomization";
    }
    return "?";
}

std::string_view to_string(Sided s) {
    switch (s) {
        case Sided::right: return "right";
        case Sided::left: return "left";
        case Sided::two: return "two";
    }
    return "?";
}

std::string_view to_string(Transform t) { return t == Transform::linear ? "linear" : "loglog"; }

void validate(const InferenceConfig& cfg) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw InvalidParameter("alpha must lie in (0, 1)");
    if (cfg.method != Method::asymptotic && cfg.B < 1) throw InvalidParameter("B must be at least 1");
}

namespace loglog {

double phi(double theta) { return std::log(-std::log(theta)); }
double phi_derivative(double theta) { return 1.0 / (theta * std::log(theta)); }
double phi_inverse(double y) { return std::exp(-std::exp(y)); }

}  // namespace loglog

double empirical_quantile(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) throw InsufficientReplicates("quantile of an empty distribution");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

InferenceReport asymptotic_test(const RteEstimate& est, const InferenceConfig& cfg) {
    validate(cfg);
    InferenceConfig normal_cfg = cfg;
    normal_cfg.method = Method::asymptotic;
    InferenceReport rep = base_report(est, normal_cfg);
    const double scale = rep.sigma_hat / std::sqrt(static_cast<double>(rep.n));
    rep.statistic = observed_statistic(rep.theta_hat, 0.5, scale, rep.transform);
    std::tie(rep.critical_lower, rep.critical_upper) = critical_values(rep.sided, rep.alpha, normal_quantile);
    switch (rep.sided) {
        case Sided::right: rep.p_value = normal_sf(rep.statistic); break;
        case Sided::left: rep.p_value = normal_cdf(rep.statistic); break;
        case Sided::two: rep.p_value = 2.0 * normal_sf(std::abs(rep.statistic)); break;
    }
    rep.p_value = std::min(rep.p_value, 1.0);
    fill_interval(rep, scale);
    return rep;
}

ResampleDistribution bootstrap_distribution(const Dataset& data, const InferenceConfig& cfg) {
    check_resampling(cfg);
    const std::size_t n = data.n();
    if (n < 2) throw InvalidParameter("the bootstrap needs at least two pairs");
    const auto order = sort_order(data);
    std::vector<CompetingRisksRecord> sorted;
    sorted.reserve(n);
    for (std::size_t i : order) sorted.push_back(data.records()[i]);
    // rank[i] = position of record i in sorted order
    std::vector<std::size_t> rank(n);
    for (std::size_t pos = 0; pos < n; ++pos) rank[order[pos]] = pos;

    const double tau = data.tau();
    const double theta_hat = theta_from_counts(counting_processes_sorted(sorted, tau), tau);
    std::vector<Replicate> reps(cfg.B);
    parallel_for(cfg.B, cfg.threads, [&](std::size_t b) {
        Engine rng = make_stream(cfg.seed, StreamTag::bootstrap, b);
        std::vector<std::uint32_t> counts(n, 0);
        for (std::size_t i = 0; i < n; ++i) ++counts[rank[uniform_index(rng, n)]];
        reps[b] = evaluate(counting_processes_sorted(sorted, tau, counts), tau);
    });
    return collect(ResampleKind::bootstrap, theta_hat, n, reps);
}

Dataset randomize_labels(const Dataset& data, Engine& rng) {
    std::vector<CompetingRisksRecord> records = data.records();
    flip_labels(records, rng);
    return Dataset(std::move(records), data.tau());
}

Dataset randomize_labels(const Dataset& data, std::uint64_t seed) {
    Engine rng = make_stream(seed, StreamTag::randomization, 0);
    return randomize_labels(data, rng);
}

ResampleDistribution randomization_distribution(const Dataset& data, const InferenceConfig& cfg) {
    check_resampling(cfg);
    const std::size_t n = data.n();
    const auto order = sort_order(data);
    const double tau = data.tau();
    std::vector<Replicate> reps(cfg.B);
    parallel_for(cfg.B, cfg.threads, [&](std::size_t b) {
        Engine rng = make_stream(cfg.seed, StreamTag::randomization, b);
        std::vector<CompetingRisksRecord> flipped = data.records();
        flip_labels(flipped, rng);
        std::vector<CompetingRisksRecord> sorted;
        sorted.reserve(n);
        for (std::size_t i : order) sorted.push_back(flipped[i]);
        reps[b] = evaluate(counting_processes_sorted(sorted, tau), tau);
    });
    return collect(ResampleKind::randomization, 0.5, n, reps);
}

InferenceReport test_and_ci(const RteEstimate& est, const ResampleDistribution& dist, const InferenceConfig& cfg) {
    validate(cfg);
    InferenceReport rep = base_report(est, cfg);
    rep.method = dist.kind == ResampleKind::bootstrap ? Method::bootstrap : Method::randomization;
    rep.B = dist.requested;
    rep.skipped = dist.skipped;

    const bool unstudentized = rep.method == Method::bootstrap && !cfg.studentized_bootstrap;
    const double root_n = std::sqrt(static_cast<double>(rep.n));
    const double scale = unstudentized ? 1.0 / root_n : rep.sigma_hat / root_n;
    rep.statistic = observed_statistic(rep.theta_hat, 0.5, scale, rep.transform);

    std::vector<double> values;
    if (rep.transform == Transform::linear) {
        values = unstudentized ? dist.unstudentized : dist.values;
    } else {
        values.reserve(dist.theta.size());
        for (std::size_t b = 0; b < dist.theta.size(); ++b) {
            const double t = dist.theta[b];
            if (!(t > 0.0 && t < 1.0)) {
                ++rep.skipped;
                continue;
            }
            const double sigma_b = unstudentized ? 1.0 : dist.sigma[b];
            values.push_back(observed_statistic(t, dist.center, sigma_b / root_n, Transform::loglog));
        }
    }
    rep.replicates_used = values.size();
    const double tail = rep.sided == Sided::two ? rep.alpha / 2.0 : rep.alpha;
    if (values.size() < kMinReplicates || static_cast<double>(values.size() + 1) * tail < 1.0)
        throw InsufficientReplicates(std::to_string(values.size()) + " usable replicates cannot resolve alpha = " +
                                     std::to_string(rep.alpha));

    std::sort(values.begin(), values.end());
    std::tie(rep.critical_lower, rep.critical_upper) =
        critical_values(rep.sided, rep.alpha, [&](double p) { return empirical_quantile(values, p); });

    const double denom = static_cast<double>(values.size() + 1);
    std::size_t extreme = 0;
    switch (rep.sided) {
        case Sided::right:
            extreme = static_cast<std::size_t>(values.end() -
                                               std::lower_bound(values.begin(), values.end(), rep.statistic));
            break;
        case Sided::left:
            extreme = static_cast<std::size_t>(std::upper_bound(values.begin(), values.end(), rep.statistic) -
                                               values.begin());
            break;
        case Sided::two: {
            const double a = std::abs(rep.statistic);
            extreme = static_cast<std::size_t>(
                std::count_if(values.begin(), values.end(), [a](double v) { return std::abs(v) >= a; }));
            break;
        }
    }
    rep.p_value = (1.0 + static_cast<double>(extreme)) / denom;
    fill_interval(rep, scale);
    return rep;
}

InferenceReport run_inference(const Dataset& data, const RteEstimate& est, const InferenceConfig& cfg) {
    switch (cfg.method) {
        case Method::asymptotic: return asymptotic_test(est, cfg);
        case Method::bootstrap: return test_and_ci(est, bootstrap_distribution(data, cfg), cfg);
        case Method::randomization: return test_and_ci(est, randomization_distribution(data, cfg), cfg);
    }
    throw InvalidParameter("unknown inference method");
}

}  // namespace rte
