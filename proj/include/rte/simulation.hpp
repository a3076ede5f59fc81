#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rte/inference.hpp"
#include "rte/paired_data.hpp"
#include "rte/random.hpp"

namespace rte {

enum class CopulaFamily { gumbel_hougaard, clayton };

struct Copula {
    CopulaFamily family = CopulaFamily::gumbel_hougaard;
    double parameter = 1.0;
};

std::string_view to_string(CopulaFamily f);

/// GH needs parameter >= 1; Clayton needs parameter >= -1 and != 0.
void validate(const Copula& c);

/// Closed-form Kendall's tau of the copula.
double kendall_tau(const Copula& c);

/// Positive stable variate with Laplace transform exp(-s^alpha), 0 < alpha <= 1
/// (Chambers-Mallows-Stuck / Kanter representation).
double positive_stable(double alpha, Engine& rng);

using UniformPair = std::array<double, 2>;

UniformPair draw(const Copula& c, Engine& rng);

std::vector<UniformPair> sample_copula(const Copula& c, std::size_t n, Engine& rng);
std::vector<UniformPair> sample_gumbel_hougaard(double parameter, std::size_t n, std::uint64_t seed);
std::vector<UniformPair> sample_clayton(double parameter, std::size_t n, std::uint64_t seed);

/// Lifetime distribution of one margin.
class Marginal {
public:
    enum class Family { exponential, gompertz, uniform, mixture };

    static Marginal exponential(double rate);
    /// F(t) = 1 - exp(-(rate/shape)(exp(shape t) - 1)).
    static Marginal gompertz(double shape, double rate);
    /// Uniform on (0, upper).
    static Marginal uniform(double upper);
    /// Draws from `second` with probability `weight`, else from `first`.
    static Marginal mixture(double weight, Marginal first, Marginal second);

    Family family() const noexcept { return family_; }
    double cdf(double t) const;

    /// Q(1 - s): the time whose survival probability is s, s in (0, 1].
    /// Mixtures first pick a component with an independent draw from `rng`.
    double time_at_survival(double s, Engine& rng) const;

    std::string describe() const;

private:
    Marginal() = default;

    Family family_ = Family::exponential;
    double a_ = 1.0;
    double b_ = 1.0;
    std::shared_ptr<const Marginal> first_;
    std::shared_ptr<const Marginal> second_;
};

struct Scenario {
    std::string label;
    Copula copula;
    Marginal marginal1 = Marginal::exponential(1.0);
    Marginal marginal2 = Marginal::exponential(1.0);
    /// Censoring times are independent uniform(0, censoring_upper) per margin;
    /// infinity disables censoring.
    double censoring_upper = std::numeric_limits<double>::infinity();
    double tau = 1.0;
    std::size_t n = 100;
};

void validate(const Scenario& s);

/// T_j = Q_j(1 - U_j), then independent censoring. Truncation at tau is left
/// to the analysis.
std::vector<PairedObservation> apply_marginals_and_censoring(std::span<const UniformPair> uniforms,
                                                             const Scenario& s, Engine& rng);

std::vector<PairedObservation> simulate_pairs(const Scenario& s, Engine& rng);

/// Fraction of margins that are censored once truncation at tau is counted
/// as censoring.
double margin_censoring_rate(std::span<const PairedObservation> data, double tau);

/// Fraction of competing-risks records with cause 0.
double competing_risks_censoring_rate(const Dataset& data);

struct TestSpec {
    Method method = Method::randomization;
    Transform transform = Transform::linear;

    friend bool operator==(const TestSpec&, const TestSpec&) = default;
};

std::string to_string(const TestSpec& t);

struct ExperimentConfig {
    std::vector<TestSpec> tests{{Method::randomization, Transform::linear}};
    std::size_t R = 1000;
    std::size_t B = 500;
    double alpha = 0.05;
    Sided sided = Sided::right;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    /// Share of R with failed analyses that a test may have before the run
    /// is abandoned.
    double max_error_fraction = 0.01;
};

struct TestOutcome {
    TestSpec test;
    std::size_t rejections = 0;
    std::size_t valid = 0;
    std::size_t errors = 0;

    double rate() const { return valid == 0 ? 0.0 : static_cast<double>(rejections) / static_cast<double>(valid); }
    double mc_se() const;
};

struct ExperimentResult {
    Scenario scenario;
    std::size_t R = 0;
    std::size_t B = 0;
    double alpha = 0.05;
    Sided sided = Sided::right;
    std::vector<TestOutcome> outcomes;
    double censoring_rate = 0.0;
    double competing_censoring_rate = 0.0;
    /// Per replicate, indexed by replicate number.
    std::vector<double> theta_hat;
    std::vector<double> sigma2_hat;
};

ExperimentResult run_size_experiment(const Scenario& s, const ExperimentConfig& cfg);

struct PowerPoint {
    double departure = 0.0;
    ExperimentResult result;
};

/// One size/power experiment per departure value; every point reuses the
/// configured seed.
std::vector<PowerPoint> run_power_experiment(const std::function<Scenario(double)>& scenario_at,
                                             std::span<const double> departures, const ExperimentConfig& cfg);

/// theta = P(T1^tau > T2^tau) + P(T1^tau = T2^tau)/2 from N uncensored pairs.
double monte_carlo_theta(const Scenario& s, std::size_t N, std::uint64_t seed, unsigned threads = 0);

struct CalibrationSpec {
    std::string name;
    std::function<Scenario(double)> scenario_at;
    double lower = 0.0;
    double upper = 1.0;
    double target = 0.5;
    double tol = 0.002;
    std::size_t N = 1'000'000;
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

struct CalibrationResult {
    double parameter = 0.0;
    double theta = 0.0;
    std::size_t iterations = 0;
    std::vector<std::string> warnings;
};

/// Bisection on the free parameter with common random numbers across
/// candidates. Throws BracketError when theta - target has no sign change.
CalibrationResult calibrate_null(const CalibrationSpec& spec);

}  // namespace rte
