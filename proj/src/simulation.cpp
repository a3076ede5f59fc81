#include "rte/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include "rte/errors.hpp"
#include "rte/estimators.hpp"
#include "rte/parallel.hpp"

namespace rte {

std::string_view to_string(CopulaFamily f) {
    return f == CopulaFamily::gumbel_hougaard ? "gumbel_hougaard" : "clayton";
}

void validate(const Copula& c) {
    if (!std::isfinite(c.parameter)) throw InvalidParameter("copula parameter must be finite");
    if (c.family == CopulaFamily::gumbel_hougaard && c.parameter < 1.0)
        throw InvalidParameter("Gumbel-Hougaard parameter must be >= 1");
    if (c.family == CopulaFamily::clayton && (c.parameter < -1.0 || c.parameter == 0.0))
        throw InvalidParameter("Clayton parameter must be >= -1 and nonzero");
}

double kendall_tau(const Copula& c) {
    validate(c);
    if (c.family == CopulaFamily::gumbel_hougaard) return 1.0 - 1.0 / c.parameter;
    return c.parameter / (c.parameter + 2.0);
}

double positive_stable(double alpha, Engine& rng) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidParameter("stable index must lie in (0, 1]");
    if (alpha == 1.0) return 1.0;
    const double angle = std::numbers::pi * uniform_open(rng);
    const double w = standard_exponential(rng);
    const double log_v = std::log(std::sin(alpha * angle)) - std::log(std::sin(angle)) / alpha +
                         (1.0 - alpha) / alpha * (std::log(std::sin((1.0 - alpha) * angle)) - std::log(w));
    return std::exp(log_v);
}

namespace {

UniformPair draw_gumbel_hougaard(double parameter, Engine& rng) {
    const double alpha = 1.0 / parameter;
    for (;;) {
        const double log_v = std::log(positive_stable(alpha, rng));
        const double e1 = standard_exponential(rng);
        const double e2 = standard_exponential(rng);
        const double u1 = std::exp(-std::exp(alpha * (std::log(e1) - log_v)));
        const double u2 = std::exp(-std::exp(alpha * (std::log(e2) - log_v)));
        if (u1 > 0.0 && u2 > 0.0) return {u1, u2};
    }
}

UniformPair draw_clayton(double parameter, Engine& rng) {
    for (;;) {
        const double u = uniform_open(rng);
        const double w = uniform_open(rng);
        double v;
        if (parameter == -1.0) {
            v = 1.0 - u;
        } else {
            const double base = (std::pow(w, -parameter / (1.0 + parameter)) - 1.0) * std::pow(u, -parameter) + 1.0;
            v = base > 0.0 ? std::pow(base, -1.0 / parameter) : 0.0;
        }
        // round-off at the edge of the support for negative parameters
        if (v > 0.0 && v < 1.0) return {u, v};
    }
}

}  // namespace

UniformPair draw(const Copula& c, Engine& rng) {
    if (c.family == CopulaFamily::gumbel_hougaard) return draw_gumbel_hougaard(c.parameter, rng);
    return draw_clayton(c.parameter, rng);
}

std::vector<UniformPair> sample_copula(const Copula& c, std::size_t n, Engine& rng) {
    validate(c);
    std::vector<UniformPair> out(n);
    for (auto& p : out) p = draw(c, rng);
    return out;
}

std::vector<UniformPair> sample_gumbel_hougaard(double parameter, std::size_t n, std::uint64_t seed) {
    Engine rng = make_stream(seed, StreamTag::copula_test);
    return sample_copula({CopulaFamily::gumbel_hougaard, parameter}, n, rng);
}

std::vector<UniformPair> sample_clayton(double parameter, std::size_t n, std::uint64_t seed) {
    Engine rng = make_stream(seed, StreamTag::copula_test);
    return sample_copula({CopulaFamily::clayton, parameter}, n, rng);
}

Marginal Marginal::exponential(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) throw InvalidParameter("exponential rate must be positive");
    Marginal m;
    m.family_ = Family::exponential;
    m.a_ = rate;
    return m;
}

Marginal Marginal::gompertz(double shape, double rate) {
    if (!(shape > 0.0) || !std::isfinite(shape)) throw InvalidParameter("Gompertz shape must be positive");
    if (!(rate > 0.0) || !std::isfinite(rate)) throw InvalidParameter("Gompertz rate must be positive");
    Marginal m;
    m.family_ = Family::gompertz;
    m.a_ = shape;
    m.b_ = rate;
    return m;
}

Marginal Marginal::uniform(double upper) {
    if (!(upper > 0.0) || !std::isfinite(upper)) throw InvalidParameter("uniform upper bound must be positive");
    Marginal m;
    m.family_ = Family::uniform;
    m.a_ = upper;
    return m;
}

Marginal Marginal::mixture(double weight, Marginal first, Marginal second) {
    if (!(weight >= 0.0 && weight <= 1.0)) throw InvalidParameter("mixture weight must lie in [0, 1]");
    Marginal m;
    m.family_ = Family::mixture;
    m.a_ = weight;
    m.first_ = std::make_shared<const Marginal>(std::move(first));
    m.second_ = std::make_shared<const Marginal>(std::move(second));
    return m;
}

double Marginal::cdf(double t) const {
    if (t <= 0.0) return 0.0;
    switch (family_) {
        case Family::exponential: return -std::expm1(-a_ * t);
        case Family::gompertz: return -std::expm1(-(b_ / a_) * std::expm1(a_ * t));
        case Family::uniform: return std::min(t / a_, 1.0);
        case Family::mixture: return (1.0 - a_) * first_->cdf(t) + a_ * second_->cdf(t);
    }
    return 0.0;
}

double Marginal::time_at_survival(double s, Engine& rng) const {
    switch (family_) {
        case Family::exponential: return -std::log(s) / a_;
        case Family::gompertz: return std::log1p(-(a_ / b_) * std::log(s)) / a_;
        case Family::uniform: return a_ * (1.0 - s);
        case Family::mixture: {
            const bool second = uniform_open(rng) < a_;
            return (second ? second_ : first_)->time_at_survival(s, rng);
        }
    }
    return 0.0;
}

std::string Marginal::describe() const {
    std::ostringstream os;
    os.precision(6);
    switch (family_) {
        case Family::exponential: os << "Exp(" << a_ << ")"; break;
        case Family::gompertz: os << "Gompertz(" << a_ << ", " << b_ << ")"; break;
        case Family::uniform: os << "U(0, " << a_ << ")"; break;
        case Family::mixture:
            os << "Mix(" << a_ << "; " << first_->describe() << ", " << second_->describe() << ")";
            break;
    }
    return os.str();
}

void validate(const Scenario& s) {
    validate(s.copula);
    if (!(s.tau > 0.0) || !std::isfinite(s.tau)) throw NonPositiveTau("tau must be positive and finite");
    if (s.n < 1) throw InvalidParameter("n must be at least 1");
    if (!(s.censoring_upper > 0.0)) throw InvalidParameter("censoring upper bound must be positive");
}

std::vector<PairedObservation> apply_marginals_and_censoring(std::span<const UniformPair> uniforms,
                                                             const Scenario& s, Engine& rng) {
    std::vector<PairedObservation> out;
    out.reserve(uniforms.size());
    const bool censored = std::isfinite(s.censoring_upper);
    for (const auto& u : uniforms) {
        const double t1 = s.marginal1.time_at_survival(u[0], rng);
        const double t2 = s.marginal2.time_at_survival(u[1], rng);
        const double c1 = censored ? s.censoring_upper * uniform_open(rng) : std::numeric_limits<double>::infinity();
        const double c2 = censored ? s.censoring_upper * uniform_open(rng) : std::numeric_limits<double>::infinity();
        out.push_back({std::min(t1, c1), t1 <= c1, std::min(t2, c2), t2 <= c2, std::nullopt});
    }
    return out;
}

std::vector<PairedObservation> simulate_pairs(const Scenario& s, Engine& rng) {
    validate(s);
    const auto uniforms = sample_copula(s.copula, s.n, rng);
    return apply_marginals_and_censoring(uniforms, s, rng);
}

double margin_censoring_rate(std::span<const PairedObservation> data, double tau) {
    if (data.empty()) return 0.0;
    std::size_t censored = 0;
    for (const auto& o : data) {
        censored += (o.x1 >= tau || !o.delta1) ? 1 : 0;
        censored += (o.x2 >= tau || !o.delta2) ? 1 : 0;
    }
    return static_cast<double>(censored) / (2.0 * static_cast<double>(data.size()));
}

double competing_risks_censoring_rate(const Dataset& data) {
    const auto& recs = data.records();
    const auto c = std::count_if(recs.begin(), recs.end(), [](const auto& r) { return r.epsilon == Cause::censored; });
    return static_cast<double>(c) / static_cast<double>(recs.size());
}

std::string to_string(const TestSpec& t) {
    std::string m = t.method == Method::asymptotic ? "asy" : t.method == Method::bootstrap ? "boot" : "rand";
    return m + "-" + (t.transform == Transform::linear ? "lin" : "loglog");
}

double TestOutcome::mc_se() const {
    if (valid == 0) return 0.0;
    const double p = rate();
    return std::sqrt(p * (1.0 - p) / static_cast<double>(valid));
}

ExperimentResult run_size_experiment(const Scenario& s, const ExperimentConfig& cfg) {
    validate(s);
    if (cfg.R < 1) throw InvalidParameter("R must be at least 1");
    if (cfg.tests.empty()) throw InvalidParameter("no tests requested");
    const std::size_t n_tests = cfg.tests.size();
    // 1 = reject, 0 = accept, -1 = analysis failed
    std::vector<std::int8_t> decision(cfg.R * n_tests, 0);
    std::vector<double> cens(cfg.R), cr_cens(cfg.R), theta(cfg.R), sigma2(cfg.R);

    parallel_for(cfg.R, cfg.threads, [&](std::size_t r) {
        Engine rng = make_stream(cfg.seed, StreamTag::simulation, r);
        const auto pairs = simulate_pairs(s, rng);
        const std::uint64_t inner_seed = rng();
        const Dataset data = make_dataset(pairs, s.tau, TieBreaking{.enabled = false});
        cens[r] = margin_censoring_rate(pairs, s.tau);
        cr_cens[r] = competing_risks_censoring_rate(data);
        const RteEstimate est = estimate_rte(data);
        theta[r] = est.theta_hat;
        sigma2[r] = est.sigma2_hat;

        InferenceConfig base;
        base.sided = cfg.sided;
        base.alpha = cfg.alpha;
        base.B = cfg.B;
        base.seed = inner_seed;
        base.threads = 1;
        std::optional<ResampleDistribution> boot, rand;
        bool boot_failed = false, rand_failed = false;
        for (std::size_t t = 0; t < n_tests; ++t) {
            InferenceConfig ic = base;
            ic.method = cfg.tests[t].method;
            ic.transform = cfg.tests[t].transform;
            std::int8_t& out = decision[r * n_tests + t];
            try {
                InferenceReport rep;
                if (ic.method == Method::asymptotic) {
                    rep = asymptotic_test(est, ic);
                } else {
                    auto& dist = ic.method == Method::bootstrap ? boot : rand;
                    bool& failed = ic.method == Method::bootstrap ? boot_failed : rand_failed;
                    if (failed) {
                        out = -1;
                        continue;
                    }
                    if (!dist) {
                        try {
                            dist = ic.method == Method::bootstrap ? bootstrap_distribution(data, ic)
                                                                  : randomization_distribution(data, ic);
                        } catch (const Error&) {
                            failed = true;
                            throw;
                        }
                    }
                    rep = test_and_ci(est, *dist, ic);
                }
                out = rep.reject ? 1 : 0;
            } catch (const Error&) {
                out = -1;
            }
        }
    });

    ExperimentResult res;
    res.scenario = s;
    res.R = cfg.R;
    res.B = cfg.B;
    res.alpha = cfg.alpha;
    res.sided = cfg.sided;
    for (std::size_t t = 0; t < n_tests; ++t) {
        TestOutcome o;
        o.test = cfg.tests[t];
        for (std::size_t r = 0; r < cfg.R; ++r) {
            const auto d = decision[r * n_tests + t];
            if (d < 0) {
                ++o.errors;
            } else {
                ++o.valid;
                o.rejections += static_cast<std::size_t>(d);
            }
        }
        if (static_cast<double>(o.errors) > cfg.max_error_fraction * static_cast<double>(cfg.R) && o.errors > 0)
            throw NumericalError(to_string(o.test) + ": " + std::to_string(o.errors) + " of " +
                                 std::to_string(cfg.R) + " simulated datasets could not be analyzed");
        res.outcomes.push_back(o);
    }
    double sum_c = 0.0, sum_cr = 0.0;
    for (std::size_t r = 0; r < cfg.R; ++r) {
        sum_c += cens[r];
        sum_cr += cr_cens[r];
    }
    res.censoring_rate = sum_c / static_cast<double>(cfg.R);
    res.competing_censoring_rate = sum_cr / static_cast<double>(cfg.R);
    res.theta_hat = std::move(theta);
    res.sigma2_hat = std::move(sigma2);
    return res;
}

std::vector<PowerPoint> run_power_experiment(const std::function<Scenario(double)>& scenario_at,
                                             std::span<const double> departures, const ExperimentConfig& cfg) {
    std::vector<PowerPoint> out;
    out.reserve(departures.size());
    for (double d : departures) out.push_back({d, run_size_experiment(scenario_at(d), cfg)});
    return out;
}

double monte_carlo_theta(const Scenario& s, std::size_t N, std::uint64_t seed, unsigned threads) {
    validate(s);
    if (N < 1) throw InvalidParameter("sample size must be at least 1");
    constexpr std::size_t kChunk = 1 << 15;
    const std::size_t chunks = (N + kChunk - 1) / kChunk;
    // twice the score, so ties stay integral
    std::vector<std::uint64_t> score(chunks, 0);
    parallel_for(chunks, threads, [&](std::size_t c) {
        Engine rng = make_stream(seed, StreamTag::calibration, c);
        const std::size_t end = std::min(N, (c + 1) * kChunk);
        std::uint64_t acc = 0;
        for (std::size_t i = c * kChunk; i < end; ++i) {
            const UniformPair u = draw(s.copula, rng);
            const double t1 = std::min(s.marginal1.time_at_survival(u[0], rng), s.tau);
            const double t2 = std::min(s.marginal2.time_at_survival(u[1], rng), s.tau);
            acc += t1 > t2 ? 2 : (t1 == t2 ? 1 : 0);
        }
        score[c] = acc;
    });
    std::uint64_t total = 0;
    for (auto v : score) total += v;
    return static_cast<double>(total) / (2.0 * static_cast<double>(N));
}

CalibrationResult calibrate_null(const CalibrationSpec& spec) {
    if (!(spec.lower < spec.upper)) throw InvalidParameter(spec.name + ": bracket must satisfy lower < upper");
    auto excess = [&](double p) { return monte_carlo_theta(spec.scenario_at(p), spec.N, spec.seed, spec.threads) - spec.target; };

    double lo = spec.lower, hi = spec.upper;
    double f_lo = excess(lo), f_hi = excess(hi);
    CalibrationResult res;
    res.iterations = 2;
    if (f_lo * f_hi > 0.0) {
        std::ostringstream os;
        os << spec.name << ": theta - " << spec.target << " has the same sign at both ends of [" << lo << ", " << hi
           << "] (" << f_lo << ", " << f_hi << ")";
        throw BracketError(os.str());
    }
    double best = std::abs(f_lo) <= std::abs(f_hi) ? lo : hi;
    double f_best = std::min(std::abs(f_lo), std::abs(f_hi));
    const bool increasing = f_hi > f_lo;
    for (int it = 0; it < 60 && f_best > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= 1e-6 * std::max(1.0, std::abs(mid))) break;
        const double f_mid = excess(mid);
        ++res.iterations;
        if (std::abs(f_mid) < f_best) {
            f_best = std::abs(f_mid);
            best = mid;
        }
        if ((f_mid < 0.0) == increasing) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    res.parameter = best;
    res.theta = spec.target + excess(best);
    if (f_best > spec.tol) {
        std::ostringstream os;
        os << spec.name << ": best candidate " << best << " leaves |theta - target| = " << f_best;
        throw BracketError(os.str());
    }

    // coarse monotonicity scan over the original bracket
    constexpr int kScan = 8;
    double prev = f_lo;
    for (int i = 1; i <= kScan; ++i) {
        const double p = spec.lower + (spec.upper - spec.lower) * i / kScan;
        const double f = i == kScan ? f_hi : excess(p);
        if ((increasing && f < prev) || (!increasing && f > prev)) {
            std::ostringstream os;
            os << "NonMonotone: " << spec.name << ": theta is not monotone near parameter " << p;
            res.warnings.push_back(os.str());
        }
        prev = f;
    }
    return res;
}

}  // namespace rte
