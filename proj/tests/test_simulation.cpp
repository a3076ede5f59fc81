#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "rte/builtin.hpp"
#include "rte/errors.hpp"
#include "rte/estimators.hpp"
#include "rte/pinned.hpp"
#include "rte/scenario_io.hpp"
#include "rte/simulation.hpp"

using namespace rte;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

constexpr std::size_t kDraws = 100000;

double kendall(const std::vector<UniformPair>& s) { return oracle::kendall_tau({s.begin(), s.end()}); }

std::vector<double> column(const std::vector<UniformPair>& s, int j) {
    std::vector<double> out(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i][j];
    return out;
}

double uniform_cdf(double u) { return std::clamp(u, 0.0, 1.0); }

std::vector<double> lifetimes(const Marginal& m, std::uint64_t seed) {
    auto rng = make_stream(seed, StreamTag::copula_test, 99);
    std::vector<double> out(kDraws);
    for (auto& t : out) t = m.time_at_survival(uniform_open(rng), rng);
    return out;
}

Scenario exchangeable(std::size_t n) {
    Scenario s;
    s.label = "exchangeable";
    s.copula = {CopulaFamily::clayton, 2.0};
    s.marginal1 = Marginal::exponential(1.5);
    s.marginal2 = Marginal::exponential(1.5);
    s.censoring_upper = 3.0;
    s.tau = 0.8;
    s.n = n;
    return s;
}

}  // namespace

TEST_CASE("Kendall's tau of the copula samplers") {
    CHECK_THAT(kendall(sample_gumbel_hougaard(1.0, kDraws, 1)), WithinAbs(0.0, 0.01));
    CHECK_THAT(kendall(sample_gumbel_hougaard(5.0, kDraws, 2)), WithinAbs(1.0 - 1.0 / 5.0, 0.01));
    CHECK_THAT(kendall(sample_clayton(1e-6, kDraws, 3)), WithinAbs(0.0, 0.01));
    CHECK_THAT(kendall(sample_clayton(-0.6, kDraws, 4)), WithinAbs(-0.6 / 1.4, 0.01));
    CHECK_THAT(kendall(sample_clayton(2.0, kDraws, 5)), WithinAbs(0.5, 0.01));
    CHECK_THAT(kendall_tau({CopulaFamily::gumbel_hougaard, 5.0}), WithinAbs(0.8, 1e-15));
    CHECK_THAT(kendall_tau({CopulaFamily::clayton, -0.6}), WithinAbs(-0.428571, 1e-6));
}

TEST_CASE("copula margins are uniform") {
    for (const auto& s : {sample_gumbel_hougaard(5.0, kDraws, 6), sample_clayton(-0.6, kDraws, 7)}) {
        for (int j = 0; j < 2; ++j) {
            const auto u = column(s, j);
            const double below = std::count_if(u.begin(), u.end(), [](double x) { return x <= 0.5; });
            CHECK_THAT(below / kDraws, WithinAbs(0.5, 0.01));
            CHECK(oracle::ks_distance(u, uniform_cdf) < 0.01);
            for (double x : u) REQUIRE((x > 0.0 && x < 1.0));
        }
    }
}

TEST_CASE("copula parameter checks") {
    CHECK_THROWS_AS(validate(Copula{CopulaFamily::gumbel_hougaard, 0.5}), InvalidParameter);
    CHECK_THROWS_AS(validate(Copula{CopulaFamily::clayton, 0.0}), InvalidParameter);
    CHECK_THROWS_AS(validate(Copula{CopulaFamily::clayton, -1.5}), InvalidParameter);
    CHECK_NOTHROW(validate(Copula{CopulaFamily::clayton, -1.0}));
}

TEST_CASE("positive stable variates") {
    // E exp(-S) = exp(-1) for Laplace transform exp(-s^alpha)
    auto rng = make_stream(4, StreamTag::copula_test, 1);
    for (double alpha : {0.2, 0.5, 0.8, 1.0}) {
        double m = 0;
        for (std::size_t i = 0; i < kDraws; ++i) m += std::exp(-positive_stable(alpha, rng));
        CHECK_THAT(m / kDraws, WithinAbs(std::exp(-1.0), 0.005));
    }
}

TEST_CASE("marginal lifetimes") {
    auto rng = make_stream(1, StreamTag::copula_test, 0);
    CHECK_THAT(Marginal::exponential(2).time_at_survival(0.5, rng), WithinAbs(std::log(2.0) / 2, 1e-15));

    const auto exp_cdf = [](double r) { return [r](double t) { return 1 - std::exp(-r * t); }; };
    CHECK(oracle::ks_distance(lifetimes(Marginal::exponential(2), 1), exp_cdf(2)) < 0.01);

    const auto gompertz = [](double t) { return 1 - std::exp(-(2.78 / 0.6) * (std::exp(0.6 * t) - 1)); };
    CHECK(oracle::ks_distance(lifetimes(Marginal::gompertz(0.6, 2.78), 2), gompertz) < 0.01);
    CHECK_THAT(Marginal::gompertz(0.6, 2.78).cdf(0.3), WithinAbs(gompertz(0.3), 1e-14));

    CHECK(oracle::ks_distance(lifetimes(Marginal::uniform(2), 3), [](double t) { return std::clamp(t / 2, 0.0, 1.0); }) <
          0.01);

    const double lambda = 1.2;
    const auto mix = [&](double t) { return 0.5 * (1 - std::exp(-3 * t)) + 0.5 * (1 - std::exp(-lambda * t)); };
    const auto m = Marginal::mixture(0.5, Marginal::exponential(3), Marginal::exponential(lambda));
    CHECK(oracle::ks_distance(lifetimes(m, 4), mix) < 0.01);
    CHECK_THAT(m.cdf(0.7), WithinAbs(mix(0.7), 1e-14));
    // weight 0 is the first component
    const auto w0 = Marginal::mixture(0.0, Marginal::exponential(2), Marginal::uniform(2));
    CHECK(oracle::ks_distance(lifetimes(w0, 5), exp_cdf(2)) < 0.01);
}

TEST_CASE("simulated pairs through the copula keep their margins") {
    auto s = builtin::exp_mixture(builtin::gumbel_hougaard_5, 1.2, kDraws);
    auto rng = make_stream(3, StreamTag::simulation, 0);
    const auto pairs = simulate_pairs(s, rng);
    std::vector<double> t1, t2;
    for (const auto& p : pairs) {
        REQUIRE(p.delta1);
        REQUIRE(p.delta2);
        t1.push_back(p.x1);
        t2.push_back(p.x2);
    }
    CHECK(oracle::ks_distance(t1, [](double t) { return 1 - std::exp(-2 * t); }) < 0.01);
    CHECK(oracle::ks_distance(t2, [](double t) { return 0.5 * (2 - std::exp(-3 * t) - std::exp(-1.2 * t)); }) < 0.01);
}

TEST_CASE("censoring rates") {
    const double lambda = *pinned::lookup("gh_exp_mix_lambda");
    auto s = builtin::exp_mixture(builtin::gumbel_hougaard_5, lambda, kDraws);
    s.censoring_upper = 2.7;
    auto rng = make_stream(9, StreamTag::simulation, 0);
    const double light = margin_censoring_rate(simulate_pairs(s, rng), s.tau);
    CHECK(light >= 0.17);
    CHECK(light <= 0.27);

    // no censoring: every margin is observed, only truncation counts
    s.censoring_upper = std::numeric_limits<double>::infinity();
    s.n = 1000;
    for (const auto& p : simulate_pairs(s, rng)) {
        REQUIRE(p.delta1);
        REQUIRE(p.delta2);
    }
}

TEST_CASE("exchangeable scenario is centred") {
    ExperimentConfig cfg;
    cfg.tests = {{Method::asymptotic, Transform::linear}};
    cfg.R = 2000;
    cfg.seed = 31;
    cfg.threads = 1;
    const auto res = run_size_experiment(exchangeable(50), cfg);
    double m = 0, v = 0;
    for (double t : res.theta_hat) m += t;
    m /= static_cast<double>(cfg.R);
    for (double t : res.theta_hat) v += (t - m) * (t - m);
    const double se = std::sqrt(v / static_cast<double>(cfg.R - 1) / static_cast<double>(cfg.R));
    CHECK(std::abs(m - 0.5) <= 3 * se);
    CHECK_THAT(monte_carlo_theta(exchangeable(50), 200000, 2, 1), WithinAbs(0.5, 0.005));
}

TEST_CASE("experiments are deterministic") {
    ExperimentConfig cfg;
    cfg.tests = parse_tests("asy-lin,rand-both");
    cfg.R = 12;
    cfg.B = 50;
    cfg.seed = 4;
    cfg.threads = 1;
    const auto s = exchangeable(30);
    const auto a = run_size_experiment(s, cfg);
    cfg.threads = 4;
    const auto b = run_size_experiment(s, cfg);
    CHECK(a.theta_hat == b.theta_hat);
    CHECK(a.sigma2_hat == b.sigma2_hat);
    REQUIRE(a.outcomes.size() == 3);
    for (std::size_t i = 0; i < a.outcomes.size(); ++i) {
        CHECK(a.outcomes[i].rejections == b.outcomes[i].rejections);
        CHECK(a.outcomes[i].valid == b.outcomes[i].valid);
    }
    cfg.R = 1;
    const auto one = run_size_experiment(s, cfg);
    CHECK(one.theta_hat.size() == 1);
    CHECK(one.theta_hat[0] == a.theta_hat[0]);
}

TEST_CASE("calibration") {
    const auto spec = builtin::null_calibrations(5, 20000, 1).front();
    const auto r = calibrate_null(spec);
    CHECK_THAT(r.theta, WithinAbs(0.5, spec.tol));
    CHECK_THAT(monte_carlo_theta(spec.scenario_at(r.parameter), 20000, 5, 1), WithinAbs(r.theta, 1e-12));

    auto bad = spec;
    bad.lower = 20;
    bad.upper = 40;
    CHECK_THROWS_AS(calibrate_null(bad), BracketError);

    for (const auto& c : pinned::constants()) CHECK_THAT(c.theta, WithinAbs(0.5, 0.002));
}

TEST_CASE("scenario files") {
    const std::string base = R"({"name": "t", "copula": {"family": "clayton", "parameter": -0.6},
        "marginal1": {"family": "gompertz", "shape": 0.6, "rate": "@gh_gompertz_b"},
        "marginal2": {"family": "exponential", "rate": 3},
        "censoring": {"a": 1, "b": "none"}, "tau": 0.6, "n": [25, 50], "R": 10, "B": 20, "tests": "asy-lin")";
    const auto study = parse_study(base + "}", pinned::resolver());
    CHECK(study.censoring.size() == 2);
    CHECK(std::isinf(study.censoring[1].upper));
    CHECK(study.sample_sizes == std::vector<std::size_t>{25, 50});
    CHECK(study.config.R == 10);
    const auto sc = study.scenario_at(study.censoring[0], 25, 0.0);
    CHECK(sc.n == 25);
    CHECK_THAT(sc.marginal1.cdf(0.3), WithinAbs(Marginal::gompertz(0.6, *pinned::lookup("gh_gompertz_b")).cdf(0.3), 1e-15));

    const auto error_of = [](const std::string& text) {
        try {
            parse_study(text, pinned::resolver());
        } catch (const ValidationError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    std::string bad_copula = base + "}";
    bad_copula.replace(bad_copula.find("clayton"), 7, "frank");
    CHECK_THAT(error_of(bad_copula), ContainsSubstring("copula.family"));
    CHECK_THAT(error_of(base + R"(, "bogus": 1})"), ContainsSubstring("bogus"));
    std::string bad_const = base + "}";
    bad_const.replace(bad_const.find("@gh_gompertz_b"), 14, "@nope");
    CHECK_THAT(error_of(bad_const), ContainsSubstring("marginal1.rate"));

    CHECK(parse_tests("all").size() == 6);
    CHECK(parse_tests("rand") == std::vector<TestSpec>{{Method::randomization, Transform::linear}});
    CHECK_THROWS_AS(parse_tests("foo-lin"), ValidationError);

    for (const char* f : {"size_gh_exp_mix", "size_gh_gompertz", "size_clayton_exp_mix", "size_clayton_gompertz",
                          "power1_gh", "power2_clayton", "power3_gh"}) {
        INFO(f);
        CHECK_NOTHROW(load_study(std::string(RTE_SCENARIO_DIR "/") + f + ".json", pinned::resolver()));
    }
}
