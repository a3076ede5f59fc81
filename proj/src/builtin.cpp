#include "rte/builtin.hpp"

namespace rte::builtin {

Scenario exp_mixture(const Copula& copula, double lambda, std::size_t n) {
    Scenario s;
    s.label = "exp_mix";
    s.copula = copula;
    s.marginal1 = Marginal::exponential(2.0);
    s.marginal2 = Marginal::mixture(0.5, Marginal::exponential(3.0), Marginal::exponential(lambda));
    s.tau = 1.0;
    s.n = n;
    return s;
}

Scenario gompertz_exp(const Copula& copula, double b, std::size_t n) {
    Scenario s;
    s.label = "gompertz_exp";
    s.copula = copula;
    s.marginal1 = Marginal::gompertz(0.6, b);
    s.marginal2 = Marginal::exponential(3.0);
    s.tau = 0.6;
    s.n = n;
    return s;
}

std::vector<CensoringLevel> exp_mixture_censoring() { return {{"light", 2.7}, {"medium", 1.6}, {"strong", 1.1}}; }

std::vector<CensoringLevel> gompertz_censoring() { return {{"light", 1.75}, {"medium", 1.0}, {"strong", 0.7}}; }

std::vector<CalibrationSpec> null_calibrations(std::uint64_t seed, std::size_t N, unsigned threads) {
    std::vector<CalibrationSpec> out;
    auto add = [&](const char* name, auto make, const Copula& c, double lo, double hi) {
        CalibrationSpec spec;
        spec.name = name;
        spec.scenario_at = [make, c](double p) { return make(c, p, 100); };
        spec.lower = lo;
        spec.upper = hi;
        spec.N = N;
        spec.seed = seed;
        spec.threads = threads;
        out.push_back(std::move(spec));
    };
    add("gh_exp_mix_lambda", exp_mixture, gumbel_hougaard_5, 0.05, 10.0);
    add("clayton_exp_mix_lambda", exp_mixture, clayton_minus_0_6, 0.05, 10.0);
    add("gh_gompertz_b", gompertz_exp, gumbel_hougaard_5, 0.1, 30.0);
    add("clayton_gompertz_b", gompertz_exp, clayton_minus_0_6, 0.1, 30.0);
    return out;
}

}  // namespace rte::builtin
