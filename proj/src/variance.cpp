#include "rte/variance.hpp"

#include <algorithm>
#include <vector>

#include "rte/errors.hpp"

namespace rte {

namespace {

// Atoms with 1 - dA(w) below this are treated as complete failure of the
// risk set.
constexpr double kNoContinuation = 1e-12;

struct GreenwoodIncrements {
    std::array<double, 3> sigma2{};
    double s12 = 0.0;
    double s13 = 0.0;
    double s23 = 0.0;
};

GreenwoodIncrements greenwood_at(const CountingProcesses& cp, std::size_t k) {
    const double n = static_cast<double>(cp.n);
    const double y = static_cast<double>(cp.at_risk[k]);
    const double y3 = y * y * y;
    std::array<double, 3> d{};
    for (std::size_t c = 0; c < 3; ++c) d[c] = static_cast<double>(cp.events[c][k]);
    GreenwoodIncrements g;
    for (std::size_t c = 0; c < 3; ++c) g.sigma2[c] = n * d[c] * (y - d[c]) / y3;
    g.s12 = -n * d[0] * d[1] / y3;
    g.s13 = -n * d[0] * d[2] / y3;
    g.s23 = -n * d[1] * d[2] / y3;
    return g;
}

std::size_t grid_limit(std::span<const double> times, double tau) {
    std::size_t k = 0;
    while (k < times.size() && times[k] <= tau) ++k;
    return k;
}

}  // namespace

const StepCurve& VarianceCurves::covariance(Cause a, Cause b) const {
    if (a == Cause::censored || b == Cause::censored) throw InvalidParameter("covariance: causes must be 1, 2 or 3");
    if (a == b) return sigma2[cause_index(a)];
    const auto lo = std::min(a, b);
    const auto hi = std::max(a, b);
    if (lo == Cause::first && hi == Cause::second) return sigma_12;
    if (lo == Cause::first) return sigma_13;
    return sigma_23;
}

VarianceCurves greenwood_curves(const CountingProcesses& cp) {
    const std::size_t k = cp.size();
    std::array<std::vector<double>, 3> s2;
    std::vector<double> s12(k), s13(k), s23(k), sdot(k), adot(k);
    for (auto& v : s2) v.resize(k);
    std::array<double, 3> acc2{};
    double a12 = 0.0, a13 = 0.0, a23 = 0.0, adot_acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const GreenwoodIncrements g = greenwood_at(cp, i);
        for (std::size_t c = 0; c < 3; ++c) {
            acc2[c] += g.sigma2[c];
            s2[c][i] = acc2[c];
        }
        a12 += g.s12;
        a13 += g.s13;
        a23 += g.s23;
        s12[i] = a12;
        s13[i] = a13;
        s23[i] = a23;
        sdot[i] = acc2[0] + acc2[1] + acc2[2] + 2.0 * (a12 + a13 + a23);
        adot_acc += static_cast<double>(cp.all_causes(i)) / static_cast<double>(cp.at_risk[i]);
        adot[i] = adot_acc;
    }
    VarianceCurves out;
    for (std::size_t c = 0; c < 3; ++c) out.sigma2[c] = StepCurve(cp.event_times, std::move(s2[c]), 0.0);
    out.sigma_12 = StepCurve(cp.event_times, std::move(s12), 0.0);
    out.sigma_13 = StepCurve(cp.event_times, std::move(s13), 0.0);
    out.sigma_23 = StepCurve(cp.event_times, std::move(s23), 0.0);
    out.sigma2_dot = StepCurve(cp.event_times, std::move(sdot), 0.0);
    out.all_cause_hazard = StepCurve(cp.event_times, std::move(adot), 0.0);
    return out;
}

namespace detail {

// The double integral over (u, v) of a weight evaluated at min(u, v) is
// collapsed by grouping pairs on their minimum:
//   sum_{u,v} f(min(u,v)) p_u q_v = sum_m f(m) [p_m q_m + p_m Q_{>m} + q_m P_{>m}].
SigmaThetaResult evaluate_sigma_theta(const VarianceGrid& grid, std::size_t n) {
    const std::size_t k = grid.survival_left.size();
    std::vector<double> p(k), q(k), inner_dot(k), inner_mixed(k), outer(k);
    SigmaThetaResult result;
    double cum_dot = 0.0;    // sum_{w < m} d sigma2_dot(w) / (1 - dA(w))
    double cum_mixed = 0.0;  // same for the mixed combination
    double cum_outer = 0.0;  // (sigma2_2 + sigma_23 + sigma2_3 / 4)(m)
    for (std::size_t m = 0; m < k; ++m) {
        const double da1 = grid.hazard_jump[0][m];
        const double da2 = grid.hazard_jump[1][m];
        const double da3 = grid.hazard_jump[2][m];
        const double da_dot = da1 + da2 + da3;
        const double s1 = grid.sigma2_jump[0][m];
        const double s2 = grid.sigma2_jump[1][m];
        const double s3 = grid.sigma2_jump[2][m];
        const double c12 = grid.sigma12_jump[m];
        const double c13 = grid.sigma13_jump[m];
        const double c23 = grid.sigma23_jump[m];

        const double sm = grid.survival_left[m];
        p[m] = sm * (da2 + 0.5 * da3);
        q[m] = sm * da_dot;
        inner_dot[m] = cum_dot;
        inner_mixed[m] = cum_mixed;
        cum_outer += s2 + c23 + 0.25 * s3;
        outer[m] = cum_outer;

        const double continuation = 1.0 - da_dot;
        if (continuation < kNoContinuation) {
            ++result.skipped_atoms;
            continue;
        }
        const double d_dot = s1 + s2 + s3 + 2.0 * (c12 + c13 + c23);
        const double d_mixed = c12 + 0.5 * c13 + s2 + 1.5 * c23 + 0.5 * s3;
        cum_dot += d_dot / continuation;
        cum_mixed += d_mixed / continuation;
    }

    double term_dot = 0.0;
    double term_mixed = 0.0;
    double term_outer = 0.0;
    double p_after = 0.0;  // sum_{v > m} p_v
    double q_after = 0.0;
    for (std::size_t r = k; r-- > 0;) {
        term_dot += inner_dot[r] * (p[r] * p[r] + 2.0 * p[r] * p_after);
        term_mixed += inner_mixed[r] * (p[r] * q[r] + p[r] * q_after + q[r] * p_after);
        term_outer += outer[r] * (q[r] * q[r] + 2.0 * q[r] * q_after);
        p_after += p[r];
        q_after += q[r];
    }
    result.raw = term_dot - 2.0 * term_mixed + term_outer;
    result.value = result.raw > 0.0 ? result.raw : 0.0;
    result.degenerate = result.raw <= degenerate_variance_threshold(n);
    return result;
}

}  // namespace detail

SigmaThetaResult sigma_theta_terms(const CountingProcesses& cp, double tau) {
    const std::size_t k = grid_limit(cp.event_times, tau);
    std::vector<double> sm(k);
    std::array<std::vector<double>, 3> da, ds;
    std::vector<double> c12(k), c13(k), c23(k);
    for (std::size_t c = 0; c < 3; ++c) {
        da[c].resize(k);
        ds[c].resize(k);
    }
    double s = 1.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double y = static_cast<double>(cp.at_risk[i]);
        sm[i] = s;
        for (std::size_t c = 0; c < 3; ++c) da[c][i] = static_cast<double>(cp.events[c][i]) / y;
        const GreenwoodIncrements g = greenwood_at(cp, i);
        for (std::size_t c = 0; c < 3; ++c) ds[c][i] = g.sigma2[c];
        c12[i] = g.s12;
        c13[i] = g.s13;
        c23[i] = g.s23;
        s *= 1.0 - static_cast<double>(cp.all_causes(i)) / y;
    }
    detail::VarianceGrid grid{sm, {da[0], da[1], da[2]}, {ds[0], ds[1], ds[2]}, c12, c13, c23};
    return detail::evaluate_sigma_theta(grid, cp.n);
}

SigmaThetaResult sigma_theta_terms(const RteCurves& curves, const VarianceCurves& variance, std::size_t n,
                                   double tau) {
    const auto times = variance.all_cause_hazard.times();
    const std::size_t k = grid_limit(times, tau);
    std::vector<double> sm(k);
    std::array<std::vector<double>, 3> da, ds;
    std::vector<double> c12(k), c13(k), c23(k);
    for (std::size_t c = 0; c < 3; ++c) {
        da[c].resize(k);
        ds[c].resize(k);
    }
    for (std::size_t i = 0; i < k; ++i) {
        const double t = times[i];
        sm[i] = curves.event_survival.left_limit(t);
        for (std::size_t c = 0; c < 3; ++c) {
            da[c][i] = curves.cumulative_hazard[c].jump_at(t);
            ds[c][i] = variance.sigma2[c].jump_at(t);
        }
        c12[i] = variance.sigma_12.jump_at(t);
        c13[i] = variance.sigma_13.jump_at(t);
        c23[i] = variance.sigma_23.jump_at(t);
    }
    detail::VarianceGrid grid{sm, {da[0], da[1], da[2]}, {ds[0], ds[1], ds[2]}, c12, c13, c23};
    return detail::evaluate_sigma_theta(grid, n);
}

namespace {

double require_positive(const SigmaThetaResult& r) {
    if (r.degenerate)
        throw DegenerateVariance("variance estimate is not positive; too few events to studentize");
    return r.value;
}

}  // namespace

double sigma_theta_plugin(const CountingProcesses& cp, double tau) { return require_positive(sigma_theta_terms(cp, tau)); }

double sigma_theta_plugin(const RteCurves& curves, const VarianceCurves& variance, std::size_t n, double tau) {
    return require_positive(sigma_theta_terms(curves, variance, n, tau));
}

}  // namespace rte
