#include "rte/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "rte/errors.hpp"
#include "rte/variance.hpp"

namespace rte {

namespace {

std::vector<CompetingRisksRecord> sorted_records(const Dataset& data) {
    std::vector<CompetingRisksRecord> sorted = data.records();
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const CompetingRisksRecord& a, const CompetingRisksRecord& b) { return a.z < b.z; });
    return sorted;
}

}  // namespace

CountingProcesses counting_processes_sorted(std::span<const CompetingRisksRecord> sorted, double tau,
                                            std::span<const std::uint32_t> multiplicity) {
    const bool weighted = !multiplicity.empty();
    if (weighted && multiplicity.size() != sorted.size())
        throw InvalidParameter("multiplicity length differs from record count");
    auto weight = [&](std::size_t i) -> std::size_t { return weighted ? multiplicity[i] : 1; };

    CountingProcesses cp;
    for (std::size_t i = 0; i < sorted.size(); ++i) cp.n += weight(i);
    if (cp.n == 0) throw EmptyDataset();

    std::size_t before = 0;  // total weight with z < current time
    std::size_t before_tau = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        const double t = sorted[i].z;
        std::array<std::size_t, 3> d{0, 0, 0};
        std::size_t group_weight = 0;
        std::size_t j = i;
        for (; j < sorted.size() && sorted[j].z == t; ++j) {
            const std::size_t w = weight(j);
            group_weight += w;
            if (sorted[j].epsilon != Cause::censored) d[cause_index(sorted[j].epsilon)] += w;
        }
        if (d[0] + d[1] + d[2] > 0) {
            cp.event_times.push_back(t);
            for (std::size_t c = 0; c < 3; ++c) cp.events[c].push_back(d[c]);
            cp.at_risk.push_back(cp.n - before);
        }
        before += group_weight;
        if (t < tau) before_tau += group_weight;
        i = j;
    }
    cp.at_risk_at_tau = cp.n - before_tau;
    return cp;
}

CountingProcesses counting_processes(const Dataset& data) {
    const auto sorted = sorted_records(data);
    return counting_processes_sorted(sorted, data.tau());
}

StepCurve nelson_aalen(const CountingProcesses& cp, Cause cause) {
    if (cause == Cause::censored) throw InvalidParameter("nelson_aalen: cause must be 1, 2 or 3");
    const auto& dn = cp.events[cause_index(cause)];
    std::vector<double> times;
    std::vector<double> values;
    double a = 0.0;
    for (std::size_t k = 0; k < cp.size(); ++k) {
        if (dn[k] == 0) continue;
        a += static_cast<double>(dn[k]) / static_cast<double>(cp.at_risk[k]);
        times.push_back(cp.event_times[k]);
        values.push_back(a);
    }
    return StepCurve(std::move(times), std::move(values), 0.0);
}

StepCurve kaplan_meier_event(const CountingProcesses& cp) {
    std::vector<double> values;
    values.reserve(cp.size());
    double s = 1.0;
    for (std::size_t k = 0; k < cp.size(); ++k) {
        s *= 1.0 - static_cast<double>(cp.all_causes(k)) / static_cast<double>(cp.at_risk[k]);
        values.push_back(s);
    }
    return StepCurve(cp.event_times, std::move(values), 1.0);
}

StepCurve kaplan_meier_censoring(const Dataset& data) {
    const auto sorted = sorted_records(data);
    std::vector<double> times;
    std::vector<double> values;
    const std::size_t n = sorted.size();
    std::size_t before = 0;
    double g = 1.0;
    std::size_t i = 0;
    while (i < n) {
        const double t = sorted[i].z;
        std::size_t events = 0;
        std::size_t censored = 0;
        std::size_t j = i;
        for (; j < n && sorted[j].z == t; ++j) (sorted[j].epsilon == Cause::censored ? censored : events) += 1;
        if (censored > 0) {
            // events at t leave the risk set before the tied censorings
            const std::size_t at_risk = n - before - events;
            g *= 1.0 - static_cast<double>(censored) / static_cast<double>(at_risk);
            times.push_back(t);
            values.push_back(g);
        }
        before += j - i;
        i = j;
    }
    return StepCurve(std::move(times), std::move(values), 1.0);
}

StepCurve aalen_johansen(const CountingProcesses& cp, Cause cause) {
    if (cause == Cause::censored) throw InvalidParameter("aalen_johansen: cause must be 1, 2 or 3");
    const auto& dn = cp.events[cause_index(cause)];
    std::vector<double> times;
    std::vector<double> values;
    double s = 1.0;
    double f = 0.0;
    for (std::size_t k = 0; k < cp.size(); ++k) {
        const double y = static_cast<double>(cp.at_risk[k]);
        if (dn[k] > 0) {
            f += s * static_cast<double>(dn[k]) / y;
            times.push_back(cp.event_times[k]);
            values.push_back(f);
        }
        s *= 1.0 - static_cast<double>(cp.all_causes(k)) / y;
    }
    return StepCurve(std::move(times), std::move(values), 0.0);
}

// Uses S(u-) dN(u) / Y(u) = dN(u) / (n G(u-)). G only moves across
// censorings, so integer counts are pooled between them; without censoring
// the result is exactly (2 #second + #both) / 2n.
double theta_from_counts(const CountingProcesses& cp, double tau) {
    const double n = static_cast<double>(cp.n);
    double g = 1.0;
    double theta = 0.0;
    std::size_t pooled = 0;       // 2 dN_2 + dN_3 since the last censoring
    std::size_t remaining = cp.n;  // at risk just after the previous event time
    for (std::size_t k = 0; k < cp.size() && cp.event_times[k] <= tau; ++k) {
        if (cp.at_risk[k] != remaining) {
            theta += static_cast<double>(pooled) / (2.0 * n * g);
            pooled = 0;
            g *= static_cast<double>(cp.at_risk[k]) / static_cast<double>(remaining);
        }
        pooled += 2 * cp.events[1][k] + cp.events[2][k];
        remaining = cp.at_risk[k] - cp.all_causes(k);
    }
    theta += static_cast<double>(pooled) / (2.0 * n * g);
    return std::clamp(theta, 0.0, 1.0);
}

RteEstimate estimate_rte(const Dataset& data) {
    const CountingProcesses cp = counting_processes(data);
    RteEstimate est;
    est.n = data.n();
    est.tau = data.tau();
    est.theta_hat = theta_from_counts(cp, data.tau());
    est.risk_set_exhausted = cp.at_risk_at_tau == 0;
    for (Cause c : {Cause::first, Cause::second, Cause::both}) {
        est.curves.cumulative_hazard[cause_index(c)] = nelson_aalen(cp, c);
        est.curves.cumulative_incidence[cause_index(c)] = aalen_johansen(cp, c);
    }
    est.curves.event_survival = kaplan_meier_event(cp);
    est.curves.censoring_survival = kaplan_meier_censoring(data);
    const SigmaThetaResult v = sigma_theta_terms(cp, data.tau());
    est.sigma2_hat = v.value;
    est.variance_degenerate = v.degenerate;
    return est;
}

double mann_whitney_fully_observed(std::span<const PairedObservation> data) {
    if (data.empty()) throw EmptyDataset();
    std::vector<double> second;
    second.reserve(data.size());
    for (const auto& o : data) {
        if (!o.delta1 || !o.delta2) throw NotFullyObserved("Mann-Whitney form needs fully observed pairs");
        second.push_back(o.x2);
    }
    std::sort(second.begin(), second.end());
    double score = 0.0;
    for (const auto& o : data) {
        const auto lo = std::lower_bound(second.begin(), second.end(), o.x1);
        const auto hi = std::upper_bound(lo, second.end(), o.x1);
        score += static_cast<double>(lo - second.begin()) + 0.5 * static_cast<double>(hi - lo);
    }
    const double n = static_cast<double>(data.size());
    return score / (n * n);
}

IpcwIdentity ipcw_identity_check(const Dataset& data) {
    const CountingProcesses cp = counting_processes(data);
    const double tau = data.tau();
    const StepCurve g = kaplan_meier_censoring(data);
    IpcwIdentity out;
    out.lhs = 1.0 - 2.0 * theta_from_counts(cp, tau);
    out.rhs = aalen_johansen(cp, Cause::first).at(tau) - aalen_johansen(cp, Cause::second).at(tau);
    const double n = static_cast<double>(cp.n);
    for (std::size_t k = 0; k < cp.size() && cp.event_times[k] <= tau; ++k) {
        const double diff = static_cast<double>(cp.events[0][k]) - static_cast<double>(cp.events[1][k]);
        if (diff != 0.0) out.rhs_ipcw += diff / (n * g.left_limit(cp.event_times[k]));
    }
    return out;
}

}  // namespace rte
