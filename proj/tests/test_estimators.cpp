#include <catch_amalgamated.hpp>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "rte/errors.hpp"
#include "rte/estimators.hpp"

using namespace rte;
using Catch::Matchers::WithinAbs;

namespace {

// (1,1),(2,0),(3,2),(4,3)
Dataset small(double tau = 5) {
    return Dataset({{1, Cause::first}, {2, Cause::censored}, {3, Cause::second}, {4, Cause::both}}, tau);
}

std::vector<CompetingRisksRecord> random_records(std::mt19937_64& rng, std::size_t n, int levels) {
    std::uniform_int_distribution<int> t(1, levels), e(0, 3);
    std::vector<CompetingRisksRecord> out(n);
    for (auto& r : out) r = {static_cast<double>(t(rng)), static_cast<Cause>(e(rng))};
    return out;
}

std::vector<PairedObservation> fully_observed(std::mt19937_64& rng, std::size_t n) {
    std::exponential_distribution<double> e1(1.0), e2(1.3);
    std::vector<PairedObservation> out(n);
    for (auto& p : out) p = {e1(rng), true, e2(rng), true, std::nullopt};
    return out;
}

}  // namespace

TEST_CASE("counting processes by hand") {
    const auto cp = counting_processes(small());
    CHECK(cp.event_times == std::vector<double>{1, 3, 4});
    CHECK(cp.at_risk == std::vector<std::size_t>{4, 2, 1});
    CHECK(cp.events[0] == std::vector<std::size_t>{1, 0, 0});
    CHECK(cp.events[1] == std::vector<std::size_t>{0, 1, 0});
    CHECK(cp.events[2] == std::vector<std::size_t>{0, 0, 1});

    CHECK(counting_processes(Dataset({{1, Cause::censored}, {2, Cause::censored}}, 3)).event_times.empty());

    const auto tied = counting_processes(Dataset({{2, Cause::first}, {2, Cause::first}}, 3));
    CHECK(tied.events[0] == std::vector<std::size_t>{2});
    CHECK(tied.at_risk == std::vector<std::size_t>{2});
}

TEST_CASE("Nelson-Aalen and Kaplan-Meier by hand") {
    const auto cp = counting_processes(small());
    CHECK(nelson_aalen(cp, Cause::first).at(1) == 0.25);
    CHECK(nelson_aalen(cp, Cause::first).left_limit(1) == 0.0);
    CHECK(nelson_aalen(counting_processes(Dataset({{5, Cause::second}}, 6)), Cause::second).at(5) == 1.0);
    CHECK(nelson_aalen(cp, Cause::both).at(3.5) == 0.0);

    const auto s = kaplan_meier_event(cp);
    CHECK(s.at(1) == 0.75);
    CHECK(s.at(3) == 0.375);
    CHECK(s.at(4) == 0.0);
    CHECK(kaplan_meier_event(counting_processes(Dataset({{1, Cause::censored}}, 2))).at(2) == 1.0);

    CHECK(kaplan_meier_censoring(Dataset({{1, Cause::first}, {2, Cause::second}}, 3)).at(3) == 1.0);
    const auto g = kaplan_meier_censoring(Dataset({{2, Cause::censored}, {3, Cause::first}}, 4));
    CHECK(g.at(2) == 0.5);
    CHECK(g.left_limit(2) == 1.0);
}

TEST_CASE("Aalen-Johansen by hand") {
    const auto cp = counting_processes(small());
    CHECK(aalen_johansen(cp, Cause::second).at(4) == 0.375);
    CHECK(aalen_johansen(cp, Cause::both).at(4) == 0.375);
    CHECK(aalen_johansen(cp, Cause::first).at(4) == 0.25);
    CHECK(aalen_johansen(counting_processes(Dataset({{1, Cause::first}}, 2)), Cause::second).at(2) == 0.0);
}

TEST_CASE("theta by hand") {
    const auto est = estimate_rte(small());
    CHECK(est.theta_hat == 9.0 / 16.0);
    CHECK(theta_from_counts(counting_processes(small()), 5) == 9.0 / 16.0);
    const auto id = ipcw_identity_check(small());
    CHECK(id.rhs == -0.125);
}

TEST_CASE("Example 1 fixtures") {
    const auto t1 = read_paired_csv(RTE_DATA_DIR "/example1_table1.csv");
    const auto t2 = read_paired_csv(RTE_DATA_DIR "/example1_table2.csv");
    CHECK(estimate_rte(make_dataset_exact(t1, 100)).theta_hat == 1.0);
    CHECK(estimate_rte(make_dataset_exact(t2, 100)).theta_hat == 0.75);
    CHECK(mann_whitney_fully_observed(t1) == 10.0 / 16.0);
    CHECK(mann_whitney_fully_observed(t2) == oracle::mann_whitney(t2));
    CHECK(mann_whitney_fully_observed(t2) == 9.0 / 16.0);
    CHECK(mann_whitney_fully_observed(select_group(t2, "1")) == 0.75);
    CHECK(mann_whitney_fully_observed(select_group(t2, "2")) == 0.5);
    CHECK(mann_whitney_fully_observed(select_group(t1, "1")) == 0.75);
    CHECK(mann_whitney_fully_observed(select_group(t1, "2")) == 0.75);
    CHECK(estimate_rte(make_dataset_exact(select_group(t2, "1"), 100)).theta_hat == 1.0);
    CHECK(estimate_rte(make_dataset_exact(select_group(t2, "2"), 100)).theta_hat == 0.5);

    std::vector<PairedObservation> same{{1, true, 1, true, {}}, {3, true, 3, true, {}}, {2, true, 2, true, {}}};
    CHECK(mann_whitney_fully_observed(same) == 0.5);
    same[0].delta1 = false;
    CHECK_THROWS_AS(mann_whitney_fully_observed(same), NotFullyObserved);
}

TEST_CASE("streaming estimators equal the recompute oracle") {
    std::mt19937_64 rng(17);
    for (int rep = 0; rep < 300; ++rep) {
        const std::size_t n = 1 + rep % 8;
        const auto recs = random_records(rng, n, 5);
        const double tau = 5;
        const Dataset data(recs, tau);
        const auto est = estimate_rte(data);
        REQUIRE_THAT(est.theta_hat, WithinAbs(oracle::theta(recs, tau), 1e-12));
        for (double t : {0.5, 1.0, 2.0, 2.5, 3.0, 4.0, 5.0}) {
            REQUIRE_THAT(est.curves.event_survival.at(t), WithinAbs(oracle::km(recs, t), 1e-12));
            double sum = est.curves.event_survival.at(t);
            for (int c = 1; c <= 3; ++c) {
                const double f = est.curves.cumulative_incidence[c - 1].at(t);
                REQUIRE_THAT(f, WithinAbs(oracle::aj(recs, c, t), 1e-12));
                sum += f;
            }
            REQUIRE_THAT(sum, WithinAbs(1.0, 1e-12));
        }
        REQUIRE(est.theta_hat >= 0.0);
        REQUIRE(est.theta_hat <= 1.0);

        // reordering the records changes nothing
        auto shuffled = recs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        REQUIRE(estimate_rte(Dataset(shuffled, tau)).theta_hat == est.theta_hat);

        // AJ-difference identity, with ties
        const double f1 = est.curves.cumulative_incidence[0].at(tau);
        const double f2 = est.curves.cumulative_incidence[1].at(tau);
        const double f3 = est.curves.cumulative_incidence[2].at(tau);
        const double s = est.curves.event_survival.at(tau);
        // theta = F2 + F3/2 and F1 + F2 + F3 + S = 1
        REQUIRE_THAT(f1 - f2, WithinAbs((1 - f3 - s) - 2 * (est.theta_hat - 0.5 * f3), 1e-12));
    }
}

TEST_CASE("sign-test reduction") {
    std::mt19937_64 rng(23);
    for (int rep = 0; rep < 100; ++rep) {
        const auto d = fully_observed(rng, 5 + rep);
        double wins = 0;
        for (const auto& p : d) wins += p.x1 > p.x2 ? 1 : 0;
        const auto est = estimate_rte(make_dataset_exact(d, 1e9));
        REQUIRE(est.theta_hat == wins / static_cast<double>(d.size()));
    }
}

TEST_CASE("IPCW identity") {
    std::mt19937_64 rng(29);
    std::exponential_distribution<double> t1(1.0), t2(1.4), c(0.2);
    int checked = 0;
    for (int rep = 0; rep < 80; ++rep) {
        std::vector<PairedObservation> d(40);
        for (auto& p : d) {
            const double a = t1(rng), b = t2(rng), ca = c(rng), cb = c(rng);
            p = {std::min(a, ca), a <= ca, std::min(b, cb), b <= cb, std::nullopt};
        }
        const auto data = make_dataset_exact(d, 1.0);
        const auto id = ipcw_identity_check(data);
        REQUIRE_THAT(id.rhs_ipcw, WithinAbs(id.rhs, 1e-12));
        // 1 - 2 theta picks up S(tau) when nobody is left at risk at tau
        const auto est = estimate_rte(data);
        const double s_tau = est.curves.event_survival.at(1.0);
        REQUIRE_THAT(id.lhs, WithinAbs(id.rhs + s_tau, 1e-12));
        if (!est.risk_set_exhausted) {
            REQUIRE_THAT(id.lhs, WithinAbs(id.rhs, 1e-12));
            ++checked;
        }
    }
    CHECK(checked >= 20);
    SECTION("no censoring: count difference over n") {
        const auto d = fully_observed(rng, 30);
        const auto data = make_dataset_exact(d, 1.2);
        double diff = 0;
        for (const auto& r : data.records()) diff += (r.epsilon == Cause::first) - (r.epsilon == Cause::second);
        CHECK_THAT(ipcw_identity_check(data).rhs_ipcw, WithinAbs(diff / 30.0, 1e-12));
    }
}

TEST_CASE("diabetic subgroups") {
    const auto all = read_paired_csv(RTE_DATA_DIR "/diabetic_paired.csv");
    const auto juv = estimate_rte(make_dataset(select_group(all, "juvenile"), 60));
    const auto adu = estimate_rte(make_dataset(select_group(all, "adult"), 60));
    CHECK_THAT(juv.theta_hat, WithinAbs(0.598, 0.0005));
    CHECK_THAT(adu.theta_hat, WithinAbs(0.731, 0.0005));
}
