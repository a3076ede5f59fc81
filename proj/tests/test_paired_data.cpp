#include <catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "rte/errors.hpp"
#include "rte/estimators.hpp"
#include "rte/paired_data.hpp"

using namespace rte;

namespace {

PairedObservation pair(double x1, bool d1, double x2, bool d2) { return {x1, d1, x2, d2, std::nullopt}; }

CompetingRisksRecord cr(double x1, bool d1, double x2, bool d2) { return to_competing_risks(pair(x1, d1, x2, d2)); }

}  // namespace

TEST_CASE("truncation at tau") {
    CHECK(truncate_at_tau(pair(5, false, 2, true), 3) == pair(3, true, 2, true));
    CHECK(truncate_at_tau(pair(1, true, 2, false), 10) == pair(1, true, 2, false));
    CHECK(truncate_at_tau(pair(3, false, 3, false), 3) == pair(3, true, 3, true));
}

TEST_CASE("competing-risks classification") {
    CHECK(cr(2, true, 1, true) == CompetingRisksRecord{1, Cause::second});
    CHECK(cr(3, false, 5, true) == CompetingRisksRecord{3, Cause::censored});
    CHECK(cr(4, true, 4, true) == CompetingRisksRecord{4, Cause::both});
    CHECK(cr(2, true, 5, false) == CompetingRisksRecord{2, Cause::first});
    // equal times, one failure: conservative reading
    CHECK(cr(4, true, 4, false).epsilon == Cause::censored);
    CHECK(cr(4, false, 4, false).epsilon == Cause::censored);
}

TEST_CASE("classification is exhaustive and z is the minimum") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> t(0, 6), d(0, 1);
    std::array<std::size_t, 4> seen{};
    for (int i = 0; i < 100000; ++i) {
        const auto p = truncate_at_tau(pair(t(rng), d(rng), t(rng), d(rng)), 5.0);
        const auto r = to_competing_risks(p);
        REQUIRE(r.z == std::min(p.x1, p.x2));
        int fired = 0;
        fired += (p.x1 < p.x2 && p.delta1) ? 1 : 0;
        fired += (p.x2 < p.x1 && p.delta2) ? 2 : 0;
        fired += (p.x1 == p.x2 && p.delta1 && p.delta2) ? 3 : 0;
        REQUIRE(static_cast<int>(r.epsilon) == fired);
        ++seen[static_cast<int>(r.epsilon)];
    }
    for (auto c : seen) CHECK(c > 0);
}

TEST_CASE("truncation is idempotent") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> t(0, 4);
    for (int i = 0; i < 1000; ++i) {
        const auto p = pair(t(rng), i % 2, t(rng), i % 3 == 0);
        const auto once = truncate_at_tau(p, 2.5);
        REQUIRE(truncate_at_tau(once, 2.5) == once);
    }
}

TEST_CASE("classification commutes with increasing time maps") {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> t(1, 5), d(0, 1);
    for (int i = 0; i < 2000; ++i) {
        const auto p = pair(t(rng), d(rng), t(rng), d(rng));
        auto q = p;
        q.x1 = std::exp(p.x1) + 3;
        q.x2 = std::exp(p.x2) + 3;
        const auto a = to_competing_risks(p);
        const auto b = to_competing_risks(q);
        REQUIRE(a.epsilon == b.epsilon);
        REQUIRE(b.z == std::exp(a.z) + 3);
    }
}

TEST_CASE("censoring-tie jitter") {
    SECTION("no censorings: unchanged") {
        std::vector<PairedObservation> d{pair(1, true, 2, true), pair(3, true, 1, true)};
        CHECK(break_censoring_ties(d, 1e-9, 1) == d);
    }
    SECTION("censored time moves into (x, x + jitter)") {
        std::vector<PairedObservation> d{pair(2, false, 1, true)};
        const auto j = break_censoring_ties(d, 1e-9, 1);
        CHECK(j[0].x1 > 2.0);
        CHECK(j[0].x1 < 2.0 + 1e-9);
        CHECK(j[0].x2 == 1.0);
    }
    SECTION("jitter must stay below the event/censoring gap") {
        std::vector<PairedObservation> d{pair(2, false, 5, true), pair(2.5, true, 6, true)};
        CHECK(min_event_censoring_gap(d) == 0.5);
        CHECK_THROWS_AS(break_censoring_ties(d, 0.5, 1), JitterTooLarge);
        CHECK_NOTHROW(break_censoring_ties(d, 0.4, 1));
    }
    SECTION("a censoring tied with an event stays at risk at the event") {
        // pair A fails (treatment 2) at 2.0; pair B is censored at 2.0
        std::vector<PairedObservation> d{pair(5, true, 2, true), pair(2, false, 7, true), pair(9, true, 8, true)};
        const auto exact = make_dataset_exact(d, 10);
        const auto jittered = make_dataset(d, 10, {true, 1e-9, 4});
        const auto cp_exact = counting_processes(exact);
        const auto cp_jit = counting_processes(jittered);
        // hand enumeration: at u = 2 both A and B are at risk, plus C
        CHECK(cp_jit.event_times.front() == 2.0);
        CHECK(cp_jit.at_risk.front() == 3);
        CHECK(cp_exact.at_risk.front() == 3);
        CHECK(jittered.records()[1].z > 2.0);
        CHECK(jittered.records()[1].epsilon == Cause::censored);
    }
    SECTION("seeded and reproducible") {
        std::vector<PairedObservation> d{pair(2, false, 1, true), pair(4, true, 3, false)};
        CHECK(break_censoring_ties(d, 1e-3, 9) == break_censoring_ties(d, 1e-3, 9));
        CHECK_FALSE(break_censoring_ties(d, 1e-3, 9) == break_censoring_ties(d, 1e-3, 10));
    }
}

TEST_CASE("dataset invariants") {
    CHECK_THROWS_AS(Dataset({}, 1.0), EmptyDataset);
    CHECK_THROWS_AS(Dataset({{0.5, Cause::first}}, 0.0), NonPositiveTau);
    CHECK_THROWS_AS(Dataset({{2.0, Cause::first}}, 1.0), ValidationError);
    CHECK_THROWS_AS(validate(pair(std::numeric_limits<double>::infinity(), true, 1, true)), NonFiniteTime);
    CHECK_THROWS_AS(validate(pair(-1, true, 1, true)), ValidationError);
    // a horizon beyond every time truncates nothing
    const std::vector<PairedObservation> d{pair(2, true, 1, true)};
    CHECK(make_dataset_exact(d, 1e6).records()[0] == CompetingRisksRecord{1, Cause::second});
}

TEST_CASE("paired CSV ingestion") {
    const auto d = parse_paired_csv("x1,delta1,x2,delta2\n2,1,1,1\n4,1,3,1\n6,1,5,1\n8,1,7,1\n");
    REQUIRE(d.size() == 4);
    CHECK(d[2] == pair(6, true, 5, true));
    CHECK_FALSE(d[0].group.has_value());

    const auto g = parse_paired_csv("x1,delta1,x2,delta2,group\n1,0,2,1,a\n3,1,2,0,b\n4,1,1,1,a\n");
    CHECK(group_labels(g) == std::vector<std::string>{"a", "b"});
    CHECK(select_group(g, "a").size() == 2);

    CHECK_THROWS_AS(parse_paired_csv("x1,delta1,x2,delta2\n"), EmptyDataset);
    CHECK_THROWS_AS(parse_paired_csv("x1,delta1,x2,delta2\n1,2,3,1\n"), ValidationError);
    CHECK_THROWS_AS(parse_paired_csv("x1,delta1,x2,delta2\n1,1,nan,1\n"), NonFiniteTime);
    try {
        parse_paired_csv("x1,delta1,x2,delta2\n1,1,2,1\n1,1,abc,1\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.row() == 2);
        CHECK(e.column() == 3);
    }
    CHECK_THROWS_AS(parse_paired_csv("a,b\n1,2\n"), ParseError);
}

TEST_CASE("competing-risks CSV round trip") {
    const std::vector<CompetingRisksRecord> recs{{1.5, Cause::first}, {0.1, Cause::censored}, {2.25, Cause::both},
                                                 {1.0 / 3.0, Cause::second}};
    CHECK(parse_competing_risks_csv(format_competing_risks_csv(recs)) == recs);
    CHECK_THROWS_AS(parse_competing_risks_csv("z,epsilon\n1,4\n"), ValidationError);
}
