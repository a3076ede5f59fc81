#include "rte/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "json.hpp"

namespace rte {

namespace {

std::string fixed(double v, int digits) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

std::string number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

std::string label_of(const InferenceReport& r) {
    const char* m = r.method == Method::asymptotic ? "asy." : r.method == Method::bootstrap ? "bs." : "rand.";
    const char* t = r.transform == Transform::linear ? "lin." : "tra.";
    return std::string(m) + " " + t;
}

std::string group_title(const GroupAnalysis& g) {
    return (g.group.empty() ? std::string("all") : g.group) + " (n=" + std::to_string(g.n) + ")";
}

template <class T, class Key>
std::vector<T> distinct(const std::vector<StudyCell>& cells, Key key) {
    std::vector<T> out;
    for (const auto& c : cells) {
        T v = key(c);
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    }
    return out;
}

std::vector<TestSpec> tests_of(const std::vector<StudyCell>& cells) {
    std::vector<TestSpec> out;
    for (const auto& c : cells)
        for (const auto& o : c.result.outcomes)
            if (std::find(out.begin(), out.end(), o.test) == out.end()) out.push_back(o.test);
    return out;
}

const TestOutcome* find_outcome(const StudyCell& c, const TestSpec& t) {
    for (const auto& o : c.result.outcomes)
        if (o.test == t) return &o;
    return nullptr;
}

}  // namespace

std::array<std::size_t, 4> cause_counts(const Dataset& data) {
    std::array<std::size_t, 4> counts{};
    for (const auto& r : data.records()) ++counts[static_cast<std::size_t>(r.epsilon)];
    return counts;
}

std::string format_p_value(double p) { return p < 0.001 ? "<0.001" : fixed(p, 3); }

std::string format_analysis_table(const std::vector<GroupAnalysis>& groups) {
    constexpr int kMethod = 12;
    constexpr int kCi = 18;
    constexpr int kP = 9;
    std::ostringstream os;
    os << std::left << std::setw(kMethod) << "";
    for (const auto& g : groups) os << std::setw(kCi + kP) << group_title(g);
    os << "\n" << std::setw(kMethod) << "";
    for (const auto& g : groups)
        os << std::setw(kCi + kP) << ("theta=" + fixed(g.theta_hat, 3) + " sigma=" + fixed(g.sigma_hat, 3));
    os << "\n" << std::setw(kMethod) << "Method";
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const double level = groups[i].reports.empty() ? 0.95 : 1.0 - groups[i].reports.front().alpha;
        os << std::setw(kCi) << (fixed(100.0 * level, 0) + "% CI") << std::setw(kP) << "p-value";
    }
    os << "\n";

    std::vector<std::string> rows;
    for (const auto& g : groups)
        for (const auto& r : g.reports)
            if (std::find(rows.begin(), rows.end(), label_of(r)) == rows.end()) rows.push_back(label_of(r));
    for (const auto& row : rows) {
        os << std::setw(kMethod) << row;
        for (const auto& g : groups) {
            auto it = std::find_if(g.reports.begin(), g.reports.end(), [&](const auto& r) { return label_of(r) == row; });
            if (it == g.reports.end()) {
                os << std::setw(kCi) << "-" << std::setw(kP) << "-";
            } else {
                os << std::setw(kCi) << ("[" + fixed(it->ci_lower, 3) + ", " + fixed(it->ci_upper, 3) + "]")
                   << std::setw(kP) << format_p_value(it->p_value);
            }
        }
        os << "\n";
    }
    for (const auto& g : groups) {
        for (const auto& why : g.refused) os << group_title(g) << ": " << why << "\n";
        if (g.risk_set_exhausted) os << group_title(g) << ": warning: risk set empty before tau\n";
    }
    return os.str();
}

std::string format_analysis_json(const std::vector<GroupAnalysis>& groups) {
    nlohmann::ordered_json doc;
    doc["groups"] = nlohmann::ordered_json::array();
    for (const auto& g : groups) {
        nlohmann::ordered_json jg;
        jg["group"] = g.group.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(g.group);
        jg["n"] = g.n;
        jg["tau"] = g.tau;
        jg["theta_hat"] = g.theta_hat;
        jg["sigma_hat"] = g.sigma_hat;
        jg["variance_degenerate"] = g.variance_degenerate;
        jg["risk_set_exhausted"] = g.risk_set_exhausted;
        jg["cause_counts"] = g.cause_counts;
        jg["pairs_with_censoring"] = g.pairs_with_censoring;
        jg["results"] = nlohmann::ordered_json::array();
        for (const auto& r : g.reports) {
            nlohmann::ordered_json jr;
            jr["method"] = std::string(to_string(r.method));
            jr["transform"] = std::string(to_string(r.transform));
            jr["sided"] = std::string(to_string(r.sided));
            jr["alpha"] = r.alpha;
            jr["statistic"] = r.statistic;
            jr["critical_lower"] = number(r.critical_lower);
            jr["critical_upper"] = number(r.critical_upper);
            jr["p_value"] = r.p_value;
            jr["ci_lower"] = r.ci_lower;
            jr["ci_upper"] = r.ci_upper;
            jr["reject"] = r.reject;
            if (r.method != Method::asymptotic) {
                jr["B"] = r.B;
                jr["replicates_used"] = r.replicates_used;
                jr["skipped"] = r.skipped;
                jr["seed"] = r.seed;
            }
            jg["results"].push_back(jr);
        }
        jg["refused"] = g.refused;
        doc["groups"].push_back(jg);
    }
    return doc.dump(2) + "\n";
}

std::string format_study_long_csv(const std::string& study, const std::vector<StudyCell>& cells,
                                  const std::string& departure_name) {
    std::ostringstream os;
    os << "study,copula,censoring_level,censoring_upper,n";
    if (!departure_name.empty()) os << "," << departure_name;
    os << ",test,R,B,alpha,sided,valid,errors,rejections,rate,mc_se,censoring_rate,competing_censoring_rate\n";
    for (const auto& c : cells) {
        for (const auto& o : c.result.outcomes) {
            os << study << "," << to_string(c.result.scenario.copula.family) << "," << c.level << ","
               << number(c.censoring_upper) << "," << c.n;
            if (!departure_name.empty()) os << "," << number(c.departure);
            os << "," << to_string(o.test) << "," << c.result.R << "," << c.result.B << "," << number(c.result.alpha)
               << "," << to_string(c.result.sided) << "," << o.valid << "," << o.errors << "," << o.rejections << ","
               << fixed(o.rate(), 6) << "," << fixed(o.mc_se(), 6) << "," << fixed(c.result.censoring_rate, 6) << ","
               << fixed(c.result.competing_censoring_rate, 6) << "\n";
        }
    }
    return os.str();
}

std::string format_size_table_csv(const std::vector<StudyCell>& cells) {
    const auto levels = distinct<std::string>(cells, [](const StudyCell& c) { return c.level; });
    const auto ns = distinct<std::size_t>(cells, [](const StudyCell& c) { return c.n; });
    const auto tests = tests_of(cells);
    std::ostringstream os;
    os << "n";
    for (const auto& l : levels)
        for (const auto& t : tests) {
            const std::string col = (l.empty() ? "" : l + "_") + to_string(t);
            os << "," << col << "," << col << "_se";
        }
    os << "\n";
    for (auto n : ns) {
        os << n;
        for (const auto& l : levels)
            for (const auto& t : tests) {
                auto it = std::find_if(cells.begin(), cells.end(),
                                       [&](const StudyCell& c) { return c.n == n && c.level == l; });
                const TestOutcome* o = it == cells.end() ? nullptr : find_outcome(*it, t);
                if (o) {
                    os << "," << fixed(100.0 * o->rate(), 2) << "," << fixed(100.0 * o->mc_se(), 2);
                } else {
                    os << ",,";
                }
            }
        os << "\n";
    }
    return os.str();
}

std::string format_power_table_csv(const std::vector<StudyCell>& cells, const std::string& departure_name) {
    const auto deps = distinct<double>(cells, [](const StudyCell& c) { return c.departure; });
    const auto ns = distinct<std::size_t>(cells, [](const StudyCell& c) { return c.n; });
    const auto levels = distinct<std::string>(cells, [](const StudyCell& c) { return c.level; });
    const auto tests = tests_of(cells);
    std::ostringstream os;
    os << (departure_name.empty() ? "departure" : departure_name);
    for (const auto& l : levels)
        for (auto n : ns)
            for (const auto& t : tests) {
                const std::string col = (l.empty() ? "" : l + "_") + "n" + std::to_string(n) + "_" + to_string(t);
                os << "," << col << "," << col << "_se";
            }
    os << "\n";
    for (double d : deps) {
        os << number(d);
        for (const auto& l : levels)
            for (auto n : ns)
                for (const auto& t : tests) {
                    auto it = std::find_if(cells.begin(), cells.end(), [&](const StudyCell& c) {
                        return c.n == n && c.level == l && c.departure == d;
                    });
                    const TestOutcome* o = it == cells.end() ? nullptr : find_outcome(*it, t);
                    if (o) {
                        os << "," << fixed(o->rate(), 4) << "," << fixed(o->mc_se(), 4);
                    } else {
                        os << ",,";
                    }
                }
        os << "\n";
    }
    return os.str();
}

std::string format_size_table(const std::string& study, const std::vector<StudyCell>& cells) {
    const auto levels = distinct<std::string>(cells, [](const StudyCell& c) { return c.level; });
    const auto ns = distinct<std::size_t>(cells, [](const StudyCell& c) { return c.n; });
    const auto tests = tests_of(cells);
    constexpr int kCol = 12;
    std::ostringstream os;
    if (!study.empty()) os << study << "\n";
    os << std::left << std::setw(6) << "n";
    for (const auto& l : levels)
        for (const auto& t : tests) os << std::setw(kCol) << ((l.empty() ? "" : l.substr(0, 3) + " ") + to_string(t));
    os << "\n";
    for (auto n : ns) {
        os << std::setw(6) << n;
        for (const auto& l : levels)
            for (const auto& t : tests) {
                auto it = std::find_if(cells.begin(), cells.end(),
                                       [&](const StudyCell& c) { return c.n == n && c.level == l; });
                const TestOutcome* o = it == cells.end() ? nullptr : find_outcome(*it, t);
                os << std::setw(kCol) << (o ? fixed(100.0 * o->rate(), 1) : std::string("-"));
            }
        os << "\n";
    }
    for (const auto& l : levels) {
        auto it = std::find_if(cells.begin(), cells.end(), [&](const StudyCell& c) { return c.level == l; });
        if (it != cells.end())
            os << "censoring " << (l.empty() ? "" : l + " ") << "U(0, " << number(it->censoring_upper)
               << "): margin censoring rate " << fixed(100.0 * it->result.censoring_rate, 1) << "%\n";
    }
    return os.str();
}

}  // namespace rte
