#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rte/builtin.hpp"
#include "rte/errors.hpp"
#include "rte/estimators.hpp"
#include "rte/inference.hpp"
#include "rte/paired_data.hpp"
#include "rte/pinned.hpp"
#include "rte/report.hpp"
#include "rte/scenario_io.hpp"
#include "rte/simulation.hpp"

namespace {

enum Exit { ok = 0, usage_or_io = 1, parse = 2, validation = 3, numerical = 4 };

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw rte::Error("cannot write '" + path + "'");
    out << text;
    if (!out) throw rte::Error("write to '" + path + "' failed");
}

std::vector<rte::Method> parse_methods(const std::string& text) {
    std::vector<rte::Method> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::vector<rte::Method> add;
        if (item == "asy") add = {rte::Method::asymptotic};
        else if (item == "boot") add = {rte::Method::bootstrap};
        else if (item == "rand") add = {rte::Method::randomization};
        else if (item == "all") add = {rte::Method::asymptotic, rte::Method::bootstrap, rte::Method::randomization};
        else throw rte::ValidationError("unknown method '" + item + "'");
        for (auto m : add)
            if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
    if (out.empty()) throw rte::ValidationError("no method given");
    return out;
}

std::vector<rte::Transform> parse_transforms(const std::string& text) {
    if (text == "lin") return {rte::Transform::linear};
    if (text == "loglog") return {rte::Transform::loglog};
    if (text == "both") return {rte::Transform::linear, rte::Transform::loglog};
    throw rte::ValidationError("unknown transform '" + text + "'");
}

rte::Sided parse_sided(const std::string& text) {
    if (text == "right") return rte::Sided::right;
    if (text == "left") return rte::Sided::left;
    if (text == "two") return rte::Sided::two;
    throw rte::ValidationError("unknown side '" + text + "'");
}

struct AnalyzeOptions {
    std::string input;
    std::string input_format = "paired";
    double tau = 0.0;
    double alpha = 0.05;
    std::string sided = "two";
    std::string method = "all";
    std::string transform = "both";
    std::size_t B = 2000;
    std::uint64_t seed = 1;
    bool group_by = false;
    bool no_jitter = false;
    bool unstudentized = false;
    unsigned threads = 0;
    std::string output;
    std::string format = "table";
};

rte::GroupAnalysis analyze_dataset(const rte::Dataset& data, const AnalyzeOptions& opt, std::string group,
                                   std::size_t pairs_with_censoring) {
    rte::GroupAnalysis g;
    g.group = std::move(group);
    g.n = data.n();
    g.tau = data.tau();
    g.cause_counts = rte::cause_counts(data);
    g.pairs_with_censoring = pairs_with_censoring;
    const rte::RteEstimate est = rte::estimate_rte(data);
    g.theta_hat = est.theta_hat;
    g.sigma_hat = std::sqrt(est.sigma2_hat);
    g.variance_degenerate = est.variance_degenerate;
    g.risk_set_exhausted = est.risk_set_exhausted;

    const auto transforms = parse_transforms(opt.transform);
    for (rte::Method m : parse_methods(opt.method)) {
        rte::InferenceConfig cfg;
        cfg.method = m;
        cfg.sided = parse_sided(opt.sided);
        cfg.alpha = opt.alpha;
        cfg.B = opt.B;
        cfg.seed = opt.seed;
        cfg.threads = opt.threads;
        cfg.studentized_bootstrap = !opt.unstudentized;
        std::optional<rte::ResampleDistribution> dist;
        for (rte::Transform t : transforms) {
            cfg.transform = t;
            const std::string name = std::string(rte::to_string(m)) + "/" + std::string(rte::to_string(t));
            try {
                if (m == rte::Method::asymptotic) {
                    g.reports.push_back(rte::asymptotic_test(est, cfg));
                    continue;
                }
                if (est.variance_degenerate) throw rte::DegenerateVariance("variance estimate is not positive; too few events to studentize");
                if (!dist) dist = m == rte::Method::bootstrap ? rte::bootstrap_distribution(data, cfg)
                                                             : rte::randomization_distribution(data, cfg);
                g.reports.push_back(rte::test_and_ci(est, *dist, cfg));
            } catch (const rte::NumericalError& e) {
                g.refused.push_back(name + " refused: " + e.what());
            } catch (const rte::InvalidParameter& e) {
                g.refused.push_back(name + " refused: " + e.what());
            }
        }
    }
    return g;
}

std::size_t count_pairs_with_censoring(const std::vector<rte::PairedObservation>& obs) {
    std::size_t c = 0;
    for (const auto& o : obs) c += (!o.delta1 || !o.delta2) ? 1 : 0;
    return c;
}

rte::TieBreaking ties_for(const AnalyzeOptions& opt) {
    rte::TieBreaking ties;
    ties.enabled = !opt.no_jitter;
    ties.seed = opt.seed;
    return ties;
}

int cmd_analyze(const AnalyzeOptions& opt) {
    if (opt.format != "table" && opt.format != "json-like")
        throw rte::ValidationError("--format must be 'table' or 'json-like'");
    std::vector<rte::GroupAnalysis> groups;
    if (opt.input_format == "competing-risks") {
        if (opt.group_by) throw rte::ValidationError("--group-by needs paired input with a group column");
        rte::Dataset data(rte::read_competing_risks_csv(opt.input), opt.tau);
        groups.push_back(analyze_dataset(data, opt, "", 0));
    } else if (opt.input_format == "paired") {
        const auto obs = rte::read_paired_csv(opt.input);
        if (opt.group_by) {
            const auto labels = rte::group_labels(obs);
            if (labels.empty()) throw rte::ValidationError("--group-by: input has no group column");
            for (const auto& label : labels) {
                const auto sub = rte::select_group(obs, label);
                groups.push_back(analyze_dataset(rte::make_dataset(sub, opt.tau, ties_for(opt)), opt, label,
                                                 count_pairs_with_censoring(sub)));
            }
        } else {
            groups.push_back(analyze_dataset(rte::make_dataset(obs, opt.tau, ties_for(opt)), opt, "",
                                             count_pairs_with_censoring(obs)));
        }
    } else {
        throw rte::ValidationError("--input-format must be 'paired' or 'competing-risks'");
    }

    const std::string json = rte::format_analysis_json(groups);
    std::cout << (opt.format == "table" ? rte::format_analysis_table(groups) : json);
    if (!opt.output.empty()) write_file(opt.output, json);
    // the estimates are still reported; the exit code flags that no test could be run
    const bool none_run = std::all_of(groups.begin(), groups.end(), [](const auto& g) { return g.reports.empty(); });
    return none_run ? numerical : ok;
}

int cmd_transform(const std::string& input, double tau, const std::string& output, bool no_jitter,
                  std::uint64_t seed) {
    const auto obs = rte::read_paired_csv(input);
    rte::TieBreaking ties;
    ties.enabled = !no_jitter;
    ties.seed = seed;
    const rte::Dataset data = rte::make_dataset(obs, tau, ties);
    const std::string csv = rte::format_competing_risks_csv(data.records());
    if (output.empty()) {
        std::cout << csv;
    } else {
        write_file(output, csv);
    }
    const auto c = rte::cause_counts(data);
    const std::size_t with_cens = count_pairs_with_censoring(obs);
    std::cerr << "n=" << data.n() << " epsilon0=" << c[0] << " epsilon1=" << c[1] << " epsilon2=" << c[2]
              << " epsilon3=" << c[3] << " pairs_with_censoring=" << with_cens << " (" << std::fixed
              << std::setprecision(1) << 100.0 * static_cast<double>(with_cens) / static_cast<double>(obs.size())
              << "%)\n";
    return ok;
}

struct SimulateOptions {
    std::string scenario;
    std::optional<std::size_t> R, B;
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha;
    std::vector<std::size_t> n;
    std::vector<double> departures;
    std::string tests;
    std::optional<unsigned> threads;
    std::string output;
    std::string plot_data;
};

rte::Study load_with_overrides(const SimulateOptions& opt) {
    rte::Study study = rte::load_study(opt.scenario, rte::pinned::resolver());
    if (opt.R) study.config.R = *opt.R;
    if (opt.B) study.config.B = *opt.B;
    if (opt.seed) study.config.seed = *opt.seed;
    if (opt.alpha) study.config.alpha = *opt.alpha;
    if (opt.threads) study.config.threads = *opt.threads;
    if (!opt.n.empty()) study.sample_sizes = opt.n;
    if (!opt.departures.empty()) study.departures = opt.departures;
    if (!opt.tests.empty()) study.config.tests = rte::parse_tests(opt.tests);
    if (study.config.R < 1) throw rte::ValidationError("--R must be at least 1");
    return study;
}

int cmd_simulate(const SimulateOptions& opt, bool power) {
    const rte::Study study = load_with_overrides(opt);
    std::vector<double> deps = study.departures;
    if (power && deps.empty()) throw rte::ValidationError("scenario field 'departure': missing for simulate-power");
    if (!power) deps = {0.0};
    std::vector<rte::StudyCell> cells;
    for (const auto& level : study.censoring)
        for (double d : deps)
            for (std::size_t n : study.sample_sizes) {
                const rte::Scenario s = study.scenario_at(level, n, d);
                cells.push_back({level.name, level.upper, n, d, rte::run_size_experiment(s, study.config)});
            }
    const std::string dep_name = power ? study.departure_name : "";
    const std::string table =
        power ? rte::format_power_table_csv(cells, dep_name) : rte::format_size_table_csv(cells);
    if (power) {
        std::cout << table;
    } else {
        std::cout << rte::format_size_table(study.name, cells);
    }
    if (!opt.output.empty()) write_file(opt.output, table);
    if (!opt.plot_data.empty()) write_file(opt.plot_data, rte::format_study_long_csv(study.name, cells, dep_name));
    return ok;
}

int cmd_calibrate(std::size_t N, std::uint64_t seed, const std::string& target) {
    int found = 0;
    for (const auto& spec : rte::builtin::null_calibrations(seed, N)) {
        if (!target.empty() && target != spec.name) continue;
        ++found;
        const rte::CalibrationResult r = rte::calibrate_null(spec);
        for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
        std::cout << std::setprecision(8) << spec.name << " = " << r.parameter << "  theta=" << r.theta
                  << "  iterations=" << r.iterations;
        if (const auto pinned = rte::pinned::lookup(spec.name)) std::cout << "  pinned=" << *pinned;
        std::cout << "\n";
    }
    if (found == 0) throw rte::ValidationError("unknown calibration target '" + target + "'");
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relative treatment effect for paired censored survival data"};
    app.require_subcommand(1);

    AnalyzeOptions a;
    auto* analyze = app.add_subcommand("analyze", "estimate theta with tests and confidence intervals");
    analyze->add_option("--input", a.input, "paired CSV (x1,delta1,x2,delta2[,group])")->required();
    analyze->add_option("--input-format", a.input_format, "paired | competing-risks")->capture_default_str();
    analyze->add_option("--tau", a.tau, "time horizon")->required();
    analyze->add_option("--alpha", a.alpha)->capture_default_str();
    analyze->add_option("--sided", a.sided, "left | right | two")->capture_default_str();
    analyze->add_option("--method", a.method, "asy | boot | rand | all (comma separated)")->capture_default_str();
    analyze->add_option("--transform", a.transform, "lin | loglog | both")->capture_default_str();
    analyze->add_option("--B", a.B, "resampling iterations")->capture_default_str();
    analyze->add_option("--seed", a.seed)->capture_default_str();
    analyze->add_option("--threads", a.threads, "worker threads (0: RTE_THREADS or hardware)");
    analyze->add_flag("--group-by", a.group_by, "analyze each group separately");
    analyze->add_flag("--no-jitter", a.no_jitter, "do not break event/censoring ties");
    analyze->add_flag("--unstudentized-bootstrap", a.unstudentized);
    analyze->add_option("--output", a.output, "also write the JSON report here");
    analyze->add_option("--format", a.format, "table | json-like")->capture_default_str();

    std::string t_input, t_output;
    double t_tau = 0.0;
    bool t_no_jitter = false;
    std::uint64_t t_seed = 1;
    auto* transform = app.add_subcommand("transform", "write the competing-risks form of a paired file");
    transform->add_option("--input", t_input)->required();
    transform->add_option("--tau", t_tau)->required();
    transform->add_option("--output", t_output, "z,epsilon CSV (default stdout)");
    transform->add_option("--seed", t_seed)->capture_default_str();
    transform->add_flag("--no-jitter", t_no_jitter);

    SimulateOptions s;
    auto add_sim = [&](CLI::App* sub) {
        sub->add_option("--scenario", s.scenario, "scenario JSON file")->required();
        sub->add_option("--R", s.R, "replications");
        sub->add_option("--B", s.B, "resampling iterations per replication");
        sub->add_option("--seed", s.seed);
        sub->add_option("--alpha", s.alpha);
        sub->add_option("--n", s.n, "sample sizes");
        sub->add_option("--tests", s.tests, "e.g. asy-lin,rand-both or all");
        sub->add_option("--threads", s.threads);
        sub->add_option("--output", s.output, "table CSV");
        sub->add_option("--plot-data", s.plot_data, "long-format CSV");
    };
    auto* sim_size = app.add_subcommand("simulate-size", "empirical size of the tests");
    add_sim(sim_size);
    auto* sim_power = app.add_subcommand("simulate-power", "empirical power along a departure axis");
    add_sim(sim_power);
    sim_power->add_option("--departures", s.departures, "departure values");

    std::size_t c_n = 1'000'000;
    std::uint64_t c_seed = 20211;
    std::string c_target;
    auto* calibrate = app.add_subcommand("calibrate", "recompute the calibrated null parameters");
    calibrate->add_option("--N", c_n, "pairs per candidate")->capture_default_str();
    calibrate->add_option("--seed", c_seed)->capture_default_str();
    calibrate->add_option("--target", c_target, "one calibration name (default: all)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage_or_io;
    }

    try {
        if (*analyze) return cmd_analyze(a);
        if (*transform) return cmd_transform(t_input, t_tau, t_output, t_no_jitter, t_seed);
        if (*sim_size) return cmd_simulate(s, false);
        if (*sim_power) return cmd_simulate(s, true);
        if (*calibrate) return cmd_calibrate(c_n, c_seed, c_target);
    } catch (const rte::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return parse;
    } catch (const rte::ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return validation;
    } catch (const rte::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return numerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return usage_or_io;
    }
    return usage_or_io;
}
