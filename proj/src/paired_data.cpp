#include "rte/paired_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

#include "csv.hpp"
#include "rte/errors.hpp"
#include "rte/random.hpp"

namespace rte {

namespace {

void check_tau(double tau) {
    if (std::isnan(tau) || tau <= 0.0) throw NonPositiveTau("tau must be positive");
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Dataset::Dataset(std::vector<CompetingRisksRecord> records, double tau)
    : records_(std::move(records)), tau_(tau) {
    check_tau(tau_);
    if (records_.empty()) throw EmptyDataset();
    for (const auto& r : records_) {
        if (!std::isfinite(r.z) || r.z < 0.0) throw NonFiniteTime("record time must be finite and nonnegative");
        if (r.z > tau_) throw ValidationError("record time exceeds tau");
    }
}

void validate(const PairedObservation& obs) {
    if (!std::isfinite(obs.x1) || !std::isfinite(obs.x2)) throw NonFiniteTime("observed times must be finite");
    if (obs.x1 < 0.0 || obs.x2 < 0.0) throw ValidationError("observed times must be nonnegative");
}

PairedObservation truncate_at_tau(const PairedObservation& obs, double tau) {
    check_tau(tau);
    validate(obs);
    PairedObservation out = obs;
    if (out.x1 >= tau) {
        out.x1 = tau;
        out.delta1 = true;
    }
    if (out.x2 >= tau) {
        out.x2 = tau;
        out.delta2 = true;
    }
    return out;
}

CompetingRisksRecord to_competing_risks(const PairedObservation& obs) {
    CompetingRisksRecord r;
    r.z = std::min(obs.x1, obs.x2);
    if (obs.x1 < obs.x2 && obs.delta1)
        r.epsilon = Cause::first;
    else if (obs.x2 < obs.x1 && obs.delta2)
        r.epsilon = Cause::second;
    else if (obs.x1 == obs.x2 && obs.delta1 && obs.delta2)
        r.epsilon = Cause::both;
    else
        r.epsilon = Cause::censored;
    return r;
}

double min_event_censoring_gap(std::span<const PairedObservation> data, std::optional<double> horizon) {
    std::vector<double> events;
    std::vector<double> censorings;
    for (const auto& o : data) {
        (o.delta1 ? events : censorings).push_back(o.x1);
        (o.delta2 ? events : censorings).push_back(o.x2);
    }
    if (horizon) events.push_back(*horizon);
    std::sort(events.begin(), events.end());
    double gap = std::numeric_limits<double>::infinity();
    if (events.empty()) return gap;
    for (double c : censorings) {
        auto it = std::lower_bound(events.begin(), events.end(), c);
        // first event >= c; equal values are ties, not gaps
        auto above = std::upper_bound(it, events.end(), c);
        if (above != events.end()) gap = std::min(gap, *above - c);
        if (it != events.begin()) gap = std::min(gap, c - *std::prev(it));
    }
    return gap;
}

std::vector<PairedObservation> break_censoring_ties(std::span<const PairedObservation> data, double jitter,
                                                    std::uint64_t seed, std::optional<double> horizon) {
    if (!(jitter > 0.0) || !std::isfinite(jitter)) throw InvalidParameter("jitter must be positive and finite");
    for (const auto& o : data) validate(o);
    const double gap = min_event_censoring_gap(data, horizon);
    if (jitter >= gap) {
        std::ostringstream msg;
        msg << "jitter " << jitter << " is not below the smallest event/censoring gap " << gap;
        throw JitterTooLarge(msg.str());
    }
    Engine rng = make_stream(seed, StreamTag::jitter);
    std::vector<PairedObservation> out(data.begin(), data.end());
    for (auto& o : out) {
        if (!o.delta1) o.x1 += jitter * uniform_open(rng);
        if (!o.delta2) o.x2 += jitter * uniform_open(rng);
    }
    return out;
}

Dataset make_dataset_exact(std::span<const PairedObservation> data, double tau) {
    check_tau(tau);
    std::vector<CompetingRisksRecord> records;
    records.reserve(data.size());
    for (const auto& o : data) records.push_back(to_competing_risks(truncate_at_tau(o, tau)));
    return Dataset(std::move(records), tau);
}

Dataset make_dataset(std::span<const PairedObservation> data, double tau, const TieBreaking& ties) {
    check_tau(tau);
    if (data.empty()) throw EmptyDataset();
    std::vector<PairedObservation> truncated;
    truncated.reserve(data.size());
    bool any_censored = false;
    double max_time = 0.0;
    for (const auto& o : data) {
        truncated.push_back(truncate_at_tau(o, tau));
        const auto& t = truncated.back();
        any_censored = any_censored || !t.delta1 || !t.delta2;
        max_time = std::max({max_time, t.x1, t.x2});
    }
    if (ties.enabled && any_censored && max_time > 0.0) {
        const std::optional<double> horizon = std::isfinite(tau) ? std::optional<double>(tau) : std::nullopt;
        const double gap = min_event_censoring_gap(truncated, horizon);
        const double jitter = std::min(ties.relative_jitter * max_time, 0.5 * gap);
        if (jitter > 0.0) truncated = break_censoring_ties(truncated, jitter, ties.seed, horizon);
    }
    std::vector<CompetingRisksRecord> records;
    records.reserve(truncated.size());
    for (const auto& o : truncated) records.push_back(to_competing_risks(o));
    return Dataset(std::move(records), tau);
}

std::vector<PairedObservation> parse_paired_csv(const std::string& text) {
    std::vector<std::string> header;
    const auto rows = detail::read_csv_rows(text, header);
    static const std::vector<std::string> required{"x1", "delta1", "x2", "delta2"};
    if (header.size() < 4 || header.size() > 5 || !std::equal(required.begin(), required.end(), header.begin()) ||
        (header.size() == 5 && header[4] != "group"))
        throw ParseError(0, 1, "expected header 'x1,delta1,x2,delta2[,group]'");
    const bool has_group = header.size() == 5;

    auto parse_delta = [](const std::string& field, std::size_t row, std::size_t column, const char* name) {
        const long v = detail::parse_integer(field, row, column);
        if (v != 0 && v != 1)
            throw ValidationError("row " + std::to_string(row) + ": " + name + " must be 0 or 1, got " +
                                  std::to_string(v));
        return v == 1;
    };

    std::vector<PairedObservation> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        if (r.fields.size() != header.size())
            throw ParseError(r.row, std::min(r.fields.size(), header.size()) + 1,
                             "expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(r.fields.size()));
        PairedObservation o;
        o.x1 = detail::parse_real(r.fields[0], r.row, 1);
        o.delta1 = parse_delta(r.fields[1], r.row, 2, "delta1");
        o.x2 = detail::parse_real(r.fields[2], r.row, 3);
        o.delta2 = parse_delta(r.fields[3], r.row, 4, "delta2");
        if (has_group) o.group = std::string(detail::trim(r.fields[4]));
        try {
            validate(o);
        } catch (const NonFiniteTime& e) {
            throw NonFiniteTime("row " + std::to_string(r.row) + ": " + e.what());
        } catch (const ValidationError& e) {
            throw ValidationError("row " + std::to_string(r.row) + ": " + e.what());
        }
        out.push_back(std::move(o));
    }
    if (out.empty()) throw EmptyDataset();
    return out;
}

std::vector<PairedObservation> read_paired_csv(const std::filesystem::path& path) {
    return parse_paired_csv(read_file(path));
}

std::vector<CompetingRisksRecord> parse_competing_risks_csv(const std::string& text) {
    std::vector<std::string> header;
    const auto rows = detail::read_csv_rows(text, header);
    if (header.size() != 2 || header[0] != "z" || header[1] != "epsilon")
        throw ParseError(0, 1, "expected header 'z,epsilon'");
    std::vector<CompetingRisksRecord> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        if (r.fields.size() != 2)
            throw ParseError(r.row, std::min<std::size_t>(r.fields.size(), 2) + 1, "expected 2 fields");
        CompetingRisksRecord rec;
        rec.z = detail::parse_real(r.fields[0], r.row, 1);
        if (!std::isfinite(rec.z) || rec.z < 0.0)
            throw ValidationError("row " + std::to_string(r.row) + ": z must be finite and nonnegative");
        const long e = detail::parse_integer(r.fields[1], r.row, 2);
        if (e < 0 || e > 3)
            throw ValidationError("row " + std::to_string(r.row) + ": epsilon must be in {0,1,2,3}");
        rec.epsilon = static_cast<Cause>(e);
        out.push_back(rec);
    }
    if (out.empty()) throw EmptyDataset();
    return out;
}

std::vector<CompetingRisksRecord> read_competing_risks_csv(const std::filesystem::path& path) {
    return parse_competing_risks_csv(read_file(path));
}

std::string format_competing_risks_csv(std::span<const CompetingRisksRecord> records) {
    std::ostringstream out;
    out.precision(17);
    out << "z,epsilon\n";
    for (const auto& r : records) out << r.z << ',' << static_cast<int>(r.epsilon) << '\n';
    return out.str();
}

std::vector<std::string> group_labels(std::span<const PairedObservation> data) {
    std::vector<std::string> labels;
    for (const auto& o : data) {
        const std::string label = o.group.value_or("");
        if (std::find(labels.begin(), labels.end(), label) == labels.end()) labels.push_back(label);
    }
    return labels;
}

std::vector<PairedObservation> select_group(std::span<const PairedObservation> data, const std::string& label) {
    std::vector<PairedObservation> out;
    for (const auto& o : data)
        if (o.group.value_or("") == label) out.push_back(o);
    return out;
}

}  // namespace rte
