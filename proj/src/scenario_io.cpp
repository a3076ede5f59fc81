#include "rte/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <sstream>

#include "json.hpp"

#include "rte/errors.hpp"

namespace rte {

namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& path, const std::string& reason) {
    throw ValidationError("scenario field '" + path + "': " + reason);
}

std::string child(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : path + "." + std::string(key);
}

void check_keys(const Json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) fail(child(path, key), "unknown field");
    }
}

const Json& require(const Json& obj, const std::string& path, std::string_view key) {
    auto it = obj.find(std::string(key));
    if (it == obj.end()) fail(child(path, key), "missing");
    return *it;
}

// offset + scale * departure
struct Value {
    double offset = 0.0;
    double scale = 0.0;

    double at(double departure) const { return offset + scale * departure; }
};

Value parse_value(const Json& j, const std::string& path, const ConstantResolver& constants) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "$departure") return {0.0, 1.0};
        if (s.size() > 1 && s[0] == '@') {
            std::optional<double> v = constants ? constants(std::string_view(s).substr(1)) : std::nullopt;
            if (!v) fail(path, "unknown constant '" + s + "'");
            return {*v, 0.0};
        }
        fail(path, "expected a number, '@constant' or '$departure', got '" + s + "'");
    }
    if (j.is_object()) {
        check_keys(j, path, {"ref", "scale", "offset"});
        const Json& ref = require(j, path, "ref");
        if (!ref.is_string() || ref.get<std::string>() != "departure") fail(child(path, "ref"), "must be \"departure\"");
        Value v{0.0, 1.0};
        if (j.contains("scale")) v.scale = parse_value(j["scale"], child(path, "scale"), constants).offset;
        if (j.contains("offset")) v.offset = parse_value(j["offset"], child(path, "offset"), constants).offset;
        return v;
    }
    fail(path, "expected a number");
}

struct MarginalSpec {
    Marginal::Family family = Marginal::Family::exponential;
    Value p1, p2;
    bool by_mean = false;
    std::shared_ptr<MarginalSpec> first, second;
    std::string path;

    Marginal build(double d) const {
        try {
            switch (family) {
                case Marginal::Family::exponential:
                    return Marginal::exponential(by_mean ? 1.0 / p1.at(d) : p1.at(d));
                case Marginal::Family::gompertz: return Marginal::gompertz(p1.at(d), p2.at(d));
                case Marginal::Family::uniform: return Marginal::uniform(p1.at(d));
                case Marginal::Family::mixture: return Marginal::mixture(p1.at(d), first->build(d), second->build(d));
            }
        } catch (const InvalidParameter& e) {
            fail(path, e.what());
        }
        fail(path, "unknown family");
    }
};

MarginalSpec parse_marginal(const Json& j, const std::string& path, const ConstantResolver& constants) {
    if (!j.is_object()) fail(path, "expected an object");
    const Json& fam = require(j, path, "family");
    if (!fam.is_string()) fail(child(path, "family"), "expected a string");
    const auto name = fam.get<std::string>();
    MarginalSpec m;
    m.path = path;
    if (name == "exponential") {
        check_keys(j, path, {"family", "rate", "mean"});
        m.family = Marginal::Family::exponential;
        if (j.contains("rate") == j.contains("mean")) fail(path, "give exactly one of 'rate' and 'mean'");
        m.by_mean = j.contains("mean");
        m.p1 = parse_value(j[m.by_mean ? "mean" : "rate"], child(path, m.by_mean ? "mean" : "rate"), constants);
    } else if (name == "gompertz") {
        check_keys(j, path, {"family", "shape", "rate"});
        m.family = Marginal::Family::gompertz;
        m.p1 = parse_value(require(j, path, "shape"), child(path, "shape"), constants);
        m.p2 = parse_value(require(j, path, "rate"), child(path, "rate"), constants);
    } else if (name == "uniform") {
        check_keys(j, path, {"family", "upper"});
        m.family = Marginal::Family::uniform;
        m.p1 = parse_value(require(j, path, "upper"), child(path, "upper"), constants);
    } else if (name == "mixture") {
        check_keys(j, path, {"family", "weight", "components"});
        m.family = Marginal::Family::mixture;
        m.p1 = parse_value(require(j, path, "weight"), child(path, "weight"), constants);
        const Json& comps = require(j, path, "components");
        const auto cpath = child(path, "components");
        if (!comps.is_array() || comps.size() != 2) fail(cpath, "expected an array of two distributions");
        m.first = std::make_shared<MarginalSpec>(parse_marginal(comps[0], cpath + "[0]", constants));
        m.second = std::make_shared<MarginalSpec>(parse_marginal(comps[1], cpath + "[1]", constants));
    } else {
        fail(child(path, "family"), "unknown distribution '" + name + "'");
    }
    return m;
}

double parse_upper(const Json& j, const std::string& path) {
    if (j.is_string() && j.get<std::string>() == "none") return std::numeric_limits<double>::infinity();
    if (!j.is_number()) fail(path, "expected a number or \"none\"");
    const double v = j.get<double>();
    if (!(v > 0.0)) fail(path, "must be positive");
    return v;
}

std::size_t parse_count(const Json& j, const std::string& path, std::size_t minimum) {
    if (!j.is_number_integer() || j.get<long long>() < static_cast<long long>(minimum))
        fail(path, "expected an integer >= " + std::to_string(minimum));
    return j.get<std::size_t>();
}

double parse_number(const Json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

}  // namespace

std::vector<TestSpec> parse_tests(std::string_view text) {
    std::vector<TestSpec> out;
    auto add = [&](TestSpec t) {
        for (const auto& e : out)
            if (e == t) return;
        out.push_back(t);
    };
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t comma = text.find(',', start);
        const std::string_view item =
            text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        start = comma == std::string_view::npos ? text.size() + 1 : comma + 1;
        if (item.empty()) continue;
        std::string_view m = item, t = "both";
        if (const auto dash = item.find('-'); dash != std::string_view::npos) {
            m = item.substr(0, dash);
            t = item.substr(dash + 1);
        } else if (item != "all") {
            t = "lin";
        }
        std::vector<Method> methods;
        if (m == "asy") methods = {Method::asymptotic};
        else if (m == "boot") methods = {Method::bootstrap};
        else if (m == "rand") methods = {Method::randomization};
        else if (m == "all") methods = {Method::asymptotic, Method::bootstrap, Method::randomization};
        else throw ValidationError("unknown test method '" + std::string(m) + "'");
        std::vector<Transform> transforms;
        if (t == "lin") transforms = {Transform::linear};
        else if (t == "loglog") transforms = {Transform::loglog};
        else if (t == "both") transforms = {Transform::linear, Transform::loglog};
        else throw ValidationError("unknown transform '" + std::string(t) + "'");
        for (auto me : methods)
            for (auto tr : transforms) add({me, tr});
    }
    if (out.empty()) throw ValidationError("no tests given");
    return out;
}

Study parse_study(const std::string& json_text, const ConstantResolver& constants) {
    Json root;
    try {
        root = Json::parse(json_text);
    } catch (const Json::parse_error& e) {
        throw ParseError(0, 0, std::string("scenario is not valid JSON: ") + e.what());
    }
    check_keys(root, "", {"name", "copula", "marginal1", "marginal2", "censoring", "tau", "n", "R", "B", "alpha",
                          "sided", "tests", "seed", "threads", "departure"});
    Study study;
    if (root.contains("name")) {
        if (!root["name"].is_string()) fail("name", "expected a string");
        study.name = root["name"].get<std::string>();
    }

    const Json& cop = require(root, "", "copula");
    check_keys(cop, "copula", {"family", "parameter"});
    const Json& fam = require(cop, "copula", "family");
    Copula copula;
    const std::string fam_name = fam.is_string() ? fam.get<std::string>() : std::string();
    if (fam_name == "gumbel_hougaard") copula.family = CopulaFamily::gumbel_hougaard;
    else if (fam_name == "clayton") copula.family = CopulaFamily::clayton;
    else fail("copula.family", "unknown copula '" + (fam.is_string() ? fam_name : fam.dump()) + "'");
    copula.parameter = parse_number(require(cop, "copula", "parameter"), "copula.parameter");
    try {
        validate(copula);
    } catch (const InvalidParameter& e) {
        fail("copula.parameter", e.what());
    }

    const auto m1 = std::make_shared<MarginalSpec>(parse_marginal(require(root, "", "marginal1"), "marginal1", constants));
    const auto m2 = std::make_shared<MarginalSpec>(parse_marginal(require(root, "", "marginal2"), "marginal2", constants));

    const Json& cens = require(root, "", "censoring");
    if (cens.is_object()) {
        if (cens.empty()) fail("censoring", "no censoring levels");
        for (const auto& [level, upper] : cens.items())
            study.censoring.push_back({level, parse_upper(upper, "censoring." + level)});
    } else {
        study.censoring.push_back({"", parse_upper(cens, "censoring")});
    }

    const double tau = parse_number(require(root, "", "tau"), "tau");
    if (!(tau > 0.0) || !std::isfinite(tau)) fail("tau", "must be positive and finite");

    const Json& ns = require(root, "", "n");
    if (ns.is_array()) {
        if (ns.empty()) fail("n", "empty list");
        for (std::size_t i = 0; i < ns.size(); ++i) study.sample_sizes.push_back(parse_count(ns[i], "n[" + std::to_string(i) + "]", 1));
    } else {
        study.sample_sizes.push_back(parse_count(ns, "n", 1));
    }

    ExperimentConfig& cfg = study.config;
    if (root.contains("R")) cfg.R = parse_count(root["R"], "R", 1);
    if (root.contains("B")) cfg.B = parse_count(root["B"], "B", 1);
    if (root.contains("alpha")) {
        cfg.alpha = parse_number(root["alpha"], "alpha");
        if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) fail("alpha", "must lie in (0, 1)");
    }
    if (root.contains("sided")) {
        const Json& s = root["sided"];
        const std::string v = s.is_string() ? s.get<std::string>() : "";
        if (v == "right") cfg.sided = Sided::right;
        else if (v == "left") cfg.sided = Sided::left;
        else if (v == "two") cfg.sided = Sided::two;
        else fail("sided", "expected \"right\", \"left\" or \"two\"");
    }
    if (root.contains("tests")) {
        const Json& t = root["tests"];
        std::string list;
        if (t.is_string()) {
            list = t.get<std::string>();
        } else if (t.is_array()) {
            for (const auto& e : t) {
                if (!e.is_string()) fail("tests", "expected strings");
                list += e.get<std::string>() + ",";
            }
        } else {
            fail("tests", "expected a string or an array of strings");
        }
        try {
            cfg.tests = parse_tests(list);
        } catch (const ValidationError& e) {
            fail("tests", e.what());
        }
    }
    if (root.contains("seed")) {
        if (!root["seed"].is_number_unsigned()) fail("seed", "expected a nonnegative integer");
        cfg.seed = root["seed"].get<std::uint64_t>();
    }
    if (root.contains("threads")) cfg.threads = static_cast<unsigned>(parse_count(root["threads"], "threads", 0));

    bool uses_departure = false;
    if (root.contains("departure")) {
        const Json& dep = root["departure"];
        check_keys(dep, "departure", {"name", "values"});
        if (dep.contains("name")) {
            if (!dep["name"].is_string()) fail("departure.name", "expected a string");
            study.departure_name = dep["name"].get<std::string>();
        }
        const Json& vals = require(dep, "departure", "values");
        if (!vals.is_array() || vals.empty()) fail("departure.values", "expected a nonempty array");
        for (std::size_t i = 0; i < vals.size(); ++i)
            study.departures.push_back(parse_number(vals[i], "departure.values[" + std::to_string(i) + "]"));
        uses_departure = true;
    }
    if (study.departure_name.empty()) study.departure_name = "departure";

    study.scenario_at = [copula, m1, m2, tau, name = study.name](const CensoringLevel& level, std::size_t n,
                                                                 double departure) {
        Scenario s;
        s.label = name;
        s.copula = copula;
        s.marginal1 = m1->build(departure);
        s.marginal2 = m2->build(departure);
        s.censoring_upper = level.upper;
        s.tau = tau;
        s.n = n;
        return s;
    };

    // build every scenario once so range errors surface at load time
    const std::vector<double> probe = uses_departure ? study.departures : std::vector<double>{0.0};
    for (double d : probe) study.scenario_at(study.censoring.front(), study.sample_sizes.front(), d);
    return study;
}

Study load_study(const std::filesystem::path& path, const ConstantResolver& constants) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open scenario file '" + path.string() + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return parse_study(os.str(), constants);
}

}  // namespace rte
