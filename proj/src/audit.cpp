#include "metrolab/audit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "metrolab/bounds.hpp"

namespace metrolab {

using nlohmann::json;

namespace {

const LoopholeTag kLoopholes[10] = {
    {1, "ForgetTime",
     "uncertainty quoted without counting the full wall-clock duration of the measurement"},
    {2, "MultipleIndependent",
     "comparison against a 1/sqrt(T) baseline that presumes many independent repetitions instead "
     "of one optimized run"},
    {3, "ScalingIsntEverything",
     "a steeper scaling exponent is reported while the absolute uncertainty never drops below the "
     "limit"},
    {4, "ImperfectIsntLimit",
     "improvement is measured against an imperfect reference experiment rather than the limit "
     "itself"},
    {5, "ReducedProbability",
     "post-selected uncertainty ignores the reduced success probability of the selected events"},
    {6, "HiddenResources",
     "resources spent preparing the probe state are left out of the accounting"},
    {7, "NoiseNotUncertainty",
     "reduced noise is reported without the signal, so no uncertainty improvement is established"},
    {8, "PriorInformation",
     "the prior uncertainty was already below the limit before the measurement started"},
    {9, "ApplesAndOranges",
     "the estimated parameter is not in the class the quoted limit applies to"},
    {10, "SubstitutionObfuscation",
     "substitutions between sensor phase, drive phase and particle counts leave the estimation "
     "task undefined"},
};

}  // namespace

const LoopholeTag& loophole(int id) {
    if (id < 1 || id > 10) throw std::invalid_argument("loophole id must be 1..10");
    return kLoopholes[id - 1];
}

double round_sigfigs(double x, int n) {
    if (x == 0.0 || !std::isfinite(x)) return x;
    double mag = std::floor(std::log10(std::abs(x)));
    double scale = std::pow(10.0, static_cast<double>(n - 1) - mag);
    return std::round(x * scale) / scale;
}

namespace {

[[noreturn]] void schema_error(const std::string& key, const std::string& field,
                               const std::string& why) {
    throw std::invalid_argument("experiment entry '" + key + "': field '" + field + "' " + why);
}

double quantity_value(const json& j, const std::string& key, const std::string& field) {
    if (!j.is_object()) schema_error(key, field, "must be an object with value and units");
    if (!j.contains("value") || !j["value"].is_number())
        schema_error(key, field, "is missing a numeric 'value'");
    if (!j.contains("units") || !j["units"].is_string())
        schema_error(key, field, "is missing string 'units' (every numeric carries units)");
    return j["value"].get<double>();
}

PaperNumber parse_paper_number(const json& j, const std::string& key, const std::string& field) {
    PaperNumber p;
    p.value = quantity_value(j, key, field);
    p.units = j["units"].get<std::string>();
    if (!j.contains("sigfigs") || !j["sigfigs"].is_number_integer())
        schema_error(key, field, "is missing integer 'sigfigs' (printed precision)");
    p.sigfigs = j["sigfigs"].get<int>();
    if (p.sigfigs < 1) schema_error(key, field, "has sigfigs < 1");
    if (j.contains("note")) p.note = j["note"].get<std::string>();
    return p;
}

RecomputeRule parse_rule(const json& j, const std::string& key) {
    RecomputeRule r;
    if (!j.contains("name") || !j["name"].is_string()) schema_error(key, "rules[].name", "missing");
    r.name = j["name"].get<std::string>();
    const std::string field = "rules['" + r.name + "']";
    if (!j.contains("op") || !j["op"].is_string()) schema_error(key, field + ".op", "missing");
    r.op = j["op"].get<std::string>();

    if (r.op == "bound") {
        if (!j.contains("kind")) schema_error(key, field + ".kind", "missing for op=bound");
        r.bound_kind = j["kind"].get<std::string>();
        bound_kind_from_string(r.bound_kind);  // validates the name
        if (!j.contains("params") || !j["params"].is_object())
            schema_error(key, field + ".params", "missing for op=bound");
        for (auto& [k, v] : j["params"].items()) {
            if (!v.is_number()) schema_error(key, field + ".params." + k, "must be numeric");
            r.params[k] = v.get<double>();
        }
    } else if (r.op == "monomial") {
        if (!j.contains("factors") || !j["factors"].is_array() || j["factors"].empty())
            schema_error(key, field + ".factors", "missing for op=monomial");
        for (const auto& f : j["factors"]) {
            if (!f.is_array() || f.size() != 2)
                schema_error(key, field + ".factors", "entries must be [value, power] pairs");
            r.factors.emplace_back(f[0].get<double>(), f[1].get<double>());
        }
    } else if (r.op == "sum") {
        if (!j.contains("values") || !j["values"].is_array() || j["values"].empty())
            schema_error(key, field + ".values", "missing for op=sum");
        for (const auto& v : j["values"]) r.values.push_back(v.get<double>());
    } else {
        schema_error(key, field + ".op", "must be bound|monomial|sum");
    }

    if (j.contains("post")) {
        r.post = j["post"].get<std::string>();
        if (r.post != "log10") schema_error(key, field + ".post", "only log10 is supported");
    }
    if (!j.contains("units") || !j["units"].is_string())
        schema_error(key, field + ".units", "missing (every numeric carries units)");
    r.units = j["units"].get<std::string>();
    if (j.contains("compare_to")) r.compare_to = j["compare_to"].get<std::string>();
    if (j.contains("comparison")) r.comparison = j["comparison"].get<std::string>();
    if (r.comparison != "equals" && r.comparison != "exceeds" && r.comparison != "below")
        schema_error(key, field + ".comparison", "must be equals|exceeds|below");
    if (j.contains("threshold")) r.threshold = j["threshold"].get<double>();
    if (j.contains("applicable_sql")) r.applicable_sql = j["applicable_sql"].get<bool>();
    return r;
}

}  // namespace

ExperimentEntry parse_entry_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("experiment entry: JSON parse error: ") + e.what());
    }
    if (!j.contains("key") || !j["key"].is_string())
        throw std::invalid_argument("experiment entry: field 'key' missing");
    ExperimentEntry e;
    e.key = j["key"].get<std::string>();

    if (!j.contains("citation")) schema_error(e.key, "citation", "missing");
    const json& c = j["citation"];
    e.citation.title = c.value("title", "");
    e.citation.venue = c.value("venue", "");
    e.citation.year = c.value("year", 0);
    e.citation.doi = c.value("doi", "");

    if (!j.contains("n_sensors")) schema_error(e.key, "n_sensors", "missing");
    e.n_sensors = quantity_value(j["n_sensors"], e.key, "n_sensors");
    e.n_effective = j["n_sensors"].value("effective", false);

    if (j.contains("omega_rabi")) e.omega_rabi = quantity_value(j["omega_rabi"], e.key, "omega_rabi");
    if (j.contains("t_phase")) e.t_phase = quantity_value(j["t_phase"], e.key, "t_phase");
    if (j.contains("t_total")) e.t_total = quantity_value(j["t_total"], e.key, "t_total");

    if (!j.contains("reported_uncertainty")) schema_error(e.key, "reported_uncertainty", "missing");
    const json& ru = j["reported_uncertainty"];
    e.reported.value = quantity_value(ru, e.key, "reported_uncertainty");
    e.reported.units = ru["units"].get<std::string>();
    e.reported.estimand = ru.value("estimand", "");

    e.claimed_limit = j.value("claimed_limit", "");

    if (!j.contains("loopholes") || !j["loopholes"].is_array())
        schema_error(e.key, "loopholes", "missing");
    for (const auto& l : j["loopholes"]) {
        int id = l.get<int>();
        loophole(id);  // range check
        e.loopholes.push_back(id);
    }

    if (!j.contains("verdict") || !j["verdict"].is_string())
        schema_error(e.key, "verdict", "missing");
    e.verdict_paper = j["verdict"].get<std::string>();
    if (e.verdict_paper != "no" && e.verdict_paper != "indeterminate" &&
        e.verdict_paper != "data-incorrect")
        schema_error(e.key, "verdict", "must be no|indeterminate|data-incorrect");

    if (j.contains("insufficient"))
        for (const auto& s : j["insufficient"]) e.insufficient.push_back(s.get<std::string>());

    if (j.contains("paper_numbers"))
        for (auto& [name, pn] : j["paper_numbers"].items())
            e.paper_numbers[name] = parse_paper_number(pn, e.key, "paper_numbers." + name);

    if (j.contains("rules"))
        for (const auto& r : j["rules"]) e.rules.push_back(parse_rule(r, e.key));

    for (const RecomputeRule& r : e.rules)
        if (!r.compare_to.empty() && !e.paper_numbers.count(r.compare_to))
            schema_error(e.key, "rules['" + r.name + "'].compare_to",
                         "references unknown paper number '" + r.compare_to + "'");

    if (j.contains("notes"))
        for (const auto& s : j["notes"]) e.notes.push_back(s.get<std::string>());
    return e;
}

std::vector<ExperimentEntry> load_entries(const std::string& path) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    if (fs::is_directory(path)) {
        for (const auto& p : fs::directory_iterator(path))
            if (p.path().extension() == ".json") files.push_back(p.path().string());
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(path);
    }
    if (files.empty()) throw std::invalid_argument("no .json entries found under " + path);

    std::vector<ExperimentEntry> out;
    for (const std::string& f : files) {
        std::ifstream in(f);
        if (!in) throw std::runtime_error("cannot open " + f);
        std::stringstream ss;
        ss << in.rdbuf();
        out.push_back(parse_entry_json(ss.str()));
    }
    return out;
}

const std::map<std::string, std::string>& builtin_dataset_sources() {
    static const std::map<std::string, std::string> sources = {
#include "audit_builtin.inc"
    };
    return sources;
}

std::vector<ExperimentEntry> builtin_dataset() {
    std::vector<ExperimentEntry> out;
    for (const auto& [key, text] : builtin_dataset_sources()) out.push_back(parse_entry_json(text));
    return out;
}

namespace {

double eval_rule(const RecomputeRule& r, std::string& via) {
    double value = 0.0;
    if (r.op == "bound") {
        BoundQuery q;
        q.kind = bound_kind_from_string(r.bound_kind);
        auto get = [&](const char* name) -> std::optional<double> {
            auto it = r.params.find(name);
            return it == r.params.end() ? std::nullopt : std::optional<double>(it->second);
        };
        if (auto v = get("n")) q.n_sensors = *v;
        q.total_time = get("total_time");
        q.phase_time = get("phase_time");
        q.t_pi = get("t_pi");
        q.rabi = get("rabi");
        if (auto v = get("lambda")) q.lambda = *v;
        q.prior_time = get("prior_time");
        q.t_cross = get("t_cross");
        q.t_star = get("t_star");
        q.readout_factor = get("readout_factor");
        q.control_systematic = get("control_systematic");
        q.clock_cycle = get("clock_cycle");
        q.gamma = get("gamma");
        value = eval_bound(q).value;
        via = r.bound_kind;
    } else if (r.op == "monomial") {
        value = 1.0;
        for (const auto& [v, p] : r.factors) value *= std::pow(v, p);
        via = "monomial";
    } else {  // sum
        for (double v : r.values) value += v;
        via = "sum";
    }
    if (r.post == "log10") value = std::log10(value);
    return value;
}

}  // namespace

AuditReport recompute(const ExperimentEntry& entry) {
    AuditReport rep;
    rep.key = entry.key;
    rep.missing = entry.insufficient;

    for (const RecomputeRule& rule : entry.rules) {
        RecomputedValue rv;
        rv.name = rule.name;
        rv.units = rule.units;
        rv.value = eval_rule(rule, rv.via);

        if (!rule.compare_to.empty()) {
            const PaperNumber& pn = entry.paper_numbers.at(rule.compare_to);
            rv.compared = true;
            rv.compared_to = rule.compare_to;
            rv.paper_value = pn.value;
            rv.rel_diff = std::abs(rv.value - pn.value) / std::abs(pn.value);
            bool agree;
            if (rule.comparison == "exceeds")
                agree = rv.value > pn.value;
            else if (rule.comparison == "below")
                agree = rv.value < pn.value;
            else
                agree = rv.rel_diff <= 0.02 ||
                        std::abs(round_sigfigs(rv.value, pn.sigfigs) - pn.value) <=
                            1e-9 * std::abs(pn.value);
            rv.flagged = !agree;
            if (rv.flagged)
                rep.discrepancies.push_back({rule.name, pn.value, rv.value, rv.rel_diff});
        } else if (rule.threshold) {
            rv.compared = true;
            rv.compared_to = "(threshold)";
            rv.paper_value = *rule.threshold;
            rv.rel_diff = 0.0;
            bool agree = rule.comparison == "below" ? rv.value < *rule.threshold
                                                    : rv.value > *rule.threshold;
            rv.flagged = !agree;
            if (rv.flagged)
                rep.discrepancies.push_back({rule.name, *rule.threshold, rv.value, 0.0});
        }

        if (rule.applicable_sql && entry.reported.value > 0.0 &&
            entry.reported.value < rv.value)
            rep.below_limit_detected = true;

        rep.recomputed.push_back(std::move(rv));
    }

    rep.verdict_recomputed =
        entry.insufficient.empty() ? "no" : "indeterminate: insufficient data";
    return rep;
}

ReportFormat report_format_from_string(const std::string& s) {
    if (s == "text") return ReportFormat::text;
    if (s == "csv") return ReportFormat::csv;
    throw std::invalid_argument("unknown report format: " + s + " (expected text|csv)");
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

const AuditReport& report_for(std::span<const AuditReport> reports, const std::string& key) {
    for (const AuditReport& r : reports)
        if (r.key == key) return r;
    throw std::invalid_argument("render_report: no report for entry " + key);
}

void render_text(std::ostream& os, std::span<const ExperimentEntry> entries,
                 std::span<const AuditReport> reports) {
    os << "Audit of reviewed experiments: reported uncertainties vs recomputed limits\n";
    os << "===========================================================================\n\n";
    os << "key              N            reported                     verdict(review)   verdict(recomputed)\n";
    for (const ExperimentEntry& e : entries) {
        const AuditReport& r = report_for(reports, e.key);
        char line[200];
        std::snprintf(line, sizeof(line), "%-16s %-12s %-28s %-17s %s\n", e.key.c_str(),
                      (fmt(e.n_sensors) + (e.n_effective ? "*" : "")).c_str(),
                      (fmt(e.reported.value) + " " + e.reported.units).c_str(),
                      e.verdict_paper.c_str(), r.verdict_recomputed.c_str());
        os << line;
    }
    os << "(* effective sensor count)\n";

    for (const ExperimentEntry& e : entries) {
        const AuditReport& r = report_for(reports, e.key);
        os << "\n--- " << e.key << ": " << e.citation.title << " (" << e.citation.venue << " "
           << e.citation.year << ", doi:" << e.citation.doi << ")\n";
        os << "  claimed: " << e.claimed_limit << "\n";
        os << "  reported: " << fmt(e.reported.value) << " " << e.reported.units << " ["
           << e.reported.estimand << "]\n";
        os << "  loopholes:\n";
        for (int id : e.loopholes) {
            const LoopholeTag& t = loophole(id);
            os << "    [" << t.id << "] " << t.name << ": " << t.definition << "\n";
        }
        if (!r.recomputed.empty()) {
            os << "  recomputed (wall-clock time throughout):\n";
            for (const RecomputedValue& rv : r.recomputed) {
                os << "    " << rv.name << " = " << fmt(rv.value) << " " << rv.units << " (via "
                   << rv.via << ")";
                if (rv.compared) {
                    os << " vs printed " << fmt(rv.paper_value);
                    os << (rv.flagged ? "  ** FLAG" : "  ok");
                }
                os << "\n";
            }
        }
        if (r.discrepancies.empty()) {
            os << "  discrepancies: none\n";
        } else {
            os << "  discrepancies:\n";
            for (const Discrepancy& d : r.discrepancies) {
                os << "    " << d.name << ": printed " << fmt(d.paper_value) << ", recomputed "
                   << fmt(d.recomputed);
                if (d.rel_diff > 0.0) os << " (rel diff " << fmt(d.rel_diff) << ")";
                os << "\n";
            }
        }
        for (const std::string& n : e.notes) os << "  note: " << n << "\n";
        os << "  verdict (review): " << e.verdict_paper << "\n";
        os << "  verdict (recomputed): " << r.verdict_recomputed << "\n";
        if (!r.missing.empty()) {
            os << "  missing for a complete analysis:\n";
            for (const std::string& m : r.missing) os << "    - " << m << "\n";
        }
        if (r.below_limit_detected)
            os << "  NOTE: the reported value sits below the recomputed limit; a standing\n"
                  "  bounty applies to any published uncertainty below the independent-sensor\n"
                  "  limit. Re-check the time accounting before celebrating.\n";
    }
}

void render_csv(std::ostream& os, std::span<const ExperimentEntry> entries,
                std::span<const AuditReport> reports) {
    os << "key,quantity,via,units,recomputed,paper_value,rel_diff,flagged,verdict_review,"
          "verdict_recomputed\n";
    char buf[320];
    for (const ExperimentEntry& e : entries) {
        const AuditReport& r = report_for(reports, e.key);
        if (r.recomputed.empty()) {
            std::snprintf(buf, sizeof(buf), "%s,,,,,,,,%s,%s\n", e.key.c_str(),
                          e.verdict_paper.c_str(), r.verdict_recomputed.c_str());
            os << buf;
            continue;
        }
        for (const RecomputedValue& rv : r.recomputed) {
            if (rv.compared)
                std::snprintf(buf, sizeof(buf), "%s,%s,%s,%s,%.12g,%.12g,%.6g,%d,%s,%s\n",
                              e.key.c_str(), rv.name.c_str(), rv.via.c_str(), rv.units.c_str(),
                              rv.value, rv.paper_value, rv.rel_diff, rv.flagged ? 1 : 0,
                              e.verdict_paper.c_str(), r.verdict_recomputed.c_str());
            else
                std::snprintf(buf, sizeof(buf), "%s,%s,%s,%s,%.12g,,,0,%s,%s\n", e.key.c_str(),
                              rv.name.c_str(), rv.via.c_str(), rv.units.c_str(), rv.value,
                              e.verdict_paper.c_str(), r.verdict_recomputed.c_str());
            os << buf;
        }
    }
}

}  // namespace

void render_report(std::ostream& os, std::span<const ExperimentEntry> entries,
                   std::span<const AuditReport> reports, ReportFormat format) {
    if (entries.empty()) throw std::invalid_argument("render_report: empty entry list");
    if (format == ReportFormat::text)
        render_text(os, entries, reports);
    else
        render_csv(os, entries, reports);
}

}  // namespace metrolab
