#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace metrolab {

// Recurring patterns by which published results appear to beat the
// independent-sensor limit without doing so. Ids and names are fixed.
struct LoopholeTag {
    int id;            // 1..10
    const char* name;
    const char* definition;
};

const LoopholeTag& loophole(int id);

// One printed figure from the reviewed publication's analysis, stored
// verbatim with its printed precision. Never mutated by recomputation.
struct PaperNumber {
    double value = 0.0;
    std::string units;
    int sigfigs = 2;
    std::string note;
};

struct Citation {
    std::string title;
    std::string venue;
    int year = 0;
    std::string doi;
};

// Declarative recomputation rule. Ops:
//   bound    - evaluate a bound kind with the given parameters
//   monomial - product of value^power factors
//   sum      - sum of values
// `post` may apply log10 to the result. `compare_to` names a PaperNumber;
// `comparison` is equals (default, 2% or printed-precision rounding),
// exceeds, or below (against `threshold` when no paper number applies).
struct RecomputeRule {
    std::string name;
    std::string op;
    std::string bound_kind;                       // op == bound
    std::map<std::string, double> params;         // op == bound
    std::vector<std::pair<double, double>> factors;  // op == monomial: (value, power)
    std::vector<double> values;                   // op == sum
    std::string post;                             // "" or "log10"
    std::string units;
    std::string compare_to;
    std::string comparison = "equals";
    std::optional<double> threshold;
    bool applicable_sql = false;  // marks the limit the reported value is judged against
};

struct ReportedUncertainty {
    double value = 0.0;
    std::string units;
    std::string estimand;
};

struct ExperimentEntry {
    std::string key;
    Citation citation;
    double n_sensors = 1.0;
    bool n_effective = false;
    std::optional<double> omega_rabi;  // rad/s
    std::optional<double> t_phase;     // s
    std::optional<double> t_total;     // s
    ReportedUncertainty reported;
    std::string claimed_limit;
    std::vector<int> loopholes;
    std::map<std::string, PaperNumber> paper_numbers;
    std::string verdict_paper;  // no | indeterminate | data-incorrect
    std::vector<std::string> insufficient;  // missing data; forces indeterminate
    std::vector<RecomputeRule> rules;
    std::vector<std::string> notes;
};

struct RecomputedValue {
    std::string name;
    double value = 0.0;
    std::string via;    // bound kind or op name
    std::string units;
    std::string compared_to;
    double paper_value = 0.0;
    double rel_diff = 0.0;
    bool compared = false;
    bool flagged = false;
};

struct Discrepancy {
    std::string name;
    double paper_value = 0.0;
    double recomputed = 0.0;
    double rel_diff = 0.0;
};

struct AuditReport {
    std::string key;
    std::vector<RecomputedValue> recomputed;
    std::vector<Discrepancy> discrepancies;
    std::string verdict_recomputed;  // "no" | "indeterminate: insufficient data"
    std::vector<std::string> missing;
    bool below_limit_detected = false;  // triggers the informational bounty note
};

// The eleven reviewed experiments, parsed from the embedded fixture files.
std::vector<ExperimentEntry> builtin_dataset();

// Raw fixture text by key (embedded copies of data/experiments/*.json).
const std::map<std::string, std::string>& builtin_dataset_sources();

// Parses one entry; schema errors name the offending field. Every numeric
// carries explicit units.
ExperimentEntry parse_entry_json(const std::string& text);
std::vector<ExperimentEntry> load_entries(const std::string& path);  // file or directory

// Reproduces the analysis arithmetic of one entry and compares against the
// stored printed figures. Differences beyond 2% relative that do not round
// to the printed precision are flagged, never overwritten.
AuditReport recompute(const ExperimentEntry& entry);

enum class ReportFormat { text, csv };
ReportFormat report_format_from_string(const std::string& s);

void render_report(std::ostream& os, std::span<const ExperimentEntry> entries,
                   std::span<const AuditReport> reports, ReportFormat format);

// Round to n significant digits (used by the comparison policy and tests).
double round_sigfigs(double x, int n);

}  // namespace metrolab
