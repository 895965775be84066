#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "metrolab/audit.hpp"
#include "metrolab/bounds.hpp"
#include "metrolab/config.hpp"
#include "metrolab/montecarlo.hpp"
#include "metrolab/svg.hpp"
#include "metrolab/verify.hpp"

namespace {

using metrolab::BoundKind;
using metrolab::BoundQuery;
using metrolab::BoundResult;
using nlohmann::json;

constexpr const char* kSchema = "metrolab/v1";

// exit codes: 0 ok, 2 usage, 3 domain error, 4 verification failure
constexpr int kExitUsage = 2;
constexpr int kExitDomain = 3;
constexpr int kExitVerify = 4;

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

BoundKind kind_from_cli(const std::string& name) {
    std::string n = lower(name);
    if (n == "sql") return BoundKind::sql;
    if (n == "hl") return BoundKind::hl;
    if (n == "clock-single") return BoundKind::clock_single;
    if (n == "clock-lattice") return BoundKind::clock_lattice;
    if (n == "qdyne1") return BoundKind::qdyne_1;
    if (n == "qdyne-n-linear") return BoundKind::qdyne_n_linear;
    if (n == "qdyne-n-sped") return BoundKind::qdyne_n_sped;
    if (n == "qdyne-n-sqrt") return BoundKind::qdyne_n_sqrt;
    if (n == "tmin") return BoundKind::tmin;
    if (n == "prior") return BoundKind::prior;
    if (n == "sqrt-regime") return BoundKind::sqrt_regime;
    if (n == "quadratic-regime") return BoundKind::quadratic_regime;
    if (n == "phase-sql") return BoundKind::phase_sql;
    if (n == "freq-short-sql") return BoundKind::freq_short_sql;
    if (n == "rot-angle-sql") return BoundKind::rot_angle_sql;
    if (n == "rabi-sql") return BoundKind::rabi_sql;
    if (n == "bfield-sql") return BoundKind::bfield_sql;
    if (n == "leroux-allan") return BoundKind::leroux_allan;
    if (n == "exp-model") return BoundKind::exp_model;
    throw CLI::ValidationError("bounds", "unknown bound kind: " + name);
}

// rad/s -> Hz at the I/O boundary only.
double units_out(double value, const std::string& units, const std::string& pref) {
    if (pref == "hz" && units.find("rad") != std::string::npos) return value / metrolab::kTwoPi;
    return value;
}

struct BoundsArgs {
    std::string kind;
    double n = 1.0;
    std::string t;  // number or "tpi"
    double tpi = 0.0, omega = 0.0, phase_time = 0.0, lambda = 1.0;
    double prior_t0 = 0.0, tcross = 0.0, tstar = 0.0;
    double readout_c = 0.0, dwc = 0.0, tc = 0.0, gamma = 0.0;
    std::string variant = "2pi";
    std::string units = "rad";
    bool as_json = false;
};

int cmd_bounds(const BoundsArgs& a) {
    BoundQuery q;
    q.kind = kind_from_cli(a.kind);
    q.n_sensors = a.n;
    if (!a.t.empty()) {
        if (lower(a.t) == "tpi") {
            if (!(a.tpi > 0.0)) throw std::invalid_argument("--t tpi requires --tpi");
            q.total_time = a.tpi;
        } else {
            q.total_time = std::strtod(a.t.c_str(), nullptr);
        }
    }
    if (a.tpi > 0.0) q.t_pi = a.tpi;
    if (a.omega > 0.0) q.rabi = a.omega;
    if (a.phase_time > 0.0) q.phase_time = a.phase_time;
    q.lambda = a.lambda;
    if (a.prior_t0 > 0.0) q.prior_time = a.prior_t0;
    if (a.tcross > 0.0) q.t_cross = a.tcross;
    if (a.tstar > 0.0) q.t_star = a.tstar;
    if (a.readout_c > 0.0) q.readout_factor = a.readout_c;
    if (a.dwc > 0.0) q.control_systematic = a.dwc;
    if (a.tc > 0.0) q.clock_cycle = a.tc;
    if (a.gamma > 0.0) q.gamma = a.gamma;
    if (a.variant == "loose") q.variant = metrolab::TightenVariant::loose;
    else if (a.variant == "pi") q.variant = metrolab::TightenVariant::pi;
    else q.variant = metrolab::TightenVariant::two_pi;

    BoundResult r = metrolab::eval_bound(q);
    double shown = units_out(r.value, r.units, a.units);
    std::string units_label = (a.units == "hz" && r.units.find("rad") != std::string::npos)
                                  ? "Hz"
                                  : r.units;

    if (a.as_json) {
        json out;
        out["schema"] = kSchema;
        out["command"] = "bounds";
        out["kind"] = metrolab::to_string(q.kind);
        out["value"] = shown;
        out["units"] = units_label;
        out["strict"] = r.strict;
        out["validity"] = r.validity;
        json flags = json::array();
        for (auto f : r.assumptions) flags.push_back(metrolab::to_string(f));
        out["assumptions"] = flags;
        std::cout << out.dump(2) << "\n";
    } else {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.10g", shown);
        std::cout << buf << " " << units_label
                  << (r.strict ? "  (strict lower bound)" : "  (empirical model)") << "\n";
        std::cout << "valid: " << r.validity << "\n";
        if (!r.assumptions.empty()) {
            std::cout << "assumptions:";
            for (auto f : r.assumptions) std::cout << " " << metrolab::to_string(f);
            std::cout << "\n";
        }
    }
    return 0;
}

metrolab::SweepSpec spec_from_config(const metrolab::KeyValueConfig& cfg) {
    metrolab::SweepSpec spec;
    spec.variable = metrolab::sweep_variable_from_string(cfg.get_string("variable", "T"));
    spec.grid = cfg.get_double_list("grid");
    spec.trials = static_cast<int>(cfg.get_long("trials", 200));
    std::string est = cfg.get_string("estimator", "periodogram-fit");
    if (est == "periodogram-fit") spec.estimator = metrolab::EstimatorMethod::periodogram_fit;
    else if (est == "mle") spec.estimator = metrolab::EstimatorMethod::mle;
    else throw std::invalid_argument("config key 'estimator': expected periodogram-fit|mle");
    spec.master_seed = cfg.get_u64("master_seed", 424242ull);
    spec.base.t_pi = cfg.get_double("t_pi", 5e-6);
    spec.base.detuning = cfg.get_double("detuning", metrolab::kTwoPi * 20833.0);
    spec.base.omega0 = cfg.get_double("omega0", metrolab::kTwoPi * 5e6);
    spec.base.readout.fidelity0 = cfg.get_double("fidelity0", 1.0);
    spec.base.readout.fidelity1 = cfg.get_double("fidelity1", 1.0);
    spec.base.readout.readout_time = cfg.get_double("readout_time", 0.0);
    spec.base.readout.init_time = cfg.get_double("init_time", 0.0);
    spec.base.n_measurements = cfg.get_long("n_measurements", 1000);
    std::string law = cfg.get_string("phase_law", "half_rate");
    if (law == "half_rate") spec.base.phase_law = metrolab::PhaseLaw::half_rate;
    else if (law == "full_rate") spec.base.phase_law = metrolab::PhaseLaw::full_rate;
    else throw std::invalid_argument("config key 'phase_law': expected half_rate|full_rate");
    if (spec.grid.empty()) {
        // default T grid: 20..2000 pi-times
        for (double mult : {20.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 2000.0})
            spec.grid.push_back(mult * spec.base.t_pi);
    }
    return spec;
}

void print_explain() {
    std::cout << "# simulate config keys and defaults\n"
              << "variable = T              # T | M | t_pi | detuning | fidelity\n"
              << "grid =                    # comma list; default 20..2000 x t_pi for T\n"
              << "trials = 200\n"
              << "estimator = periodogram-fit   # periodogram-fit | mle\n"
              << "master_seed = 424242      # METROLAB_SEED env overrides\n"
              << "t_pi = 5e-6\n"
              << "detuning = 130899.69      # rad/s (effective signal-control beat)\n"
              << "omega0 = 31415926.5\n"
              << "fidelity0 = 1.0\n"
              << "fidelity1 = 1.0\n"
              << "readout_time = 0\n"
              << "init_time = 0\n"
              << "n_measurements = 1000     # used when the grid drives another variable\n"
              << "phase_law = half_rate     # half_rate | full_rate\n";
}

struct SimArgs {
    std::string config_path;
    long trials_override = -1;
    std::string seed_override;
    std::string out_prefix = "sweep";
    bool serial = false;
    bool explain = false;
    bool as_json = false;
};

int cmd_simulate(const SimArgs& a) {
    if (a.explain) {
        print_explain();
        return 0;
    }
    metrolab::KeyValueConfig cfg;
    if (!a.config_path.empty()) cfg = metrolab::KeyValueConfig::parse_file(a.config_path);
    metrolab::SweepSpec spec = spec_from_config(cfg);
    if (a.trials_override >= 0) spec.trials = static_cast<int>(a.trials_override);
    if (!a.seed_override.empty())
        spec.master_seed = std::strtoull(a.seed_override.c_str(), nullptr, 10);
    if (const char* env = std::getenv("METROLAB_SEED"))
        spec.master_seed = std::strtoull(env, nullptr, 10);

    metrolab::SweepResult res = metrolab::run_sweep(
        spec, a.serial ? metrolab::ExecPolicy::serial : metrolab::ExecPolicy::parallel);

    {
        std::ofstream csv(a.out_prefix + ".csv", std::ios::binary);
        if (!csv) throw std::runtime_error("cannot write " + a.out_prefix + ".csv");
        metrolab::write_sweep_csv(csv, res);
    }
    {
        std::ofstream js(a.out_prefix + ".json", std::ios::binary);
        if (!js) throw std::runtime_error("cannot write " + a.out_prefix + ".json");
        metrolab::write_sweep_json(js, res);
    }

    double worst_lo = 1e300, worst_hi = 0.0;
    for (const auto& p : res.points) {
        if (!(p.bound_qdyne > 0.0) || !(p.robust_std > 0.0)) continue;
        double ratio = p.robust_std / p.bound_qdyne;
        worst_lo = std::min(worst_lo, ratio);
        worst_hi = std::max(worst_hi, ratio);
    }
    if (a.as_json) {
        json out;
        out["schema"] = kSchema;
        out["command"] = "simulate";
        out["csv"] = a.out_prefix + ".csv";
        out["json"] = a.out_prefix + ".json";
        out["points"] = res.points.size();
        if (res.fitted_exponent) {
            out["exponent"] = res.fitted_exponent->slope;
            out["exponent_ci"] = {res.fitted_exponent->ci_low, res.fitted_exponent->ci_high};
        }
        out["bound_ratio_min"] = worst_lo;
        out["bound_ratio_max"] = worst_hi;
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "sweep written to " << a.out_prefix << ".csv / .json\n";
        if (res.fitted_exponent) {
            char buf[128];
            std::snprintf(buf, sizeof(buf), "fitted exponent: %.4f  (95%% CI %.4f .. %.4f)\n",
                          res.fitted_exponent->slope, res.fitted_exponent->ci_low,
                          res.fitted_exponent->ci_high);
            std::cout << buf;
        }
        char buf[128];
        std::snprintf(buf, sizeof(buf), "std/bound ratio across points: %.3f .. %.3f\n", worst_lo,
                      worst_hi);
        std::cout << buf;
    }
    return 0;
}

int print_verify(const std::vector<metrolab::VerifyReport>& reports, bool as_json) {
    bool all = true;
    if (as_json) {
        json out;
        out["schema"] = kSchema;
        out["command"] = "verify";
        json suites = json::array();
        for (const auto& rep : reports) {
            json s;
            s["suite"] = rep.suite;
            json checks = json::array();
            for (const auto& c : rep.checks) {
                checks.push_back({{"name", c.name},
                                  {"passed", c.passed},
                                  {"expected", c.expected},
                                  {"actual", c.actual},
                                  {"detail", c.detail}});
                all = all && c.passed;
            }
            s["checks"] = checks;
            s["passed"] = rep.all_passed();
            suites.push_back(s);
        }
        out["suites"] = suites;
        out["passed"] = all;
        std::cout << out.dump(2) << "\n";
    } else {
        for (const auto& rep : reports) {
            std::cout << "== suite: " << rep.suite << "\n";
            for (const auto& c : rep.checks) {
                all = all && c.passed;
                if (c.passed) {
                    std::cout << "PASS  " << c.name << "\n";
                } else {
                    char buf[160];
                    std::snprintf(buf, sizeof(buf), "FAIL  %s  expected=%.10g actual=%.10g (%s)\n",
                                  c.name.c_str(), c.expected, c.actual, c.detail.c_str());
                    std::cout << buf;
                }
            }
        }
        std::cout << (all ? "verify: all checks passed\n" : "verify: FAILURES present\n");
    }
    return all ? 0 : kExitVerify;
}

int cmd_verify(const std::string& suite, const std::string& dataset, bool as_json) {
    std::vector<metrolab::VerifyReport> reports;
    if (suite == "all" || suite == "oracle") reports.push_back(metrolab::verify_oracles());
    if (suite == "all" || suite == "figures") reports.push_back(metrolab::verify_figures());
    if (suite == "all" || suite == "audit") {
        if (dataset == "builtin") {
            reports.push_back(metrolab::verify_audit());
        } else {
            std::vector<metrolab::ExperimentEntry> entries = metrolab::load_entries(dataset);
            reports.push_back(metrolab::verify_audit(entries));
        }
    }
    if (reports.empty()) throw CLI::ValidationError("verify", "unknown suite: " + suite);
    return print_verify(reports, as_json);
}

int cmd_audit(const std::string& dataset, const std::string& format, const std::string& out_path,
              bool as_json) {
    std::vector<metrolab::ExperimentEntry> entries =
        dataset == "builtin" ? metrolab::builtin_dataset() : metrolab::load_entries(dataset);
    std::vector<metrolab::AuditReport> reports;
    for (const auto& e : entries) reports.push_back(metrolab::recompute(e));

    if (as_json) {
        json out;
        out["schema"] = kSchema;
        out["command"] = "audit";
        json list = json::array();
        for (std::size_t i = 0; i < entries.size(); ++i) {
            json e;
            e["key"] = entries[i].key;
            e["verdict_review"] = entries[i].verdict_paper;
            e["verdict_recomputed"] = reports[i].verdict_recomputed;
            json recs = json::array();
            for (const auto& rv : reports[i].recomputed) {
                json rj = {{"name", rv.name}, {"value", rv.value},   {"via", rv.via},
                           {"units", rv.units}, {"flagged", rv.flagged}};
                if (rv.compared) rj["paper_value"] = rv.paper_value;
                recs.push_back(rj);
            }
            e["recomputed"] = recs;
            json disc = json::array();
            for (const auto& d : reports[i].discrepancies)
                disc.push_back({{"name", d.name},
                                {"paper_value", d.paper_value},
                                {"recomputed", d.recomputed},
                                {"rel_diff", d.rel_diff}});
            e["discrepancies"] = disc;
            list.push_back(e);
        }
        out["entries"] = list;
        std::cout << out.dump(2) << "\n";
        return 0;
    }

    metrolab::ReportFormat fmt = metrolab::report_format_from_string(format);
    if (out_path.empty()) {
        metrolab::render_report(std::cout, entries, reports, fmt);
    } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + out_path);
        metrolab::render_report(f, entries, reports, fmt);
        std::cout << "report written to " << out_path << "\n";
    }
    return 0;
}

int cmd_figures(const std::string& kind_name, double tpi, double omega, const std::string& out,
                const std::string& svg, bool as_json) {
    metrolab::FigureParams params;
    if (tpi > 0.0) params.t_pi = tpi;
    if (omega > 0.0) params.rabi = omega;
    metrolab::FigureTable t =
        metrolab::figure_data(metrolab::figure_kind_from_string(kind_name), params);

    if (!out.empty()) {
        std::ofstream f(out, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + out);
        metrolab::write_figure_csv(f, t);
    } else if (!as_json) {
        metrolab::write_figure_csv(std::cout, t);
    }
    if (!svg.empty()) {
        std::ofstream f(svg, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + svg);
        metrolab::write_figure_svg(f, t);
    }
    if (as_json) {
        json out_j;
        out_j["schema"] = kSchema;
        out_j["command"] = "figures";
        out_j["kind"] = t.kind;
        out_j["rows"] = t.rows.size();
        out_j["columns"] = t.columns;
        json meta;
        for (const auto& [k, v] : t.meta) meta[k] = v;
        out_j["meta"] = meta;
        std::cout << out_j.dump(2) << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"metrolab: uncertainty bounds, heterodyne frequency estimation and "
                 "experiment-audit toolkit"};
    app.require_subcommand(1);

    BoundsArgs ba;
    CLI::App* bounds = app.add_subcommand("bounds", "evaluate an uncertainty bound");
    bounds->add_option("kind", ba.kind, "bound kind (sql, hl, qdyne1, tmin, phase-sql, ...)")
        ->required();
    bounds->add_option("--n", ba.n, "sensor count N");
    bounds->add_option("--t", ba.t, "total time T in s, or 'tpi'");
    bounds->add_option("--tpi", ba.tpi, "pi-rotation time, s");
    bounds->add_option("--omega", ba.omega, "Rabi rate, rad/s");
    bounds->add_option("--phase-time", ba.phase_time, "phase evolution time t, s");
    bounds->add_option("--lambda", ba.lambda, "unit conversion factor");
    bounds->add_option("--prior-t0", ba.prior_t0, "prior window time T0, s");
    bounds->add_option("--tcross", ba.tcross, "t_cross, s");
    bounds->add_option("--tstar", ba.tstar, "t_star, s");
    bounds->add_option("--readout-c", ba.readout_c, "readout factor C");
    bounds->add_option("--dwc", ba.dwc, "control systematic, rad/s");
    bounds->add_option("--tc", ba.tc, "clock cycle time, s");
    bounds->add_option("--gamma", ba.gamma, "gyromagnetic ratio");
    bounds->add_option("--variant", ba.variant, "loose|pi|2pi (short-time frequency bounds)");
    bounds->add_option("--units", ba.units, "hz|rad output units")->check(CLI::IsMember({"hz", "rad"}));
    bounds->add_flag("--json", ba.as_json, "machine-readable output");

    SimArgs sa;
    CLI::App* sim = app.add_subcommand("simulate", "run a seeded Monte Carlo sweep");
    sim->add_option("--protocol", [](const std::vector<std::string>& v) {
        if (!v.empty() && v.back() != "qdyne")
            throw CLI::ValidationError("simulate", "only the qdyne protocol sweep is available");
        return true;
    }, "protocol (qdyne)");
    sim->add_option("--config", sa.config_path, "key-value config file");
    sim->add_option("--trials", sa.trials_override, "trials per grid point")
        ->check(CLI::PositiveNumber);
    sim->add_option("--seed", sa.seed_override, "master seed");
    sim->add_option("--out", sa.out_prefix, "output prefix (.csv/.json)");
    sim->add_flag("--serial", sa.serial, "serial reference execution");
    sim->add_flag("--explain", sa.explain, "print all config defaults and exit");
    sim->add_flag("--json", sa.as_json, "machine-readable summary");

    std::string suite = "all", verify_dataset = "builtin";
    bool verify_json = false;
    CLI::App* verify = app.add_subcommand("verify", "run oracle/figures/audit verification");
    verify->add_option("--suite", suite, "all|oracle|figures|audit")
        ->check(CLI::IsMember({"all", "oracle", "figures", "audit"}));
    verify->add_option("--dataset", verify_dataset, "builtin or path (audit suite)");
    verify->add_flag("--json", verify_json, "machine-readable output");

    std::string dataset = "builtin", format = "text", audit_out;
    bool audit_json = false;
    CLI::App* audit = app.add_subcommand("audit", "recompute the experiment review dataset");
    audit->add_option("--dataset", dataset, "builtin or path to entry file/directory");
    audit->add_option("--format", format, "text|csv")->check(CLI::IsMember({"text", "csv"}));
    audit->add_option("--out", audit_out, "output file (default stdout)");
    audit->add_flag("--json", audit_json, "machine-readable output");

    std::string fig_kind, fig_out, fig_svg;
    double fig_tpi = 0.0, fig_omega = 0.0;
    bool fig_json = false;
    CLI::App* figures = app.add_subcommand("figures", "emit figure data tables");
    figures->add_option("kind", fig_kind, "fig1|fig2a|fig2b")->required();
    figures->add_option("--tpi", fig_tpi, "pi-rotation time, s (fig2b)");
    figures->add_option("--omega", fig_omega, "Rabi rate, rad/s (fig2a)");
    figures->add_option("--out", fig_out, "CSV output path (default stdout)");
    figures->add_option("--svg", fig_svg, "also write an SVG line chart");
    figures->add_flag("--json", fig_json, "machine-readable summary");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (bounds->parsed()) return cmd_bounds(ba);
        if (sim->parsed()) return cmd_simulate(sa);
        if (verify->parsed()) return cmd_verify(suite, verify_dataset, verify_json);
        if (audit->parsed()) return cmd_audit(dataset, format, audit_out, audit_json);
        if (figures->parsed()) return cmd_figures(fig_kind, fig_tpi, fig_omega, fig_out, fig_svg, fig_json);
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
    return 0;
}
