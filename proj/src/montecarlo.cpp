#include "metrolab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "metrolab/bounds.hpp"
#include "metrolab/oracles.hpp"
#include "metrolab/rng.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace metrolab {

const char* to_string(SweepVariable v) {
    switch (v) {
        case SweepVariable::total_time: return "T";
        case SweepVariable::n_measurements: return "M";
        case SweepVariable::t_pi: return "t_pi";
        case SweepVariable::detuning: return "detuning";
        case SweepVariable::fidelity: return "fidelity";
    }
    return "?";
}

SweepVariable sweep_variable_from_string(const std::string& s) {
    if (s == "T") return SweepVariable::total_time;
    if (s == "M") return SweepVariable::n_measurements;
    if (s == "t_pi") return SweepVariable::t_pi;
    if (s == "detuning") return SweepVariable::detuning;
    if (s == "fidelity") return SweepVariable::fidelity;
    throw std::invalid_argument("unknown sweep variable: " + s);
}

void validate(const SweepSpec& spec) {
    if (spec.grid.empty()) throw std::invalid_argument("SweepSpec: grid must be nonempty");
    for (std::size_t i = 1; i < spec.grid.size(); ++i)
        if (!(spec.grid[i] > spec.grid[i - 1]))
            throw std::invalid_argument("SweepSpec: grid must be strictly increasing");
    if (spec.trials < 30) throw std::invalid_argument("SweepSpec: trials must be >= 30");
    if (spec.estimator == EstimatorMethod::fringe)
        throw std::invalid_argument("SweepSpec: fringe estimator applies to Ramsey data only");
    validate(spec.base.readout);
}

double mad_std(std::vector<double> values) {
    if (values.empty()) return 0.0;
    auto mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
    std::nth_element(values.begin(), mid, values.end());
    double med = *mid;
    if (values.size() % 2 == 0) {
        auto lo = std::max_element(values.begin(), mid);
        med = 0.5 * (med + *lo);
    }
    for (double& v : values) v = std::abs(v - med);
    mid = values.begin() + static_cast<std::ptrdiff_t>(values.size() / 2);
    std::nth_element(values.begin(), mid, values.end());
    double mad = *mid;
    if (values.size() % 2 == 0) {
        auto lo = std::max_element(values.begin(), mid);
        mad = 0.5 * (mad + *lo);
    }
    return 1.4826 * mad;
}

namespace {

QdyneConfig config_for(const SweepSpec& spec, double grid_value, std::uint64_t seed) {
    const SweepBase& b = spec.base;
    double t_pi = b.t_pi;
    double detuning = b.detuning;
    long m = b.n_measurements;
    ReadoutModel readout = b.readout;

    switch (spec.variable) {
        case SweepVariable::total_time: {
            double period = t_pi + readout.dead_time();
            m = std::lround(grid_value / period);
            break;
        }
        case SweepVariable::n_measurements:
            m = std::lround(grid_value);
            break;
        case SweepVariable::t_pi:
            t_pi = grid_value;
            break;
        case SweepVariable::detuning:
            detuning = grid_value;
            break;
        case SweepVariable::fidelity:
            readout.fidelity0 = grid_value;
            readout.fidelity1 = grid_value;
            break;
    }
    if (m < 8) throw std::invalid_argument("run_sweep: grid point yields fewer than 8 shots");
    return make_qdyne_config(detuning, t_pi, m, readout, seed, b.phase_law, b.omega0);
}

// omega_hat for one record; NaN marks an estimator failure.
double estimate_one(const QdyneRecord& rec, EstimatorMethod method) {
    try {
        Periodogram p = periodogram(rec);
        std::size_t idx = peak_search(p, true);
        FrequencyEstimate fe = refine_peak(p, idx);
        if (method == EstimatorMethod::periodogram_fit) return fe.omega_hat;
        MleEstimate mle = mle_refine(rec, fe.omega_hat);
        if (!mle.converged) return std::nan("");
        return mle.frequency.omega_hat;
    } catch (const std::exception&) {
        return std::nan("");
    }
}

double plain_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

}  // namespace

SweepResult run_sweep(const SweepSpec& spec, ExecPolicy policy) {
    validate(spec);

    const std::size_t npts = spec.grid.size();
    const std::size_t ntr = static_cast<std::size_t>(spec.trials);

    SweepResult result;
    result.spec = spec;
    result.trial_seeds.resize(npts);
    for (std::size_t j = 0; j < npts; ++j) {
        result.trial_seeds[j].resize(ntr);
        for (std::size_t k = 0; k < ntr; ++k)
            result.trial_seeds[j][k] = derive_seed(spec.master_seed, j, k);
    }

    // Flat (point, trial) work grid; slots are written independently so the
    // reduction order never depends on the schedule.
    std::vector<double> estimates(npts * ntr);
    std::vector<double> truths(npts);

    auto run_cell = [&](std::size_t j, std::size_t k) {
        QdyneConfig cfg = config_for(spec, spec.grid[j], result.trial_seeds[j][k]);
        QdyneRecord rec = run_qdyne(cfg);
        if (k == 0) truths[j] = *rec.true_detuning_hidden;
        estimates[j * ntr + k] = estimate_one(rec, spec.estimator);
    };

    const long total = static_cast<long>(npts * ntr);
    if (policy == ExecPolicy::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 4)
#endif
        for (long idx = 0; idx < total; ++idx)
            run_cell(static_cast<std::size_t>(idx) / ntr, static_cast<std::size_t>(idx) % ntr);
    } else {
        for (long idx = 0; idx < total; ++idx)
            run_cell(static_cast<std::size_t>(idx) / ntr, static_cast<std::size_t>(idx) % ntr);
    }

    result.points.resize(npts);
    for (std::size_t j = 0; j < npts; ++j) {
        SweepPoint& pt = result.points[j];
        pt.grid_value = spec.grid[j];

        QdyneConfig cfg = config_for(spec, spec.grid[j], 0);
        pt.n_measurements = cfg.n_measurements;
        pt.total_time = wall_clock(cfg);

        std::vector<double> errs;
        errs.reserve(ntr);
        for (std::size_t k = 0; k < ntr; ++k) {
            double e = estimates[j * ntr + k];
            if (std::isnan(e))
                ++pt.failures;
            else
                errs.push_back(e - truths[j]);
        }
        pt.flagged = pt.failures * 20 > spec.trials;  // > 5%
        if (errs.size() >= 2) {
            pt.robust_std = mad_std(errs);
            pt.raw_std = plain_std(errs);
            pt.bias = std::accumulate(errs.begin(), errs.end(), 0.0) /
                      static_cast<double>(errs.size());

            // bootstrap standard error of the robust std
            Pcg32 boot(derive_seed(spec.master_seed ^ 0xB007B007ull, j, 0));
            const int nboot = 200;
            std::vector<double> stats(nboot);
            std::vector<double> sample(errs.size());
            for (int b = 0; b < nboot; ++b) {
                for (std::size_t i = 0; i < errs.size(); ++i)
                    sample[i] =
                        errs[static_cast<std::size_t>(boot.uniform01() * static_cast<double>(errs.size()))];
                stats[static_cast<std::size_t>(b)] = mad_std(sample);
            }
            pt.std_err = plain_std(stats);
        }

        BoundQuery q;
        q.kind = BoundKind::qdyne_1;
        q.total_time = pt.total_time;
        q.t_pi = cfg.t_pi;
        pt.bound_qdyne = eval_bound(q).value;
        BoundQuery qs;
        qs.kind = BoundKind::sql;
        qs.n_sensors = 1.0;
        qs.total_time = pt.total_time;
        pt.bound_sql = eval_bound(qs).value;
        qs.kind = BoundKind::hl;
        pt.bound_hl = eval_bound(qs).value;
    }

    // Weighted log-log fit of robust std against wall-clock time.
    if (npts >= 2 && (spec.variable == SweepVariable::total_time ||
                      spec.variable == SweepVariable::n_measurements)) {
        double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
        std::size_t used = 0;
        for (const SweepPoint& pt : result.points) {
            if (!(pt.robust_std > 0.0) || pt.flagged) continue;
            double x = std::log(pt.total_time);
            double y = std::log(pt.robust_std);
            double sigma_log = pt.std_err > 0.0 ? pt.std_err / pt.robust_std : 0.1;
            double w = 1.0 / (sigma_log * sigma_log);
            sw += w;
            sx += w * x;
            sy += w * y;
            sxx += w * x * x;
            sxy += w * x * y;
            ++used;
        }
        if (used >= 2) {
            double denom = sw * sxx - sx * sx;
            if (denom > 0.0) {
                ExponentFit fit;
                fit.slope = (sw * sxy - sx * sy) / denom;
                fit.stderr_ = std::sqrt(sw / denom);
                fit.ci_low = fit.slope - 1.96 * fit.stderr_;
                fit.ci_high = fit.slope + 1.96 * fit.stderr_;
                result.fitted_exponent = fit;
            }
        }
    }
    return result;
}

void write_sweep_csv(std::ostream& os, const SweepResult& r) {
    os << "T,std,std_err,bias,bound_qdyne,bound_sql,bound_hl\n";
    char buf[256];
    for (const SweepPoint& p : r.points) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      p.total_time, p.robust_std, p.std_err, p.bias, p.bound_qdyne, p.bound_sql,
                      p.bound_hl);
        os << buf;
    }
}

namespace {

void json_num(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}

}  // namespace

void write_sweep_json(std::ostream& os, const SweepResult& r) {
    os << "{\n  \"schema\": \"metrolab/v1\",\n  \"kind\": \"sweep\",\n";
    os << "  \"variable\": \"" << to_string(r.spec.variable) << "\",\n";
    os << "  \"estimator\": \"" << to_string(r.spec.estimator) << "\",\n";
    os << "  \"trials\": " << r.spec.trials << ",\n";
    os << "  \"master_seed\": " << r.spec.master_seed << ",\n";
    os << "  \"seed_scheme\": \"splitmix64 counter chain over (master, point, trial)\",\n";
    os << "  \"base\": {\"t_pi\": ";
    json_num(os, r.spec.base.t_pi);
    os << ", \"detuning\": ";
    json_num(os, r.spec.base.detuning);
    os << ", \"omega0\": ";
    json_num(os, r.spec.base.omega0);
    os << ", \"fidelity0\": ";
    json_num(os, r.spec.base.readout.fidelity0);
    os << ", \"fidelity1\": ";
    json_num(os, r.spec.base.readout.fidelity1);
    os << ", \"phase_law\": \""
       << (r.spec.base.phase_law == PhaseLaw::half_rate ? "half_rate" : "full_rate") << "\"},\n";
    os << "  \"points\": [\n";
    for (std::size_t j = 0; j < r.points.size(); ++j) {
        const SweepPoint& p = r.points[j];
        os << "    {\"grid_value\": ";
        json_num(os, p.grid_value);
        os << ", \"T\": ";
        json_num(os, p.total_time);
        os << ", \"M\": " << p.n_measurements << ", \"std\": ";
        json_num(os, p.robust_std);
        os << ", \"raw_std\": ";
        json_num(os, p.raw_std);
        os << ", \"std_err\": ";
        json_num(os, p.std_err);
        os << ", \"bias\": ";
        json_num(os, p.bias);
        os << ", \"bound_qdyne\": ";
        json_num(os, p.bound_qdyne);
        os << ", \"bound_sql\": ";
        json_num(os, p.bound_sql);
        os << ", \"bound_hl\": ";
        json_num(os, p.bound_hl);
        os << ", \"failures\": " << p.failures << ", \"flagged\": " << (p.flagged ? "true" : "false");
        os << ", \"seeds\": [";
        for (std::size_t k = 0; k < r.trial_seeds[j].size(); ++k)
            os << (k ? "," : "") << r.trial_seeds[j][k];
        os << "]}" << (j + 1 < r.points.size() ? "," : "") << "\n";
    }
    os << "  ],\n";
    if (r.fitted_exponent) {
        os << "  \"fitted_exponent\": {\"slope\": ";
        json_num(os, r.fitted_exponent->slope);
        os << ", \"stderr\": ";
        json_num(os, r.fitted_exponent->stderr_);
        os << ", \"ci95\": [";
        json_num(os, r.fitted_exponent->ci_low);
        os << ", ";
        json_num(os, r.fitted_exponent->ci_high);
        os << "]}\n";
    } else {
        os << "  \"fitted_exponent\": null\n";
    }
    os << "}\n";
}

const char* to_string(FigureKind k) {
    switch (k) {
        case FigureKind::fig1: return "fig1";
        case FigureKind::fig2a: return "fig2a";
        case FigureKind::fig2b: return "fig2b";
    }
    return "?";
}

FigureKind figure_kind_from_string(const std::string& s) {
    if (s == "fig1") return FigureKind::fig1;
    if (s == "fig2a") return FigureKind::fig2a;
    if (s == "fig2b") return FigureKind::fig2b;
    throw std::invalid_argument("unknown figure kind: " + s);
}

namespace {

std::vector<double> log_grid(double lo, double hi, int per_decade) {
    std::vector<double> g;
    double decades = std::log10(hi / lo);
    int n = std::max(2, static_cast<int>(std::ceil(decades * per_decade)));
    for (int i = 0; i <= n; ++i)
        g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / n));
    return g;
}

}  // namespace

FigureTable figure_data(FigureKind kind, const FigureParams& params) {
    FigureTable t;
    t.kind = to_string(kind);
    switch (kind) {
        case FigureKind::fig1: {
            t.columns = {"T", "model", "one_over_T", "one_over_80T"};
            for (double T : log_grid(1e-3, 100.0, 60)) {
                double m = exp_model_published(T, params.fit);
                t.rows.push_back({T, m, 1.0 / T, 1.0 / (80.0 * T)});
            }
            // landmark: minimum of T * model(T), golden section on [1, 100]
            auto f = [&](double T) { return T * exp_model_published(T, params.fit); };
            double a = 1.0, b = 100.0;
            const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
            double c = b - gr * (b - a), d = a + gr * (b - a);
            for (int i = 0; i < 200; ++i) {
                if (f(c) < f(d))
                    b = d;
                else
                    a = c;
                c = b - gr * (b - a);
                d = a + gr * (b - a);
                if (b - a < 1e-10) break;
            }
            double tmin = 0.5 * (a + b);
            t.meta["min_T_times_model"] = f(tmin);
            t.meta["argmin_T"] = tmin;
            break;
        }
        case FigureKind::fig2a: {
            double om = params.rabi;
            double ts = kPi / om;
            t.columns = {"T", "quad_pi", "quad_2pi", "one_over_T", "branch_pi", "branch_2pi"};
            for (double T : log_grid(0.02 * ts, 20.0 * ts, 80)) {
                double qp = kPi / (om * T * T);
                double q2 = 2.0 * kPi / (om * T * T);
                double lin = 1.0 / T;
                t.rows.push_back({T, qp, q2, lin, T <= ts ? qp : lin, T <= ts ? q2 : lin});
            }
            t.meta["switch_T"] = ts;
            break;
        }
        case FigureKind::fig2b: {
            double tp = params.t_pi;
            t.columns = {"T", "bound_qdyne", "one_over_T", "measurement_mark"};
            std::vector<double> grid = log_grid(tp, 100.0 * tp, 100);
            for (int k = 1; k <= 100; ++k) grid.push_back(static_cast<double>(k) * tp);
            std::sort(grid.begin(), grid.end());
            grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
            for (double T : grid) {
                BoundQuery q;
                q.kind = BoundKind::qdyne_1;
                q.total_time = T;
                q.t_pi = tp;
                double mark = std::abs(T / tp - std::round(T / tp)) < 1e-12 ? 1.0 : 0.0;
                t.rows.push_back({T, eval_bound(q).value, 1.0 / T, mark});
            }
            t.meta["crossover_T"] = crossover(tp).closed_form;
            break;
        }
    }
    return t;
}

void write_figure_csv(std::ostream& os, const FigureTable& t) {
    os << "# figure=" << t.kind << "\n";
    for (const auto& [k, v] : t.meta) {
        char buf[80];
        std::snprintf(buf, sizeof(buf), "# %s=%.17g\n", k.c_str(), v);
        os << buf;
    }
    for (std::size_t i = 0; i < t.columns.size(); ++i)
        os << (i ? "," : "") << t.columns[i];
    os << "\n";
    char buf[40];
    for (const auto& row : t.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
            os << (i ? "," : "") << buf;
        }
        os << "\n";
    }
}

}  // namespace metrolab
