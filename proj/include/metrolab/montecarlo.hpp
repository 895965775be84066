#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "metrolab/bounds.hpp"
#include "metrolab/estimators.hpp"
#include "metrolab/protocols.hpp"

namespace metrolab {

enum class SweepVariable { total_time, n_measurements, t_pi, detuning, fidelity };
const char* to_string(SweepVariable v);
SweepVariable sweep_variable_from_string(const std::string& s);

// Base heterodyne configuration for a sweep; the grid overrides one knob.
struct SweepBase {
    double t_pi = 5e-6;                    // s
    double detuning = kTwoPi * 20833.0;    // effective signal-control detuning, rad/s
    double omega0 = kTwoPi * 5.0e6;        // rad/s
    ReadoutModel readout{};
    PhaseLaw phase_law = PhaseLaw::half_rate;
    long n_measurements = 1000;            // used when the grid drives another variable
};

struct SweepSpec {
    SweepVariable variable = SweepVariable::total_time;
    std::vector<double> grid;     // strictly monotone, nonempty
    int trials = 200;             // seeds per point, >= 30
    SweepBase base;
    EstimatorMethod estimator = EstimatorMethod::periodogram_fit;
    std::uint64_t master_seed = 0;
};

void validate(const SweepSpec& spec);

struct SweepPoint {
    double grid_value = 0.0;
    double total_time = 0.0;      // wall clock, s
    long n_measurements = 0;
    double robust_std = 0.0;      // MAD * 1.4826 of (omega_hat - truth)
    double raw_std = 0.0;
    double std_err = 0.0;         // bootstrap standard error of robust_std
    double bias = 0.0;            // mean(omega_hat) - truth
    double bound_qdyne = 0.0;
    double bound_sql = 0.0;
    double bound_hl = 0.0;
    int failures = 0;
    bool flagged = false;         // > 5% estimator failures at this point
};

struct ExponentFit {
    double slope = 0.0;
    double stderr_ = 0.0;
    double ci_low = 0.0;   // 95% interval
    double ci_high = 0.0;
};

struct SweepResult {
    SweepSpec spec;
    std::vector<SweepPoint> points;
    std::optional<ExponentFit> fitted_exponent;  // absent for degenerate grids
    std::vector<std::vector<std::uint64_t>> trial_seeds;  // per point
};

enum class ExecPolicy { serial, parallel };

// Runs trials x grid points, derives each trial seed from
// (master_seed, point index, trial index), estimates the detuning per record
// and reduces per-point statistics in (point, trial) index order regardless
// of the thread schedule, so serial and parallel runs are bit-identical.
SweepResult run_sweep(const SweepSpec& spec, ExecPolicy policy = ExecPolicy::parallel);

// CSV columns: T,std,std_err,bias,bound_qdyne,bound_sql,bound_hl
void write_sweep_csv(std::ostream& os, const SweepResult& r);
// Full metadata including the seed scheme and every derived trial seed.
void write_sweep_json(std::ostream& os, const SweepResult& r);

struct FigureTable {
    std::string kind;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::map<std::string, double> meta;
};

enum class FigureKind { fig1, fig2a, fig2b };
const char* to_string(FigureKind k);
FigureKind figure_kind_from_string(const std::string& s);

struct FigureParams {
    double t_pi = 5e-6;                    // fig2b
    double rabi = kTwoPi * 1.0e5;          // fig2a
    PublishedHeterodyneFit fit{};          // fig1 uses the published constants
};

// fig1: published uncertainty model with 1/T and 1/(80 T) reference curves
//       over T in [1e-3, 100] s; meta carries the minimum of T * curve.
// fig2a: single-measurement regime curves pi/(Omega T^2), 2 pi/(Omega T^2)
//        and 1/T with the switch at T = pi/Omega.
// fig2b: heterodyne bound vs 1/T with measurement marks at multiples of
//        t_pi and the crossover time in meta.
FigureTable figure_data(FigureKind kind, const FigureParams& params);

void write_figure_csv(std::ostream& os, const FigureTable& t);

// Robust scale estimate: median absolute deviation times 1.4826.
double mad_std(std::vector<double> values);

}  // namespace metrolab
