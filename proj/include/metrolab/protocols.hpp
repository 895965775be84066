#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metrolab/quantum.hpp"

namespace metrolab {

// Readout confusion + per-shot dead times. Fidelities are
// P(report k | state k); dead times extend the wall clock only.
struct ReadoutModel {
    double fidelity0 = 1.0;
    double fidelity1 = 1.0;
    double readout_time = 0.0;  // s
    double init_time = 0.0;     // s

    // Probability of reporting |1> given true excited-state probability p.
    // Affine in p; reduces fringe visibility by (fidelity0 + fidelity1 - 1).
    double observed(double p) const {
        return (1.0 - fidelity0) + p * (fidelity0 + fidelity1 - 1.0);
    }
    double dead_time() const { return readout_time + init_time; }
};

void validate(const ReadoutModel& m);

struct RamseyConfig {
    AtomSpec atom;
    DriveField drive;       // sets the Rabi rate (pulse times) and detuning
    double free_time;       // phase evolution time t, s
    long shots;             // repetition count R
    ReadoutModel readout;
};

void validate(const RamseyConfig& cfg);

struct RamseyResult {
    double fraction;                 // noisy empirical mean of |1> outcomes
    std::vector<std::uint8_t> outcomes;
    double total_time;               // wall clock, s
    double ideal_probability;        // (1 - cos(delta t)) / 2 before readout errors
};

// One Ramsey shot: pi/2 pulse, free evolution, pi/2 pulse about the opposite
// axis, sigma_z readout through the confusion model. Pulses are treated as
// instantaneous for the state dynamics; their duration still counts toward
// the wall clock.
RamseyResult run_ramsey(const RamseyConfig& cfg, std::uint64_t seed);

// Phase-advance law of the drive fields in the heterodyne sequence. The
// half-rate law advances each drive phase at omega/2; the full-rate law at
// omega. Only the effective signal-control rate difference is observable in
// the record, so the two laws differ by a factor of two in the beat note.
enum class PhaseLaw { half_rate, full_rate };

struct QdyneConfig {
    AtomSpec atom;
    DriveField signal;    // unknown frequency, known amplitude
    DriveField control;   // known frequency, phase reference (phase0 == 0)
    double t_pi;          // pi-rotation time, == pi / signal.rabi
    long n_measurements;  // M
    ReadoutModel readout;
    std::uint64_t seed = 0;
    PhaseLaw phase_law = PhaseLaw::half_rate;
};

void validate(const QdyneConfig& cfg);

// Effective phase-advance rate of a drive under the configured law.
double effective_rate(const QdyneConfig& cfg, const DriveField& f);
// Signal-control beat rate nu_s - nu_c (rad/s); this is the estimand.
double effective_detuning(const QdyneConfig& cfg);

struct QdyneRecord {
    std::vector<double> midpoints;        // t_i, strictly increasing, s
    std::vector<std::uint8_t> outcomes;   // one bit per shot
    double t_pi = 0.0;                    // s
    double total_time = 0.0;              // T, s
    double dead_time = 0.0;               // per-shot readout+init, s
    bool aliasing_risk = false;           // detuning outside the prior window
    std::optional<double> true_detuning_hidden;  // rad/s, test harness only
};

void validate(const QdyneRecord& rec);

// Executes the heterodyne sequence: each shot holds a half-interval driven by
// the signal and a half-interval driven by the control, then a sigma_z
// readout; shot i starts at i * (t_pi + dead time) and is stamped with its
// midpoint. Detuning beyond the Nyquist rate of the shot grid sets the
// aliasing flag instead of rejecting. Deterministic in (cfg, cfg.seed).
QdyneRecord run_qdyne(const QdyneConfig& cfg);

// Frozen per-shot signal model of the sequence,
//   p_i = (1 + cos(delta * t_mid - delta * t_pi / pi - signal_phase)) / 2,
// where signal_phase is the signal-control phase difference at time zero.
// The -t_pi/pi timestamp shift and the phase sign come from composing the
// two quarter rotations exactly; corrections are O((delta/Omega)^2) (see the
// protocol signal-model test).
double qdyne_model_probability(double delta, double t_mid, double t_pi,
                               double signal_phase = 0.0);

// Wall-clock time including pulse, free-evolution, readout and
// initialization periods. Every bound comparison uses these.
double wall_clock(const RamseyConfig& cfg);
double wall_clock(const QdyneConfig& cfg);
double wall_clock(std::span<const double> durations);

// Columnar text serialization; bit-exact round trip.
void write_qdyne_record(std::ostream& os, const QdyneRecord& rec);
QdyneRecord read_qdyne_record(std::istream& is);
void save_qdyne_record(const std::string& path, const QdyneRecord& rec);
QdyneRecord load_qdyne_record(const std::string& path);

// Canonical construction used by sweeps and tests: resonant control, signal
// offset by delta_eff in effective rate, per-shot pi rotation split across
// the two fields.
QdyneConfig make_qdyne_config(double delta_eff, double t_pi, long n_measurements,
                              const ReadoutModel& readout, std::uint64_t seed,
                              PhaseLaw law = PhaseLaw::half_rate,
                              double omega0 = kTwoPi * 5.0e6);

}  // namespace metrolab
