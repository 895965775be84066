#pragma once

#include <complex>

namespace metrolab {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kHbar = 1.054571817e-34;        // J s
inline constexpr double kPlanck = 6.62607015e-34;       // J s
inline constexpr double kSpeedOfLight = 2.99792458e8;   // m/s

using complexd = std::complex<double>;

// Two-level state, basis (|0>, |1>) with |1> the excited level.
// Global phase is kept internally; only canonical() strips it.
struct SpinState {
    complexd amp0{1.0, 0.0};
    complexd amp1{0.0, 0.0};

    double norm_sq() const { return std::norm(amp0) + std::norm(amp1); }

    static SpinState ground() { return {}; }
    static SpinState excited() { return {{0.0, 0.0}, {1.0, 0.0}}; }
};

bool is_normalized(const SpinState& s, double tol = 1e-9);

// Rescales to unit norm (throws on zero vector).
SpinState normalized(const SpinState& s);

// Multiplies out the global phase so amp0 is real and non-negative
// (amp1 real non-negative when amp0 vanishes). Export-only helper.
SpinState canonical(const SpinState& s);

// Rotating transverse drive. The field phase advances linearly:
// phase(t) = omega * (t - t0) + phase0.
struct DriveField {
    double omega = 0.0;   // angular frequency, rad/s
    double rabi = 0.0;    // Rabi rate, rad/s
    double phase0 = 0.0;  // phase at the reference time, rad
    double t0 = 0.0;      // reference time, s

    double phase_at(double t) const { return omega * (t - t0) + phase0; }
};

struct AtomSpec {
    double omega0;       // transition angular frequency, rad/s
    double gamma = 1.0;  // gyromagnetic ratio, used only by amplitude bounds
};

struct PulseSegment {
    DriveField field;
    double start;     // s
    double duration;  // s
};

void validate(const DriveField& f);
void validate(const AtomSpec& a);
void validate(const PulseSegment& s);

// Propagates the state through one piecewise-constant driven segment.
// Exact rotating-frame solution: the frame co-rotating with the drive has a
// time-independent Hamiltonian, so each segment is a closed-form rotation
// with explicit lab-frame phase bookkeeping at both endpoints. States stay
// in the lab frame between segments, which keeps compositions across
// different drive frequencies consistent.
SpinState evolve(const SpinState& state, const AtomSpec& atom, const PulseSegment& segment);

// Instantaneous rotation by `angle` about the equatorial axis at `axis_phase`.
SpinState rotate(const SpinState& state, double axis_phase, double angle);

// Frame-relative free precession: accrues relative phase `angle` between the
// levels (amp0 gains +angle/2, amp1 gains -angle/2).
SpinState z_rotate(const SpinState& state, double angle);

// sigma_z readout: probability of |1>. Input must be normalized.
double excited_population(const SpinState& state);

// Closed-form response of a spin driven simultaneously by two equal-amplitude
// resonant fields whose phases differ by dphi, read out after a combined
// rotation angle rabi_angle = Omega * t per field:
//   P(|1>) = sin(rabi_angle * cos(dphi / 2))^2
double two_field_response(double rabi_angle, double dphi);

}  // namespace metrolab
