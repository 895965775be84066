#include "metrolab/quantum.hpp"

#include <cmath>
#include <stdexcept>

namespace metrolab {

bool is_normalized(const SpinState& s, double tol) {
    return std::abs(s.norm_sq() - 1.0) <= tol;
}

SpinState normalized(const SpinState& s) {
    double n = std::sqrt(s.norm_sq());
    if (n == 0.0) throw std::invalid_argument("cannot normalize zero state");
    return {s.amp0 / n, s.amp1 / n};
}

SpinState canonical(const SpinState& s) {
    complexd ref = std::abs(s.amp0) > 1e-15 ? s.amp0 : s.amp1;
    double m = std::abs(ref);
    if (m == 0.0) return s;
    complexd phase = ref / m;
    return {s.amp0 / phase, s.amp1 / phase};
}

void validate(const DriveField& f) {
    if (f.rabi < 0.0) throw std::invalid_argument("DriveField: rabi must be >= 0");
    if (f.omega < 0.0) throw std::invalid_argument("DriveField: omega must be >= 0");
    if (!std::isfinite(f.omega) || !std::isfinite(f.rabi) || !std::isfinite(f.phase0) ||
        !std::isfinite(f.t0))
        throw std::invalid_argument("DriveField: non-finite parameter");
}

void validate(const AtomSpec& a) {
    if (!(a.omega0 > 0.0)) throw std::invalid_argument("AtomSpec: omega0 must be > 0");
}

void validate(const PulseSegment& s) {
    validate(s.field);
    if (!(s.duration > 0.0)) throw std::invalid_argument("PulseSegment: duration must be > 0");
    if (!std::isfinite(s.start)) throw std::invalid_argument("PulseSegment: non-finite start");
}

namespace {

// exp(-i hbar-less H' dt) for H' = (dz/2) sz + (rabi/2)(cos chi sx + sin chi sy),
// applied as U_lab = V*(tb) R V(ta) with V(t) = exp(i w_d t sz / 2).
// Basis convention: sz = diag(-1, +1) on (amp0, amp1).
SpinState propagate(const SpinState& in, double omega_d, double rabi, double chi, double ta,
                    double tb, double omega0) {
    double dz = omega0 - omega_d;  // detuning of the atom from the drive rotation rate
    double dt = tb - ta;
    double g = std::hypot(dz, rabi);

    // rotating-frame rotation R
    complexd r00{1.0, 0.0}, r01{0.0, 0.0}, r10{0.0, 0.0}, r11{1.0, 0.0};
    if (g > 0.0) {
        double half = 0.5 * g * dt;
        double c = std::cos(half), s = std::sin(half);
        double nx = rabi * std::cos(chi) / g;
        double ny = rabi * std::sin(chi) / g;
        double nz = dz / g;
        // n.sigma = [[-nz, nx - i ny], [nx + i ny, nz]] in this basis
        r00 = complexd{c, s * nz};
        r01 = complexd{-s * ny, -s * nx};
        r10 = complexd{s * ny, -s * nx};
        r11 = complexd{c, -s * nz};
    }

    // V(ta) on input, V*(tb) on output
    double ha = 0.5 * omega_d * ta;
    double hb = 0.5 * omega_d * tb;
    complexd va0 = std::polar(1.0, -ha), va1 = std::polar(1.0, ha);
    complexd vb0 = std::polar(1.0, hb), vb1 = std::polar(1.0, -hb);

    complexd a0 = va0 * in.amp0;
    complexd a1 = va1 * in.amp1;
    SpinState out;
    out.amp0 = vb0 * (r00 * a0 + r01 * a1);
    out.amp1 = vb1 * (r10 * a0 + r11 * a1);
    return out;
}

}  // namespace

SpinState evolve(const SpinState& state, const AtomSpec& atom, const PulseSegment& segment) {
    validate(atom);
    validate(segment);
    if (!is_normalized(state)) throw std::invalid_argument("evolve: input state not normalized");

    const DriveField& f = segment.field;
    // Drive phase referenced to global time zero; the linear part is absorbed
    // into the rotating frame.
    double chi = f.phase0 - f.omega * f.t0;
    return propagate(state, f.omega, f.rabi, chi, segment.start, segment.start + segment.duration,
                     atom.omega0);
}

SpinState rotate(const SpinState& state, double axis_phase, double angle) {
    double c = std::cos(0.5 * angle), s = std::sin(0.5 * angle);
    complexd e_m = std::polar(1.0, -axis_phase);
    complexd e_p = std::polar(1.0, axis_phase);
    SpinState out;
    out.amp0 = c * state.amp0 - complexd{0.0, 1.0} * s * e_m * state.amp1;
    out.amp1 = -complexd{0.0, 1.0} * s * e_p * state.amp0 + c * state.amp1;
    return out;
}

SpinState z_rotate(const SpinState& state, double angle) {
    return {std::polar(1.0, 0.5 * angle) * state.amp0,
            std::polar(1.0, -0.5 * angle) * state.amp1};
}

double excited_population(const SpinState& state) {
    if (!is_normalized(state))
        throw std::invalid_argument("excited_population: state not normalized");
    double p = std::norm(state.amp1);
    if (p < 0.0) p = 0.0;
    if (p > 1.0) p = 1.0;
    return p;
}

double two_field_response(double rabi_angle, double dphi) {
    if (rabi_angle < 0.0) throw std::invalid_argument("two_field_response: rabi_angle < 0");
    if (dphi < 0.0 || dphi >= kTwoPi)
        throw std::invalid_argument("two_field_response: dphi must lie in [0, 2*pi)");
    double s = std::sin(rabi_angle * std::cos(0.5 * dphi));
    return s * s;
}

}  // namespace metrolab
