#pragma once

#include <array>
#include <complex>
#include <functional>
#include <vector>

namespace metrolab {

// 2x2 complex matrix, row major.
using Mat2c = std::array<std::complex<double>, 4>;

// Symmetric Fisher information over (delta, phi0) for the frozen Bernoulli
// model at unit visibility: [[sum t^2, sum t], [sum t, M]].
struct FisherMatrix {
    double dd = 0.0;      // sum t_i^2
    double dphi = 0.0;    // sum t_i
    double phiphi = 0.0;  // M

    bool positive_semidefinite(double tol = 1e-10) const {
        return dd >= -tol && phiphi >= -tol && dd * phiphi - dphi * dphi >= -tol * (dd * phiphi + 1.0);
    }
};

enum class TimestampConvention { shot_start, midpoint, shot_end };

struct CrlbResult {
    FisherMatrix fisher;
    double marginal_delta_bound;  // sqrt([F^-1]_dd), rad/s
    double total_time;            // M * t_pi, s
};

// Multi-parameter Cramer-Rao bound for a uniformly spaced shot record with
// per-shot unit phase information. The marginal frequency bound is invariant
// under the timestamp convention (a common shift leaves the timestamp
// variance unchanged); the phase marginal is not.
CrlbResult qdyne_crlb(long n_measurements, double t_pi,
                      TimestampConvention convention = TimestampConvention::midpoint);

// Parameterized Hamiltonian derivative for the eigenvalue-gap integral.
struct ParamHamiltonian {
    std::function<Mat2c(double)> derivative;  // dH/dparam at time tau, in J
    std::vector<double> segment_boundaries;   // interior discontinuities of the drive
};

// Derivative family for the phase of a resonant drive of Rabi rate Omega:
// dH/dphi = (hbar Omega / 2)(-sin(Phi) sx + cos(Phi) sy); the eigenvalue gap
// is hbar * Omega regardless of the running phase Phi.
ParamHamiltonian drive_phase_derivative(double rabi, double omega = 0.0, double phase0 = 0.0);

struct QfiQuery {
    ParamHamiltonian hamiltonian;
    double total_time;  // s
    int grid = 64;      // initial quadrature resolution, >= 16
};

struct QfiResult {
    double qfi;             // [integral of gap/hbar]^2
    double bound;           // 1/sqrt(qfi)
    double quadrature_error;  // Richardson estimate, relative
};

// Composite-Simpson quadrature of the eigenvalue gap of dH/dparam with
// Richardson halving until the relative error estimate falls below 1e-8.
// Segment boundaries split the quadrature so piecewise-constant drives stay
// smooth within each panel. Non-Hermitian derivatives are rejected.
QfiResult qfi_max(const QfiQuery& q);

struct CrossoverResult {
    double closed_form;  // (21 + sqrt(433)) / 4 * t_pi
    double bisection;    // numerical confirmation
};

// Solves "heterodyne bound equals 1/T": the cubic reduces to
// 2 T^2 - 21 t_pi T + t_pi^2 = 0 with the larger root at 10.452 t_pi.
CrossoverResult crossover(double t_pi);

}  // namespace metrolab
