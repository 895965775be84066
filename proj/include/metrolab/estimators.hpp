#pragma once

#include <complex>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metrolab/protocols.hpp"

namespace metrolab {

// One-sided power spectrum on a uniform angular-frequency grid.
struct Periodogram {
    std::vector<double> freqs;   // bin centers, rad/s
    std::vector<double> power;   // >= 0, Parseval-normalized
    double bin_width = 0.0;      // rad/s
    double dt = 0.0;             // sample spacing, s
    std::size_t n_samples = 0;   // length before zero padding
};

enum class EstimatorMethod { periodogram_fit, fringe, mle };
const char* to_string(EstimatorMethod m);

struct FrequencyEstimate {
    double omega_hat = 0.0;               // rad/s
    std::optional<double> stderr_;        // rad/s, when available
    EstimatorMethod method = EstimatorMethod::periodogram_fit;
    bool flagged = false;                 // boundary fallback / fringe-edge insensitivity
};

// Mean-subtracted, zero-padded (factor 4) transform of a real sequence.
// Power is normalized so that sum(power) equals sum((x - mean)^2) exactly
// (Parseval); the DC bin is identically zero after mean subtraction.
Periodogram periodogram(std::span<const double> values, double dt);

// Record overload: requires at least 8 shots and uniform spacing; a
// nonuniform grid is rejected naming the first irregular gap.
Periodogram periodogram(const QdyneRecord& rec);

// Index of the largest power bin; DC excluded when flagged; ties break
// toward the lower frequency. All-zero spectra are an error.
std::size_t peak_search(const Periodogram& p, bool exclude_dc);

enum class RefineMethod { log_quadratic, centroid };

// Sub-bin refinement by a three-point fit around idx: quadratic in
// log-power by default, plain centroid behind the flag for regression
// comparison. A boundary index falls back to the bin center with
// stderr bin_width/sqrt(12), flagged.
FrequencyEstimate refine_peak(const Periodogram& p, std::size_t idx,
                              RefineMethod method = RefineMethod::log_quadratic);

struct FringePoint {
    double free_time;  // s
    double fraction;   // measured |1> fraction
};

// Inverts the Ramsey fringe p = (1 - cos(delta t))/2 at each operating point
// and combines by inverse variance. Requires |delta| t < pi (one fringe of
// prior); fractions at the fringe edges inflate the stderr and set the flag.
FrequencyEstimate fringe_estimate(std::span<const FringePoint> points, long shots_per_point,
                                  const ReadoutModel& readout = {});

struct MleOptions {
    double relative_tolerance = 1e-10;  // on the log-likelihood
    int max_iterations = 200;
};

struct MleEstimate {
    FrequencyEstimate frequency;
    double phase = 0.0;
    double visibility = 1.0;
    double log_likelihood = 0.0;
    bool converged = false;
    int iterations = 0;
};

// Maximum-likelihood refinement of (delta, phi0, V) for the frozen sinusoidal
// Bernoulli model, seeded by a periodogram estimate. Fisher scoring with a
// backtracking line search; stderr from the observed information.
MleEstimate mle_refine(const QdyneRecord& rec, double delta_seed,
                       const MleOptions& opts = {});

// CSV export: header "freq_rad_s,power".
void write_periodogram_csv(std::ostream& os, const Periodogram& p);

// In-place radix-2 complex FFT (size must be a power of two).
void fft_radix2(std::vector<std::complex<double>>& data);

}  // namespace metrolab
