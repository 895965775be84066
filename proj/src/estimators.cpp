#include "metrolab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace metrolab {

const char* to_string(EstimatorMethod m) {
    switch (m) {
        case EstimatorMethod::periodogram_fit: return "periodogram-fit";
        case EstimatorMethod::fringe: return "fringe";
        case EstimatorMethod::mle: return "mle";
    }
    return "?";
}

void fft_radix2(std::vector<std::complex<double>>& a) {
    std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_radix2: size must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = -kTwoPi / static_cast<double>(len);
        std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                std::complex<double> u = a[i + j];
                std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

namespace {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

constexpr int kZeroPadFactor = 4;  // reduces scalloping; estimator detail, not physics

}  // namespace

Periodogram periodogram(std::span<const double> values, double dt) {
    std::size_t m = values.size();
    if (m < 8) throw std::invalid_argument("periodogram: need at least 8 samples");
    if (!(dt > 0.0)) throw std::invalid_argument("periodogram: dt must be > 0");

    double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(m);
    std::size_t nfft = kZeroPadFactor * next_pow2(m);
    std::vector<std::complex<double>> buf(nfft, {0.0, 0.0});
    for (std::size_t i = 0; i < m; ++i) buf[i] = {values[i] - mean, 0.0};
    fft_radix2(buf);

    Periodogram p;
    p.dt = dt;
    p.n_samples = m;
    p.bin_width = kTwoPi / (static_cast<double>(nfft) * dt);
    std::size_t half = nfft / 2;
    p.freqs.resize(half + 1);
    p.power.resize(half + 1);
    for (std::size_t k = 0; k <= half; ++k) {
        double fold = (k == 0 || k == half) ? 1.0 : 2.0;
        p.freqs[k] = static_cast<double>(k) * p.bin_width;
        p.power[k] = fold * std::norm(buf[k]) / static_cast<double>(nfft);
        if (p.power[k] < 0.0) p.power[k] = 0.0;
    }
    return p;
}

Periodogram periodogram(const QdyneRecord& rec) {
    validate(rec);
    std::size_t m = rec.midpoints.size();
    if (m < 8) throw std::invalid_argument("periodogram: record needs at least 8 shots");
    double dt = rec.midpoints[1] - rec.midpoints[0];
    for (std::size_t i = 1; i < m; ++i) {
        double gap = rec.midpoints[i] - rec.midpoints[i - 1];
        if (std::abs(gap - dt) > 1e-9 * dt) {
            char msg[160];
            std::snprintf(msg, sizeof(msg),
                          "periodogram: nonuniform spacing, first irregular gap %.17g s at shot %zu "
                          "(expected %.17g s)",
                          gap, i, dt);
            throw std::invalid_argument(msg);
        }
    }
    std::vector<double> vals(m);
    for (std::size_t i = 0; i < m; ++i) vals[i] = static_cast<double>(rec.outcomes[i]);
    return periodogram(vals, dt);
}

std::size_t peak_search(const Periodogram& p, bool exclude_dc) {
    if (p.power.size() < 3) throw std::invalid_argument("peak_search: need at least 3 bins");
    std::size_t start = exclude_dc ? 1 : 0;
    std::size_t best = start;
    double best_val = -1.0;
    for (std::size_t k = start; k < p.power.size(); ++k) {
        if (p.power[k] > best_val) {  // strict: ties keep the lower bin
            best_val = p.power[k];
            best = k;
        }
    }
    if (best_val <= 0.0) throw std::runtime_error("peak_search: no signal (all-zero spectrum)");
    return best;
}

FrequencyEstimate refine_peak(const Periodogram& p, std::size_t idx, RefineMethod method) {
    if (idx >= p.power.size()) throw std::invalid_argument("refine_peak: index out of range");

    FrequencyEstimate est;
    est.method = EstimatorMethod::periodogram_fit;
    if (idx == 0 || idx + 1 >= p.power.size()) {
        est.omega_hat = p.freqs[idx];
        est.stderr_ = p.bin_width / std::sqrt(12.0);
        est.flagged = true;
        return est;
    }

    double a = p.power[idx - 1], b = p.power[idx], c = p.power[idx + 1];
    double d = 0.0;
    if (a <= 0.0 || c <= 0.0) {
        // Peak so dominant that a neighbor underflowed; keep the bin center.
        d = 0.0;
    } else if (method == RefineMethod::log_quadratic) {
        double la = std::log(a), lb = std::log(b), lc = std::log(c);
        double denom = la - 2.0 * lb + lc;
        d = (denom == 0.0) ? 0.0 : 0.5 * (la - lc) / denom;
    } else {
        d = (c - a) / (a + b + c);
    }
    d = std::clamp(d, -0.5, 0.5);
    est.omega_hat = p.freqs[idx] + d * p.bin_width;
    return est;
}

FrequencyEstimate fringe_estimate(std::span<const FringePoint> points, long shots_per_point,
                                  const ReadoutModel& readout) {
    if (points.size() < 2)
        throw std::invalid_argument("fringe_estimate: need fractions at two or more free times");
    if (shots_per_point < 1) throw std::invalid_argument("fringe_estimate: shots must be >= 1");
    validate(readout);

    double visibility = readout.fidelity0 + readout.fidelity1 - 1.0;
    double floor = 1.0 - readout.fidelity0;
    double r = static_cast<double>(shots_per_point);

    double wsum = 0.0, wx = 0.0;
    bool edge = false;
    for (const FringePoint& pt : points) {
        if (!(pt.free_time > 0.0))
            throw std::invalid_argument("fringe_estimate: free_time must be > 0");
        if (pt.fraction < 0.0 || pt.fraction > 1.0)
            throw std::invalid_argument("fringe_estimate: fraction outside [0, 1]");
        double p = (pt.fraction - floor) / visibility;  // undo the confusion matrix
        p = std::clamp(p, 0.0, 1.0);
        double cosdt = 1.0 - 2.0 * p;
        double delta = std::acos(std::clamp(cosdt, -1.0, 1.0)) / pt.free_time;

        // binomial error on the raw fraction, conservative floor at p in {0,1}
        double sig_f = std::sqrt(std::max(pt.fraction * (1.0 - pt.fraction), 0.25 / r) / r);
        double sindt = std::sqrt(std::max(1.0 - cosdt * cosdt, 0.0));
        double slope = visibility * 0.5 * pt.free_time * sindt;  // df/ddelta
        double sigma;
        if (sindt < 1e-3) {
            sigma = kPi / pt.free_time;  // fringe edge: essentially uninformative
            edge = true;
        } else {
            sigma = sig_f / slope;
        }
        double w = 1.0 / (sigma * sigma);
        wsum += w;
        wx += w * delta;
    }

    FrequencyEstimate est;
    est.method = EstimatorMethod::fringe;
    est.omega_hat = wx / wsum;
    est.stderr_ = 1.0 / std::sqrt(wsum);
    est.flagged = edge;

    for (const FringePoint& pt : points)
        if (std::abs(est.omega_hat) * pt.free_time >= kPi)
            throw std::invalid_argument(
                "fringe_estimate: estimate outside one fringe of the prior (|delta| t >= pi)");
    return est;
}

namespace {

struct LogLik {
    double value;
    double grad[3];
    double info[3][3];  // Fisher information (expected), used for scoring
};

LogLik eval_loglik(const QdyneRecord& rec, double delta, double phi, double vis) {
    LogLik out{};
    out.value = 0.0;
    for (int i = 0; i < 3; ++i) {
        out.grad[i] = 0.0;
        for (int j = 0; j < 3; ++j) out.info[i][j] = 0.0;
    }
    constexpr double eps = 1e-9;
    for (std::size_t i = 0; i < rec.midpoints.size(); ++i) {
        double t = rec.midpoints[i];
        double x = delta * t + phi;
        double cx = std::cos(x), sx = std::sin(x);
        double p = 0.5 * (1.0 + vis * cx);
        p = std::clamp(p, eps, 1.0 - eps);
        double y = rec.outcomes[i] ? 1.0 : 0.0;
        out.value += y * std::log(p) + (1.0 - y) * std::log(1.0 - p);

        double dp[3] = {-0.5 * vis * sx * t, -0.5 * vis * sx, 0.5 * cx};
        double q = p * (1.0 - p);
        double w = (y - p) / q;
        for (int a = 0; a < 3; ++a) {
            out.grad[a] += w * dp[a];
            for (int b = a; b < 3; ++b) out.info[a][b] += dp[a] * dp[b] / q;
        }
    }
    out.info[1][0] = out.info[0][1];
    out.info[2][0] = out.info[0][2];
    out.info[2][1] = out.info[1][2];
    return out;
}

// Solves the 3x3 symmetric system info * step = grad (in place, partial pivot).
bool solve3(const double info[3][3], const double grad[3], double step[3]) {
    double a[3][4];
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) a[i][j] = info[i][j];
        a[i][3] = grad[i];
    }
    for (int col = 0; col < 3; ++col) {
        int piv = col;
        for (int rrow = col + 1; rrow < 3; ++rrow)
            if (std::abs(a[rrow][col]) > std::abs(a[piv][col])) piv = rrow;
        if (std::abs(a[piv][col]) < 1e-300) return false;
        if (piv != col)
            for (int j = 0; j < 4; ++j) std::swap(a[piv][j], a[col][j]);
        for (int rrow = 0; rrow < 3; ++rrow) {
            if (rrow == col) continue;
            double f = a[rrow][col] / a[col][col];
            for (int j = col; j < 4; ++j) a[rrow][j] -= f * a[col][j];
        }
    }
    for (int i = 0; i < 3; ++i) step[i] = a[i][3] / a[i][i];
    return true;
}

}  // namespace

MleEstimate mle_refine(const QdyneRecord& rec, double delta_seed, const MleOptions& opts) {
    validate(rec);
    if (rec.midpoints.size() < 4)
        throw std::invalid_argument("mle_refine: need at least 4 shots");

    // Seed the phase from the empirical quadrature sums at the seeded frequency.
    double cs = 0.0, sn = 0.0;
    for (std::size_t i = 0; i < rec.midpoints.size(); ++i) {
        double y = rec.outcomes[i] ? 1.0 : 0.0;
        cs += (y - 0.5) * std::cos(delta_seed * rec.midpoints[i]);
        sn += (y - 0.5) * std::sin(delta_seed * rec.midpoints[i]);
    }
    double theta[3] = {delta_seed, std::atan2(-sn, cs), 0.9};

    MleEstimate result;
    LogLik cur = eval_loglik(rec, theta[0], theta[1], theta[2]);
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        double step[3];
        if (!solve3(cur.info, cur.grad, step)) break;
        double scale = 1.0;
        LogLik nxt{};
        bool improved = false;
        for (int bt = 0; bt < 30; ++bt) {
            double cand[3] = {theta[0] + scale * step[0], theta[1] + scale * step[1],
                              std::clamp(theta[2] + scale * step[2], 1e-3, 1.0 - 1e-9)};
            nxt = eval_loglik(rec, cand[0], cand[1], cand[2]);
            if (nxt.value >= cur.value) {
                theta[0] = cand[0];
                theta[1] = cand[1];
                theta[2] = cand[2];
                improved = true;
                break;
            }
            scale *= 0.5;
        }
        if (!improved) break;
        double rel = std::abs(nxt.value - cur.value) /
                     std::max(std::abs(nxt.value), 1.0);
        cur = nxt;
        if (rel <= opts.relative_tolerance) {
            result.converged = true;
            ++it;
            break;
        }
    }

    result.iterations = it;
    result.frequency.method = EstimatorMethod::mle;
    result.frequency.omega_hat = theta[0];
    result.phase = theta[1];
    result.visibility = theta[2];
    result.log_likelihood = cur.value;

    // Marginal stderr for delta from the information matrix at the optimum.
    double id[3] = {1.0, 0.0, 0.0};
    double col[3];
    if (solve3(cur.info, id, col) && col[0] > 0.0)
        result.frequency.stderr_ = std::sqrt(col[0]);
    result.frequency.flagged = !result.converged;
    return result;
}

void write_periodogram_csv(std::ostream& os, const Periodogram& p) {
    os << "freq_rad_s,power\n";
    char buf[80];
    for (std::size_t k = 0; k < p.freqs.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", p.freqs[k], p.power[k]);
        os << buf;
    }
}

}  // namespace metrolab
