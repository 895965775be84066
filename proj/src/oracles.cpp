#include "metrolab/oracles.hpp"

#include <cmath>
#include <stdexcept>

#include "metrolab/bounds.hpp"
#include "metrolab/quantum.hpp"

namespace metrolab {

CrlbResult qdyne_crlb(long n_measurements, double t_pi, TimestampConvention convention) {
    if (n_measurements < 3) throw std::invalid_argument("qdyne_crlb: need M >= 3");
    if (!(t_pi > 0.0)) throw std::invalid_argument("qdyne_crlb: t_pi must be > 0");

    double offset = 0.5;
    if (convention == TimestampConvention::shot_start) offset = 0.0;
    if (convention == TimestampConvention::shot_end) offset = 1.0;

    double m = static_cast<double>(n_measurements);
    double st = 0.0, st2 = 0.0;
    for (long i = 0; i < n_measurements; ++i) {
        double t = (static_cast<double>(i) + offset) * t_pi;
        st += t;
        st2 += t * t;
    }

    CrlbResult out;
    out.fisher = FisherMatrix{st2, st, m};
    double det = m * st2 - st * st;
    if (det <= 0.0) throw std::invalid_argument("qdyne_crlb: singular Fisher matrix");
    out.marginal_delta_bound = std::sqrt(m / det);
    out.total_time = m * t_pi;
    return out;
}

ParamHamiltonian drive_phase_derivative(double rabi, double omega, double phase0) {
    if (!(rabi > 0.0)) throw std::invalid_argument("drive_phase_derivative: rabi must be > 0");
    ParamHamiltonian fam;
    fam.derivative = [rabi, omega, phase0](double tau) -> Mat2c {
        double phi = omega * tau + phase0;
        // (hbar rabi / 2)(-sin(phi) sx + cos(phi) sy), basis (|0>, |1>)
        double s = std::sin(phi), c = std::cos(phi);
        double h = 0.5 * kHbar * rabi;
        std::complex<double> off{-h * s, -h * c};  // -h (s + i c) at (0,1)
        return Mat2c{std::complex<double>{0.0, 0.0}, off, std::conj(off),
                     std::complex<double>{0.0, 0.0}};
    };
    return fam;
}

namespace {

double eigenvalue_gap(const Mat2c& h) {
    // Hermitian check, then closed-form gap of [[a, b], [conj(b), d]].
    double herm_err = std::abs(h[0].imag()) + std::abs(h[3].imag()) +
                      std::abs(h[1] - std::conj(h[2]));
    double scale = std::abs(h[0]) + std::abs(h[1]) + std::abs(h[3]) + 1e-300;
    if (herm_err > 1e-9 * scale)
        throw std::invalid_argument("qfi_max: non-Hermitian derivative");
    double a = h[0].real(), d = h[3].real();
    double half_diff = 0.5 * (a - d);
    return 2.0 * std::sqrt(half_diff * half_diff + std::norm(h[1]));
}

double simpson(const std::function<Mat2c(double)>& f, double a, double b, int n) {
    if (n % 2 != 0) ++n;
    double h = (b - a) / static_cast<double>(n);
    double sum = eigenvalue_gap(f(a)) + eigenvalue_gap(f(b));
    for (int i = 1; i < n; ++i)
        sum += eigenvalue_gap(f(a + h * static_cast<double>(i))) * (i % 2 == 1 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

}  // namespace

QfiResult qfi_max(const QfiQuery& q) {
    if (!(q.total_time > 0.0)) throw std::invalid_argument("qfi_max: total_time must be > 0");
    if (q.grid < 16) throw std::invalid_argument("qfi_max: grid must be >= 16");
    if (!q.hamiltonian.derivative) throw std::invalid_argument("qfi_max: missing derivative");

    // Panels between drive discontinuities.
    std::vector<double> edges{0.0};
    for (double b : q.hamiltonian.segment_boundaries)
        if (b > 0.0 && b < q.total_time) edges.push_back(b);
    edges.push_back(q.total_time);
    std::sort(edges.begin(), edges.end());

    double integral = 0.0;
    double worst_rel = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        double a = edges[i], b = edges[i + 1];
        int n = q.grid;
        double coarse = simpson(q.hamiltonian.derivative, a, b, n);
        double fine = simpson(q.hamiltonian.derivative, a, b, 2 * n);
        double rel = std::abs(fine - coarse) / (15.0 * std::max(std::abs(fine), 1e-300));
        int guard = 0;
        while (rel > 1e-8 && guard++ < 12) {
            n *= 2;
            coarse = fine;
            fine = simpson(q.hamiltonian.derivative, a, b, 2 * n);
            rel = std::abs(fine - coarse) / (15.0 * std::max(std::abs(fine), 1e-300));
        }
        if (rel > 1e-8)
            throw std::runtime_error("qfi_max: quadrature failed to reach 1e-8 relative error");
        integral += fine;
        worst_rel = std::max(worst_rel, rel);
    }

    integral /= kHbar;
    QfiResult r;
    r.qfi = integral * integral;
    r.bound = 1.0 / integral;
    r.quadrature_error = worst_rel;
    return r;
}

CrossoverResult crossover(double t_pi) {
    if (!(t_pi > 0.0)) throw std::invalid_argument("crossover: t_pi must be > 0");
    CrossoverResult r;
    r.closed_form = 0.25 * (21.0 + std::sqrt(433.0)) * t_pi;

    // Bisection on g(T) = bound(T) * T - 1, decreasing through the root.
    auto g = [t_pi](double tt) {
        BoundQuery q;
        q.kind = BoundKind::qdyne_1;
        q.total_time = tt;
        q.t_pi = t_pi;
        return eval_bound(q).value * tt - 1.0;
    };
    double lo = t_pi, hi = 100.0 * t_pi;
    if (g(lo) <= 0.0 || g(hi) >= 0.0) throw std::runtime_error("crossover: bracket failed");
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
        if ((hi - lo) <= 1e-15 * hi) break;
    }
    r.bisection = 0.5 * (lo + hi);
    return r;
}

}  // namespace metrolab
