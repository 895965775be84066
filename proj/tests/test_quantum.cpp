#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "metrolab/quantum.hpp"
#include "metrolab/rng.hpp"

using namespace metrolab;

namespace {

// Independent propagator: scaled-and-squared Taylor series of exp(-i H t),
// no Rabi closed form anywhere. Used as the brute-force reference.
struct M2 {
    complexd a, b, c, d;
    M2 operator*(const M2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
};

M2 expm(const M2& m) {
    double scale = std::abs(m.a) + std::abs(m.b) + std::abs(m.c) + std::abs(m.d);
    int squarings = 0;
    M2 x = m;
    while (scale > 0.5) {
        scale *= 0.5;
        ++squarings;
        x = {x.a * 0.5, x.b * 0.5, x.c * 0.5, x.d * 0.5};
    }
    M2 result{1.0, 0.0, 0.0, 1.0};
    M2 term{1.0, 0.0, 0.0, 1.0};
    for (int k = 1; k <= 24; ++k) {
        term = term * x;
        double inv = 1.0;
        for (int j = 2; j <= k; ++j) inv /= static_cast<double>(j);
        // accumulate term / k!
        M2 scaled{term.a, term.b, term.c, term.d};
        if (k >= 2) scaled = {term.a * inv, term.b * inv, term.c * inv, term.d * inv};
        result = {result.a + scaled.a, result.b + scaled.b, result.c + scaled.c,
                  result.d + scaled.d};
    }
    for (int s = 0; s < squarings; ++s) result = result * result;
    return result;
}

// Two simultaneous resonant drives with phases p1, p2 in the rotating frame:
// H/hbar = (O/2)[(cos p1 + cos p2) sx + (sin p1 + sin p2) sy]
double two_field_brute_force(double rabi_angle, double dphi) {
    double o = 1.0;                    // per-field Rabi rate (arbitrary units)
    double t = rabi_angle / o;         // interaction time
    double hx = 0.5 * o * (std::cos(0.0) + std::cos(dphi));
    double hy = 0.5 * o * (std::sin(0.0) + std::sin(dphi));
    // -i H t in basis (|0>,|1>), sx=[[0,1],[1,0]], sy=[[0,-i],[i,0]]
    complexd ihx = complexd(0.0, -1.0) * (hx * t);
    M2 m{0.0, ihx + complexd(0.0, -1.0) * (complexd(0.0, -1.0) * hy * t),
         ihx + complexd(0.0, -1.0) * (complexd(0.0, 1.0) * hy * t), 0.0};
    M2 u = expm(m);
    return std::norm(u.c);  // |<1|U|0>|^2
}

SpinState random_state(Pcg32& rng) {
    SpinState s{{rng.uniform01() - 0.5, rng.uniform01() - 0.5},
                {rng.uniform01() - 0.5, rng.uniform01() - 0.5}};
    return normalized(s);
}

}  // namespace

TEST_CASE("pi pulse on resonance flips the ground state") {
    AtomSpec atom{kTwoPi * 5e6};
    double rabi = kTwoPi * 1e5;
    DriveField f{atom.omega0, rabi, 0.0, 0.0};
    SpinState out = evolve(SpinState::ground(), atom, {f, 0.0, kPi / rabi});
    CHECK(excited_population(out) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("zero Rabi rate leaves populations unchanged") {
    AtomSpec atom{kTwoPi * 5e6};
    DriveField f{atom.omega0, 0.0, 0.0, 0.0};
    SpinState in = normalized(SpinState{{0.8, 0.1}, {0.3, -0.5}});
    double p_before = excited_population(in);
    SpinState out = evolve(in, atom, {f, 0.3e-6, 7.7e-6});
    CHECK(excited_population(out) == doctest::Approx(p_before).epsilon(1e-12));
}

TEST_CASE("two resonant pi/2 segments compose constructively and destructively") {
    AtomSpec atom{kTwoPi * 5e6};
    double rabi = kTwoPi * 1e5;
    double half = 0.5 * kPi / rabi;
    DriveField f{atom.omega0, rabi, 0.0, 0.0};

    SpinState s = evolve(SpinState::ground(), atom, {f, 0.0, half});
    SpinState equal_phase = evolve(s, atom, {f, half, half});
    CHECK(excited_population(equal_phase) == doctest::Approx(1.0).epsilon(1e-12));

    DriveField g = f;
    g.phase0 = kPi;
    SpinState opposite = evolve(s, atom, {g, half, half});
    CHECK(excited_population(opposite) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("excited_population on basis states and superposition") {
    CHECK(excited_population(SpinState::ground()) == 0.0);
    CHECK(excited_population(SpinState::excited()) == 1.0);
    SpinState eq{{1.0 / std::sqrt(2.0), 0.0}, {0.0, 1.0 / std::sqrt(2.0)}};
    CHECK(excited_population(eq) == doctest::Approx(0.5).epsilon(1e-12));

    AtomSpec atom{kTwoPi * 5e6};
    double rabi = kTwoPi * 1e5;
    DriveField f{atom.omega0, rabi, 0.0, 0.0};
    SpinState s = evolve(SpinState::ground(), atom, {f, 0.0, 0.5 * kPi / rabi});
    CHECK(excited_population(s) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("evolve rejects bad inputs") {
    AtomSpec atom{kTwoPi * 5e6};
    DriveField f{atom.omega0, kTwoPi * 1e5, 0.0, 0.0};
    SpinState denorm{{0.5, 0.0}, {0.0, 0.0}};
    CHECK_THROWS_AS(evolve(denorm, atom, {f, 0.0, 1e-6}), std::invalid_argument);
    CHECK_THROWS_AS(evolve(SpinState::ground(), atom, {f, 0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(evolve(SpinState::ground(), atom, {f, 0.0, -1e-6}), std::invalid_argument);
}

TEST_CASE("unitarity: random states and segments keep the norm") {
    Pcg32 rng(7);
    AtomSpec atom{kTwoPi * 5e6};
    for (int i = 0; i < 300; ++i) {
        SpinState s = random_state(rng);
        DriveField f{atom.omega0 * (0.5 + rng.uniform01()), kTwoPi * 1e5 * rng.uniform01() * 2.0,
                     kTwoPi * rng.uniform01(), rng.uniform01() * 1e-5};
        PulseSegment seg{f, rng.uniform01() * 1e-4, 1e-7 + rng.uniform01() * 1e-5};
        SpinState out = evolve(s, atom, seg);
        CHECK(std::abs(out.norm_sq() - 1.0) < 1e-12);
    }
}

TEST_CASE("composition: same field over [a,b] then [b,c] equals [a,c]") {
    Pcg32 rng(13);
    AtomSpec atom{kTwoPi * 5e6};
    for (int i = 0; i < 100; ++i) {
        SpinState s = random_state(rng);
        DriveField f{atom.omega0 * (0.9 + 0.2 * rng.uniform01()), kTwoPi * 2e5 * rng.uniform01(),
                     kTwoPi * rng.uniform01(), 0.0};
        double a = rng.uniform01() * 1e-5;
        double b = a + 1e-7 + rng.uniform01() * 1e-5;
        double c = b + 1e-7 + rng.uniform01() * 1e-5;
        SpinState two = evolve(evolve(s, atom, {f, a, b - a}), atom, {f, b, c - b});
        SpinState one = evolve(s, atom, {f, a, c - a});
        CHECK(std::abs(two.amp0 - one.amp0) < 1e-10);
        CHECK(std::abs(two.amp1 - one.amp1) < 1e-10);
    }
}

TEST_CASE("global phase does not leak into observables") {
    AtomSpec atom{kTwoPi * 5e6};
    DriveField f{atom.omega0, kTwoPi * 1e5, 0.7, 0.0};
    SpinState s = normalized(SpinState{{0.6, 0.2}, {0.4, -0.66}});
    SpinState rotated{s.amp0 * std::polar(1.0, 1.234), s.amp1 * std::polar(1.0, 1.234)};
    SpinState a = evolve(s, atom, {f, 0.0, 2.3e-6});
    SpinState b = evolve(rotated, atom, {f, 0.0, 2.3e-6});
    CHECK(excited_population(a) == doctest::Approx(excited_population(b)).epsilon(1e-12));
    SpinState ca = canonical(a);
    CHECK(ca.amp0.imag() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("two_field_response closed form and edge cases") {
    CHECK(two_field_response(0.5 * kPi, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(two_field_response(1.234, kPi) == doctest::Approx(0.0).epsilon(1e-12));
    // frozen from direct evaluation of sin^2(pi/2 * cos(pi/4))
    CHECK(two_field_response(0.5 * kPi, 0.5 * kPi) ==
          doctest::Approx(0.80284993353940672).epsilon(1e-12));
    CHECK_THROWS_AS(two_field_response(-0.1, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(two_field_response(1.0, kTwoPi), std::invalid_argument);
}

TEST_CASE("two_field_response agrees with brute-force matrix exponential on a 50x50 grid") {
    for (int i = 0; i < 50; ++i) {
        double angle = (i + 0.5) * (2.4 / 50.0);
        for (int j = 0; j < 50; ++j) {
            double dphi = (j + 0.5) * (kTwoPi / 50.0);
            double closed = two_field_response(angle, dphi);
            double brute = two_field_brute_force(angle, dphi);
            CHECK(std::abs(closed - brute) < 1e-8);
        }
    }
}

TEST_CASE("two_field_response matches evolve() with the summed equivalent drive") {
    AtomSpec atom{kTwoPi * 5e6};
    double o = kTwoPi * 1e5;
    for (double dphi : {0.3, 1.2, 2.0, 2.9, 4.1}) {
        for (double angle : {0.4, 1.0, 1.5}) {
            // phasor sum of two equal resonant drives at phases 0 and dphi
            double eff_rabi = 2.0 * o * std::cos(0.5 * dphi);
            double eff_phase = 0.5 * dphi + (eff_rabi < 0.0 ? kPi : 0.0);
            DriveField f{atom.omega0, std::abs(eff_rabi), eff_phase, 0.0};
            double t = angle / o;
            SpinState out = evolve(SpinState::ground(), atom, {f, 0.0, t});
            CHECK(excited_population(out) ==
                  doctest::Approx(two_field_response(angle, dphi)).epsilon(1e-10));
        }
    }
}

TEST_CASE("binomial Fisher information of the two-field response saturates (Omega t)^2") {
    // numerical limit dphi -> pi of (dP/dphi)^2 / (P(1-P))
    for (double angle : {0.7, 0.5 * kPi, 2.0}) {
        double eps = 1e-4;
        double x = kPi - eps;
        double h = 1e-7;
        double pm = two_field_response(angle, x - h);
        double pp = two_field_response(angle, x + h);
        double p0 = two_field_response(angle, x);
        double dp = (pp - pm) / (2.0 * h);
        double fi = dp * dp / (p0 * (1.0 - p0));
        CHECK(std::abs(fi - angle * angle) < 1e-6 * angle * angle);
    }
}
