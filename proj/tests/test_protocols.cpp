#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "metrolab/protocols.hpp"
#include "metrolab/rng.hpp"

using namespace metrolab;

namespace {

RamseyConfig basic_ramsey(double detuning, double free_time, long shots,
                          ReadoutModel readout = {}) {
    RamseyConfig cfg;
    cfg.atom = AtomSpec{kTwoPi * 5e6};
    cfg.drive = DriveField{cfg.atom.omega0 + detuning, kTwoPi * 2.5e5, 0.0, 0.0};
    cfg.free_time = free_time;
    cfg.shots = shots;
    cfg.readout = readout;
    return cfg;
}

}  // namespace

TEST_CASE("Ramsey on resonance gives a null fringe") {
    RamseyResult r = run_ramsey(basic_ramsey(0.0, 1e-5, 4000), 11);
    CHECK(r.ideal_probability == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.fraction == 0.0);
}

TEST_CASE("Ramsey half fringe at delta t = pi") {
    double t = 1e-5;
    RamseyResult r = run_ramsey(basic_ramsey(kPi / t, t, 500), 12);
    CHECK(r.ideal_probability == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.fraction == 1.0);
}

TEST_CASE("Ramsey mid fringe: binomial scatter within 3 sigma") {
    double t = 1e-5;
    RamseyResult r = run_ramsey(basic_ramsey(0.5 * kPi / t, t, 10000), 13);
    CHECK(r.ideal_probability == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(std::abs(r.fraction - 0.5) < 0.015);  // 3 sigma of p(1-p)/R
}

TEST_CASE("Ramsey fringe matches exact finite-pulse evolution at small detuning") {
    // The kick model is the Omega >> delta limit of the driven sequence.
    AtomSpec atom{kTwoPi * 5e6};
    double rabi = kTwoPi * 1e6;
    double t = 2e-5;
    double delta = 0.17 * kPi / t;
    double quarter = 0.5 * kPi / rabi;
    DriveField pulse{atom.omega0 + delta, rabi, 0.0, 0.0};
    DriveField idle{atom.omega0 + delta, 0.0, 0.0, 0.0};
    DriveField pulse_pi = pulse;
    pulse_pi.phase0 = kPi;

    SpinState s = SpinState::ground();
    s = evolve(s, atom, {pulse, 0.0, quarter});
    s = evolve(s, atom, {idle, quarter, t});
    s = evolve(s, atom, {pulse_pi, quarter + t, quarter});
    double exact = excited_population(s);

    RamseyConfig cfg = basic_ramsey(delta, t, 1);
    cfg.drive.rabi = rabi;
    RamseyResult r = run_ramsey(cfg, 1);
    double ideal = r.ideal_probability;
    CHECK(ideal == doctest::Approx(0.5 * (1.0 - std::cos(delta * t))).epsilon(1e-12));
    // finite-pulse corrections scale as (delta/Omega)
    CHECK(std::abs(exact - ideal) < 5.0 * (delta / rabi));
}

TEST_CASE("readout model reduces visibility by f0 + f1 - 1") {
    ReadoutModel ro{0.92, 0.85, 0.0, 0.0};
    for (double p : {0.0, 0.2, 0.5, 0.9, 1.0}) {
        double expected = (1.0 - ro.fidelity0) + p * (ro.fidelity0 + ro.fidelity1 - 1.0);
        CHECK(ro.observed(p) == doctest::Approx(expected).epsilon(1e-15));
    }
    // fringe amplitude contracts exactly by the visibility factor
    double v = ro.fidelity0 + ro.fidelity1 - 1.0;
    double amp = 0.5 * (ro.observed(1.0) - ro.observed(0.0));
    CHECK(amp == doctest::Approx(0.5 * v).epsilon(1e-15));
}

TEST_CASE("readout model validation") {
    CHECK_THROWS_AS(validate(ReadoutModel{0.5, 1.0, 0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(validate(ReadoutModel{0.9, 1.1, 0.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(validate(ReadoutModel{0.9, 0.9, -1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("qdyne config invariants") {
    QdyneConfig cfg = make_qdyne_config(kTwoPi * 1000.0, 5e-6, 100, {}, 1);
    CHECK_NOTHROW(validate(cfg));
    QdyneConfig bad = cfg;
    bad.t_pi *= 1.0 + 1e-6;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = cfg;
    bad.control.rabi *= 2.0;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    bad = cfg;
    bad.control.phase0 = 0.1;
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
}

TEST_CASE("qdyne determinism: identical config and seed give identical records") {
    QdyneConfig cfg = make_qdyne_config(kTwoPi * 1200.0, 5e-6, 2000, {}, 98765);
    QdyneRecord a = run_qdyne(cfg);
    QdyneRecord b = run_qdyne(cfg);
    REQUIRE(a.outcomes.size() == b.outcomes.size());
    CHECK(a.outcomes == b.outcomes);
    CHECK(a.midpoints == b.midpoints);
}

TEST_CASE("qdyne zero detuning gives a time-independent outcome probability") {
    QdyneConfig cfg = make_qdyne_config(0.0, 5e-6, 3000, {}, 5);
    QdyneRecord rec = run_qdyne(cfg);
    // all shots share one probability; with signal phase 0 the composition
    // lands on the bright fringe
    long ones = 0;
    for (auto o : rec.outcomes) ones += o;
    CHECK(static_cast<double>(ones) / 3000.0 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("qdyne at the Nyquist edge alternates between the two fringe extremes") {
    double t_pi = 5e-6;
    double delta = kPi / t_pi;  // delta * shot period == pi
    const long m = 16;
    const int n_seeds = 400;
    std::vector<double> mean(static_cast<std::size_t>(m), 0.0);
    for (int s = 0; s < n_seeds; ++s) {
        QdyneRecord rec = run_qdyne(make_qdyne_config(delta, t_pi, m, {}, 40000 + s));
        for (long i = 0; i < m; ++i) mean[static_cast<std::size_t>(i)] += rec.outcomes[static_cast<std::size_t>(i)];
    }
    for (double& v : mean) v /= n_seeds;
    double sigma = 0.5 / std::sqrt(static_cast<double>(n_seeds));
    // period-2 probability sequence: same parity agrees, parities differ
    for (long i = 0; i + 2 < m; ++i)
        CHECK(std::abs(mean[static_cast<std::size_t>(i)] - mean[static_cast<std::size_t>(i + 2)]) < 5.0 * sigma);
    CHECK(std::abs(mean[0] - mean[1]) > 10.0 * sigma);
}

TEST_CASE("qdyne empirical means match the frozen signal model across detunings") {
    double t_pi = 5e-6;
    const int n_seeds = 200;
    for (double f_hz : {400.0, 1700.0, 5200.0}) {
        double delta = kTwoPi * f_hz;
        // accumulate outcomes at fixed shot indices over many seeds
        const long m = 40;
        std::vector<double> counts(static_cast<std::size_t>(m), 0.0);
        std::vector<double> mids;
        for (int s = 0; s < n_seeds; ++s) {
            QdyneConfig cfg = make_qdyne_config(delta, t_pi, m, {}, 1000 + s);
            QdyneRecord rec = run_qdyne(cfg);
            if (s == 0) mids = rec.midpoints;
            for (long i = 0; i < m; ++i) counts[static_cast<std::size_t>(i)] += rec.outcomes[static_cast<std::size_t>(i)];
        }
        for (long i = 0; i < m; ++i) {
            double p_model = qdyne_model_probability(delta, mids[static_cast<std::size_t>(i)], t_pi);
            double mean = counts[static_cast<std::size_t>(i)] / n_seeds;
            double sigma = std::sqrt(std::max(p_model * (1.0 - p_model), 1e-4) / n_seeds);
            // small cushion for the O((delta/Omega)^2) frozen-model error
            CHECK(std::abs(mean - p_model) < 3.5 * sigma + 3e-3);
        }
    }
}

TEST_CASE("frozen signal model matches the exact composition, signal phase included") {
    // the -t_pi/pi timestamp shift and additive signal phase, checked against
    // evolve() at small delta/Omega
    double t_pi = 5e-6;
    for (double phase0 : {0.0, 0.9}) {
        for (double f_hz : {300.0, 900.0}) {
            double delta = kTwoPi * f_hz;
            QdyneConfig cfg = make_qdyne_config(delta, t_pi, 1, {}, 1);
            cfg.signal.phase0 = phase0;
            for (long i : {0L, 3L, 11L}) {
                double start = static_cast<double>(i) * t_pi;
                SpinState s = SpinState::ground();
                DriveField sig = cfg.signal;
                sig.omega = effective_rate(cfg, cfg.signal);
                DriveField ctl = cfg.control;
                ctl.omega = effective_rate(cfg, cfg.control);
                s = evolve(s, cfg.atom, {sig, start, 0.5 * t_pi});
                s = evolve(s, cfg.atom, {ctl, start + 0.5 * t_pi, 0.5 * t_pi});
                double exact = excited_population(s);
                double model =
                    qdyne_model_probability(delta, start + 0.5 * t_pi, t_pi, phase0);
                CHECK(std::abs(exact - model) < 2e-4);  // O((delta/Omega)^2)
            }
        }
    }
}

TEST_CASE("half-rate and full-rate phase laws differ by a factor two in the beat") {
    // same nominal drive frequencies under both laws
    double t_pi = 5e-6;
    QdyneConfig half = make_qdyne_config(kTwoPi * 1000.0, t_pi, 8, {}, 1, PhaseLaw::half_rate);
    QdyneConfig full = half;
    full.phase_law = PhaseLaw::full_rate;
    CHECK(effective_detuning(half) == doctest::Approx(kTwoPi * 1000.0));
    CHECK(effective_detuning(full) == doctest::Approx(2.0 * kTwoPi * 1000.0));
}

TEST_CASE("aliasing flag raises beyond the shot-grid Nyquist rate") {
    double t_pi = 5e-6;
    QdyneRecord ok = run_qdyne(make_qdyne_config(0.9 * kPi / t_pi, t_pi, 16, {}, 1));
    CHECK_FALSE(ok.aliasing_risk);
    QdyneRecord risky = run_qdyne(make_qdyne_config(1.5 * kPi / t_pi, t_pi, 16, {}, 1));
    CHECK(risky.aliasing_risk);
}

TEST_CASE("wall clock sums every dead time") {
    RamseyConfig r = basic_ramsey(0.0, 1e-5, 1, ReadoutModel{1.0, 1.0, 1e-6, 1e-6});
    r.drive.rabi = kPi / 2e-6;  // two pi/2 pulses of 1 us each
    CHECK(wall_clock(r) == doctest::Approx(1.4e-5).epsilon(1e-12));

    QdyneConfig q = make_qdyne_config(kTwoPi * 1000.0, 5e-6, 1000, {}, 1);
    CHECK(wall_clock(q) == doctest::Approx(5e-3).epsilon(1e-12));

    // audited pulse-sequence geometry: 43 + 2 + 43 + 400 us
    const double segs[] = {4.3e-5, 2e-6, 4.3e-5, 4e-4};
    CHECK(wall_clock(segs) == doctest::Approx(4.88e-4).epsilon(1e-12));
}

TEST_CASE("wall clock exceeds bare evolution time whenever dead times are nonzero") {
    Pcg32 rng(3);
    for (int i = 0; i < 50; ++i) {
        ReadoutModel ro{1.0, 1.0, 1e-7 + rng.uniform01() * 1e-5, rng.uniform01() * 1e-5};
        QdyneConfig q = make_qdyne_config(kTwoPi * 500.0, 5e-6, 200, ro, 1);
        CHECK(wall_clock(q) > 200 * 5e-6);
    }
}

TEST_CASE("record serialization round-trips bit-exactly") {
    Pcg32 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        QdyneConfig cfg = make_qdyne_config(kTwoPi * (100.0 + 9000.0 * rng.uniform01()),
                                            1e-6 + rng.uniform01() * 1e-5, 50, {}, trial);
        QdyneRecord rec = run_qdyne(cfg);
        if (trial % 2 == 0) rec.true_detuning_hidden.reset();
        std::stringstream ss;
        write_qdyne_record(ss, rec);
        QdyneRecord back = read_qdyne_record(ss);
        CHECK(back.midpoints == rec.midpoints);
        CHECK(back.outcomes == rec.outcomes);
        CHECK(back.t_pi == rec.t_pi);
        CHECK(back.total_time == rec.total_time);
        CHECK(back.dead_time == rec.dead_time);
        CHECK(back.aliasing_risk == rec.aliasing_risk);
        CHECK(back.true_detuning_hidden == rec.true_detuning_hidden);
    }
}

TEST_CASE("record validation catches non-increasing midpoints") {
    QdyneRecord rec;
    rec.t_pi = 1e-6;
    rec.midpoints = {1.0, 1.0};
    rec.outcomes = {0, 1};
    CHECK_THROWS_AS(validate(rec), std::invalid_argument);
}
