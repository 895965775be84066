#include "metrolab/protocols.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "metrolab/rng.hpp"

namespace metrolab {

void validate(const ReadoutModel& m) {
    if (!(m.fidelity0 > 0.5) || m.fidelity0 > 1.0 || !(m.fidelity1 > 0.5) || m.fidelity1 > 1.0)
        throw std::invalid_argument("ReadoutModel: fidelities must lie in (0.5, 1]");
    if (m.readout_time < 0.0 || m.init_time < 0.0)
        throw std::invalid_argument("ReadoutModel: dead times must be >= 0");
}

void validate(const RamseyConfig& cfg) {
    validate(cfg.atom);
    validate(cfg.drive);
    validate(cfg.readout);
    if (!(cfg.drive.rabi > 0.0)) throw std::invalid_argument("RamseyConfig: drive.rabi must be > 0");
    if (!(cfg.free_time > 0.0)) throw std::invalid_argument("RamseyConfig: free_time must be > 0");
    if (cfg.shots < 1) throw std::invalid_argument("RamseyConfig: shots must be >= 1");
}

RamseyResult run_ramsey(const RamseyConfig& cfg, std::uint64_t seed) {
    validate(cfg);

    // Pulses as instantaneous kicks about the oscillator axis; the second
    // pulse sits on the opposite axis, fixing the fringe to (1 - cos dt)/2.
    double delta = cfg.drive.omega - cfg.atom.omega0;
    SpinState s = SpinState::ground();
    s = rotate(s, 0.0, 0.5 * kPi);
    s = z_rotate(s, -delta * cfg.free_time);  // frame phase at detuning
    s = rotate(s, kPi, 0.5 * kPi);
    double p_ideal = excited_population(s);

    double p_obs = cfg.readout.observed(p_ideal);
    Pcg32 rng(seed);
    RamseyResult res;
    res.outcomes.resize(static_cast<std::size_t>(cfg.shots));
    long ones = 0;
    for (long i = 0; i < cfg.shots; ++i) {
        bool hit = rng.bernoulli(p_obs);
        res.outcomes[static_cast<std::size_t>(i)] = hit ? 1 : 0;
        ones += hit ? 1 : 0;
    }
    res.fraction = static_cast<double>(ones) / static_cast<double>(cfg.shots);
    res.ideal_probability = p_ideal;
    res.total_time = wall_clock(cfg);
    return res;
}

void validate(const QdyneConfig& cfg) {
    validate(cfg.atom);
    validate(cfg.signal);
    validate(cfg.control);
    validate(cfg.readout);
    if (!(cfg.signal.rabi > 0.0)) throw std::invalid_argument("QdyneConfig: signal.rabi must be > 0");
    if (cfg.control.rabi != cfg.signal.rabi)
        throw std::invalid_argument("QdyneConfig: control.rabi must equal signal.rabi");
    if (cfg.control.phase0 != 0.0)
        throw std::invalid_argument("QdyneConfig: control phase reference must be zero");
    double expected = kPi / cfg.signal.rabi;
    if (std::abs(cfg.t_pi - expected) > 1e-12 * expected)
        throw std::invalid_argument("QdyneConfig: t_pi must equal pi / signal.rabi");
    if (cfg.n_measurements < 1)
        throw std::invalid_argument("QdyneConfig: n_measurements must be >= 1");
}

double effective_rate(const QdyneConfig& cfg, const DriveField& f) {
    return cfg.phase_law == PhaseLaw::half_rate ? 0.5 * f.omega : f.omega;
}

double effective_detuning(const QdyneConfig& cfg) {
    return effective_rate(cfg, cfg.signal) - effective_rate(cfg, cfg.control);
}

void validate(const QdyneRecord& rec) {
    if (rec.midpoints.size() != rec.outcomes.size())
        throw std::invalid_argument("QdyneRecord: midpoints/outcomes length mismatch");
    if (!(rec.t_pi > 0.0)) throw std::invalid_argument("QdyneRecord: t_pi must be > 0");
    for (std::size_t i = 1; i < rec.midpoints.size(); ++i)
        if (!(rec.midpoints[i] > rec.midpoints[i - 1]))
            throw std::invalid_argument("QdyneRecord: midpoints must be strictly increasing");
}

QdyneRecord run_qdyne(const QdyneConfig& cfg) {
    validate(cfg);

    long m = cfg.n_measurements;
    double dead = cfg.readout.dead_time();
    double period = cfg.t_pi + dead;
    double half = 0.5 * cfg.t_pi;

    // Effective drives: phase advances at the law's rate, amplitude unchanged.
    DriveField sig = cfg.signal;
    sig.omega = effective_rate(cfg, cfg.signal);
    DriveField ctl = cfg.control;
    ctl.omega = effective_rate(cfg, cfg.control);

    QdyneRecord rec;
    rec.t_pi = cfg.t_pi;
    rec.dead_time = dead;
    rec.total_time = static_cast<double>(m) * period;
    rec.true_detuning_hidden = sig.omega - ctl.omega;
    rec.aliasing_risk = std::abs(*rec.true_detuning_hidden) > kPi / period;
    rec.midpoints.resize(static_cast<std::size_t>(m));
    rec.outcomes.resize(static_cast<std::size_t>(m));

    Pcg32 rng(cfg.seed);
    for (long i = 0; i < m; ++i) {
        double start = static_cast<double>(i) * period;
        SpinState s = SpinState::ground();
        s = evolve(s, cfg.atom, PulseSegment{sig, start, half});
        s = evolve(s, cfg.atom, PulseSegment{ctl, start + half, half});
        double p = cfg.readout.observed(excited_population(s));
        rec.midpoints[static_cast<std::size_t>(i)] = start + half;
        rec.outcomes[static_cast<std::size_t>(i)] = rng.bernoulli(p) ? 1 : 0;
    }
    return rec;
}

double qdyne_model_probability(double delta, double t_mid, double t_pi, double signal_phase) {
    return 0.5 * (1.0 + std::cos(delta * t_mid - delta * t_pi / kPi - signal_phase));
}

double wall_clock(const RamseyConfig& cfg) {
    validate(cfg);
    double pulses = kPi / cfg.drive.rabi;  // two pi/2 pulses
    return static_cast<double>(cfg.shots) *
           (cfg.free_time + pulses + cfg.readout.dead_time());
}

double wall_clock(const QdyneConfig& cfg) {
    validate(cfg);
    return static_cast<double>(cfg.n_measurements) * (cfg.t_pi + cfg.readout.dead_time());
}

double wall_clock(std::span<const double> durations) {
    double total = 0.0;
    for (double d : durations) {
        if (d < 0.0) throw std::invalid_argument("wall_clock: negative duration");
        total += d;
    }
    return total;
}

namespace {

void put_double(std::ostream& os, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}

double parse_double(const std::string& s, const char* what) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw std::invalid_argument(std::string("record parse: bad ") + what);
    return v;
}

}  // namespace

void write_qdyne_record(std::ostream& os, const QdyneRecord& rec) {
    validate(rec);
    os << "# t_pi=";
    put_double(os, rec.t_pi);
    os << "\n# total_time=";
    put_double(os, rec.total_time);
    os << "\n# dead_time=";
    put_double(os, rec.dead_time);
    os << "\n# aliasing_risk=" << (rec.aliasing_risk ? 1 : 0) << "\n";
    if (rec.true_detuning_hidden) {
        os << "# true_detuning=";
        put_double(os, *rec.true_detuning_hidden);
        os << "\n";
    }
    for (std::size_t i = 0; i < rec.midpoints.size(); ++i) {
        put_double(os, rec.midpoints[i]);
        os << "," << static_cast<int>(rec.outcomes[i]) << "\n";
    }
}

QdyneRecord read_qdyne_record(std::istream& is) {
    QdyneRecord rec;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto eq = line.find('=');
            if (eq == std::string::npos) throw std::invalid_argument("record parse: bad header line");
            std::string key = line.substr(2, eq - 2);
            std::string val = line.substr(eq + 1);
            if (key == "t_pi")
                rec.t_pi = parse_double(val, "t_pi");
            else if (key == "total_time")
                rec.total_time = parse_double(val, "total_time");
            else if (key == "dead_time")
                rec.dead_time = parse_double(val, "dead_time");
            else if (key == "aliasing_risk")
                rec.aliasing_risk = val == "1";
            else if (key == "true_detuning")
                rec.true_detuning_hidden = parse_double(val, "true_detuning");
            else
                throw std::invalid_argument("record parse: unknown header key " + key);
            continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("record parse: bad data row");
        rec.midpoints.push_back(parse_double(line.substr(0, comma), "midpoint"));
        int bit = std::stoi(line.substr(comma + 1));
        if (bit != 0 && bit != 1) throw std::invalid_argument("record parse: outcome must be 0/1");
        rec.outcomes.push_back(static_cast<std::uint8_t>(bit));
    }
    validate(rec);
    return rec;
}

void save_qdyne_record(const std::string& path, const QdyneRecord& rec) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    write_qdyne_record(f, rec);
}

QdyneRecord load_qdyne_record(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for reading: " + path);
    return read_qdyne_record(f);
}

QdyneConfig make_qdyne_config(double delta_eff, double t_pi, long n_measurements,
                              const ReadoutModel& readout, std::uint64_t seed, PhaseLaw law,
                              double omega0) {
    if (!(t_pi > 0.0)) throw std::invalid_argument("make_qdyne_config: t_pi must be > 0");
    double rabi = kPi / t_pi;
    double scale = law == PhaseLaw::half_rate ? 2.0 : 1.0;

    QdyneConfig cfg;
    cfg.atom = AtomSpec{omega0};
    cfg.control = DriveField{scale * omega0, rabi, 0.0, 0.0};
    cfg.signal = DriveField{scale * (omega0 + delta_eff), rabi, 0.0, 0.0};
    cfg.t_pi = kPi / rabi;
    cfg.n_measurements = n_measurements;
    cfg.readout = readout;
    cfg.seed = seed;
    cfg.phase_law = law;
    return cfg;
}

}  // namespace metrolab
