#include "metrolab/bounds.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "metrolab/quantum.hpp"

namespace metrolab {

const char* to_string(BoundKind k) {
    switch (k) {
        case BoundKind::sql: return "SQL";
        case BoundKind::hl: return "HL";
        case BoundKind::clock_single: return "CLOCK_SINGLE";
        case BoundKind::clock_lattice: return "CLOCK_LATTICE";
        case BoundKind::qdyne_1: return "QDYNE_1";
        case BoundKind::qdyne_n_linear: return "QDYNE_N_LINEAR";
        case BoundKind::qdyne_n_sped: return "QDYNE_N_SPED";
        case BoundKind::qdyne_n_sqrt: return "QDYNE_N_SQRT";
        case BoundKind::tmin: return "TMIN";
        case BoundKind::prior: return "PRIOR";
        case BoundKind::sqrt_regime: return "SQRT_REGIME";
        case BoundKind::quadratic_regime: return "QUADRATIC_REGIME";
        case BoundKind::phase_sql: return "PHASE_SQL";
        case BoundKind::freq_short_sql: return "FREQ_SHORT_SQL";
        case BoundKind::rot_angle_sql: return "ROT_ANGLE_SQL";
        case BoundKind::rabi_sql: return "RABI_SQL";
        case BoundKind::bfield_sql: return "BFIELD_SQL";
        case BoundKind::leroux_allan: return "LEROUX_ALLAN";
        case BoundKind::exp_model: return "EXP_MODEL";
    }
    return "?";
}

BoundKind bound_kind_from_string(const std::string& name) {
    static const std::map<std::string, BoundKind> table = {
        {"SQL", BoundKind::sql},
        {"HL", BoundKind::hl},
        {"CLOCK_SINGLE", BoundKind::clock_single},
        {"CLOCK_LATTICE", BoundKind::clock_lattice},
        {"QDYNE_1", BoundKind::qdyne_1},
        {"QDYNE_N_LINEAR", BoundKind::qdyne_n_linear},
        {"QDYNE_N_SPED", BoundKind::qdyne_n_sped},
        {"QDYNE_N_SQRT", BoundKind::qdyne_n_sqrt},
        {"TMIN", BoundKind::tmin},
        {"PRIOR", BoundKind::prior},
        {"SQRT_REGIME", BoundKind::sqrt_regime},
        {"QUADRATIC_REGIME", BoundKind::quadratic_regime},
        {"PHASE_SQL", BoundKind::phase_sql},
        {"FREQ_SHORT_SQL", BoundKind::freq_short_sql},
        {"ROT_ANGLE_SQL", BoundKind::rot_angle_sql},
        {"RABI_SQL", BoundKind::rabi_sql},
        {"BFIELD_SQL", BoundKind::bfield_sql},
        {"LEROUX_ALLAN", BoundKind::leroux_allan},
        {"EXP_MODEL", BoundKind::exp_model},
    };
    auto it = table.find(name);
    if (it == table.end()) throw std::invalid_argument("unknown bound kind: " + name);
    return it->second;
}

const char* to_string(Assumption a) {
    switch (a) {
        case Assumption::one_tf_conjecture: return "ONE_TF_CONJECTURE";
        case Assumption::no_systematics: return "NO_SYSTEMATICS";
        case Assumption::instant_readout: return "INSTANT_READOUT";
        case Assumption::linear_n_assumed: return "LINEAR_N_ASSUMED";
        case Assumption::entangled_speedup_assumed: return "ENTANGLED_SPEEDUP_ASSUMED";
        case Assumption::single_measurement: return "SINGLE_MEASUREMENT";
        case Assumption::apparatus_specific: return "APPARATUS_SPECIFIC";
        case Assumption::empirical_model: return "EMPIRICAL_MODEL";
    }
    return "?";
}

namespace {

double require(const std::optional<double>& v, const char* kind, const char* field) {
    if (!v)
        throw std::invalid_argument(std::string("kind ") + kind + " requires " + field);
    if (!(*v > 0.0))
        throw std::invalid_argument(std::string("kind ") + kind + ": " + field + " must be > 0");
    return *v;
}

double qdyne_single(double total_time, double t_pi) {
    return std::sqrt(24.0 * t_pi /
                     (total_time * (total_time + t_pi) * (2.0 * total_time + t_pi)));
}

double tighten_factor(TightenVariant v) {
    switch (v) {
        case TightenVariant::loose: return 1.0;
        case TightenVariant::pi: return kPi;
        case TightenVariant::two_pi: return 2.0 * kPi;
    }
    return 1.0;
}

}  // namespace

BoundResult eval_bound(const BoundQuery& q) {
    const char* kname = to_string(q.kind);
    double n = q.n_sensors;
    if (!(n >= 1.0)) throw std::invalid_argument(std::string("kind ") + kname + ": N must be >= 1");
    double sqn = std::sqrt(n);

    BoundResult r;
    r.units = "rad/s";

    switch (q.kind) {
        case BoundKind::sql: {
            double T = require(q.total_time, kname, "total_time");
            r.value = q.lambda / (sqn * T);
            r.validity = "T > 0, N >= 1 independent sensors";
            r.assumptions = {Assumption::instant_readout, Assumption::no_systematics};
            r.units = "units of lambda per second";
            break;
        }
        case BoundKind::hl: {
            double T = require(q.total_time, kname, "total_time");
            r.value = q.lambda / (n * T);
            r.validity = "T > 0, N >= 1";
            r.assumptions = {Assumption::instant_readout, Assumption::no_systematics};
            r.units = "units of lambda per second";
            break;
        }
        case BoundKind::clock_single: {
            double T = require(q.total_time, kname, "total_time");
            double t = require(q.phase_time, kname, "phase_time");
            if (t > T)
                throw std::invalid_argument("kind CLOCK_SINGLE: phase_time must not exceed total_time");
            r.value = 1.0 / std::sqrt(T * t);
            r.validity = "0 < t <= T, repeated single-ion interrogation";
            r.assumptions = {Assumption::instant_readout, Assumption::no_systematics};
            break;
        }
        case BoundKind::clock_lattice: {
            double T = require(q.total_time, kname, "total_time");
            double t = require(q.phase_time, kname, "phase_time");
            if (t > T)
                throw std::invalid_argument("kind CLOCK_LATTICE: phase_time must not exceed total_time");
            r.value = 1.0 / std::sqrt(n * T * t);
            r.validity = "0 < t <= T, N independent lattice atoms";
            r.assumptions = {Assumption::instant_readout, Assumption::no_systematics};
            break;
        }
        case BoundKind::qdyne_1: {
            double T = require(q.total_time, kname, "total_time");
            double tp = require(q.t_pi, kname, "t_pi");
            r.value = qdyne_single(T, tp);
            r.validity = "T > 0; control frequency known to well within 1/t_pi";
            r.assumptions = {Assumption::instant_readout, Assumption::no_systematics};
            break;
        }
        case BoundKind::qdyne_n_linear: {
            double T = require(q.total_time, kname, "total_time");
            double tp = require(q.t_pi, kname, "t_pi");
            r.value = qdyne_single(T, tp) / n;
            r.validity = "hypothetical linear-in-N variant";
            r.assumptions = {Assumption::instant_readout, Assumption::no_systematics,
                             Assumption::linear_n_assumed};
            break;
        }
        case BoundKind::qdyne_n_sped: {
            double T = require(q.total_time, kname, "total_time");
            double tp = require(q.t_pi, kname, "t_pi") / n;
            r.value = qdyne_single(T, tp) / n;
            r.validity = "hypothetical variant with t_pi reduced N-fold by entanglement";
            r.assumptions = {Assumption::instant_readout, Assumption::no_systematics,
                             Assumption::linear_n_assumed,
                             Assumption::entangled_speedup_assumed};
            break;
        }
        case BoundKind::qdyne_n_sqrt: {
            double T = require(q.total_time, kname, "total_time");
            double tp = require(q.t_pi, kname, "t_pi");
            r.value = qdyne_single(T, tp) / sqn;
            r.validity = "T > 0; sqrt(N) improvement on the single-sensor bound";
            r.assumptions = {Assumption::instant_readout, Assumption::no_systematics};
            if (n > 1.0) r.assumptions.push_back(Assumption::one_tf_conjecture);
            break;
        }
        case BoundKind::tmin: {
            double tp = require(q.t_pi, kname, "t_pi");
            r.value = 0.25 * tp * (-3.0 + 24.0 * n +
                                   std::sqrt(1.0 - 144.0 * n + 576.0 * n * n));
            r.validity = "N >= 1; minimum time for 1/(N T) frequency uncertainty";
            r.units = "s";
            if (n > 1.0) r.assumptions.push_back(Assumption::one_tf_conjecture);
            break;
        }
        case BoundKind::prior: {
            double T = require(q.total_time, kname, "total_time");
            double T0 = require(q.prior_time, kname, "prior_time");
            r.value = (T < T0) ? q.lambda / T0 : q.lambda / T;
            r.validity = (T < T0) ? "T < T0 (prior-limited)" : "T >= T0";
            r.assumptions = {Assumption::single_measurement};
            r.units = "units of lambda per second";
            break;
        }
        case BoundKind::sqrt_regime: {
            double T = require(q.total_time, kname, "total_time");
            double tx = require(q.t_cross, kname, "t_cross");
            if (!(T > tx))
                throw std::invalid_argument("kind SQRT_REGIME: valid only for T > t_cross");
            r.value = q.lambda / std::sqrt(n * T * tx);
            r.validity = "T > t_cross";
            r.assumptions = {Assumption::single_measurement};
            r.units = "units of lambda per second";
            break;
        }
        case BoundKind::quadratic_regime: {
            double T = require(q.total_time, kname, "total_time");
            double ts = require(q.t_star, kname, "t_star");
            if (!(T <= ts))
                throw std::invalid_argument("kind QUADRATIC_REGIME: valid only for 0 < T <= t_star");
            double scale = (q.variant == TightenVariant::two_pi) ? 2.0 : 1.0;
            r.value = scale * q.lambda * ts / (sqn * T * T);
            r.validity = "0 < T <= t_star";
            r.assumptions = {Assumption::single_measurement};
            r.units = "units of lambda per second";
            break;
        }
        case BoundKind::phase_sql: {
            double T = require(q.total_time, kname, "total_time");
            double om = require(q.rabi, kname, "rabi");
            r.value = 1.0 / (sqn * om * T);
            r.validity = "phase of the drive field relative to a known control phase";
            r.assumptions = {Assumption::instant_readout, Assumption::no_systematics};
            r.units = "rad";
            break;
        }
        case BoundKind::freq_short_sql: {
            double T = require(q.total_time, kname, "total_time");
            double om = require(q.rabi, kname, "rabi");
            r.value = tighten_factor(q.variant) / (sqn * om * T * T);
            r.validity = "single measurement, T <= pi/Omega";
            r.assumptions = {Assumption::single_measurement};
            break;
        }
        case BoundKind::rot_angle_sql: {
            r.value = 1.0 / sqn;
            r.validity = "one sample per sensor";
            r.assumptions = {Assumption::single_measurement};
            r.units = "rad";
            break;
        }
        case BoundKind::rabi_sql: {
            double T = require(q.total_time, kname, "total_time");
            r.value = 1.0 / (sqn * T);
            r.validity = "resonant drive amplitude, N independent sensors";
            r.assumptions = {Assumption::instant_readout, Assumption::no_systematics};
            break;
        }
        case BoundKind::bfield_sql: {
            double T = require(q.total_time, kname, "total_time");
            double om = require(q.rabi, kname, "rabi");
            double gm = require(q.gamma, kname, "gamma");
            r.value = om * kHbar / (sqn * gm * T);
            r.validity = "transverse field amplitude via the Rabi rate";
            r.assumptions = {Assumption::instant_readout, Assumption::no_systematics};
            r.units = "field units";
            break;
        }
        case BoundKind::leroux_allan: {
            double T = require(q.total_time, kname, "total_time");
            double t = require(q.phase_time, kname, "phase_time");
            double tc = require(q.clock_cycle, kname, "clock_cycle");
            r.value = (1.0 / t) * std::sqrt(tc / (n * T));
            r.validity = "specific squeezed-clock configuration, not a fundamental limit";
            r.assumptions = {Assumption::apparatus_specific};
            break;
        }
        case BoundKind::exp_model: {
            double T = require(q.total_time, kname, "total_time");
            double C = require(q.readout_factor, kname, "readout_factor");
            double tp = require(q.t_pi, kname, "t_pi");
            double dwc = require(q.control_systematic, kname, "control_systematic");
            r.value = exp_model(T, C, tp, dwc);
            r.strict = false;  // empirical description, not a bound
            r.validity = "empirical fit of the heterodyne experiment";
            r.assumptions = {Assumption::empirical_model};
            break;
        }
    }

    if (!(r.value > 0.0) || !std::isfinite(r.value))
        throw std::domain_error(std::string("kind ") + kname +
                                ": result not positive/finite on this input");
    return r;
}

double exp_model(double total_time, double readout_factor, double t_pi,
                 double control_systematic) {
    if (!(total_time > 0.0) || !(readout_factor > 0.0) || !(t_pi > 0.0) ||
        !(control_systematic > 0.0))
        throw std::invalid_argument("exp_model: all parameters must be > 0");
    double stat = readout_factor * qdyne_single(total_time, t_pi);
    return std::sqrt(stat * stat + control_systematic * control_systematic);
}

ExpModelCoefficients exp_model_coefficients(double readout_factor, double t_pi) {
    // C^2 24 t_pi / (T(T+t_pi)(2T+t_pi)) == C^2 12 t_pi / (T^3 + 1.5 t_pi T^2 + 0.5 t_pi^2 T)
    return {readout_factor * readout_factor * 12.0 * t_pi, 1.5 * t_pi, 0.5 * t_pi * t_pi};
}

double exp_model_published(double total_time, const PublishedHeterodyneFit& fit) {
    double T = total_time;
    double stat2 = fit.numerator / (T * T * T + fit.quad * T * T + fit.lin * T);
    return std::sqrt(stat2 + fit.systematic * fit.systematic);
}

TeRelationChain te_relation_chain(double lambda, double omega0, double total_time) {
    if (!(lambda > 0.0) || !(omega0 > 0.0) || !(total_time > 0.0))
        throw std::invalid_argument("te_relation_chain: all parameters must be > 0");
    TeRelationChain c;
    c.energy_bound = kHbar / total_time;
    c.shifted_energy_bound = c.energy_bound;
    c.parameter_bound = lambda / total_time;
    c.transition_energy = kHbar * omega0;
    return c;
}

}  // namespace metrolab
