// commands.hpp — diagonalize, thermometer, sensitivity, unruh and adiabaticity

#pragma once

#include "berrytherm/cli/config.hpp"
#include "berrytherm/cli/output.hpp"
#include "berrytherm/diagonalization.hpp"
#include "berrytherm/geomphase.hpp"
#include "berrytherm/json_io.hpp"
#include "berrytherm/oracle.hpp"
#include "berrytherm/parallel.hpp"
#include "berrytherm/thermo.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace berrytherm::cli {

using diag::DiagParams;
using diag::PhysicalParams;

// ---------- parameter resolution ----------

inline PhysicalParams physical_from_config(const RunConfig& c) {
    PhysicalParams pp;
    pp.lambda = c.number("lambda");
    if (!(pp.lambda >= 0.0)) throw ConfigError("lambda", "config: 'lambda' must be >= 0");
    if (c.has("Omega_a") || c.has("Omega_b")) {
        pp.Omega_a = c.positive("Omega_a");
        pp.Omega_b = c.positive("Omega_b");
    } else if (c.has("gap")) {
        pp.Omega_a = c.positive("gap");
        pp.Omega_b = pp.Omega_a + c.number("detuning", pp.lambda);
        if (!(pp.Omega_b > 0.0)) throw ConfigError("detuning", "config: gap + detuning must be positive");
    } else {
        throw ConfigError("Omega_a", "config: give Omega_a and Omega_b, or gap");
    }
    return pp;
}

struct Resolved {
    PhysicalParams pp;
    DiagParams dp;
    std::optional<diag::InverseResult> inverse;  // set when solved from physical parameters
};

// Diagonal parameters either given directly (omega_a, omega_b, v) or solved
// from the physical ones.
inline Resolved resolve_params(const RunConfig& c) {
    Resolved r;
    if (c.has("omega_a") || c.has("omega_b") || c.has("v")) {
        r.dp = {c.positive("omega_a"), c.positive("omega_b"), c.positive("v")};
        diag::validate(r.dp);
        r.pp = diag::forward_map(r.dp);
        return r;
    }
    r.pp = physical_from_config(c);
    r.inverse = diag::inverse_map(r.pp);
    r.dp = r.inverse->params;
    return r;
}

inline double resolve_G(const Resolved& r, const char* command) {
    if (r.inverse && r.inverse->degenerate)
        throw ConfigError("lambda", std::string(command) + ": lambda must be positive");
    return geom::mode_fraction_G(r.dp);
}

inline std::vector<double> log_space(double lo, double hi, int n) {
    std::vector<double> x(n);
    if (n == 1) {
        x[0] = lo;
        return x;
    }
    const double a = std::log(lo), b = std::log(hi);
    for (int k = 0; k < n; ++k) x[k] = std::exp(a + (b - a) * k / (n - 1));
    x.front() = lo;
    x.back() = hi;
    return x;
}

inline std::string output_format(const RunConfig& c) { return c.choice("format", "csv", {"csv", "json"}); }

inline oracle::LoopSpec loop_spec_from_config(const RunConfig& c) {
    oracle::LoopSpec spec;
    spec.n_points = c.integer("loop_points", 2048, 16);
    spec.refinement = c.choice("refinement", "richardson", {"single", "richardson"}) == "single"
                          ? oracle::Refinement::single
                          : oracle::Refinement::richardson;
    spec.dims = fock::FockDims(c.integer("n_field", 30, 2), c.integer("n_det", 30, 2));
    return spec;
}

// ---------- diagonalize ----------

inline json params_json(const PhysicalParams& pp) {
    return json{{"Omega_a", pp.Omega_a}, {"Omega_b", pp.Omega_b}, {"lambda", pp.lambda}};
}

inline json params_json(const DiagParams& dp) {
    return json{{"omega_a", dp.omega_a}, {"omega_b", dp.omega_b}, {"v", dp.v}};
}

inline json derived_json(const diag::DerivedParams& d) {
    const auto& g = d.g;
    return json{{"C", d.C},
                {"u", d.u},
                {"s", d.s},
                {"theta_a", d.theta_a},
                {"theta_b", d.theta_b},
                {"phi", d.phi},
                {"p", d.p},
                {"Z", d.Z},
                {"lambda_hat", d.lambda_hat},
                {"Omega_hat_b", d.Omega_hat_b},
                {"energy_shift", d.energy_shift},
                {"g1", io::complex_to_json(g.g1)},
                {"g2", io::complex_to_json(g.g2)},
                {"g3", io::complex_to_json(g.g3)},
                {"g4", io::complex_to_json(g.g4)},
                {"g5", io::complex_to_json(g.g5)},
                {"g6", io::complex_to_json(g.g6)},
                {"g4_relative", std::abs(g.g4) / std::abs(g.g1)}};
}

inline CommandResult cmd_diagonalize(const RunConfig& c) {
    const Resolved r = resolve_params(c);
    const fock::FockDims dims(c.integer("n_field", 30, 2), c.integer("n_det", 30, 2));

    json report;
    report["physical"] = params_json(r.pp);
    report["diag"] = params_json(r.dp);
    report["source"] = r.inverse ? "inverse_map" : "diag_params";
    const bool degenerate = r.inverse && r.inverse->degenerate;
    report["degenerate"] = degenerate;
    if (r.inverse) {
        report["inverse"] = {{"iterations", r.inverse->iterations}, {"residual", r.inverse->residual}};
    }
    if (degenerate) {
        report["note"] = "lambda = 0: decoupled boundary solution, eigenstates are the bare product states";
        return {kExitOk, report.dump(2) + "\n", {}};
    }

    const diag::DerivedParams d = diag::derive_params(r.dp);
    report["derived"] = derived_json(d);
    const PhysicalParams back = diag::forward_map(r.dp);
    report["round_trip"] = {{"forward_relative_residual", diag::relative_residual(back, r.pp)}};

    const PhysicalParams pp = diag::forward_map(r.dp);
    const fock::OperatorMatrix H = diag::build_hamiltonian(pp, 0.0, dims);
    const int occ[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
    json states = json::array();
    for (const auto& o : occ) {
        diag::EigenstateInfo info;
        const fock::StateVector psi = diag::eigenstate(r.dp, o[0], o[1], 0.0, dims, &info);
        const fock::Vector Hpsi = H.m * psi.amp;
        const double e = psi.amp.dot(Hpsi).real();
        const double res = (Hpsi - e * psi.amp).norm() / pp.Omega_a;
        const double closed = diag::eigenvalue(r.dp, o[0], o[1]);
        states.push_back({{"n_f", o[0]},
                          {"n_d", o[1]},
                          {"energy_closed_form", closed},
                          {"energy_expectation", e},
                          {"residual_over_Omega_a", res},
                          {"discarded_weight", info.discarded},
                          {"working_cutoff", info.working.n_field}});
    }
    report["eigenstates"] = states;
    report["dims"] = {dims.n_field, dims.n_det};

    const geom::PhaseTerms t = geom::phase_terms(r.dp);
    report["phases"] = {{"G", t.G}, {"H", t.H}, {"T00", t.T00}, {"gamma_00", geom::eigen_berry_phase(r.dp, 0, 0).value}};
    return {kExitOk, report.dump(2) + "\n", {}};
}

// ---------- thermometer ----------

inline CommandResult cmd_thermometer(const RunConfig& c) {
    const std::string format = output_format(c);
    const double t_hot = c.positive("t_hot");
    const double lo = c.positive("t_cold_min");
    const double hi = c.positive("t_cold_max");
    if (!(hi >= lo)) throw ConfigError("t_cold_max", "config: 't_cold_max' must be >= 't_cold_min'");
    const int n = c.integer("points", 200, 1);
    const Resolved r = resolve_params(c);
    const double G = resolve_G(r, "thermometer");
    const double omega = r.pp.Omega_a;

    const std::vector<double> tc = log_space(lo, hi, n);
    Table t;
    t.columns = {"T_cold_K", "delta_rad", "dDelta_dTcold_rad_per_K"};
    t.rows.resize(n);
    parallel_for(n, [&](int k) {
        const double d = geom::thermometer_delta(G, omega, tc[k], t_hot);
        t.rows[k] = {tc[k], d, std::abs(geom::thermometer_slope(G, omega, tc[k]))};
    });
    return {kExitOk, t.render(format),
            "thermometer: G = " + fmt17(G) + "; last column is |d delta / d T_cold|, a sensitivity stand-in\n"};
}

// ---------- sensitivity ----------

inline CommandResult cmd_sensitivity(const RunConfig& c) {
    const std::string format = output_format(c);
    const double t_hot = c.positive("t_hot");
    const double t_cold = c.positive("t_cold");
    const double end = c.number("relerr_end", 0.5);
    if (!(end > -1.0)) throw ConfigError("relerr_end", "config: 'relerr_end' must be > -1");
    const int n = c.integer("points", 51, 1);
    const Resolved r = resolve_params(c);
    const double G = resolve_G(r, "sensitivity");
    const double omega = r.pp.Omega_a;

    const double d0 = geom::thermometer_delta(G, omega, t_cold, t_hot);
    if (d0 == 0.0) throw ConfigError("t_cold", "sensitivity: reference phase is zero, choose t_cold != t_hot");
    Table t;
    t.columns = {"relerr_Th", "relerr_delta"};
    t.rows.resize(n);
    parallel_for(n, [&](int k) {
        const double e = n == 1 ? 0.0 : end * k / (n - 1);
        const double d = geom::thermometer_delta(G, omega, t_cold, t_hot * (1.0 + e));
        t.rows[k] = {e, (d - d0) / d0 + 0.0};
    });
    return {kExitOk, t.render(format), {}};
}

// ---------- unruh ----------

inline CommandResult cmd_unruh(const RunConfig& c) {
    const std::string format = output_format(c);
    const double lo = c.positive("accel_min");
    const double hi = c.positive("accel_max");
    if (!(hi >= lo)) throw ConfigError("accel_max", "config: 'accel_max' must be >= 'accel_min'");
    const int n = c.integer("points", 200, 1);
    const Resolved r = resolve_params(c);
    const double G = resolve_G(r, "unruh");
    const double Omega_a = r.pp.Omega_a;

    const std::vector<double> acc = log_space(lo, hi, n);
    Table t;
    t.columns = {"accel_m_s2", "T_unruh_K", "q", "delta_per_cycle_rad", "cycles_to_pi", "time_to_pi_s"};
    t.rows.resize(n);
    parallel_for(n, [&](int k) {
        const thermo::ThermalSqueeze q = thermo::unruh_squeeze(Omega_a, acc[k]);
        const double delta = geom::unruh_delta_per_cycle(G, q).value;
        const geom::CycleAccumulation acc_pi = geom::accumulate_cycles(std::abs(delta), 0);
        t.rows[k] = {acc[k],           thermo::unruh_temperature(acc[k]), q.r, delta, acc_pi.cycles_to_pi,
                     geom::elapsed_time(acc_pi.cycles_to_pi, Omega_a)};
    });
    return {kExitOk, t.render(format), "unruh: G = " + fmt17(G) + "; cycles_to_pi counts |delta| per cycle\n"};
}

// ---------- adiabaticity ----------

inline oracle::EvolutionSpec evolution_spec_from_config(const RunConfig& c, const PhysicalParams& pp, int cycles) {
    const double frac = c.positive("step_fraction", 0.005);
    if (!(frac < 0.01)) throw ConfigError("step_fraction", "config: 'step_fraction' must be below 0.01");
    const double temperature = c.number("temperature", 0.0);
    if (!(temperature >= 0.0)) throw ConfigError("temperature", "config: 'temperature' must be >= 0");
    const std::string route = c.choice("route", "automatic", {"automatic", "fock", "quadrature"});
    oracle::EvolutionSpec spec;
    const double period = diag::cycle_duration(pp.Omega_a);
    spec.duration = cycles * period;
    spec.step = frac * period;
    spec.field_temperature = temperature;
    spec.route = route == "fock" ? oracle::Route::fock
                 : route == "quadrature" ? oracle::Route::quadrature
                                         : oracle::Route::automatic;
    return spec;
}

inline CommandResult cmd_adiabaticity(const RunConfig& c) {
    const std::string format = output_format(c);
    const int cycles = c.integer("cycles", 5, 1);
    const PhysicalParams pp = physical_from_config(c);
    diag::validate(pp);
    const oracle::EvolutionSpec spec = evolution_spec_from_config(c, pp, cycles);
    const oracle::ExcitationTrace tr = oracle::excitation_trace(pp, spec);

    Table t;
    t.columns = {"cycle_index", "P_excitation", "P_excitation_max"};
    for (int k = 0; k < cycles; ++k) t.rows.push_back({double(k + 1), tr.cycle_end[k], tr.cycle_max[k]});
    const char* route = tr.route == oracle::Route::quadrature ? "quadrature" : "fock";
    std::string diag_text = std::string("adiabaticity: route ") + route + ", trajectories " +
                            std::to_string(tr.trajectories) + ", tail bound " + fmt17(tr.tail_bound) +
                            ", max norm drift " + fmt17(tr.max_norm_drift) + "\n";
    return {kExitOk, t.render(format), diag_text};
}

}  // namespace berrytherm::cli
