// certify.hpp — closed forms checked against the numerical oracles, as a JSON report

#pragma once

#include "berrytherm/cli/commands.hpp"

#include <chrono>
#include <random>

namespace berrytherm::cli {

using fock::kPi;

struct Check {
    std::string name;
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool failed = false;  // set by exceptions or explicit failures
    double seconds = 0.0;
    json cases = json::array();

    bool passed() const { return !failed && max_residual <= tolerance; }

    void record(double residual, json detail = json()) {
        if (!(residual == residual)) failed = true;
        max_residual = std::max(max_residual, residual);
        if (!detail.is_null()) {
            detail["residual"] = json_number(residual);
            cases.push_back(std::move(detail));
        }
    }

    json to_json() const {
        json j{{"name", name},
               {"passed", passed()},
               {"max_residual", json_number(max_residual)},
               {"tolerance", tolerance},
               {"seconds", seconds}};
        if (!cases.empty()) j["cases"] = cases;
        return j;
    }
};

// Runs `body` and converts an exception into a failed check.
template <class F>
Check run_check(const std::string& name, double tolerance, F&& body) {
    Check c;
    c.name = name;
    c.tolerance = tolerance;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.failed = true;
        c.cases.push_back({{"error", e.what()}});
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return c;
}

inline std::vector<DiagParams> certification_grid(bool full) {
    const double omega_a = 2e9;
    std::vector<DiagParams> grid;
    const std::vector<double> vs = full ? std::vector<double>{0.1, 0.3, 0.6} : std::vector<double>{0.3};
    const std::vector<double> ratios = full ? std::vector<double>{1.0, 2.0, 3.0} : std::vector<double>{2.0};
    for (double v : vs)
        for (double lr : ratios) grid.push_back({omega_a, omega_a * std::exp(-lr), v});
    return grid;
}

inline CommandResult cmd_certify(const RunConfig& c) {
    const geom::Variant variant =
        c.choice("variant", "corrected", {"corrected", "printed"}) == "printed" ? geom::Variant::printed
                                                                               : geom::Variant::corrected;
    const bool full = c.choice("grid", "full", {"full", "quick"}) == "full";
    const oracle::LoopSpec loop = loop_spec_from_config(c);
    const std::vector<DiagParams> grid = certification_grid(full);
    const DiagParams example{2e9, 2e9 * std::exp(-2.0), 0.3};
    std::vector<Check> checks;

    // Eigenstate phases against the discrete loop.
    checks.push_back(run_check("eigen_phase_vs_loop", 1e-5, [&](Check& ck) {
        const int occ[4][2] = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
        struct Case {
            DiagParams dp;
            int n_f, n_d;
        };
        std::vector<Case> cases;
        for (const auto& dp : grid) {
            if (dp.omega_a / dp.omega_b <= std::exp(2.0 * dp.v)) {
                ck.cases.push_back({{"diag", params_json(dp)}, {"skipped", "outside omega_a/omega_b > exp(2v)"}});
                continue;
            }
            for (const auto& o : occ) cases.push_back({dp, o[0], o[1]});
        }
        std::vector<json> details(cases.size());
        std::vector<double> residuals(cases.size());
        parallel_for(int(cases.size()), [&](int i) {
            const Case& cs = cases[i];
            const oracle::LoopResult lr = oracle::certified_berry_loop(cs.dp, cs.n_f, cs.n_d, loop);
            const geom::PhaseResult cf = geom::eigen_berry_phase(cs.dp, cs.n_f, cs.n_d, variant);
            residuals[i] = geom::phase_distance(cf.value, lr.phase.value);
            details[i] = {{"diag", params_json(cs.dp)},
                          {"n_f", cs.n_f},
                          {"n_d", cs.n_d},
                          {"closed_form", cf.value},
                          {"loop", lr.phase.value},
                          {"richardson_error", lr.error_estimate},
                          {"truncation_estimate", lr.truncation_estimate},
                          {"cutoff", lr.dims.n_field}};
        });
        for (std::size_t i = 0; i < cases.size(); ++i) ck.record(residuals[i], details[i]);
    }));

    checks.push_back(run_check("phase_spacing_2piG", 1e-11, [&](Check& ck) {
        for (const auto& dp : grid) {
            if (dp.omega_a / dp.omega_b <= std::exp(2.0 * dp.v)) continue;
            const double G = geom::mode_fraction_G(dp);
            for (int nf = 0; nf < 3; ++nf)
                for (int nd = 0; nd < 3; ++nd) {
                    const double d = geom::eigen_berry_phase(dp, nf + 1, nd, variant).raw -
                                     geom::eigen_berry_phase(dp, nf, nd, variant).raw;
                    ck.record(std::abs(d - 2.0 * kPi * G));
                }
        }
    }));

    checks.push_back(run_check("connection_A_v_vanishes", 1e-8, [&](Check& ck) {
        const fock::FockDims dims(16, 16);
        const double h = 1e-5;
        for (int n = 0; n < 2; ++n) {
            const auto at = [&](double v) {
                DiagParams dp = example;
                dp.v = v;
                return diag::eigenstate(dp, n, 0, 0.7, dims).amp;
            };
            const fock::Vector psi = at(example.v);
            const fock::Vector dpsi = (at(example.v + h) - at(example.v - h)) / (2.0 * h);
            ck.record(std::abs(psi.dot(dpsi).imag()), {{"n_f", n}, {"n_d", 0}});
        }
    }));

    checks.push_back(run_check("g4_vanishes", 1e-12, [&](Check& ck) {
        for (const auto& dp : grid) {
            if (dp.omega_a / dp.omega_b <= std::exp(2.0 * dp.v)) continue;
            const auto d = diag::derive_params(dp);
            ck.record(std::abs(d.g.g4) / std::abs(d.g.g1));
        }
    }));

    checks.push_back(run_check("inverse_forward_round_trip", 1e-10, [&](Check& ck) {
        for (double omega_a : {1e6, 1e8, 2e9})
            for (double C : {1e-5, 1e-4, 1e-3})
                for (double f : {0.2, 0.35, 0.8}) {
                    const DiagParams dp{omega_a, omega_a * std::exp(-2.0 * C), f * C};
                    const PhysicalParams pp = diag::forward_map(dp);
                    const diag::InverseResult inv = diag::inverse_map(pp);
                    const double e1 = std::max({std::abs(inv.params.omega_a - dp.omega_a) / dp.omega_a,
                                                std::abs(inv.params.omega_b - dp.omega_b) / dp.omega_b,
                                                std::abs(inv.params.v - dp.v) / dp.v});
                    const double e2 = diag::relative_residual(diag::forward_map(inv.params), pp);
                    ck.record(std::max(e1, e2));
                }
    }));

    checks.push_back(run_check("unitarity_of_chain", 1e-10, [&](Check& ck) {
        const fock::FockDims dims(20, 20);
        const fock::Matrix U = diag::build_unitary(example, 0.4, dims).m;
        ck.record((U.adjoint() * U - fock::Matrix::Identity(dims.size(), dims.size())).cwiseAbs().maxCoeff());
    }));

    checks.push_back(run_check("eigenstate_residual_weak_coupling", 1e-6, [&](Check& ck) {
        const PhysicalParams pp{2e9, 2e9 + 200.0, 200.0};
        const DiagParams dp = diag::inverse_map(pp).params;
        const fock::FockDims dims(12, 12);
        const fock::OperatorMatrix H = diag::build_hamiltonian(diag::forward_map(dp), 0.0, dims);
        for (int nf = 0; nf < 2; ++nf)
            for (int nd = 0; nd < 2; ++nd) {
                const fock::Vector psi = diag::eigenstate(dp, nf, nd, 0.0, dims).amp;
                const fock::Vector hp = H.m * psi;
                const double e = psi.dot(hp).real();
                ck.record((hp - e * psi).norm() / pp.Omega_a, {{"n_f", nf}, {"n_d", nd}});
            }
    }));

    checks.push_back(run_check("mixed_phase_partial_sum", 1e-10, [&](Check& ck) {
        for (double G : {0.1, 0.25, 0.7})
            for (double t2 : {0.1, 0.5, 0.9}) {
                const auto r = thermo::squeeze_from_ratio(-std::log(t2), thermo::SqueezeOrigin::thermal);
                const int n_max = thermo::ThermalStateSpec::required_n_max(r) + 1;
                const double closed = geom::mixed_thermal_phase(G, 0.3, r).value;
                const double sum = oracle::mixed_phase_partial_sum(G, 0.3, r, n_max).value;
                ck.record(geom::phase_distance(closed, sum), {{"G", G}, {"tanh2_r", t2}});
            }
        const auto half = thermo::squeeze_from_ratio(std::log(2.0), thermo::SqueezeOrigin::thermal);
        const double spot = oracle::mixed_phase_partial_sum(0.25, 0.0, half, 50).value;
        ck.record(std::abs(spot - std::atan(0.5)), {{"spot", "tanh2_r = 1/2, G = 1/4"}});
    }));

    checks.push_back(run_check("unruh_thermal_keystone", 1e-12, [&](Check& ck) {
        for (double Om : {1e6, 1e7, 1e8, 1e9, 2e9})
            for (double a : {1e15, 1e16, 1e17, 4.5e17, 1e19}) {
                const double ru = thermo::unruh_squeeze(Om, a).r;
                const double rt = thermo::squeeze_from_temperature(Om, thermo::unruh_temperature(a)).r;
                ck.record(ru == rt ? 0.0 : std::abs(ru - rt) / std::max(std::abs(ru), std::abs(rt)));
            }
    }));

    checks.push_back(run_check("thermometer_antisymmetry", 1e-14, [&](Check& ck) {
        const double G = geom::mode_fraction_G(example);
        for (double T1 : {1e-3, 1e-2, 1.0})
            for (double T2 : {2e-3, 0.3})
                ck.record(std::abs(geom::thermometer_delta(G, 1e9, T1, T2) + geom::thermometer_delta(G, 1e9, T2, T1)));
    }));

    checks.push_back(run_check("thermometer_equals_phase_difference", 1e-12, [&](Check& ck) {
        const double G = geom::mode_fraction_G(example);
        const double g0 = geom::eigen_berry_phase(example, 0, 0).raw;
        for (double T1 : {1e-3, 1e-2})
            for (double T2 : {0.3, 1.0}) {
                const double d = geom::thermometer_delta(G, 1e9, T1, T2);
                const double a = geom::mixed_thermal_phase(G, g0, thermo::squeeze_from_temperature(1e9, T1)).raw;
                const double b = geom::mixed_thermal_phase(G, g0, thermo::squeeze_from_temperature(1e9, T2)).raw;
                ck.record(geom::phase_distance(d, a - b));
            }
    }));

    checks.push_back(run_check("unruh_delta_monotone", 0.0, [&](Check& ck) {
        const double G = geom::mode_fraction_G(example);
        double prev = 0.0;
        for (double a : log_space(1e16, 1e19, 100)) {
            const double d = std::abs(geom::unruh_delta_per_cycle(G, thermo::unruh_squeeze(2e9, a)).value);
            ck.record(std::max(0.0, prev - d));
            prev = d;
        }
    }));

    checks.push_back(run_check("thermal_state_trace_and_occupation", 1e-10, [&](Check& ck) {
        const fock::FockDims dims(60, 2);
        for (double T : {1e-3, 5e-3, 1e-2}) {
            const thermo::ThermalStateSpec spec(1e9, T, 50);
            const fock::DensityMatrix rho = thermo::thermal_density_matrix(spec, dims);
            const double trace = rho.rho.trace().real();
            ck.record(std::abs(trace - (1.0 - spec.tail(spec.n_max))));
            double mean = 0.0;
            for (int n = 0; n < dims.n_field; ++n) mean += n * rho.rho(dims.index(n, 0), dims.index(n, 0)).real();
            ck.record(std::abs(mean - spec.r_T.sinh2));
        }
    }));

    checks.push_back(run_check("loop_gauge_invariance", 1e-12, [&](Check& ck) {
        const fock::FockDims dims(20, 20);
        const int m = 64;
        std::vector<fock::Vector> xs(m);
        const fock::Vector e10 = fock::basis_state(dims, 1, 0).amp;
        for (int k = 0; k < m; ++k) xs[k] = diag::UnitaryChain(example, 2.0 * kPi * k / m, dims).apply_adjoint(e10);
        const double base = oracle::pancharatnam_phase(xs);
        std::mt19937_64 rng(20240607);
        std::uniform_real_distribution<double> angle(-kPi, kPi);
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<fock::Vector> ys = xs;
            for (auto& y : ys) y *= std::exp(fock::cplx(0.0, angle(rng)));
            ck.record(geom::phase_distance(oracle::pancharatnam_phase(ys), base));
        }
    }));

    bool all = true;
    json list = json::array();
    for (const auto& ck : checks) {
        all = all && ck.passed();
        list.push_back(ck.to_json());
    }
    json report{{"variant", variant == geom::Variant::printed ? "printed" : "corrected"},
                {"grid", full ? "full" : "quick"},
                {"loop_points", loop.n_points},
                {"passed", all},
                {"checks", list}};
    std::string diag_text;
    for (const auto& ck : checks)
        if (!ck.passed()) diag_text += "certify: FAILED " + ck.name + " (max residual " + fmt17(ck.max_residual) + ")\n";
    return {all ? kExitOk : kExitCertification, report.dump(2) + "\n", diag_text};
}

}  // namespace berrytherm::cli
