// geomphase.hpp — closed-form Berry phases for eigenstates, thermal states and
// an accelerated detector, plus cycle accumulation

#pragma once

#include "berrytherm/diagonalization.hpp"
#include "berrytherm/errors.hpp"
#include "berrytherm/thermo.hpp"

#include <cmath>
#include <complex>
#include <limits>

namespace berrytherm::geom {

using diag::DiagParams;
using fock::cplx;
using fock::kPi;
using thermo::ThermalSqueeze;

enum class Method { closed_form, oracle };

struct PhaseResult {
    double value = 0.0;  // reduced to (-pi, pi]
    double raw = 0.0;    // unreduced
    Method method = Method::closed_form;
};

inline double reduce_phase(double x) {
    double y = std::remainder(x, 2.0 * kPi);  // [-pi, pi]
    if (y <= -kPi) y += 2.0 * kPi;
    return y;
}

inline PhaseResult make_phase(double raw, Method m = Method::closed_form) { return {reduce_phase(raw), raw, m}; }

// Distance between two phases on the circle.
inline double phase_distance(double a, double b) { return std::abs(reduce_phase(a - b)); }

// Which denominator to use for the n_d term of the eigenstate phase. `printed`
// reproduces a typo (omega_a sinh 2v instead of omega_a sinh 2u) and exists only
// as a negative control for the certification run.
enum class Variant { corrected, printed };

struct PhaseTerms {
    double denom;     // omega_a sinh 2u + omega_b sinh 2v
    double G;         // coefficient of n_f
    double H;         // coefficient of n_d
    double T00;
};

inline PhaseTerms phase_terms(const DiagParams& dp, Variant variant = Variant::corrected) {
    const diag::DerivedParams d = diag::derive_params(dp);
    const double u = d.u, v = dp.v;
    const double A = dp.omega_a * std::sinh(2.0 * u), B = dp.omega_b * std::sinh(2.0 * v);
    PhaseTerms t;
    t.denom = A + B;
    t.G = B * std::cosh(2.0 * u) / t.denom;
    const double h_denom = variant == Variant::corrected ? t.denom : (dp.omega_a + dp.omega_b) * std::sinh(2.0 * v);
    t.H = A * std::cosh(2.0 * v) / h_denom;
    const double shu = std::sinh(u), shv = std::sinh(v);
    t.T00 = (A * shv * shv + B * shu * shu) / t.denom;
    return t;
}

inline double ground_T00(const DiagParams& dp) { return phase_terms(dp).T00; }

inline double mode_fraction_G(const DiagParams& dp) {
    const double G = phase_terms(dp).G;
    if (!(G > 0.0 && G < 1.0)) throw NumericalError("mode_fraction_G: G outside (0, 1)");
    return G;
}

// gamma = 2 pi <U^dag n_f n_d| a^dag a |U^dag n_f n_d>
inline PhaseResult eigen_berry_phase(const DiagParams& dp, int n_f, int n_d, Variant variant = Variant::corrected) {
    if (n_f < 0 || n_d < 0) throw DomainError("eigen_berry_phase: occupations must be non-negative");
    const PhaseTerms t = phase_terms(dp, variant);
    return make_phase(2.0 * kPi * (t.G * n_f + t.H * n_d + t.T00));
}

// 2 pi G taken from the fractional part of G, so integer G gives exactly 0.
inline double cycle_angle(double G) { return 2.0 * kPi * (G - std::nearbyint(G)); }

// Arg(cosh^2 r - e^{2 pi i G} sinh^2 r), written as Arg(1 - tanh^2 r e^{2 pi i G}).
inline double thermal_arg(double G, const ThermalSqueeze& r) {
    const double t2 = std::exp(-r.x);
    return std::arg(cplx(1.0, 0.0) - t2 * std::exp(cplx(0.0, cycle_angle(G))));
}

inline PhaseResult mixed_thermal_phase(double G, double gamma_I0, const ThermalSqueeze& r) {
    return make_phase(gamma_I0 - thermal_arg(G, r));
}

inline PhaseResult mixed_thermal_phase(const DiagParams& dp, const ThermalSqueeze& r) {
    return mixed_thermal_phase(mode_fraction_G(dp), eigen_berry_phase(dp, 0, 0).raw, r);
}

inline double thermometer_delta(double G, double omega, double T1, double T2) {
    if (!(T1 > 0.0) || !(T2 > 0.0)) throw DomainError("thermometer_delta: temperatures must be positive");
    const double x1 = thermo::squeeze_from_temperature(omega, T1).x;
    const double x2 = thermo::squeeze_from_temperature(omega, T2).x;
    const cplx rot = std::exp(cplx(0.0, -cycle_angle(G)));
    return std::arg(1.0 - std::exp(-x1) * rot) - std::arg(1.0 - std::exp(-x2) * rot);
}

inline PhaseResult thermometer_delta(const DiagParams& dp, double omega, double T1, double T2) {
    return make_phase(thermometer_delta(mode_fraction_G(dp), omega, T1, T2));
}

// d delta / d T1 at fixed T2
inline double thermometer_slope(double G, double omega, double T1) {
    const double x = thermo::squeeze_from_temperature(omega, T1).x;
    const cplx z = std::exp(cplx(-x, -cycle_angle(G)));
    return -(x / T1) * (z / (1.0 - z)).imag();
}

inline PhaseResult unruh_delta_per_cycle(double G, const ThermalSqueeze& q) { return make_phase(thermal_arg(G, q)); }

inline PhaseResult unruh_delta_per_cycle(const DiagParams& dp, double Omega_a, double accel) {
    return unruh_delta_per_cycle(mode_fraction_G(dp), thermo::unruh_squeeze(Omega_a, accel));
}

struct CycleAccumulation {
    double total = 0.0;
    bool capped_at_pi = false;  // total reached pi
    double cycles_to_pi = std::numeric_limits<double>::infinity();  // integral value; inf when delta = 0
};

inline CycleAccumulation accumulate_cycles(double delta_per_cycle, long long n_cycles) {
    if (!(delta_per_cycle >= 0.0) || !std::isfinite(delta_per_cycle))
        throw DomainError("accumulate_cycles: delta_per_cycle must be finite and >= 0");
    if (n_cycles < 0) throw DomainError("accumulate_cycles: n_cycles must be >= 0");
    CycleAccumulation c;
    c.total = double(n_cycles) * delta_per_cycle;
    if (delta_per_cycle > 0.0) c.cycles_to_pi = std::ceil(kPi / delta_per_cycle);
    c.capped_at_pi = double(n_cycles) >= c.cycles_to_pi;
    return c;
}

inline double elapsed_time(double n_cycles, double Omega_a) { return n_cycles * diag::cycle_duration(Omega_a); }

}  // namespace berrytherm::geom
