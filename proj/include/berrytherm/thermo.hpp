// thermo.hpp — physical constants, thermal and Unruh squeeze parameters,
// single-mode thermal states

#pragma once

#include "berrytherm/errors.hpp"
#include "berrytherm/fockspace.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace berrytherm::thermo {

struct PhysicalConstants {
    static constexpr double hbar = 1.054571817e-34;  // J s
    static constexpr double k_B = 1.380649e-23;      // J / K
    static constexpr double c = 2.99792458e8;        // m / s
};

inline constexpr double kHbar = PhysicalConstants::hbar;
inline constexpr double kBoltzmann = PhysicalConstants::k_B;
inline constexpr double kLightSpeed = PhysicalConstants::c;
inline constexpr double kPi = fock::kPi;

enum class SqueezeOrigin { thermal, unruh };

// tanh r = exp(-x/2), x = hbar omega / (k_B T). For the Unruh origin T is the
// Unruh temperature of the acceleration.
struct ThermalSqueeze {
    double r = 0.0;
    double tanh_r = 0.0;
    double sinh2 = 0.0;  // sinh^2 r, mean occupation
    double cosh2 = 1.0;
    double x = std::numeric_limits<double>::infinity();
    SqueezeOrigin origin = SqueezeOrigin::thermal;
};

// Forms everything from x so that hot modes (x -> 0) keep full precision in
// 1 - tanh^2 r. x = +inf is the vacuum.
inline ThermalSqueeze squeeze_from_ratio(double x, SqueezeOrigin origin) {
    if (!(x > 0.0)) throw DomainError("thermal squeeze: hbar*omega/(k_B*T) must be positive");
    ThermalSqueeze s;
    s.x = x;
    s.origin = origin;
    s.tanh_r = std::exp(-0.5 * x);
    const double one_minus_t = -std::expm1(-0.5 * x);
    const double one_minus_t2 = -std::expm1(-x);
    s.r = 0.5 * std::log1p(2.0 * s.tanh_r / one_minus_t);
    s.cosh2 = 1.0 / one_minus_t2;
    s.sinh2 = std::exp(-x) / one_minus_t2;
    return s;
}

inline ThermalSqueeze vacuum_squeeze() { return squeeze_from_ratio(std::numeric_limits<double>::infinity(), SqueezeOrigin::thermal); }

inline ThermalSqueeze squeeze_from_temperature(double omega, double temperature) {
    if (!(omega > 0.0) || !std::isfinite(omega))
        throw DomainError("squeeze_from_temperature: omega must be positive and finite");
    if (!(temperature > 0.0) || !std::isfinite(temperature))
        throw DomainError("squeeze_from_temperature: temperature must be positive and finite");
    return squeeze_from_ratio(kHbar * omega / (kBoltzmann * temperature), SqueezeOrigin::thermal);
}

// T = hbar omega / (-2 k_B ln tanh r). r = 0 is the T = 0 boundary and returns 0.
inline double temperature_from_squeeze(double omega, const ThermalSqueeze& s) {
    if (!(omega > 0.0) || !std::isfinite(omega))
        throw DomainError("temperature_from_squeeze: omega must be positive and finite");
    if (!(s.r >= 0.0) || !std::isfinite(s.r)) throw DomainError("temperature_from_squeeze: r must be finite and >= 0");
    if (s.r == 0.0) return 0.0;
    // for large r, ln tanh r = ln(1 - 2 e^{-2r} / (1 + e^{-2r}))
    const double e = std::exp(-2.0 * s.r);
    const double ln_t = s.r < 0.5 ? std::log(std::tanh(s.r)) : std::log1p(-2.0 * e / (1.0 + e));
    return kHbar * omega / (-2.0 * kBoltzmann * ln_t);
}

inline double unruh_temperature(double acceleration) {
    if (!(acceleration > 0.0) || !std::isfinite(acceleration))
        throw DomainError("unruh_temperature: acceleration must be positive and finite");
    return kHbar * acceleration / (2.0 * kPi * kLightSpeed * kBoltzmann);
}

// tanh q = exp(-pi Omega_a c / a)
inline ThermalSqueeze unruh_squeeze(double Omega_a, double acceleration) {
    if (!(Omega_a > 0.0) || !std::isfinite(Omega_a)) throw DomainError("unruh_squeeze: Omega_a must be positive and finite");
    if (!(acceleration > 0.0) || !std::isfinite(acceleration))
        throw DomainError("unruh_squeeze: acceleration must be positive and finite");
    return squeeze_from_ratio(2.0 * kPi * Omega_a * kLightSpeed / acceleration, SqueezeOrigin::unruh);
}

// Single-mode thermal state truncated at n_max. temperature = 0 is the vacuum.
struct ThermalStateSpec {
    double omega = 0.0;
    double temperature = 0.0;
    ThermalSqueeze r_T;
    int n_max = 0;

    static constexpr double kTailTolerance = 1e-12;

    ThermalStateSpec(double omega, double temperature, int n_max)
        : omega(omega), temperature(temperature), n_max(n_max) {
        if (!(temperature >= 0.0)) throw DomainError("ThermalStateSpec: temperature must be >= 0");
        r_T = temperature == 0.0 ? vacuum_squeeze() : squeeze_from_temperature(omega, temperature);
        check();
    }

    ThermalStateSpec(const ThermalSqueeze& s, int n_max) : r_T(s), n_max(n_max) { check(); }

    // tanh^{2(n+1)} r, the weight above level n
    double tail(int n) const { return std::exp(-r_T.x * double(n + 1)); }

    static int required_n_max(const ThermalSqueeze& s, double tol = kTailTolerance) {
        if (!std::isfinite(s.x)) return 0;
        int n = std::max(0, int(std::ceil(-std::log(tol) / s.x)) - 1);
        while (!(std::exp(-s.x * double(n + 1)) < tol)) ++n;
        return n;
    }

    // tanh^{2n} r / cosh^2 r for n = 0..n_max
    std::vector<double> weights() const {
        std::vector<double> w(n_max + 1);
        const double lead = 1.0 / r_T.cosh2;
        for (int n = 0; n <= n_max; ++n) w[n] = lead * std::exp(-r_T.x * n);
        if (!std::isfinite(r_T.x)) w[0] = 1.0;
        return w;
    }

private:
    void check() const {
        if (n_max < 0) throw DomainError("ThermalStateSpec: n_max must be non-negative");
        const double t = tail(n_max);
        if (!(t < kTailTolerance))
            throw TruncationError("ThermalStateSpec: tail weight " + std::to_string(t) + " >= 1e-12, need n_max >= " +
                                      std::to_string(required_n_max(r_T)),
                                  t, required_n_max(r_T));
    }
};

// rho_f (x) |0><0| in the truncated two-mode space, diagonal in the field occupation.
inline fock::DensityMatrix thermal_density_matrix(const ThermalStateSpec& spec, const fock::FockDims& dims) {
    if (spec.n_max >= dims.n_field)
        throw TruncationError("thermal_density_matrix: n_max must be below the field cutoff", spec.tail(dims.n_field - 1),
                              spec.n_max + 1);
    fock::DensityMatrix out;
    out.dims = dims;
    out.rho = fock::Matrix::Zero(dims.size(), dims.size());
    const std::vector<double> w = spec.weights();
    for (int n = 0; n <= spec.n_max; ++n) out.rho(dims.index(n, 0), dims.index(n, 0)) = w[n];
    out.trace_deficit = spec.tail(spec.n_max);
    return out;
}

}  // namespace berrytherm::thermo
