// test_thermo.cpp — constants, thermal squeeze, Unruh temperature, thermal states

#include "berrytherm/thermo.hpp"

#include <gtest/gtest.h>

using namespace berrytherm;
using namespace berrytherm::thermo;

// Reference values from tests/oracles/reference_values.py (mpmath, 40 digits).
namespace ref {
constexpr double kTU_1e17 = 0.00040550135227452298;
constexpr double kTU_4p5e17 = 0.0018247560852353534;
constexpr double kTanhR_1e9_1K = 0.99618816726063385;
constexpr double kUnruhR_2e9_4p5e17 = 0.015209800893769629;
}  // namespace ref

TEST(Constants, Codata) {
    EXPECT_EQ(kHbar, 1.054571817e-34);
    EXPECT_EQ(kBoltzmann, 1.380649e-23);
    EXPECT_EQ(kLightSpeed, 2.99792458e8);
}

TEST(UnruhTemperature, Values) {
    EXPECT_NEAR(unruh_temperature(1e17) / ref::kTU_1e17, 1.0, 1e-14);
    EXPECT_NEAR(unruh_temperature(4.5e17) / ref::kTU_4p5e17, 1.0, 1e-14);
    EXPECT_NEAR(unruh_temperature(1e17), 4.055e-4, 1e-7);
    EXPECT_NEAR(unruh_temperature(4.5e17), 1.82e-3, 1e-5);
    EXPECT_LT(unruh_temperature(1e-300), 1e-315);
}

TEST(UnruhTemperature, LinearAndRejectsNonPositive) {
    EXPECT_DOUBLE_EQ(unruh_temperature(6e16), 3.0 * unruh_temperature(2e16));
    EXPECT_THROW(unruh_temperature(0.0), DomainError);
    EXPECT_THROW(unruh_temperature(-1.0), DomainError);
}

TEST(ThermalSqueeze, GigahertzAtOneKelvin) {
    const ThermalSqueeze s = squeeze_from_temperature(1e9, 1.0);
    EXPECT_NEAR(s.tanh_r, ref::kTanhR_1e9_1K, 1e-15);
    EXPECT_NEAR(s.tanh_r, 0.99619, 1e-5);
    EXPECT_NEAR(std::tanh(s.r), s.tanh_r, 1e-15);
    EXPECT_EQ(s.origin, SqueezeOrigin::thermal);
}

TEST(ThermalSqueeze, ColdLimitAndErrors) {
    EXPECT_LT(squeeze_from_temperature(1e9, 1e-6).r, 1e-300);
    EXPECT_THROW(squeeze_from_temperature(1e9, 0.0), DomainError);
    EXPECT_THROW(squeeze_from_temperature(-1e9, 1.0), DomainError);
    EXPECT_THROW(squeeze_from_temperature(0.0, 1.0), DomainError);
}

TEST(ThermalSqueeze, HotModeKeepsPrecision) {
    // 1 - tanh^2 r = 1/cosh^2 r when tanh r is within 1e-9 of one
    const ThermalSqueeze s = squeeze_from_temperature(1e3, 10.0);
    EXPECT_NEAR(s.cosh2 - s.sinh2, 1.0, 1e-12 * s.cosh2);
    EXPECT_NEAR(1.0 / s.cosh2, -std::expm1(-s.x), 1e-12 / s.cosh2);
}

TEST(ThermalSqueeze, TemperatureRoundTrip) {
    for (double omega : {1e6, 1e9, 3e10})
        for (double T : {1e-4, 1e-2, 1.0, 300.0}) {
            const ThermalSqueeze s = squeeze_from_temperature(omega, T);
            const double back = temperature_from_squeeze(omega, s);
            if (s.r == 0.0) {
                // tanh r below the smallest double: the zero-temperature boundary
                EXPECT_GT(s.x, 1400.0);
                EXPECT_EQ(back, 0.0);
                continue;
            }
            EXPECT_NEAR(back / T, 1.0, 1e-12) << omega << " " << T;
            const ThermalSqueeze s2 = squeeze_from_temperature(omega, temperature_from_squeeze(omega, s));
            EXPECT_NEAR(s2.r / s.r, 1.0, 1e-12);
        }
}

TEST(ThermalSqueeze, ZeroSqueezeIsZeroTemperature) {
    EXPECT_EQ(temperature_from_squeeze(1e9, vacuum_squeeze()), 0.0);
    EXPECT_THROW(temperature_from_squeeze(0.0, vacuum_squeeze()), DomainError);
}

TEST(UnruhSqueeze, ExampleValue) {
    const ThermalSqueeze q = unruh_squeeze(2e9, 4.5e17);
    EXPECT_NEAR(q.r, ref::kUnruhR_2e9_4p5e17, 1e-15);
    // 1.5181e-2 follows from rounding c to 3e8; the exact constant gives 1.5210e-2
    EXPECT_NEAR(q.r, 1.5181e-2, 5e-5);
    EXPECT_EQ(q.origin, SqueezeOrigin::unruh);
}

TEST(UnruhSqueeze, SmallAccelerationAndErrors) {
    EXPECT_EQ(unruh_squeeze(2e9, 1e10).r, 0.0);
    EXPECT_THROW(unruh_squeeze(2e9, 0.0), DomainError);
    EXPECT_THROW(unruh_squeeze(2e9, -5.0), DomainError);
}

TEST(UnruhSqueeze, WeakSqueezeKeepsRelativePrecision) {
    // r = atanh(t) = t + t^3/3 + ...
    for (double a : {1e16, 5e16, 1e17}) {
        const ThermalSqueeze q = unruh_squeeze(2e9, a);
        ASSERT_GT(q.r, 0.0);
        EXPECT_NEAR(q.r / q.tanh_r, 1.0 + q.tanh_r * q.tanh_r / 3.0, 1e-15);
    }
}

TEST(UnruhSqueeze, KeystoneIdentity) {
    for (double Om : {1e6, 1e7, 1e8, 1e9, 2e9})
        for (double a : {1e15, 1e16, 1e17, 4.5e17, 1e19}) {
            const double ru = unruh_squeeze(Om, a).r;
            const double rt = squeeze_from_temperature(Om, unruh_temperature(a)).r;
            if (ru == 0.0) {
                EXPECT_EQ(rt, 0.0);
                continue;
            }
            EXPECT_LE(std::abs(ru - rt), 1e-12 * ru) << Om << " " << a;
        }
}

TEST(ThermalState, VacuumAtZeroTemperature) {
    const ThermalStateSpec spec(1e9, 0.0, 0);
    const fock::DensityMatrix rho = thermal_density_matrix(spec, fock::FockDims(4, 3));
    EXPECT_EQ(rho.rho(0, 0), fock::cplx(1.0));
    EXPECT_EQ(rho.rho.cwiseAbs().sum(), 1.0);
    EXPECT_EQ(rho.trace_deficit, 0.0);
}

TEST(ThermalState, TraceDeficitAndOccupation) {
    const double T = 5e-3;
    const ThermalStateSpec spec(1e9, T, 60);
    const fock::FockDims dims(70, 2);
    const fock::DensityMatrix rho = thermal_density_matrix(spec, dims);
    const double tail = std::pow(spec.r_T.tanh_r, 2.0 * 61);
    EXPECT_NEAR(rho.rho.trace().real(), 1.0 - tail, 1e-15);
    EXPECT_NEAR(rho.trace_deficit, tail, 1e-15);
    double mean = 0.0;
    for (int n = 0; n < dims.n_field; ++n) mean += n * rho.rho(dims.index(n, 0), dims.index(n, 0)).real();
    EXPECT_NEAR(mean, spec.r_T.sinh2, 1e-10);
    // Hermitian, non-negative
    EXPECT_LT((rho.rho - rho.rho.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_GE(rho.rho.real().diagonal().minCoeff(), 0.0);
}

TEST(ThermalState, RefusesLargeTail) {
    const ThermalSqueeze s = squeeze_from_temperature(1e9, 1e-2);
    try {
        ThermalStateSpec spec(s, 3);
        FAIL() << "expected refusal";
    } catch (const TruncationError& e) {
        EXPECT_EQ(e.required, ThermalStateSpec::required_n_max(s));
        EXPECT_GT(e.estimate, 1e-12);
    }
    const int need = ThermalStateSpec::required_n_max(s);
    EXPECT_NO_THROW(ThermalStateSpec(s, need));
    EXPECT_LT(ThermalStateSpec(s, need).tail(need), 1e-12);
}

TEST(ThermalState, RefusesCutoffBelowNMax) {
    const ThermalStateSpec spec(1e9, 1e-3, 5);
    EXPECT_THROW(thermal_density_matrix(spec, fock::FockDims(5, 2)), TruncationError);
}
