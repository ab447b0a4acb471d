// diagonalization.hpp — exact diagonalization of the single-mode detector-field
// Hamiltonian through the unitary chain U = S_a S_b D S^_b R

#pragma once

#include "berrytherm/errors.hpp"
#include "berrytherm/fockspace.hpp"

#include <Eigen/LU>

#include <array>
#include <cmath>
#include <optional>
#include <string>

namespace berrytherm::diag {

using fock::cplx;
using fock::FockDims;
using fock::kI;
using fock::kPi;
using fock::Matrix;
using fock::OperatorMatrix;
using fock::StateVector;
using fock::Vector;

// Frequencies of the decoupled oscillators and the detector squeeze v.
struct DiagParams {
    double omega_a = 0.0;
    double omega_b = 0.0;
    double v = 0.0;
};

// Field gap, detector gap and coupling of the physical Hamiltonian
// H = Omega_a a^dag a + Omega_b b^dag b + lambda (b + b^dag)(a^dag e^{i phi} + a e^{-i phi}).
struct PhysicalParams {
    double Omega_a = 0.0;
    double Omega_b = 0.0;
    double lambda = 0.0;
};

// Half log of omega_a / omega_b without cancellation for nearly equal frequencies.
inline double half_log_ratio(double omega_a, double omega_b) {
    return 0.5 * std::log1p((omega_a - omega_b) / omega_b);
}

inline void validate(const DiagParams& dp) {
    if (!std::isfinite(dp.omega_a) || !std::isfinite(dp.omega_b) || !std::isfinite(dp.v))
        throw DomainError("DiagParams: non-finite value");
    if (!(dp.omega_b > 0.0)) throw DomainError("DiagParams: omega_b must be positive");
    if (!(dp.omega_a > dp.omega_b)) throw DomainError("DiagParams: omega_a must exceed omega_b (constraint omega_a/omega_b > exp(2v))");
    if (!(dp.v > 0.0)) throw DomainError("DiagParams: v must be positive");
    const double C = half_log_ratio(dp.omega_a, dp.omega_b);
    if (!(dp.v < C))
        throw DomainError("DiagParams: constraint omega_a/omega_b > exp(2v) violated (v = " + std::to_string(dp.v) +
                          ", (1/2)ln(omega_a/omega_b) = " + std::to_string(C) + ")");
}

inline void validate(const PhysicalParams& pp) {
    if (!std::isfinite(pp.Omega_a) || !std::isfinite(pp.Omega_b) || !std::isfinite(pp.lambda))
        throw DomainError("PhysicalParams: non-finite value");
    if (!(pp.Omega_a > 0.0) || !(pp.Omega_b > 0.0)) throw DomainError("PhysicalParams: gaps must be positive");
    if (pp.lambda < 0.0) throw DomainError("PhysicalParams: lambda must be non-negative");
}

// Coefficients of D^dag S_b^dag S_a^dag H0 S_a S_b D written as
// g1 a^dag a + g2 b^dag b + (g3 a^dag b + g4 a^dag2 + g5 b^dag2 + g6 a^dag b^dag + h.c.) + const,
// for arbitrary squeeze angles and displacement phase.
struct GCoefficients {
    cplx g1, g2, g3, g4, g5, g6;
};

inline GCoefficients g_coefficients(double omega_a, double omega_b, double u, double v, double s,
                                    double theta_a, double theta_b, double phi) {
    const double c2 = std::cos(s) * std::cos(s), s2 = std::sin(s) * std::sin(s), sin2s = std::sin(2.0 * s);
    const cplx ea = std::exp(-kI * theta_a), eb = std::exp(-kI * theta_b), ep = std::exp(kI * phi);
    const double fa = omega_a * std::sinh(2.0 * u), fb = omega_b * std::sinh(2.0 * v);
    GCoefficients g;
    g.g1 = omega_a * std::cosh(2.0 * u) * c2 + omega_b * std::cosh(2.0 * v) * s2;
    g.g2 = omega_a * std::cosh(2.0 * u) * s2 + omega_b * std::cosh(2.0 * v) * c2;
    g.g3 = 0.5 * sin2s * ep * (omega_a * std::cosh(2.0 * u) - omega_b * std::cosh(2.0 * v));
    g.g4 = 0.5 * (fa * ea * c2 + fb * eb * ep * ep * s2);
    g.g5 = 0.5 * (fa * ea * s2 / (ep * ep) + fb * eb * c2);
    g.g6 = 0.5 * sin2s * (fa * ea / ep - fb * eb * ep);
    return g;
}

struct DerivedParams {
    double C = 0.0;      // (1/2) ln(omega_a / omega_b)
    double u = 0.0;      // C - v
    double s = 0.0;      // beam-splitter angle
    double theta_a = 0.0;
    double theta_b = -kPi;
    double phi = 0.0;    // beam-splitter phase
    double denom = 0.0;  // omega_a sinh 2u + omega_b sinh 2v
    double Omega_a = 0.0;
    double Omega_hat_b = 0.0;
    double lambda_hat = 0.0;
    double Z = 0.0;
    double p = 0.0;      // second detector squeeze
    double Omega_b = 0.0;
    double lambda = 0.0;
    double energy_shift = 0.0;  // U^dag H0 U = H + energy_shift
    GCoefficients g;
};

namespace detail {

// Kernel shared by the forward map and the Newton solver. C is carried
// separately so the solver can work with it directly when it is tiny.
struct Kernel {
    double omega_a, omega_b, C, v;
};

inline DerivedParams derive(const Kernel& k) {
    DerivedParams d;
    d.C = k.C;
    d.u = k.C - k.v;
    const double u = d.u, v = k.v;
    const double A = k.omega_a * std::sinh(2.0 * u);
    const double B = k.omega_b * std::sinh(2.0 * v);
    d.denom = A + B;
    d.s = std::atan2(std::sqrt(A), std::sqrt(B));
    d.Omega_a = k.omega_a * k.omega_b * std::sinh(2.0 * k.C) / d.denom;
    d.Omega_hat_b = (k.omega_a * A * std::cosh(2.0 * u) + k.omega_b * B * std::cosh(2.0 * v)) / d.denom;
    d.lambda_hat = std::sqrt(A * B);
    d.Z = 0.5 * (A - B);
    d.p = 0.5 * std::atanh(-2.0 * d.Z / d.Omega_hat_b);
    d.Omega_b = std::sqrt((d.Omega_hat_b - 2.0 * d.Z) * (d.Omega_hat_b + 2.0 * d.Z));
    d.lambda = std::exp(d.p) * d.lambda_hat;
    d.g = g_coefficients(k.omega_a, k.omega_b, u, v, d.s, d.theta_a, d.theta_b, d.phi);
    const double shu = std::sinh(u), shv = std::sinh(v), shp = std::sinh(d.p);
    d.energy_shift = k.omega_a * shu * shu + k.omega_b * shv * shv + d.Omega_hat_b * shp * shp +
                     d.Z * std::sinh(2.0 * d.p);
    return d;
}

inline Kernel kernel_of(const DiagParams& dp) {
    return {dp.omega_a, dp.omega_b, half_log_ratio(dp.omega_a, dp.omega_b), dp.v};
}

// omega_a = m e^C, omega_b = m e^{-C}, v = w C
inline Kernel kernel_of_log(double m, double C, double w) {
    return {m * std::exp(C), m * std::exp(-C), C, w * C};
}

inline PhysicalParams physical(const DerivedParams& d) { return {d.Omega_a, d.Omega_b, d.lambda}; }

}  // namespace detail

inline DerivedParams derive_params(const DiagParams& dp) {
    validate(dp);
    return detail::derive(detail::kernel_of(dp));
}

inline PhysicalParams forward_map(const DiagParams& dp) { return detail::physical(derive_params(dp)); }

// Eigenvalue of H for the eigenstate U^dag |n_f n_d>.
inline double eigenvalue(const DiagParams& dp, int n_f, int n_d) {
    const DerivedParams d = derive_params(dp);
    return dp.omega_a * n_f + dp.omega_b * n_d - d.energy_shift;
}

// ---------- inverse map ----------

inline constexpr double kMaxCouplingRatio = 1e-2;

struct InverseOptions {
    std::optional<DiagParams> seed;
    double tolerance = 1e-12;  // relative residual
    int max_iterations = 200;
};

struct InverseResult {
    DiagParams params;
    bool degenerate = false;  // lambda = 0 boundary, v at an end of its range
    int iterations = 0;
    double residual = 0.0;    // max relative mismatch of forward_map(params)
};

inline double relative_residual(const PhysicalParams& got, const PhysicalParams& want) {
    double r = std::max(std::abs(got.Omega_a - want.Omega_a) / want.Omega_a,
                        std::abs(got.Omega_b - want.Omega_b) / want.Omega_b);
    if (want.lambda > 0.0) r = std::max(r, std::abs(got.lambda - want.lambda) / want.lambda);
    return r;
}

namespace detail {

inline Eigen::Vector3d inverse_residual(const Eigen::Vector3d& y, const PhysicalParams& t) {
    const PhysicalParams p = physical(derive(kernel_of_log(y(0), y(1), y(2))));
    return {(p.Omega_a - t.Omega_a) / t.Omega_a, (p.Omega_b - t.Omega_b) / t.Omega_b,
            (p.lambda - t.lambda) / t.lambda};
}

inline double lambda_at(double m, double C, double w) { return derive(kernel_of_log(m, C, w)).lambda; }

}  // namespace detail

inline InverseResult inverse_map(const PhysicalParams& pp, const InverseOptions& opt = {}) {
    validate(pp);
    if (pp.lambda / pp.Omega_a >= kMaxCouplingRatio)
        throw DomainError("inverse_map: lambda/Omega_a must be below " + std::to_string(kMaxCouplingRatio));
    if (4.0 * pp.lambda * pp.lambda >= pp.Omega_a * pp.Omega_b)
        throw DomainError("inverse_map: 4 lambda^2 >= Omega_a Omega_b, Hamiltonian is unbounded below");

    InverseResult res;
    if (pp.lambda == 0.0) {
        // Decoupled limit: either v -> 0 (field is the lower mode) or u -> 0.
        res.degenerate = true;
        res.params.omega_a = std::max(pp.Omega_a, pp.Omega_b);
        res.params.omega_b = std::min(pp.Omega_a, pp.Omega_b);
        res.params.v = pp.Omega_a < pp.Omega_b ? 0.0 : half_log_ratio(res.params.omega_a, res.params.omega_b);
        return res;
    }

    Eigen::Vector3d y;
    if (opt.seed) {
        validate(*opt.seed);
        const double C = half_log_ratio(opt.seed->omega_a, opt.seed->omega_b);
        y = {std::sqrt(opt.seed->omega_a * opt.seed->omega_b), C, opt.seed->v / C};
    } else {
        // Normal modes of the rotating-wave Hamiltonian.
        const double mean = 0.5 * (pp.Omega_a + pp.Omega_b);
        const double half_det = 0.5 * (pp.Omega_a - pp.Omega_b);
        const double split = std::hypot(half_det, pp.lambda);
        const double m = std::sqrt((mean + split) * (mean - split));
        const double C = 0.5 * std::log1p(2.0 * split / (mean - split));
        double w = 0.5 * (1.0 + half_det / split);
        // Bisection on the branch of lambda(w) containing the seed.
        double lo = w <= 0.5 ? 1e-12 : 0.5, hi = w <= 0.5 ? 0.5 : 1.0 - 1e-12;
        const bool rising = w <= 0.5;
        if ((detail::lambda_at(m, C, rising ? hi : lo) - pp.lambda) > 0.0) {
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double f = detail::lambda_at(m, C, mid) - pp.lambda;
                if ((f > 0.0) == rising) hi = mid; else lo = mid;
            }
            w = 0.5 * (lo + hi);
        }
        y = {m, C, w};
    }

    const double tol = opt.tolerance;
    Eigen::Vector3d r = detail::inverse_residual(y, pp);
    int it = 0;
    for (; it < opt.max_iterations && r.cwiseAbs().maxCoeff() > tol; ++it) {
        Eigen::Matrix3d J;
        const Eigen::Vector3d h{1e-7 * y(0), 1e-6 * y(1), 1e-6 * std::min(y(2), 1.0 - y(2))};
        for (int j = 0; j < 3; ++j) {
            Eigen::Vector3d yp = y, ym = y;
            yp(j) += h(j);
            ym(j) -= h(j);
            J.col(j) = (detail::inverse_residual(yp, pp) - detail::inverse_residual(ym, pp)) / (2.0 * h(j));
        }
        const Eigen::Vector3d step = J.fullPivLu().solve(-r);
        double damp = 1.0;
        bool accepted = false;
        for (int k = 0; k < 40; ++k, damp *= 0.5) {
            const Eigen::Vector3d yn = y + damp * step;
            if (!(yn(0) > 0.0) || !(yn(1) > 0.0) || !(yn(2) > 0.0) || !(yn(2) < 1.0)) continue;
            const Eigen::Vector3d rn = detail::inverse_residual(yn, pp);
            if (rn.allFinite() && rn.cwiseAbs().maxCoeff() < r.cwiseAbs().maxCoeff()) {
                y = yn;
                r = rn;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    if (r.cwiseAbs().maxCoeff() > tol)
        throw ConvergenceError("inverse_map: Newton iteration did not converge", r.cwiseAbs().maxCoeff(), it);

    // Round to doubles, then refit w against the public forward map.
    DiagParams dp{y(0) * std::exp(y(1)), y(0) * std::exp(-y(1)), 0.0};
    const double C = half_log_ratio(dp.omega_a, dp.omega_b);
    double w = y(2);
    auto lam_err = [&](double ww) {
        return (forward_map(DiagParams{dp.omega_a, dp.omega_b, ww * C}).lambda - pp.lambda) / pp.lambda;
    };
    double w0 = w, f0 = lam_err(w0);
    double w1 = w * (1.0 + 1e-9), f1 = lam_err(w1);
    for (int k = 0; k < 20 && std::abs(f1) > 0.25 * tol && f1 != f0; ++k) {
        const double w2 = w1 - f1 * (w1 - w0) / (f1 - f0);
        w0 = w1; f0 = f1;
        w1 = w2; f1 = lam_err(w1);
    }
    if (std::abs(f1) < std::abs(lam_err(w))) w = w1;
    dp.v = w * C;
    res.params = dp;
    res.iterations = it;
    res.residual = relative_residual(forward_map(dp), pp);
    if (res.residual > 1e-10)
        throw ConvergenceError("inverse_map: round trip residual too large", res.residual, it);
    return res;
}

// ---------- unitaries and eigenstates ----------

// Factors of U kept in structured form so they can act on long vectors.
class UnitaryChain {
public:
    UnitaryChain(const DiagParams& dp, double varphi, const FockDims& dims)
        : dims_(dims), varphi_(varphi), d_(derive_params(dp)) {
        if (!std::isfinite(varphi)) throw DomainError("UnitaryChain: non-finite varphi");
        sa_ = fock::squeeze_matrix_single(dims.n_field, d_.u, d_.theta_a);
        sb_ = fock::squeeze_matrix_single(dims.n_det, dp.v, d_.theta_b);
        sbh_ = fock::squeeze_matrix_single(dims.n_det, d_.p, 0.0);
        disp_ = fock::BlockDisplacement(dims, d_.s, d_.phi);
    }

    const FockDims& dims() const { return dims_; }
    const DerivedParams& derived() const { return d_; }

    // U v with U = S_a S_b D S^_b R
    Vector apply(const Vector& v) const {
        Vector x = fock::apply_rotation(dims_, varphi_, v);
        x = fock::apply_detector(dims_, sbh_, x);
        x = disp_.apply(x);
        x = fock::apply_detector(dims_, sb_, x);
        return fock::apply_field(dims_, sa_, x);
    }

    Vector apply_adjoint(const Vector& v) const {
        Vector x = fock::apply_field(dims_, sa_.adjoint(), v);
        x = fock::apply_detector(dims_, sb_.adjoint(), x);
        x = disp_.apply(x, true);
        x = fock::apply_detector(dims_, sbh_.adjoint(), x);
        return fock::apply_rotation(dims_, -varphi_, x);
    }

    Matrix dense() const {
        Matrix out(dims_.size(), dims_.size());
        for (int j = 0; j < dims_.size(); ++j) out.col(j) = apply(Vector::Unit(dims_.size(), j));
        return out;
    }

private:
    FockDims dims_;
    double varphi_;
    DerivedParams d_;
    Matrix sa_, sb_, sbh_;
    fock::BlockDisplacement disp_;
};

inline OperatorMatrix build_unitary(const DiagParams& dp, double varphi, const FockDims& dims) {
    return {dims, UnitaryChain(dp, varphi, dims).dense()};
}

// Truncated-space matrix of the physical Hamiltonian.
inline OperatorMatrix build_hamiltonian(const PhysicalParams& pp, double varphi, const FockDims& dims) {
    validate(pp);
    if (!std::isfinite(varphi)) throw DomainError("build_hamiltonian: non-finite varphi");
    using fock::Ladder;
    using fock::Mode;
    const Matrix a = fock::ladder(dims, Mode::field, Ladder::lower).m;
    const Matrix b = fock::ladder(dims, Mode::detector, Ladder::lower).m;
    const cplx e = std::exp(kI * varphi);
    Matrix h = pp.Omega_a * fock::number_op(dims, Mode::field).m + pp.Omega_b * fock::number_op(dims, Mode::detector).m;
    h += pp.lambda * (b + b.adjoint()) * (e * a.adjoint() + std::conj(e) * a);
    return {dims, h};
}

struct EigenstateInfo {
    FockDims working;             // padded space the chain was evaluated in
    double discarded = 0.0;       // weight outside the requested dims
    double change = 0.0;          // last change of the projected state under padding
};

inline constexpr int kMaxWorkingCutoff = 240;

// U^dag |n_f n_d> projected onto `dims`. The chain is evaluated in a padded
// space that grows until the projection stops changing.
inline StateVector eigenstate(const DiagParams& dp, int n_f, int n_d, double varphi, const FockDims& dims,
                              EigenstateInfo* info = nullptr, double tol = 1e-11) {
    validate(dp);
    if (n_f < 0 || n_d < 0) throw DomainError("eigenstate: occupations must be non-negative");
    if (2 * n_f >= dims.n_field || 2 * n_d >= dims.n_det)
        throw TruncationError("eigenstate: occupation too close to the cutoff (need n < cutoff/2)", 1.0,
                              2 * std::max(n_f, n_d) + 2);
    const int pad = 20;
    Vector prev;
    double change = 1.0;
    FockDims w(dims.n_field + pad, dims.n_det + pad);
    for (;;) {
        const UnitaryChain chain(dp, varphi, w);
        const Vector full = chain.apply_adjoint(fock::basis_state(w, n_f, n_d).amp);
        const Vector proj = fock::resize_state(w, full, dims);
        if (prev.size() == proj.size()) change = (proj - prev).norm();
        prev = proj;
        if (change < tol) break;
        if (w.n_field + pad > kMaxWorkingCutoff || w.n_det + pad > kMaxWorkingCutoff)
            throw TruncationError("eigenstate: chain did not converge within the working cutoff", change,
                                  kMaxWorkingCutoff);
        w = FockDims(w.n_field + pad, w.n_det + pad);
    }
    const double nrm = prev.norm();
    if (info) {
        info->working = w;
        info->discarded = 1.0 - nrm * nrm;
        info->change = change;
    }
    return {dims, prev / nrm};
}

// ---------- trajectories ----------

inline double cycle_duration(double Omega_a) {
    if (!(Omega_a > 0.0)) throw DomainError("cycle_duration: Omega_a must be positive");
    return 2.0 * kPi / Omega_a;
}

// Phase of the field mode seen by an inertial detector at rest at x.
inline double inertial_phase(double k, double x, double Omega_a, double t) { return k * x - Omega_a * t; }

// Same for a uniformly accelerated detector in Rindler coordinates (proper time tau).
inline double rindler_phase(double Omega_a, double tau) { return -Omega_a * tau; }

}  // namespace berrytherm::diag
