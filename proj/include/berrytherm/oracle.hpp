// oracle.hpp — numerical checks independent of the closed forms: dense and
// sparse eigensolvers, the discrete Pancharatnam loop, partial geometric sums,
// and Schrodinger evolution for the adiabaticity check

#pragma once

#include "berrytherm/diagonalization.hpp"
#include "berrytherm/errors.hpp"
#include "berrytherm/fockspace.hpp"
#include "berrytherm/geomphase.hpp"
#include "berrytherm/parallel.hpp"
#include "berrytherm/thermo.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace berrytherm::oracle {

using diag::DiagParams;
using diag::PhysicalParams;
using fock::cplx;
using fock::FockDims;
using fock::kI;
using fock::kPi;
using fock::Matrix;
using fock::OperatorMatrix;
using fock::StateVector;
using fock::Vector;
using geom::PhaseResult;
using SparseMatrix = Eigen::SparseMatrix<cplx>;

// ---------- dense eigenpairs ----------

struct EigenPair {
    double value = 0.0;
    StateVector vector;
    double overlap = 0.0;   // |<target|vector>| with target normalized
    double residual = 0.0;  // ||H v - E v||
};

// Largest-magnitude component made real positive.
inline void fix_gauge(Vector& v) {
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    v *= std::abs(v(k)) / v(k);
}

inline EigenPair numeric_eigenpair(const OperatorMatrix& H, const StateVector& target) {
    if (!(H.dims == target.dims)) throw DomainError("numeric_eigenpair: mismatched dims");
    const double herm = (H.m - H.m.adjoint()).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, H.m.cwiseAbs().maxCoeff());
    if (herm > 1e-12 * scale) throw DomainError("numeric_eigenpair: H is not Hermitian");
    const double tn = target.norm();
    if (!(tn > 0.0)) throw DomainError("numeric_eigenpair: zero target");
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (H.m + H.m.adjoint()));
    if (es.info() != Eigen::Success) throw NumericalError("numeric_eigenpair: eigensolver failed");
    const Eigen::VectorXd ov = (es.eigenvectors().adjoint() * target.amp).cwiseAbs() / tn;
    Eigen::Index best = 0;
    const double o = ov.maxCoeff(&best);
    if (o < 0.9) throw AmbiguityError("numeric_eigenpair: best overlap " + std::to_string(o) + " < 0.9", o);
    Vector v = es.eigenvectors().col(best);
    fix_gauge(v);
    EigenPair p;
    p.value = es.eigenvalues()(best);
    p.vector = StateVector(H.dims, v);
    p.overlap = o;
    p.residual = (H.m * v - p.value * v).norm();
    return p;
}

// ---------- parity sectors ----------

// Total parity (-1)^{n_f + n_d} commutes with H at every varphi.
struct Sector {
    FockDims dims;
    int parity = 0;
    std::vector<int> full;   // sector index -> full index
    std::vector<int> local;  // full index -> sector index or -1
};

inline Sector parity_sector(const FockDims& dims, int parity) {
    Sector s;
    s.dims = dims;
    s.parity = parity & 1;
    s.local.assign(dims.size(), -1);
    for (int i = 0; i < dims.size(); ++i) {
        auto [f, d] = dims.occupation(i);
        if (((f + d) & 1) == s.parity) {
            s.local[i] = int(s.full.size());
            s.full.push_back(i);
        }
    }
    return s;
}

inline Vector to_sector(const Sector& s, const Vector& v) {
    Vector out(s.full.size());
    for (std::size_t k = 0; k < s.full.size(); ++k) out(k) = v(s.full[k]);
    return out;
}

inline Vector from_sector(const Sector& s, const Vector& x) {
    Vector out = Vector::Zero(s.dims.size());
    for (std::size_t k = 0; k < s.full.size(); ++k) out(s.full[k]) = x(k);
    return out;
}

inline SparseMatrix sector_hamiltonian(const PhysicalParams& pp, double varphi, const Sector& s, double shift = 0.0) {
    const FockDims& dims = s.dims;
    const cplx e = std::exp(kI * varphi);
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(s.full.size() * 5);
    for (std::size_t k = 0; k < s.full.size(); ++k) {
        auto [f, d] = dims.occupation(s.full[k]);
        trip.emplace_back(int(k), int(k), pp.Omega_a * f + pp.Omega_b * d - shift);
        // lambda (b + b^dag)(a^dag e + a e*) acting on |f, d>
        for (int df : {+1, -1}) {
            const int f2 = f + df;
            if (f2 < 0 || f2 >= dims.n_field) continue;
            const cplx fa = df > 0 ? e * std::sqrt(double(f + 1)) : std::conj(e) * std::sqrt(double(f));
            for (int dd : {+1, -1}) {
                const int d2 = d + dd;
                if (d2 < 0 || d2 >= dims.n_det) continue;
                const double fb = dd > 0 ? std::sqrt(double(d + 1)) : std::sqrt(double(d));
                trip.emplace_back(s.local[dims.index(f2, d2)], int(k), pp.lambda * fa * fb);
            }
        }
    }
    SparseMatrix h(s.full.size(), s.full.size());
    h.setFromTriplets(trip.begin(), trip.end());
    return h;
}

inline double hamiltonian_scale(const PhysicalParams& pp, const FockDims& dims) {
    return pp.Omega_a * (dims.n_field - 1) + pp.Omega_b * (dims.n_det - 1) +
           4.0 * pp.lambda * std::sqrt(double(dims.n_field) * dims.n_det);
}

// exp(-i varphi n_f) on sector coordinates
inline void rotate_sector(const Sector& s, double varphi, Vector& x) {
    for (std::size_t k = 0; k < s.full.size(); ++k) {
        const int f = s.full[k] / s.dims.n_det;
        x(k) *= std::exp(-kI * (varphi * f));
    }
}

class ShiftedSolver {
public:
    ShiftedSolver(const SparseMatrix& h, double sigma, double scale) {
        SparseMatrix a = h;
        for (int attempt = 0; attempt < 4; ++attempt) {
            a = h;
            for (int k = 0; k < a.rows(); ++k) a.coeffRef(k, k) -= sigma;
            a.makeCompressed();
            lu_.analyzePattern(a);
            lu_.factorize(a);
            if (lu_.info() == Eigen::Success) return;
            sigma += 1e-12 * scale;
        }
        throw NumericalError("shift-invert factorization failed");
    }
    Vector solve(const Vector& b) {
        Vector x = lu_.solve(b);
        if (lu_.info() != Eigen::Success || !x.allFinite()) throw NumericalError("shift-invert solve failed");
        return x;
    }

private:
    Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu_;
};

// Rayleigh-quotient iteration in a sector, seeded with `seed`.
struct SectorEigen {
    double value = 0.0;
    Vector x;
    double residual = 0.0;
};

inline SectorEigen sector_eigenpair(const SparseMatrix& h, const Vector& seed, double scale) {
    Vector x = seed.normalized();
    double sigma = (x.adjoint() * h * x)(0).real();
    double res = (h * x - sigma * x).norm();
    for (int it = 0; it < 12 && res > 1e-13 * scale; ++it) {
        ShiftedSolver lu(h, sigma + 1e-13 * scale, scale);
        x = lu.solve(x).normalized();
        sigma = (x.adjoint() * h * x)(0).real();
        res = (h * x - sigma * x).norm();
    }
    if (res > 1e-10 * scale) throw ConvergenceError("sector_eigenpair: Rayleigh iteration did not converge", res / scale, 12);
    return {sigma, x, res};
}

// ---------- discrete Berry loop ----------

enum class Refinement { single, richardson };
enum class LoopSolver { covariant, refactor };

struct LoopSpec {
    int n_points = 2048;
    Refinement refinement = Refinement::richardson;
    FockDims dims{30, 30};
    double truncation_threshold = 1e-8;
    LoopSolver solver = LoopSolver::covariant;
};

struct LoopResult {
    PhaseResult phase;            // method = oracle
    double error_estimate = 0.0;  // |gamma(2N) - gamma(N)| with richardson
    double truncation_estimate = 0.0;
    double eigenvalue = 0.0;
    double max_residual = 0.0;    // max ||H(phi_k) x_k - E x_k|| / scale
    double min_overlap = 1.0;     // min |<x_k|x_{k+1}>|
    FockDims dims;
};

// Arg of the cyclic product of overlaps, accumulated as a sum of arguments.
// Each factor is invariant under x_k -> e^{i a_k} x_k up to the phases that
// cancel around the loop.
inline double pancharatnam_phase(std::span<const Vector> loop) {
    double sum = 0.0;
    const std::size_t n = loop.size();
    for (std::size_t k = 0; k < n; ++k) sum += std::arg(loop[k].dot(loop[(k + 1) % n]));
    return sum;
}

namespace detail {

inline std::vector<Vector> loop_states(const PhysicalParams& pp, const Sector& sec, const Vector& x0, double E,
                                       int m, LoopSolver solver, double scale, LoopResult& out) {
    std::vector<Vector> xs(m);
    xs[0] = x0;
    const SparseMatrix h0 = sector_hamiltonian(pp, 0.0, sec);
    std::optional<ShiftedSolver> fixed;
    if (solver == LoopSolver::covariant) fixed.emplace(h0, E + 1e-12 * scale, scale);
    for (int k = 1; k < m; ++k) {
        const double phi = 2.0 * kPi * k / m;
        const SparseMatrix hk = sector_hamiltonian(pp, phi, sec);
        Vector x = xs[k - 1];
        double res = std::numeric_limits<double>::infinity();
        for (int pass = 0; pass < 4 && res > 1e-11 * scale; ++pass) {
            if (solver == LoopSolver::covariant) {
                // H(phi) = R(phi)^dag H(0) R(phi)
                rotate_sector(sec, phi, x);
                x = fixed->solve(x);
                rotate_sector(sec, -phi, x);
            } else {
                ShiftedSolver lu(hk, E + 1e-12 * scale, scale);
                x = lu.solve(x);
            }
            x.normalize();
            res = (hk * x - E * x).norm();
        }
        if (res > 1e-10 * scale)
            throw ConvergenceError("discrete_berry_loop: eigenvector not certified at point " + std::to_string(k),
                                   res / scale, k);
        out.max_residual = std::max(out.max_residual, res / scale);
        // Phase aligned with the previous point so each overlap is real positive.
        const cplx link = xs[k - 1].dot(x);
        if (std::abs(link) > 0.0) x *= std::conj(link) / std::abs(link);
        const double ov = std::abs(link);
        out.min_overlap = std::min(out.min_overlap, ov);
        if (ov < 0.99)
            throw LevelCrossingError("discrete_berry_loop: consecutive overlap " + std::to_string(ov) + " < 0.99",
                                     ov, k);
        xs[k] = std::move(x);
    }
    const double close = std::abs(xs[m - 1].dot(xs[0]));
    out.min_overlap = std::min(out.min_overlap, close);
    if (close < 0.99) throw LevelCrossingError("discrete_berry_loop: loop does not close", close, m);
    return xs;
}

}  // namespace detail

inline LoopResult discrete_berry_loop(const DiagParams& dp, int n_f, int n_d, const LoopSpec& spec = {}) {
    if (spec.n_points < 16) throw DomainError("LoopSpec: n_points must be >= 16");
    diag::validate(dp);
    if (2 * n_f >= spec.dims.n_field || 2 * n_d >= spec.dims.n_det)
        throw TruncationError("discrete_berry_loop: occupation too close to the cutoff", 1.0);
    const PhysicalParams pp = diag::forward_map(dp);
    const FockDims& dims = spec.dims;
    const Sector sec = parity_sector(dims, n_f + n_d);
    const double scale = hamiltonian_scale(pp, dims);

    // Seed from the chain evaluated directly in the truncated space.
    const diag::UnitaryChain chain(dp, 0.0, dims);
    const Vector seed = to_sector(sec, chain.apply_adjoint(fock::basis_state(dims, n_f, n_d).amp));
    const SectorEigen eig = sector_eigenpair(sector_hamiltonian(pp, 0.0, sec), seed, scale);
    const double ov = std::abs(seed.normalized().dot(eig.x));
    if (ov < 0.9) throw AmbiguityError("discrete_berry_loop: seed overlap " + std::to_string(ov) + " < 0.9", ov);

    LoopResult out;
    out.dims = dims;
    out.eigenvalue = eig.value;
    out.truncation_estimate = fock::tail_weight(dims, from_sector(sec, eig.x));
    if (out.truncation_estimate > spec.truncation_threshold)
        throw TruncationError("discrete_berry_loop: truncation estimate " + std::to_string(out.truncation_estimate) +
                                  " exceeds threshold",
                              out.truncation_estimate, dims.n_field + 10);

    const int m = spec.refinement == Refinement::richardson ? 2 * spec.n_points : spec.n_points;
    const std::vector<Vector> xs = detail::loop_states(pp, sec, eig.x, eig.value, m, spec.solver, scale, out);
    const double fine = pancharatnam_phase(xs);
    double raw = fine;
    if (spec.refinement == Refinement::richardson) {
        std::vector<Vector> coarse;
        coarse.reserve(spec.n_points);
        for (int k = 0; k < m; k += 2) coarse.push_back(xs[k]);
        // The two grids agree only mod 2 pi; combine on the nearest branch.
        const double diff = geom::reduce_phase(pancharatnam_phase(coarse) - fine);
        raw = fine - diff / 3.0;
        out.error_estimate = std::abs(diff);
    }
    out.phase = geom::make_phase(raw, geom::Method::oracle);
    return out;
}

// Runs the loop, enlarging both cutoffs in steps of 10 until the truncation
// estimate drops below `target`. If the largest cutoff still misses the target
// the run is accepted as long as the hard threshold of `spec` holds.
inline LoopResult certified_berry_loop(const DiagParams& dp, int n_f, int n_d, LoopSpec spec = {},
                                       int max_cutoff = 60, double target = 1e-10) {
    const double hard = spec.truncation_threshold;
    spec.truncation_threshold = std::min(hard, target);
    for (;;) {
        try {
            return discrete_berry_loop(dp, n_f, n_d, spec);
        } catch (const TruncationError&) {
            const int next = std::max(spec.dims.n_field, spec.dims.n_det) + 10;
            if (next > max_cutoff) {
                spec.truncation_threshold = hard;
                return discrete_berry_loop(dp, n_f, n_d, spec);
            }
            spec.dims = FockDims(next, next);
        }
    }
}

// ---------- mixed-state partial sums ----------

inline void check_tail(const thermo::ThermalSqueeze& r, int n_max) {
    if (n_max < 0) throw DomainError("mixed_phase_partial_sum: n_max must be >= 0");
    const double tail = std::exp(-r.x * double(n_max + 1));
    if (!(tail < 1e-12)) {
        const int need = thermo::ThermalStateSpec::required_n_max(r);
        throw TruncationError("mixed_phase_partial_sum: tail " + std::to_string(tail) + " >= 1e-12, need n_max >= " +
                                  std::to_string(need),
                              tail, need);
    }
}

// Arg sum_n w_n e^{i gamma_n} with gamma_n = gamma_I0 + 2 pi G n.
inline PhaseResult mixed_phase_partial_sum(double G, double gamma_I0, const thermo::ThermalSqueeze& r, int n_max) {
    check_tail(r, n_max);
    cplx sum = 0.0;
    const double lead = 1.0 / r.cosh2;
    for (int n = 0; n <= n_max; ++n) {
        const double w = n == 0 ? lead : lead * std::exp(-r.x * n);
        sum += w * std::exp(kI * (gamma_I0 + 2.0 * kPi * G * n));
    }
    const double a = std::arg(sum);
    return {geom::reduce_phase(a), gamma_I0 + geom::reduce_phase(a - gamma_I0), geom::Method::oracle};
}

// Same sum with each gamma_n taken from the eigenstate phase of U^dag |n, 0>.
inline PhaseResult mixed_phase_partial_sum(const DiagParams& dp, const thermo::ThermalSqueeze& r, int n_max) {
    check_tail(r, n_max);
    cplx sum = 0.0;
    const double lead = 1.0 / r.cosh2;
    for (int n = 0; n <= n_max; ++n) {
        const double w = n == 0 ? lead : lead * std::exp(-r.x * n);
        sum += w * std::exp(kI * geom::eigen_berry_phase(dp, n, 0).raw);
    }
    const double g0 = geom::eigen_berry_phase(dp, 0, 0).raw;
    const double a = std::arg(sum);
    return {geom::reduce_phase(a), g0 + geom::reduce_phase(a - g0), geom::Method::oracle};
}

// ---------- Schrodinger evolution ----------

enum class Picture { mixed, interaction };

// fock: every thermal occupation |n, 0> evolved in a window of the two-mode
// Fock space. quadrature: the field quadrature a + a^dag is conserved in the
// interaction picture, so the mixture is a Gaussian average over its
// eigenvalue x of detector-only evolutions, done by Gauss-Hermite quadrature.
// automatic picks fock for the vacuum and quadrature otherwise.
enum class Route { automatic, fock, quadrature };

struct EvolutionSpec {
    double duration = 0.0;        // seconds
    double step = 0.0;            // seconds, must be < 0.01 * 2 pi / Omega_a
    Picture picture = Picture::interaction;
    Route route = Route::automatic;
    int quadrature_nodes = 64;       // doubled once to estimate the quadrature error
    double field_temperature = 0.0;  // kelvin, 0 is the vacuum
    double tail_tolerance = 1e-7;    // thermal weight left out of the mixture
    double edge_tolerance = 1e-11;   // weight allowed on the window boundary
    double drift_tolerance = 1e-10;  // norm drift per trajectory
};

struct ExcitationTrace {
    std::vector<double> time;         // sample times (every step)
    std::vector<double> probability;  // mixture P(t) at the samples
    std::vector<double> cycle_end;    // P at the end of each cycle
    std::vector<double> cycle_max;    // max P within each cycle
    double tail_bound = 0.0;          // thermal weight omitted or quadrature change on doubling
    Route route = Route::fock;
    double max_norm_drift = 0.0;
    int trajectories = 0;
    int max_window = 0;
};

namespace detail {

// One trajectory started in |n0, 0> inside a window of field levels
// [lo, lo + nf) and detector levels [0, nd).
struct Window {
    int lo = 0, nf = 0, nd = 0;
};

struct TrajectoryOut {
    std::vector<double> p;  // P at each base step
    double edge_field = 0.0;
    double edge_det = 0.0;
    double drift = 0.0;
};

inline TrajectoryOut run_trajectory(const PhysicalParams& pp, int n0, const Window& w, const EvolutionSpec& spec,
                                    int steps, int sub) {
    const int dim = w.nf * w.nd;
    const double h = spec.duration / steps;
    const bool mixed = spec.picture == Picture::mixed;
    const double dt = h / sub;

    std::vector<double> sq_f(w.nf + 1), sq_d(w.nd + 1);
    for (int k = 0; k <= w.nf; ++k) sq_f[k] = std::sqrt(double(w.lo + k));
    for (int k = 0; k <= w.nd; ++k) sq_d[k] = std::sqrt(double(k));

    // d psi / dt = -i H psi. Field factor (a^dag e^{i th} + a e^{-i th}), detector
    // factor (b e^{-i wb} + b^dag e^{i wb}); the phases depend on the picture.
    auto deriv = [&](double t, const Vector& x, Vector& out) {
        double th, wb;
        if (mixed) {
            th = -pp.Omega_a * t;
            wb = 0.0;
        } else {
            th = 0.0;
            wb = pp.Omega_b * t;
        }
        const cplx ef = std::exp(kI * th), ed = std::exp(kI * wb);
        out.setZero();
        for (int i = 0; i < w.nf; ++i) {
            for (int d = 0; d < w.nd; ++d) {
                const cplx c = x(i * w.nd + d);
                if (c == cplx(0.0)) continue;
                if (mixed) out(i * w.nd + d) += (pp.Omega_a * (w.lo + i) + pp.Omega_b * d) * c;
                for (int df : {+1, -1}) {
                    const int i2 = i + df;
                    if (i2 < 0 || i2 >= w.nf) continue;
                    const cplx fa = df > 0 ? ef * sq_f[i + 1] : std::conj(ef) * sq_f[i];
                    for (int dd : {+1, -1}) {
                        const int d2 = d + dd;
                        if (d2 < 0 || d2 >= w.nd) continue;
                        const cplx fb = dd > 0 ? ed * sq_d[d + 1] : std::conj(ed) * sq_d[d];
                        out(i2 * w.nd + d2) += pp.lambda * fa * fb * c;
                    }
                }
            }
        }
        out *= -kI;
    };

    auto excited = [&](const Vector& x) {
        double p = 0.0;
        for (int i = 0; i < w.nf; ++i)
            for (int d = 1; d < w.nd; ++d) p += std::norm(x(i * w.nd + d));
        return p;
    };
    auto edge_det = [&](const Vector& x) {
        double e = 0.0;
        for (int i = 0; i < w.nf; ++i) e += std::norm(x(i * w.nd + w.nd - 1));
        return e;
    };
    auto edge_field = [&](const Vector& x) {
        double e = 0.0;
        for (int d = 0; d < w.nd; ++d) {
            if (w.lo > 0) e += std::norm(x(d));
            e += std::norm(x((w.nf - 1) * w.nd + d));
        }
        return e;
    };

    TrajectoryOut out;
    out.p.resize(steps + 1);
    Vector x = Vector::Zero(dim), k1(dim), k2(dim), k3(dim), k4(dim), tmp(dim);
    x((n0 - w.lo) * w.nd) = 1.0;
    out.p[0] = 0.0;
    double t = 0.0;
    for (int s = 0; s < steps; ++s) {
        for (int j = 0; j < sub; ++j) {
            deriv(t, x, k1);
            tmp = x + 0.5 * dt * k1;
            deriv(t + 0.5 * dt, tmp, k2);
            tmp = x + 0.5 * dt * k2;
            deriv(t + 0.5 * dt, tmp, k3);
            tmp = x + dt * k3;
            deriv(t + dt, tmp, k4);
            x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t = (s * sub + j + 1) * dt;
        }
        out.p[s + 1] = excited(x);
        out.edge_field = std::max(out.edge_field, edge_field(x));
        out.edge_det = std::max(out.edge_det, edge_det(x));
    }
    out.drift = std::abs(x.squaredNorm() - 1.0);
    return out;
}

// Evolves |n0, 0>, growing the window until its boundary stays empty. The
// first window comes from the detector displacement 2 lambda x / Omega_b with
// x^2 ~ 2 n0 + 1.
inline TrajectoryOut evolve_basis_state(const PhysicalParams& pp, int n0, const EvolutionSpec& spec, int steps,
                                        int& window_used) {
    const double beta2 = 4.0 * (pp.lambda / pp.Omega_b) * (pp.lambda / pp.Omega_b) * (2.0 * n0 + 1.0);
    int half = 4 + int(std::ceil(4.0 * beta2));
    int nd = 6 + int(std::ceil(6.0 * beta2));
    // RK4 loses norm at about z^6/72 per step for an eigenfrequency with
    // z = dt * omega. Substeps start from the frequencies the state actually
    // occupies and double whenever the measured drift is too large.
    const double h = spec.duration / steps;
    double freq = 4.0 * pp.lambda * std::sqrt((n0 + 1.0) * (1.0 + 2.0 * beta2));
    if (spec.picture == Picture::mixed) freq += pp.Omega_a * (n0 + 2) + 2.0 * pp.Omega_b;
    const double need = double(steps) * std::pow(h * freq, 6) / (72.0 * 0.1 * spec.drift_tolerance);
    int sub = std::max(1, int(std::ceil(std::pow(need, 0.2))));
    for (int attempt = 0;; ++attempt) {
        Window w;
        w.lo = std::max(0, n0 - half);
        w.nf = n0 + half + 1 - w.lo;
        w.nd = nd;
        TrajectoryOut out = run_trajectory(pp, n0, w, spec, steps, sub);
        if (out.drift > spec.drift_tolerance) {
            if (sub >= 4096)
                throw NumericalError("schrodinger evolution: norm drift " + std::to_string(out.drift) +
                                     " exceeds tolerance; reduce the step");
            sub *= 2;
            continue;
        }
        if (out.edge_field <= spec.edge_tolerance && out.edge_det <= spec.edge_tolerance) {
            window_used = std::max(window_used, std::max(w.nf, w.nd));
            return out;
        }
        if (attempt > 12)
            throw TruncationError("schrodinger evolution: window did not converge", out.edge_field + out.edge_det);
        if (out.edge_field > spec.edge_tolerance) half += std::max(2, half / 2);
        if (out.edge_det > spec.edge_tolerance) nd += std::max(2, nd / 2);
    }
}

// Nodes and weights for the integral of e^{-t^2} f(t) (Golub-Welsch).
inline void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) j(k, k - 1) = j(k - 1, k) = std::sqrt(0.5 * k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    nodes.resize(n);
    weights.resize(n);
    for (int k = 0; k < n; ++k) {
        nodes[k] = es.eigenvalues()(k);
        weights[k] = std::sqrt(kPi) * es.eigenvectors()(0, k) * es.eigenvectors()(0, k);
    }
}

// Detector started in |0> under lambda x (b e^{-i Omega_b t} + b^dag e^{i Omega_b t}).
inline TrajectoryOut run_detector(const PhysicalParams& pp, double x, const EvolutionSpec& spec, int steps) {
    const double h = spec.duration / steps;
    const double g = pp.lambda * x;
    const double beta2 = 4.0 * (g / pp.Omega_b) * (g / pp.Omega_b);
    int nd = 6 + int(std::ceil(6.0 * beta2));
    const double freq = 2.0 * std::abs(g) * std::sqrt(1.0 + 2.0 * beta2);
    const double need = double(steps) * std::pow(h * freq, 6) / (72.0 * 0.1 * spec.drift_tolerance);
    int sub = std::max(1, int(std::ceil(std::pow(need, 0.2))));
    for (int attempt = 0;; ++attempt) {
        std::vector<double> sq(nd + 1);
        for (int k = 0; k <= nd; ++k) sq[k] = std::sqrt(double(k));
        auto deriv = [&](double t, const Vector& c, Vector& out) {
            const cplx ed = std::exp(kI * (pp.Omega_b * t));
            out.setZero();
            for (int d = 0; d < nd; ++d) {
                if (d + 1 < nd) out(d + 1) += ed * sq[d + 1] * c(d);
                if (d > 0) out(d - 1) += std::conj(ed) * sq[d] * c(d);
            }
            out *= -kI * g;
        };
        TrajectoryOut out;
        out.p.resize(steps + 1);
        Vector c = Vector::Zero(nd), k1(nd), k2(nd), k3(nd), k4(nd);
        c(0) = 1.0;
        const double dt = h / sub;
        double t = 0.0;
        for (int st = 0; st < steps; ++st) {
            for (int j = 0; j < sub; ++j) {
                deriv(t, c, k1);
                deriv(t + 0.5 * dt, c + 0.5 * dt * k1, k2);
                deriv(t + 0.5 * dt, c + 0.5 * dt * k2, k3);
                deriv(t + dt, c + dt * k3, k4);
                c += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                t = (st * sub + j + 1) * dt;
            }
            out.p[st + 1] = c.tail(nd - 1).squaredNorm();
            out.edge_det = std::max(out.edge_det, std::norm(c(nd - 1)));
        }
        out.drift = std::abs(c.squaredNorm() - 1.0);
        if (out.drift > spec.drift_tolerance) {
            if (sub >= 4096) throw NumericalError("schrodinger evolution: norm drift exceeds tolerance; reduce the step");
            sub *= 2;
            continue;
        }
        if (out.edge_det <= spec.edge_tolerance) return out;
        if (attempt > 12) throw TruncationError("schrodinger evolution: detector cutoff did not converge", out.edge_det);
        nd += std::max(2, nd / 2);
    }
}

// Gaussian average over x with variance sigma2 = 2 n + 1 of the thermal field.
inline std::vector<double> quadrature_mixture(const PhysicalParams& pp, double sigma2, const EvolutionSpec& spec,
                                              int steps, int nodes_n, double& drift, double& skipped) {
    std::vector<double> nodes, weights;
    gauss_hermite(nodes_n, nodes, weights);
    // Nodes whose weight is below 1e-16 are skipped; P <= 1 bounds their share.
    std::vector<int> keep;
    for (int k = 0; k < nodes_n; ++k) {
        if (weights[k] / std::sqrt(kPi) >= 1e-16) keep.push_back(k);
        else skipped += weights[k] / std::sqrt(kPi);
    }
    std::vector<TrajectoryOut> outs(nodes_n);
    const double scale = std::sqrt(2.0 * sigma2);
    parallel_for(int(keep.size()), [&](int i) { outs[keep[i]] = run_detector(pp, scale * nodes[keep[i]], spec, steps); });
    std::vector<double> p(steps + 1, 0.0);
    for (int k : keep) {
        const double w = weights[k] / std::sqrt(kPi);
        for (int s = 0; s <= steps; ++s) p[s] += w * outs[k].p[s];
        drift = std::max(drift, outs[k].drift);
    }
    return p;
}

}  // namespace detail

inline ExcitationTrace excitation_trace(const PhysicalParams& pp, const EvolutionSpec& spec) {
    diag::validate(pp);
    const double period = diag::cycle_duration(pp.Omega_a);
    if (!(spec.duration > 0.0) || !std::isfinite(spec.duration))
        throw DomainError("EvolutionSpec: duration must be positive");
    if (!(spec.step > 0.0) || !(spec.step < 0.01 * period))
        throw DomainError("EvolutionSpec: step must be positive and below 0.01 * 2 pi / Omega_a");
    if (!(spec.field_temperature >= 0.0)) throw DomainError("EvolutionSpec: temperature must be >= 0");

    const int steps = int(std::ceil(spec.duration / spec.step - 1e-9));
    ExcitationTrace tr;
    tr.time.resize(steps + 1);
    for (int s = 0; s <= steps; ++s) tr.time[s] = spec.duration * s / steps;
    tr.probability.assign(steps + 1, 0.0);

    Route route = spec.route;
    if (route == Route::automatic) route = spec.field_temperature > 0.0 ? Route::quadrature : Route::fock;
    if (route == Route::quadrature && spec.picture != Picture::interaction)
        throw DomainError("EvolutionSpec: the quadrature route needs the interaction picture");
    tr.route = route;

    if (pp.lambda == 0.0) {
        tr.trajectories = 0;
    } else if (route == Route::quadrature) {
        if (spec.quadrature_nodes < 4) throw DomainError("EvolutionSpec: quadrature_nodes must be >= 4");
        double sigma2 = 1.0;
        if (spec.field_temperature > 0.0) {
            const auto r = thermo::squeeze_from_temperature(pp.Omega_a, spec.field_temperature);
            sigma2 = 2.0 * r.sinh2 + 1.0;
        }
        double skipped_coarse = 0.0, skipped = 0.0;
        const std::vector<double> coarse = detail::quadrature_mixture(pp, sigma2, spec, steps, spec.quadrature_nodes,
                                                                      tr.max_norm_drift, skipped_coarse);
        tr.probability = detail::quadrature_mixture(pp, sigma2, spec, steps, 2 * spec.quadrature_nodes,
                                                    tr.max_norm_drift, skipped);
        for (int s = 0; s <= steps; ++s) tr.tail_bound = std::max(tr.tail_bound, std::abs(tr.probability[s] - coarse[s]));
        tr.tail_bound += skipped;
        tr.trajectories = 3 * spec.quadrature_nodes;
    } else {
        // Thermal weights of the initial field occupation.
        std::vector<double> weights{1.0};
        if (spec.field_temperature > 0.0) {
            const auto r = thermo::squeeze_from_temperature(pp.Omega_a, spec.field_temperature);
            const int n_max = thermo::ThermalStateSpec::required_n_max(r, spec.tail_tolerance);
            weights.resize(n_max + 1);
            for (int n = 0; n <= n_max; ++n) weights[n] = std::exp(-r.x * n) / r.cosh2;
            tr.tail_bound = std::exp(-r.x * double(n_max + 1));
        }
        const int n_traj = int(weights.size());
        tr.trajectories = n_traj;
        // Blocks of trajectories run in parallel and are summed in index order.
        const int block = 32;
        std::vector<detail::TrajectoryOut> outs(block);
        std::vector<int> windows(block, 0);
        for (int b0 = 0; b0 < n_traj; b0 += block) {
            const int nb = std::min(block, n_traj - b0);
            parallel_for(nb, [&](int i) { outs[i] = detail::evolve_basis_state(pp, b0 + i, spec, steps, windows[i]); });
            for (int i = 0; i < nb; ++i) {
                const double wgt = weights[b0 + i];
                for (int s = 0; s <= steps; ++s) tr.probability[s] += wgt * outs[i].p[s];
                tr.max_norm_drift = std::max(tr.max_norm_drift, outs[i].drift);
                tr.max_window = std::max(tr.max_window, windows[i]);
            }
        }
    }

    // Cycle bookkeeping on the sample grid.
    const int n_cycles = int(std::floor(spec.duration / period + 1e-9));
    for (int c = 0; c < n_cycles; ++c) {
        const double t0 = c * period, t1 = (c + 1) * period;
        double mx = 0.0, end = 0.0;
        for (int s = 0; s <= steps; ++s) {
            if (tr.time[s] < t0 - 1e-15 * period || tr.time[s] > t1 + 1e-9 * period) continue;
            mx = std::max(mx, tr.probability[s]);
            end = tr.probability[s];
        }
        tr.cycle_end.push_back(end);
        tr.cycle_max.push_back(mx);
    }
    return tr;
}

inline double schrodinger_excitation_probability(const PhysicalParams& pp, double cycles, EvolutionSpec spec) {
    spec.duration = cycles * diag::cycle_duration(pp.Omega_a);
    if (spec.step == 0.0) spec.step = 0.005 * diag::cycle_duration(pp.Omega_a);
    return excitation_trace(pp, spec).probability.back();
}

}  // namespace berrytherm::oracle
