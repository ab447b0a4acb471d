// fockspace.hpp — truncated two-mode Fock space, ladder operators and the
// elementary unitaries (squeeze, two-mode displacement, field rotation)

#pragma once

#include "berrytherm/errors.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

namespace berrytherm::fock {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RowMajorMatrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

enum class Mode { field, detector };
enum class Ladder { lower, raise };

// Per-mode cutoffs. Basis index = n_f * n_det + n_d (field-major).
struct FockDims {
    int n_field = 30;
    int n_det = 30;

    FockDims() = default;
    FockDims(int nf, int nd) : n_field(nf), n_det(nd) {
        if (nf < 2 || nd < 2)
            throw DomainError("FockDims: each cutoff must be >= 2, got " + std::to_string(nf) +
                              "," + std::to_string(nd));
    }

    int size() const { return n_field * n_det; }
    int cutoff(Mode m) const { return m == Mode::field ? n_field : n_det; }
    int index(int nf, int nd) const { return nf * n_det + nd; }
    std::pair<int, int> occupation(int idx) const { return {idx / n_det, idx % n_det}; }

    friend bool operator==(const FockDims&, const FockDims&) = default;
};

struct OperatorMatrix {
    FockDims dims;
    Matrix m;

    OperatorMatrix() = default;
    OperatorMatrix(FockDims d, Matrix mat) : dims(d), m(std::move(mat)) {
        if (m.rows() != dims.size() || m.cols() != dims.size())
            throw DomainError("OperatorMatrix: shape does not match FockDims");
    }

    OperatorMatrix adjoint() const { return {dims, m.adjoint()}; }
};

inline OperatorMatrix operator*(const OperatorMatrix& x, const OperatorMatrix& y) {
    if (!(x.dims == y.dims)) throw DomainError("operator product: mismatched FockDims");
    return {x.dims, x.m * y.m};
}

struct StateVector {
    FockDims dims;
    Vector amp;

    StateVector() = default;
    StateVector(FockDims d, Vector a) : dims(d), amp(std::move(a)) {
        if (amp.size() != dims.size()) throw DomainError("StateVector: length does not match FockDims");
    }

    double norm() const { return amp.norm(); }
    cplx at(int nf, int nd) const { return amp(dims.index(nf, nd)); }
};

inline StateVector operator*(const OperatorMatrix& op, const StateVector& psi) {
    if (!(op.dims == psi.dims)) throw DomainError("operator action: mismatched FockDims");
    return {psi.dims, op.m * psi.amp};
}

inline StateVector basis_state(const FockDims& dims, int nf, int nd) {
    if (nf < 0 || nd < 0 || nf >= dims.n_field || nd >= dims.n_det)
        throw DomainError("basis_state: occupation outside the truncated space");
    Vector v = Vector::Zero(dims.size());
    v(dims.index(nf, nd)) = 1.0;
    return {dims, v};
}

struct DensityMatrix {
    FockDims dims;
    Matrix rho;
    double trace_deficit = 0.0;  // weight lost to truncation
};

// Weight carried by the top `levels` Fock levels of either mode. Used as the
// truncation-error estimate throughout.
inline double tail_weight(const FockDims& dims, const Vector& amp, int levels = 2) {
    double w = 0.0;
    for (int f = 0; f < dims.n_field; ++f)
        for (int d = 0; d < dims.n_det; ++d)
            if (f >= dims.n_field - levels || d >= dims.n_det - levels)
                w += std::norm(amp(dims.index(f, d)));
    return w;
}

inline double tail_weight(const StateVector& psi, int levels = 2) {
    return tail_weight(psi.dims, psi.amp, levels);
}

struct TruncationReport {
    double estimate = 0.0;
    bool exceeds = false;
    double threshold = 1e-8;
};

// ---------- single-mode building blocks ----------

inline Matrix lower_single(int n) {
    Matrix a = Matrix::Zero(n, n);
    for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(double(k));
    return a;
}

inline Matrix number_single(int n) {
    Matrix m = Matrix::Zero(n, n);
    for (int k = 0; k < n; ++k) m(k, k) = double(k);
    return m;
}

inline Matrix embed(const FockDims& dims, Mode mode, const Matrix& single) {
    const int nf = dims.n_field, nd = dims.n_det;
    Matrix out = Matrix::Zero(dims.size(), dims.size());
    if (mode == Mode::field) {
        for (int i = 0; i < nf; ++i)
            for (int j = 0; j < nf; ++j)
                if (single(i, j) != cplx(0.0))
                    for (int d = 0; d < nd; ++d) out(dims.index(i, d), dims.index(j, d)) = single(i, j);
    } else {
        for (int f = 0; f < nf; ++f)
            out.block(f * nd, f * nd, nd, nd) = single;
    }
    return out;
}

inline OperatorMatrix ladder(const FockDims& dims, Mode mode, Ladder kind) {
    Matrix a = lower_single(dims.cutoff(mode));
    if (kind == Ladder::raise) a.adjointInPlace();
    return {dims, embed(dims, mode, a)};
}

inline OperatorMatrix number_op(const FockDims& dims, Mode mode) {
    return {dims, embed(dims, mode, number_single(dims.cutoff(mode)))};
}

inline OperatorMatrix identity(const FockDims& dims) {
    return {dims, Matrix::Identity(dims.size(), dims.size())};
}

// ---------- exponentials ----------

inline bool is_skew_hermitian(const Matrix& m, double rel_tol = 1e-12) {
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m + m.adjoint()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

// exp(m). Skew-Hermitian generators go through a Hermitian eigendecomposition
// so the result is unitary to rounding; anything else uses scaling-and-squaring.
inline Matrix matrix_exponential(const Matrix& m) {
    if (m.rows() != m.cols()) throw DomainError("matrix_exponential: matrix must be square");
    if (!m.allFinite()) throw NumericalError("matrix_exponential: non-finite input");
    if (is_skew_hermitian(m)) {
        const Matrix h = kI * m;
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h + h.adjoint()));
        if (es.info() != Eigen::Success) throw NumericalError("matrix_exponential: eigensolver failed");
        Vector ph(es.eigenvalues().size());
        for (Eigen::Index k = 0; k < ph.size(); ++k) ph(k) = std::exp(-kI * es.eigenvalues()(k));
        return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    }
    const double nrm = m.cwiseAbs().rowwise().sum().maxCoeff();
    if (nrm > 700.0) throw NumericalError("matrix_exponential: norm too large, result would overflow");
    Matrix out = m.exp();
    if (!out.allFinite()) throw NumericalError("matrix_exponential: overflow");
    return out;
}

inline OperatorMatrix matrix_exponential(const OperatorMatrix& g) {
    return {g.dims, matrix_exponential(g.m)};
}

// Generator of S(t, theta) = exp(alpha* a^2dag - alpha a^2), alpha = (t/2) e^{i theta}.
// In the untruncated space S^dag a S = a cosh t + a^dag e^{-i theta} sinh t.
inline Matrix squeeze_generator_single(int n, double t, double theta) {
    const Matrix a = lower_single(n);
    const cplx alpha = 0.5 * t * std::exp(kI * theta);
    const Matrix a2 = a * a;
    return std::conj(alpha) * a2.adjoint() - alpha * a2;
}

// |t| above this is refused; the truncated exponential is meaningless there
// for any cutoff that fits in memory.
inline constexpr double kMaxSqueeze = 20.0;

inline Matrix squeeze_matrix_single(int n, double t, double theta) {
    if (!std::isfinite(t) || std::abs(t) > kMaxSqueeze)
        throw DomainError("squeeze: |t| must be finite and <= " + std::to_string(kMaxSqueeze));
    return matrix_exponential(squeeze_generator_single(n, t, theta));
}

// Largest weight pushed into the top two levels when the operator acts on the
// lower half of the space.
inline double single_mode_leakage(const Matrix& u) {
    const int n = int(u.rows());
    double worst = 0.0;
    for (int col = 0; col < std::max(1, n / 2); ++col) {
        double w = 0.0;
        for (int r = std::max(0, n - 2); r < n; ++r) w += std::norm(u(r, col));
        worst = std::max(worst, w);
    }
    return worst;
}

// Same estimate for a two-mode operator acting on states in the lower half of
// both modes.
inline double operator_leakage(const FockDims& dims, const Matrix& u) {
    double worst = 0.0;
    for (int f = 0; f < std::max(1, dims.n_field / 2); ++f)
        for (int d = 0; d < std::max(1, dims.n_det / 2); ++d) {
            const Vector col = u.col(dims.index(f, d));
            worst = std::max(worst, tail_weight(dims, col));
        }
    return worst;
}

inline OperatorMatrix squeeze_single(const FockDims& dims, Mode mode, double t, double theta,
                                     TruncationReport* report = nullptr) {
    const Matrix s = squeeze_matrix_single(dims.cutoff(mode), t, theta);
    if (report) {
        report->estimate = single_mode_leakage(s);
        report->exceeds = report->estimate > report->threshold;
    }
    return {dims, embed(dims, mode, s)};
}

// Generator s (e^{i phi} a^dag b - e^{-i phi} a b^dag) restricted to the block
// of total excitation number `total`. Index k of the block is n_f = lo + k.
struct NumberBlock {
    int total = 0;
    int lo = 0;  // smallest field occupation in the block
    int size = 0;
};

inline NumberBlock number_block(const FockDims& dims, int total) {
    NumberBlock b;
    b.total = total;
    b.lo = std::max(0, total - (dims.n_det - 1));
    const int hi = std::min(total, dims.n_field - 1);
    b.size = std::max(0, hi - b.lo + 1);
    return b;
}

inline Matrix displacement_block(const NumberBlock& b, double s, double phi) {
    Matrix g = Matrix::Zero(b.size, b.size);
    const cplx e = std::exp(kI * phi);
    for (int k = 0; k + 1 < b.size; ++k) {
        const int nf = b.lo + k;
        const int nd = b.total - nf;
        // a^dag b : (nf, nd) -> (nf+1, nd-1)
        const double amp = std::sqrt(double(nf + 1) * double(nd));
        g(k + 1, k) += s * e * amp;
        g(k, k + 1) -= s * std::conj(e) * amp;
    }
    return matrix_exponential(g);
}

// Two-mode beam-splitter exp(s (e^{i phi} a^dag b - e^{-i phi} a b^dag)).
// The truncated generator is block diagonal in total number, so the blocks are
// exponentiated separately without approximation.
inline OperatorMatrix displace_two_mode(const FockDims& dims, double s, double phi,
                                        TruncationReport* report = nullptr) {
    if (!std::isfinite(s) || !std::isfinite(phi)) throw DomainError("displace_two_mode: non-finite argument");
    Matrix out = Matrix::Zero(dims.size(), dims.size());
    const int max_total = dims.n_field + dims.n_det - 2;
    for (int total = 0; total <= max_total; ++total) {
        const NumberBlock b = number_block(dims, total);
        if (b.size == 0) continue;
        const Matrix e = displacement_block(b, s, phi);
        for (int i = 0; i < b.size; ++i)
            for (int j = 0; j < b.size; ++j)
                out(dims.index(b.lo + i, total - b.lo - i), dims.index(b.lo + j, total - b.lo - j)) = e(i, j);
    }
    if (report) {
        report->estimate = operator_leakage(dims, out);
        report->exceeds = report->estimate > report->threshold;
    }
    return {dims, out};
}

// R(varphi) = exp(-i varphi a^dag a), diagonal in the Fock basis.
inline OperatorMatrix rotate_field(const FockDims& dims, double varphi) {
    if (!std::isfinite(varphi)) throw DomainError("rotate_field: non-finite angle");
    Matrix out = Matrix::Zero(dims.size(), dims.size());
    for (int f = 0; f < dims.n_field; ++f) {
        const cplx ph = std::exp(-kI * (varphi * f));
        for (int d = 0; d < dims.n_det; ++d) out(dims.index(f, d), dims.index(f, d)) = ph;
    }
    return {dims, out};
}

// ---------- structured application on state vectors ----------

// (A (x) 1) v for a field operator A, with v viewed as an n_field x n_det array.
inline Vector apply_field(const FockDims& dims, const Matrix& a, const Vector& v) {
    Vector out(v.size());
    Eigen::Map<const RowMajorMatrix> in(v.data(), dims.n_field, dims.n_det);
    Eigen::Map<RowMajorMatrix> res(out.data(), dims.n_field, dims.n_det);
    res.noalias() = a * in;
    return out;
}

inline Vector apply_detector(const FockDims& dims, const Matrix& b, const Vector& v) {
    Vector out(v.size());
    Eigen::Map<const RowMajorMatrix> in(v.data(), dims.n_field, dims.n_det);
    Eigen::Map<RowMajorMatrix> res(out.data(), dims.n_field, dims.n_det);
    res.noalias() = in * b.transpose();
    return out;
}

inline Vector apply_rotation(const FockDims& dims, double varphi, const Vector& v) {
    Vector out(v.size());
    for (int f = 0; f < dims.n_field; ++f) {
        const cplx ph = std::exp(-kI * (varphi * f));
        for (int d = 0; d < dims.n_det; ++d) out(dims.index(f, d)) = ph * v(dims.index(f, d));
    }
    return out;
}

// Beam splitter stored as its number blocks.
class BlockDisplacement {
public:
    BlockDisplacement() = default;
    BlockDisplacement(const FockDims& dims, double s, double phi) : dims_(dims) {
        const int max_total = dims.n_field + dims.n_det - 2;
        for (int total = 0; total <= max_total; ++total) {
            NumberBlock b = number_block(dims, total);
            if (b.size == 0) continue;
            blocks_.push_back(b);
            mats_.push_back(displacement_block(b, s, phi));
        }
    }

    Vector apply(const Vector& v, bool adjoint = false) const {
        Vector out = Vector::Zero(v.size());
        Vector tmp;
        for (std::size_t k = 0; k < blocks_.size(); ++k) {
            const NumberBlock& b = blocks_[k];
            tmp.resize(b.size);
            for (int i = 0; i < b.size; ++i) tmp(i) = v(dims_.index(b.lo + i, b.total - b.lo - i));
            const Vector r = adjoint ? Vector(mats_[k].adjoint() * tmp) : Vector(mats_[k] * tmp);
            for (int i = 0; i < b.size; ++i) out(dims_.index(b.lo + i, b.total - b.lo - i)) = r(i);
        }
        return out;
    }

private:
    FockDims dims_;
    std::vector<NumberBlock> blocks_;
    std::vector<Matrix> mats_;
};

// Zero-pad a state into a larger space, or project it onto a smaller one.
inline Vector resize_state(const FockDims& from, const Vector& v, const FockDims& to) {
    Vector out = Vector::Zero(to.size());
    const int nf = std::min(from.n_field, to.n_field), nd = std::min(from.n_det, to.n_det);
    for (int f = 0; f < nf; ++f)
        for (int d = 0; d < nd; ++d) out(to.index(f, d)) = v(from.index(f, d));
    return out;
}

}  // namespace berrytherm::fock
