// test_diagonalization.cpp — parameter algebra, inverse map, unitary chain and eigenstates

#include "berrytherm/diagonalization.hpp"
#include "berrytherm/oracle.hpp"

#include <gtest/gtest.h>

using namespace berrytherm;
using namespace berrytherm::diag;
using fock::FockDims;

namespace {

const DiagParams kExample{2e9, 2e9 * std::exp(-2.0), 0.3};

// Reference values from tests/oracles/reference_values.py (mpmath, 40 digits).
namespace ref {
constexpr double kOmega_a = 493193927.88321295;
constexpr double kOmega_b = 1957044277.7449019;
constexpr double kLambda = 406690002.89966136;
constexpr double kZ = 1818139808.5878978;
constexpr double kOmegaHat = 4129473545.0590085;
constexpr double kP = -0.68914406645740329;
constexpr double kS = 1.361209383371339;
}  // namespace ref

double rel(double x, double y) { return std::abs(x - y) / std::abs(y); }

double max_abs(const fock::Matrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(DeriveParams, SqueezeSplit) {
    const DerivedParams d = derive_params(kExample);
    EXPECT_NEAR(d.C, 1.0, 1e-15);
    EXPECT_NEAR(d.u, 0.7, 1e-15);
    EXPECT_EQ(d.phi, 0.0);
    EXPECT_EQ(d.theta_a, 0.0);
    EXPECT_NEAR(d.theta_b, -fock::kPi, 0.0);
}

TEST(DeriveParams, ExampleMatchesReference) {
    const DerivedParams d = derive_params(kExample);
    EXPECT_LT(rel(d.Omega_a, ref::kOmega_a), 1e-14);
    EXPECT_LT(rel(d.Omega_b, ref::kOmega_b), 1e-14);
    EXPECT_LT(rel(d.lambda, ref::kLambda), 1e-14);
    EXPECT_LT(rel(d.Z, ref::kZ), 1e-14);
    EXPECT_LT(rel(d.Omega_hat_b, ref::kOmegaHat), 1e-14);
    EXPECT_LT(rel(d.p, ref::kP), 1e-13);
    EXPECT_LT(rel(d.s, ref::kS), 1e-14);
    EXPECT_LT(std::abs(2.0 * d.Z / d.Omega_hat_b), 1.0);
    // tan^2 s = omega_a sinh 2u / (omega_b sinh 2v)
    EXPECT_LT(rel(std::pow(std::tan(d.s), 2),
                  kExample.omega_a * std::sinh(2 * d.u) / (kExample.omega_b * std::sinh(2 * kExample.v))),
              1e-14);
    EXPECT_NEAR(2.0 * d.p, std::atanh(-2.0 * d.Z / d.Omega_hat_b), 1e-15);
}

TEST(DeriveParams, G4VanishesAfterConstraints) {
    for (double v : {0.05, 0.3, 0.9})
        for (double lr : {2.0, 3.0}) {
            const DiagParams dp{1e9, 1e9 * std::exp(-lr), v};
            const DerivedParams d = derive_params(dp);
            EXPECT_LT(std::abs(d.g.g4) / std::abs(d.g.g1), 1e-12);
            // the remaining coefficients reproduce the target Hamiltonian
            EXPECT_LT(std::abs(d.g.g3 - d.lambda_hat) / d.lambda_hat, 1e-12);
            EXPECT_LT(std::abs(d.g.g6 - d.lambda_hat) / d.lambda_hat, 1e-12);
            EXPECT_LT(std::abs(d.g.g5 - d.Z) / d.Omega_hat_b, 1e-12);
        }
}

TEST(DeriveParams, GeneralG4IsNotZeroOffConstraint) {
    // same formulas with the beam-splitter angle moved away from its constrained value
    const DerivedParams d = derive_params(kExample);
    const GCoefficients g = g_coefficients(kExample.omega_a, kExample.omega_b, d.u, kExample.v, d.s + 0.1, d.theta_a,
                                           d.theta_b, d.phi);
    EXPECT_GT(std::abs(g.g4) / std::abs(g.g1), 1e-3);
}

TEST(DeriveParams, ConstraintViolationIsRejected) {
    try {
        derive_params(DiagParams{2e9, 2e9 * std::exp(-0.5), 0.3});
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_NE(std::string(e.what()).find("omega_a/omega_b > exp(2v)"), std::string::npos);
    }
    EXPECT_THROW(derive_params(DiagParams{2e9, 2e9 * std::exp(-0.6), 0.3}), DomainError);
    EXPECT_THROW(derive_params(DiagParams{2e9, 2e9, 0.1}), DomainError);
    EXPECT_THROW(derive_params(DiagParams{2e9, 1e9, 0.0}), DomainError);
    EXPECT_THROW(derive_params(DiagParams{-2e9, 1e9, 0.1}), DomainError);
}

TEST(ForwardMap, WeakSqueezeDecouples) {
    double prev = std::numeric_limits<double>::infinity();
    for (double v : {1e-2, 1e-4, 1e-6, 1e-8}) {
        const DerivedParams d = derive_params(DiagParams{2e9, 2e9 * std::exp(-2.0), v});
        EXPECT_LT(d.lambda_hat, prev);
        EXPECT_LT(d.lambda, prev);
        prev = d.lambda;
    }
    EXPECT_LT(prev / 2e9, 1e-3);
}

TEST(ForwardMap, PositiveComponents) {
    for (double v : {0.01, 0.2, 0.45})
        for (double lr : {1.0, 2.0, 3.0})
            for (double oa : {1e6, 2e9}) {
                const DiagParams dp{oa, oa * std::exp(-lr), v};
                if (lr <= 2.0 * v) continue;
                const PhysicalParams pp = forward_map(dp);
                EXPECT_GT(pp.Omega_a, 0.0);
                EXPECT_GT(pp.Omega_b, 0.0);
                EXPECT_GT(pp.lambda, 0.0);
            }
}

TEST(ForwardMap, SpectrumMatchesNumericalDiagonalization) {
    // omega_a and omega_b are the normal-mode frequencies of H
    const PhysicalParams pp = forward_map(kExample);
    const FockDims dims(40, 40);
    const fock::OperatorMatrix H = build_hamiltonian(pp, 0.0, dims);
    Eigen::SelfAdjointEigenSolver<fock::Matrix> es(H.m, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd w = es.eigenvalues();
    EXPECT_LT(std::abs(w(0) - eigenvalue(kExample, 0, 0)) / pp.Omega_a, 1e-9);
    EXPECT_LT(std::abs(w(1) - eigenvalue(kExample, 0, 1)) / pp.Omega_a, 1e-9);
}

TEST(InverseMap, RoundTripFig5Scenario3) {
    const PhysicalParams pp{2e9, 2e9, 250.0 * 2.0 * fock::kPi};
    const InverseResult r = inverse_map(pp);
    EXPECT_FALSE(r.degenerate);
    EXPECT_LT(relative_residual(forward_map(r.params), pp), 1e-10);
}

TEST(InverseMap, Fig5Scenario1Converges) {
    const PhysicalParams pp{2e9, 2e9, 2.0 * fock::kPi * 34.0};
    const InverseResult r = inverse_map(pp);
    EXPECT_LT(r.residual, 1e-10);
    EXPECT_LT(relative_residual(forward_map(r.params), pp), 1e-10);
    EXPECT_NO_THROW(validate(r.params));
}

TEST(InverseMap, ZeroCouplingBoundary) {
    const InverseResult r = inverse_map(PhysicalParams{2e9, 2e9, 0.0});
    EXPECT_TRUE(r.degenerate);
    EXPECT_EQ(r.params.omega_a, 2e9);
    EXPECT_EQ(r.params.omega_b, 2e9);
    EXPECT_EQ(r.params.v, 0.0);
    const InverseResult r2 = inverse_map(PhysicalParams{1e9, 3e9, 0.0});
    EXPECT_TRUE(r2.degenerate);
    EXPECT_EQ(r2.params.v, 0.0);
}

TEST(InverseMap, SeedsAgree) {
    const PhysicalParams pp{1e9, 1e9 + 3000.0, 2000.0};
    const InverseResult a = inverse_map(pp);
    InverseOptions opt;
    DiagParams seed = a.params;
    seed.v *= 1.05;
    seed.omega_a *= 1.0 + 2e-7;
    opt.seed = seed;
    const InverseResult b = inverse_map(pp, opt);
    EXPECT_LT(rel(b.params.omega_a, a.params.omega_a), 1e-9);
    EXPECT_LT(rel(b.params.omega_b, a.params.omega_b), 1e-9);
    EXPECT_LT(rel(b.params.v, a.params.v), 1e-9);
}

TEST(InverseMap, GridRoundTrips) {
    for (double oa : {1e6, 1e8, 2e9})
        for (double C : {1e-5, 1e-4, 1e-3})
            for (double f : {0.2, 0.35, 0.8}) {
                const DiagParams dp{oa, oa * std::exp(-2.0 * C), f * C};
                const PhysicalParams pp = forward_map(dp);
                const InverseResult inv = inverse_map(pp);
                EXPECT_LT(rel(inv.params.omega_a, dp.omega_a), 1e-10);
                EXPECT_LT(rel(inv.params.omega_b, dp.omega_b), 1e-10);
                EXPECT_LT(rel(inv.params.v, dp.v), 1e-10) << oa << " " << C << " " << f;
                EXPECT_LT(relative_residual(forward_map(inv.params), pp), 1e-10);
            }
}

TEST(InverseMap, Preconditions) {
    EXPECT_THROW(inverse_map(PhysicalParams{1e6, 1e6, 2e4}), DomainError);
    EXPECT_THROW(inverse_map(PhysicalParams{1e6, 1e6, -1.0}), DomainError);
    EXPECT_THROW(inverse_map(PhysicalParams{0.0, 1e6, 1.0}), DomainError);
    InverseOptions bad;
    bad.seed = DiagParams{1e9, 1e9, 0.1};
    EXPECT_THROW(inverse_map(PhysicalParams{1e9, 1e9, 100.0}, bad), DomainError);
}

TEST(InverseMap, NoConvergenceCarriesResidual) {
    InverseOptions opt;
    opt.max_iterations = 0;
    opt.seed = DiagParams{1e9, 0.9e9, 0.01};
    try {
        inverse_map(PhysicalParams{1e9, 1e9 + 100.0, 100.0}, opt);
        FAIL() << "expected ConvergenceError";
    } catch (const ConvergenceError& e) {
        EXPECT_GT(e.residual, 1e-3);
        EXPECT_EQ(e.iterations, 0);
    }
}

TEST(BuildUnitary, ZeroGeneratorsGiveIdentity) {
    const FockDims dims(8, 8);
    const fock::Matrix U = fock::squeeze_single(dims, fock::Mode::field, 0.0, 0.0).m *
                           fock::squeeze_single(dims, fock::Mode::detector, 0.0, -fock::kPi).m *
                           fock::displace_two_mode(dims, 0.0, 0.0).m *
                           fock::squeeze_single(dims, fock::Mode::detector, 0.0, 0.0).m * fock::rotate_field(dims, 0.0).m;
    EXPECT_LT(max_abs(U - fock::identity(dims).m), 1e-15);
}

TEST(BuildUnitary, ChainOrderAndUnitarity) {
    const FockDims dims(20, 20);
    const DerivedParams d = derive_params(kExample);
    const double varphi = 0.4;
    const fock::Matrix U = build_unitary(kExample, varphi, dims).m;
    EXPECT_LT(max_abs(U.adjoint() * U - fock::identity(dims).m), 1e-10);
    const fock::Matrix manual = fock::squeeze_single(dims, fock::Mode::field, d.u, d.theta_a).m *
                                fock::squeeze_single(dims, fock::Mode::detector, kExample.v, d.theta_b).m *
                                fock::displace_two_mode(dims, d.s, d.phi).m *
                                fock::squeeze_single(dims, fock::Mode::detector, d.p, 0.0).m *
                                fock::rotate_field(dims, varphi).m;
    EXPECT_LT(max_abs(U - manual), 1e-12);
}

TEST(BuildUnitary, VacuumOverlapAtWeakCoupling) {
    const PhysicalParams pp{2e9, 2e9 + 200.0, 200.0};  // lambda / Omega_a = 1e-7
    const DiagParams dp = inverse_map(pp).params;
    const fock::Matrix U = build_unitary(dp, 0.0, FockDims(8, 8)).m;
    EXPECT_LT(std::abs(1.0 - U(0, 0)), 1e-6);
}

TEST(BuildHamiltonian, DecoupledIsDiagonal) {
    const FockDims dims(5, 4);
    const fock::Matrix H = build_hamiltonian(PhysicalParams{3.0, 7.0, 0.0}, 1.2, dims).m;
    for (int i = 0; i < dims.size(); ++i)
        for (int j = 0; j < dims.size(); ++j) {
            auto [f, d] = dims.occupation(i);
            const fock::cplx want = i == j ? fock::cplx(3.0 * f + 7.0 * d) : fock::cplx(0.0);
            EXPECT_EQ(H(i, j), want);
        }
}

TEST(BuildHamiltonian, HermitianAndRotationCovariant) {
    const FockDims dims(10, 10);
    const PhysicalParams pp = forward_map(kExample);
    const fock::Matrix H0 = build_hamiltonian(pp, 0.0, dims).m;
    for (double phi : {0.3, 2.0, -1.1}) {
        const fock::Matrix H = build_hamiltonian(pp, phi, dims).m;
        EXPECT_LT(max_abs(H - H.adjoint()) / max_abs(H), 1e-14);
        const fock::Matrix R = fock::rotate_field(dims, phi).m;
        // the phase enters as a e^{-i phi}, so H(phi) = R^dag H(0) R
        EXPECT_LT(max_abs(H - R.adjoint() * H0 * R) / max_abs(H), 1e-12);
    }
}

TEST(Eigenstate, WeakCouplingIsNearBasisState) {
    const PhysicalParams pp{2e9, 2e9 + 200.0, 200.0};
    const DiagParams dp = inverse_map(pp).params;
    const FockDims dims(8, 8);
    for (int nf = 0; nf < 2; ++nf)
        for (int nd = 0; nd < 2; ++nd) {
            const fock::StateVector psi = eigenstate(dp, nf, nd, 0.0, dims);
            EXPECT_NEAR(psi.norm(), 1.0, 1e-12);
            // the resonant pair is mixed at any coupling, so only |00> stays pure
            if (nf == 0 && nd == 0) {
                EXPECT_GT(std::abs(psi.at(0, 0)), 1.0 - 1e-12);
            }
        }
}

TEST(Eigenstate, ResidualAgainstTruncatedHamiltonian) {
    const FockDims dims(30, 30);
    const PhysicalParams pp = forward_map(kExample);
    const fock::OperatorMatrix H = build_hamiltonian(pp, 0.0, dims);
    for (auto [nf, nd] : {std::pair{0, 0}, {1, 0}, {0, 1}, {1, 1}}) {
        EigenstateInfo info;
        const fock::StateVector psi = eigenstate(kExample, nf, nd, 0.0, dims, &info);
        const fock::Vector hp = H.m * psi.amp;
        const double e = psi.amp.dot(hp).real();
        EXPECT_LT((hp - e * psi.amp).norm() / pp.Omega_a, 1e-6) << nf << "," << nd;
        EXPECT_LT(std::abs(e - eigenvalue(kExample, nf, nd)) / pp.Omega_a, 1e-6);
        EXPECT_GT(info.working.n_field, dims.n_field);
    }
}

TEST(Eigenstate, OverlapWithNumericalEigenvector) {
    const FockDims dims(30, 30);
    const fock::OperatorMatrix H = build_hamiltonian(forward_map(kExample), 0.0, dims);
    for (auto [nf, nd] : {std::pair{0, 0}, {1, 0}, {0, 1}}) {
        const fock::StateVector psi = eigenstate(kExample, nf, nd, 0.0, dims);
        const oracle::EigenPair ep = oracle::numeric_eigenpair(H, psi);
        EXPECT_GT(std::abs(ep.vector.amp.dot(psi.amp)), 1.0 - 1e-8) << nf << "," << nd;
    }
}

TEST(Eigenstate, OccupationNearCutoffIsRefused) {
    EXPECT_THROW(eigenstate(kExample, 5, 0, 0.0, FockDims(10, 10)), TruncationError);
    EXPECT_THROW(eigenstate(kExample, 0, 3, 0.0, FockDims(10, 6)), TruncationError);
    EXPECT_THROW(eigenstate(kExample, -1, 0, 0.0, FockDims(10, 6)), DomainError);
}

TEST(Trajectory, CycleDuration) {
    EXPECT_NEAR(cycle_duration(2e9), fock::kPi * 1e-9, 1e-24);
    EXPECT_THROW(cycle_duration(0.0), DomainError);
    EXPECT_DOUBLE_EQ(inertial_phase(2.0, 3.0, 5.0, 0.5), 3.5);
    EXPECT_DOUBLE_EQ(rindler_phase(4.0, 0.25), -1.0);
}
