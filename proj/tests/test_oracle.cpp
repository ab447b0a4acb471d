// test_oracle.cpp — numerical eigenpairs, discrete loops, partial sums and Schrodinger evolution

#include "berrytherm/oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace berrytherm;
using namespace berrytherm::oracle;
using diag::DiagParams;
using diag::PhysicalParams;
using fock::FockDims;

namespace {

const DiagParams kExample{2e9, 2e9 * std::exp(-2.0), 0.3};

// Reference values from tests/oracles/reference_values.py.
namespace ref {
// Pancharatnam loops over numpy eigh eigenvectors, 128/256 points combined
constexpr double kLoop00 = 0.71394608089145;
constexpr double kLoop01 = 1.556832879298593;
constexpr double kLoopTol = 2e-6;
// vacuum excitation over one cycle, Omega_b = Omega_a + lambda, lambda = 2 pi 1200,
// probability that the detector is excited, DOP853 in the interaction picture
// on a 5 x 4 Fock window
constexpr double kMaxGHz = 2.2739225627538684e-10;
constexpr double kMaxMHz = 2.239297951704408e-4;
constexpr double kQuarterMHz = 1.133097293896273e-4;
constexpr double kHalfMHz = 2.238983969128701e-4;
}  // namespace ref

PhysicalParams preset(double gap) {
    const double lam = 2.0 * kPi * 1200.0;
    return {gap, gap + lam, lam};
}

EvolutionSpec one_cycle(double gap, double cycles = 1.0) {
    EvolutionSpec s;
    s.duration = cycles * diag::cycle_duration(gap);
    s.step = 0.005 * diag::cycle_duration(gap);
    return s;
}

}  // namespace

TEST(NumericEigenpair, UncoupledTarget) {
    const FockDims dims(6, 5);
    const PhysicalParams pp{3.0, 2.0, 0.0};
    const EigenPair p = numeric_eigenpair(diag::build_hamiltonian(pp, 0.0, dims), fock::basis_state(dims, 1, 0));
    EXPECT_NEAR(p.value, 3.0, 1e-13);
    EXPECT_NEAR(p.overlap, 1.0, 1e-13);
    EXPECT_LT(p.residual, 1e-13);
}

TEST(NumericEigenpair, MatchesClosedFormEnergy) {
    const FockDims dims(26, 26);
    const PhysicalParams pp = diag::forward_map(kExample);
    const auto H = diag::build_hamiltonian(pp, 0.4, dims);
    for (auto [nf, nd] : {std::pair{0, 0}, {1, 0}, {0, 1}}) {
        const EigenPair p = numeric_eigenpair(H, diag::eigenstate(kExample, nf, nd, 0.4, dims));
        EXPECT_NEAR(p.value, diag::eigenvalue(kExample, nf, nd), 1e-9 * pp.Omega_b);
        EXPECT_GT(p.overlap, 1.0 - 1e-8);
    }
}

TEST(NumericEigenpair, AmbiguousAndInvalidTargets) {
    const FockDims dims(4, 4);
    const auto H = diag::build_hamiltonian(PhysicalParams{3.0, 2.0, 0.0}, 0.0, dims);
    fock::StateVector mix = fock::basis_state(dims, 1, 0);
    mix.amp += fock::basis_state(dims, 0, 1).amp;
    EXPECT_THROW(numeric_eigenpair(H, mix), AmbiguityError);
    fock::StateVector zero = fock::basis_state(dims, 0, 0);
    zero.amp.setZero();
    EXPECT_THROW(numeric_eigenpair(H, zero), DomainError);
    fock::OperatorMatrix skew = H;
    skew.m(0, 1) = cplx(0.0, 1.0);
    EXPECT_THROW(numeric_eigenpair(skew, fock::basis_state(dims, 0, 0)), DomainError);
    EXPECT_THROW(numeric_eigenpair(H, fock::basis_state(FockDims(3, 4), 0, 0)), DomainError);
}

TEST(Pancharatnam, InvariantUnderPointwisePhases) {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ph(-kPi, kPi);
    std::vector<Vector> loop(40);
    for (auto& x : loop) {
        x.resize(6);
        for (auto& c : x) c = cplx(nd(rng), nd(rng));
        x.normalize();
    }
    const double a = pancharatnam_phase(loop);
    for (auto& x : loop) x *= std::exp(cplx(0.0, ph(rng)));
    EXPECT_LT(geom::phase_distance(a, pancharatnam_phase(loop)), 1e-12);
}

TEST(DiscreteLoop, MatchesClosedForm) {
    for (auto [nf, nd] : {std::pair{0, 0}, {1, 0}, {0, 1}}) {
        const LoopResult r = discrete_berry_loop(kExample, nf, nd);
        const double closed = geom::eigen_berry_phase(kExample, nf, nd).value;
        EXPECT_LT(geom::phase_distance(r.phase.value, closed), 1e-9) << nf << nd;
        EXPECT_EQ(r.phase.method, geom::Method::oracle);
        EXPECT_LT(r.error_estimate, 1e-4);
        EXPECT_LT(r.max_residual, 1e-10);
        EXPECT_GT(r.min_overlap, 0.99);
        EXPECT_LT(r.truncation_estimate, 1e-8);
        EXPECT_NEAR(r.eigenvalue, diag::eigenvalue(kExample, nf, nd), 1e-9 * kExample.omega_a);
    }
}

TEST(DiscreteLoop, AgreesWithIndependentLoop) {
    EXPECT_LT(geom::phase_distance(discrete_berry_loop(kExample, 0, 0).phase.value, ref::kLoop00), ref::kLoopTol);
    EXPECT_LT(geom::phase_distance(discrete_berry_loop(kExample, 0, 1).phase.value, ref::kLoop01), ref::kLoopTol);
}

TEST(DiscreteLoop, WeakSqueezeIsNearlyPhaseFree) {
    const DiagParams dp{1e9, 1e9 * std::exp(-2.0), 1e-6};
    const LoopResult r = discrete_berry_loop(dp, 1, 0, LoopSpec{256, Refinement::richardson, FockDims(12, 12)});
    EXPECT_LT(std::abs(r.phase.value), 1e-5);
    EXPECT_LT(geom::phase_distance(r.phase.value, geom::eigen_berry_phase(dp, 1, 0).value), 1e-9);
}

TEST(DiscreteLoop, SolversAndRefinementsAgree) {
    LoopSpec s{256, Refinement::single, FockDims(24, 24)};
    s.truncation_threshold = 1e-6;
    const double cov = discrete_berry_loop(kExample, 1, 0, s).phase.value;
    s.solver = LoopSolver::refactor;
    const double lu = discrete_berry_loop(kExample, 1, 0, s).phase.value;
    EXPECT_LT(geom::phase_distance(cov, lu), 1e-9);
    const double closed = geom::eigen_berry_phase(kExample, 1, 0).value;
    EXPECT_LT(geom::phase_distance(cov, closed), 1e-3);
    s.refinement = Refinement::richardson;
    EXPECT_LT(geom::phase_distance(discrete_berry_loop(kExample, 1, 0, s).phase.value, closed),
              geom::phase_distance(cov, closed));
}

TEST(DiscreteLoop, Preconditions) {
    EXPECT_THROW(discrete_berry_loop(kExample, 0, 0, LoopSpec{15}), DomainError);
    EXPECT_THROW(discrete_berry_loop(kExample, 15, 0), TruncationError);
    EXPECT_THROW(discrete_berry_loop(kExample, 0, 0, LoopSpec{64, Refinement::single, FockDims(6, 6)}),
                 TruncationError);
    EXPECT_THROW(discrete_berry_loop(DiagParams{1e9, 2e9, 0.1}, 0, 0), DomainError);
}

TEST(DiscreteLoop, CertifiedLoopEnlargesCutoff) {
    const LoopResult r = certified_berry_loop(kExample, 1, 0, LoopSpec{64, Refinement::richardson, FockDims(10, 10)});
    EXPECT_GT(r.dims.n_field, 10);
    EXPECT_LT(r.truncation_estimate, 1e-8);
}

TEST(PartialSum, GridMatchesSeriesReference) {
    const double G[3] = {0.1, 0.25, 0.7};
    const double T2[3] = {0.1, 0.5, 0.9};
    const double want[3][3] = {{0.36386540847655629, 0.75845782665894883, 1.3960485620156366},
                               {0.39966865249116203, 0.76364760900080612, 1.0328151017865066},
                               {0.20800557611908727, -0.090712505344051128, -0.29009807203723117}};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const auto r = thermo::squeeze_from_ratio(-std::log(T2[j]), thermo::SqueezeOrigin::thermal);
            const int n = thermo::ThermalStateSpec::required_n_max(r);
            const PhaseResult p = mixed_phase_partial_sum(G[i], 0.3, r, n);
            EXPECT_NEAR(p.value, want[i][j], 1e-11) << i << j;
            EXPECT_LT(geom::phase_distance(p.value, geom::mixed_thermal_phase(G[i], 0.3, r).value), 1e-11);
        }
}

TEST(PartialSum, EigenstatePhasesMatchClosedForm) {
    const auto r = thermo::squeeze_from_ratio(1.2, thermo::SqueezeOrigin::thermal);
    const int n = thermo::ThermalStateSpec::required_n_max(r);
    EXPECT_LT(geom::phase_distance(mixed_phase_partial_sum(kExample, r, n).value,
                                   geom::mixed_thermal_phase(kExample, r).value),
              1e-11);
}

TEST(PartialSum, RefusesShortSums) {
    const auto r = thermo::squeeze_from_ratio(0.5, thermo::SqueezeOrigin::thermal);
    try {
        mixed_phase_partial_sum(0.3, 0.0, r, 10);
        FAIL();
    } catch (const TruncationError& e) {
        EXPECT_NE(std::string(e.what()).find("need n_max"), std::string::npos);
    }
    EXPECT_THROW(mixed_phase_partial_sum(0.3, 0.0, r, -1), DomainError);
}

TEST(Evolution, UncoupledStaysInVacuum) {
    const EvolutionSpec s = one_cycle(1e9, 3.0);
    const ExcitationTrace tr = excitation_trace(PhysicalParams{1e9, 1e9 + 100.0, 0.0}, s);
    ASSERT_EQ(tr.cycle_end.size(), 3u);
    for (double p : tr.probability) EXPECT_EQ(p, 0.0);
}

TEST(Evolution, GigahertzVacuumMatchesReference) {
    const ExcitationTrace tr = excitation_trace(preset(1e9), one_cycle(1e9));
    ASSERT_EQ(tr.cycle_max.size(), 1u);
    EXPECT_NEAR(tr.cycle_max[0], ref::kMaxGHz, 2e-3 * ref::kMaxGHz);
    EXPECT_LT(tr.cycle_end[0], 1e-15);
    EXPECT_EQ(tr.route, Route::fock);
}

TEST(Evolution, MegahertzVacuumMatchesReference) {
    const ExcitationTrace tr = excitation_trace(preset(1e6), one_cycle(1e6));
    ASSERT_EQ(tr.probability.size(), 201u);
    EXPECT_NEAR(tr.probability[50], ref::kQuarterMHz, 1e-6 * ref::kQuarterMHz);
    EXPECT_NEAR(tr.probability[100], ref::kHalfMHz, 1e-6 * ref::kHalfMHz);
    EXPECT_NEAR(tr.cycle_max[0], ref::kMaxMHz, 2e-3 * ref::kMaxMHz);
}

TEST(Evolution, PicturesAgree) {
    EvolutionSpec s = one_cycle(1e6);
    const ExcitationTrace a = excitation_trace(preset(1e6), s);
    s.picture = Picture::mixed;
    const ExcitationTrace b = excitation_trace(preset(1e6), s);
    for (std::size_t k = 0; k < a.probability.size(); ++k) EXPECT_NEAR(a.probability[k], b.probability[k], 1e-12);
}

TEST(Evolution, ThermalRoutesAgree) {
    EvolutionSpec s = one_cycle(1e6);
    s.field_temperature = 2e-5;
    s.route = Route::fock;
    const ExcitationTrace f = excitation_trace(preset(1e6), s);
    s.route = Route::quadrature;
    const ExcitationTrace q = excitation_trace(preset(1e6), s);
    EXPECT_GT(f.trajectories, 1);
    EXPECT_LT(q.tail_bound, 1e-9);
    for (std::size_t k = 0; k < f.probability.size(); ++k)
        EXPECT_NEAR(f.probability[k], q.probability[k], 1e-8 + 2.0 * f.tail_bound);
}

TEST(Evolution, NormDriftOverTenCycles) {
    const ExcitationTrace tr = excitation_trace(preset(1e6), one_cycle(1e6, 10.0));
    EXPECT_EQ(tr.cycle_end.size(), 10u);
    EXPECT_LT(tr.max_norm_drift, 1e-10);
}

TEST(Evolution, SpecValidation) {
    EvolutionSpec s = one_cycle(1e9);
    s.step = 0.02 * diag::cycle_duration(1e9);
    EXPECT_THROW(excitation_trace(preset(1e9), s), DomainError);
    s = one_cycle(1e9);
    s.duration = 0.0;
    EXPECT_THROW(excitation_trace(preset(1e9), s), DomainError);
    s = one_cycle(1e9);
    s.field_temperature = -1.0;
    EXPECT_THROW(excitation_trace(preset(1e9), s), DomainError);
    s = one_cycle(1e6);
    s.field_temperature = 1e-3;
    s.route = Route::quadrature;
    s.picture = Picture::mixed;
    EXPECT_THROW(excitation_trace(preset(1e6), s), DomainError);
}

TEST(Evolution, SchrodingerProbabilityAtCycleEnd) {
    const double p = schrodinger_excitation_probability(preset(1e6), 1.0, EvolutionSpec{});
    EXPECT_EQ(p, excitation_trace(preset(1e6), one_cycle(1e6)).cycle_end[0]);
}
