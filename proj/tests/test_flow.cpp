#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "normflow/flow.hpp"
#include "testing.hpp"

using namespace normflow;
using namespace normflow::testing;

namespace {

const FrequencyVector &w1()
{
    static const FrequencyVector f = FrequencyVector::for_degree({1.0}, 10);
    return f;
}

const FrequencyVector &w2()
{
    static const FrequencyVector f = FrequencyVector::for_degree({1.0, kSqrt2}, 10);
    return f;
}

template <class V>
Snapshot<V> snapshot_of(const TruncatedSeries &h)
{
    Snapshot<V> s;
    s.complete_through_degree = h.max_degree();
    for (const auto &[k, c] : h.terms()) {
        if constexpr (std::is_same_v<V, Complex>) {
            s.values.emplace(k, c);
        } else {
            s.values.emplace(k, ExpPolynomial::constant(c));
        }
    }
    return s;
}

TruncatedSeries normal_seed(int n, int M, std::initializer_list<std::pair<IntVector, double>> terms)
{
    TruncatedSeries h = TruncatedSeries::diamond(n, M);
    for (const auto &[l, c] : terms) {
        h.set(MultiIndex::diagonal(l), c);
    }
    return h;
}

/// Seed with only sigma_{k'} >= 0 terms (strip [0, +inf)), real normal part included.
TruncatedSeries one_sided_seed(std::mt19937_64 &rng, const FrequencyVector &freq, int n, int M)
{
    const TruncatedSeries full = random_real_seed(rng, n, M, 0.6);
    TruncatedSeries h = TruncatedSeries::diamond(n, M);
    for (const auto &[k, c] : full.terms()) {
        if (freq.sigma(k.prime()) >= 0) {
            h.set(k, c);
        }
    }
    return h;
}

} // namespace

// ---- right-hand sides ----

TEST(RhsV1, VanishesOnNormalKeysAndWithoutNormalTerms)
{
    std::mt19937_64 rng(31);
    const TruncatedSeries h = random_real_seed(rng, 2, 7);
    const auto snap = snapshot_of<Complex>(h);
    EXPECT_EQ(rhs_v1(MultiIndex::diagonal({1, 2}), snap, w2()), Complex{});
    const SignSplit parts = split_by_sign(h, w2());
    const auto no_normal = snapshot_of<Complex>(parts.hplus + parts.hminus);
    for (const MultiIndex &k : enumerate_indices(2, 3, 7)) {
        EXPECT_EQ(rhs_v1(k, no_normal, w2()), Complex{});
    }
}

TEST(RhsV1, MatchesBracketWithNormalPart)
{
    // z^3 + zbar^3 + kappa^2: v1 = -{xi H, H^0}
    TruncatedSeries h = cubic_fixture(7);
    h.set(MultiIndex({2}, {2}), 1.0);
    const TruncatedSeries h0 = split_by_sign(h, w1()).h0;
    const TruncatedSeries brute = -poisson_bracket(apply_xi(h, w1()), h0);
    const auto snap = snapshot_of<Complex>(h);
    EXPECT_EQ(brute.coeff(MultiIndex({4}, {1})), Complex(-6.0));
    for (const MultiIndex &k : enumerate_indices(1, 3, 7)) {
        EXPECT_NEAR(std::abs(rhs_v1(k, snap, w1()) - brute.coeff(k)), 0.0, 1e-14) << to_string(k);
    }
}

TEST(RhsV2, CubicFixturePairAtKappaSquared)
{
    const auto snap = snapshot_of<ExpPolynomial>(cubic_fixture(4));
    const ExpPolynomial v = rhs_v2bar(MultiIndex({2}, {2}), snap, w1());
    const ExpPolynomial expected = ExpPolynomial::term(0, Exponent::atom(w1(), {6}), -18.0);
    EXPECT_EQ(v, expected);
}

TEST(RhsV2, VanishesForOneSidedSeedsAndMissingDegrees)
{
    std::mt19937_64 rng(32);
    const TruncatedSeries h = one_sided_seed(rng, w2(), 2, 7);
    const auto snap = snapshot_of<ExpPolynomial>(h);
    for (const MultiIndex &k : enumerate_indices(2, 3, 7)) {
        EXPECT_TRUE(rhs_v2bar(k, snap, w2()).is_zero());
    }
    TruncatedSeries quartic = TruncatedSeries::diamond(1, 6);
    quartic.set(MultiIndex({4}, {0}), 1.0);
    quartic.set(MultiIndex({0}, {4}), 1.0);
    EXPECT_TRUE(rhs_v2bar(MultiIndex({2}, {2}), snapshot_of<ExpPolynomial>(quartic), w1()).is_zero());
}

TEST(RhsV1V2, SumEqualsFullBracketOnRandomSeeds)
{
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 5; ++trial) {
        const TruncatedSeries h = random_real_seed(rng, 2, 7, 0.4);
        const TruncatedSeries brute = -poisson_bracket(apply_xi(h, w2()), h);
        const auto snap = snapshot_of<Complex>(h);
        for (const MultiIndex &k : enumerate_indices(2, 3, 7)) {
            const Complex v = rhs_v1(k, snap, w2()) + rhs_v2(k, snap, w2());
            EXPECT_NEAR(std::abs(v - brute.coeff(k)), 0.0, 1e-13 * std::max(1.0, brute.max_abs())) << to_string(k);
        }
    }
}

TEST(Snapshot, LookupBeyondCompletedDegreeIsAnError)
{
    Snapshot<Complex> s;
    s.complete_through_degree = 3;
    EXPECT_THROW(s.find(MultiIndex({4}, {0})), StructureError);
    EXPECT_EQ(s.find(MultiIndex({3}, {0})), nullptr);
}

// ---- exact solution ----

TEST(SolveFlow, CubicFixtureTrajectory)
{
    const auto freq = FrequencyVector::for_degree({1.0}, 4);
    const FlowSolution sol = solve_flow(cubic_fixture(4), freq);
    const ExpPolynomial p = sol.trajectory(MultiIndex({2}, {2}));
    for (double d : {0.0, 0.3, 1.0, 4.0}) {
        EXPECT_NEAR(std::abs(ep_eval(p, d) - (-3.0 * (1.0 - std::exp(-6.0 * d)))), 0.0, 1e-14) << d;
    }
    const NormalSeries nf = normal_form(sol);
    EXPECT_NEAR(std::abs(nf.coeff({2}) + 3.0), 0.0, 1e-14);
    const TruncatedSeries rk = rk4_oracle(cubic_fixture(4), freq, 1.0, 1000);
    EXPECT_NEAR(std::abs(rk.coeff(MultiIndex({2}, {2})) + 3.0 * (1.0 - std::exp(-6.0))), 0.0, 1e-8);
}

TEST(SolveFlow, NormalSeedsAreFixedPoints)
{
    const TruncatedSeries seed = normal_seed(2, 8, {{{2, 0}, 0.5}, {{1, 1}, -0.25}, {{0, 3}, 2.0}});
    const FlowSolution sol = solve_flow(seed, w2());
    for (const auto &[k, p] : sol.trajectories()) {
        EXPECT_EQ(p, ExpPolynomial::constant(seed.coeff(k)));
    }
    EXPECT_EQ(sol.trajectories().size(), seed.size());
    EXPECT_EQ(sol.h_value_at(3.0), seed);
}

TEST(SolveFlow, ZeroSeedGivesZeroSolution)
{
    const FlowSolution sol = solve_flow(TruncatedSeries::diamond(2, 6), w2());
    EXPECT_TRUE(sol.trajectories().empty());
}

TEST(SolveFlow, PreconditionsAreChecked)
{
    EXPECT_THROW(solve_flow(cubic_fixture(6), FrequencyVector::for_degree({1.0}, 2)), OrderOverflow);
    EXPECT_THROW(solve_flow(cubic_fixture(6), w2()), DimensionMismatch);
    TruncatedSeries general(1, 6, 0);
    general.set(MultiIndex({3}, {0}), 1.0);
    EXPECT_NO_THROW(solve_flow(general.with_degrees(3, 6), w1()));
    general.set(MultiIndex({1}, {1}), 1.0);
    EXPECT_THROW(solve_flow(general, w1()), PreconditionError);
}

TEST(SolveFlow, ThreadedAndSerialSolutionsCoincide)
{
    std::mt19937_64 rng(34);
    const TruncatedSeries seed = random_real_seed(rng, 2, 7);
    FlowOptions serial;
    serial.threads = 1;
    FlowOptions threaded;
    threaded.threads = 3;
    const FlowSolution a = solve_flow(seed, w2(), serial);
    const FlowSolution b = solve_flow(seed, w2(), threaded);
    ASSERT_EQ(a.trajectories().size(), b.trajectories().size());
    for (const auto &[k, p] : a.trajectories()) {
        ExpPolynomial d = p - b.trajectory(k);
        d.purge(1e-13 * std::max(1.0, p.max_abs()));
        EXPECT_TRUE(d.is_zero()) << to_string(k);
    }
}

TEST(SolveFlow, NormalTrajectoriesHaveNoSecularTerms)
{
    std::mt19937_64 rng(35);
    const FlowSolution sol = solve_flow(random_real_seed(rng, 2, 8), w2());
    for (const auto &[k, p] : sol.trajectories()) {
        for (const auto &[key, c] : p.terms()) {
            if (key.exponent.is_zero() && is_zero(k.prime())) {
                EXPECT_EQ(key.s, 0) << to_string(k);
            }
            EXPECT_GE(key.exponent.nu(), 0.0);
        }
    }
}

// ---- RK4 oracle ----

TEST(Rk4Oracle, Examples)
{
    const TruncatedSeries seed = normal_seed(2, 6, {{{2, 0}, 1.0}, {{1, 1}, 0.5}});
    EXPECT_LE(max_abs_difference(rk4_oracle(seed, w2(), 2.0, 100), seed), 1e-12);
    EXPECT_EQ(rk4_oracle(cubic_fixture(4), w1(), 0.0, 10), cubic_fixture(4));
    const TruncatedSeries rk = rk4_oracle(cubic_fixture(4), w1(), 1.0, 1000);
    EXPECT_NEAR(rk.coeff(MultiIndex({2}, {2})).real(), -3.0 * (1.0 - std::exp(-6.0)), 1e-8);
    EXPECT_NEAR(rk.coeff(MultiIndex({2}, {2})).real(), -2.99256, 1e-5);
    EXPECT_THROW(rk4_oracle(cubic_fixture(4), w1(), -1.0, 10), PreconditionError);
}

TEST(Rk4Oracle, AdvanceIsIncremental)
{
    std::mt19937_64 rng(36);
    const TruncatedSeries seed = random_real_seed(rng, 2, 6);
    Rk4Oracle rk(seed, w2());
    rk.advance(0.25, 150);
    rk.advance(0.25, 150);
    EXPECT_DOUBLE_EQ(rk.time(), 0.5);
    EXPECT_LE(relative_difference(rk.state(), rk4_oracle(seed, w2(), 0.5, 300)), 1e-12);
}

TEST(Rk4Oracle, DefaultSteps)
{
    EXPECT_EQ(default_rk4_steps(w1(), 4, 1.0), 1000);
    EXPECT_EQ(default_rk4_steps(w1(), 4, 0.0), 1);
}

// ---- normal form ----

TEST(NormalForm, Examples)
{
    const NormalSeries nf = normal_form(solve_flow(cubic_fixture(4), FrequencyVector::for_degree({1.0}, 4)));
    ASSERT_EQ(nf.terms().size(), 1u);
    EXPECT_NEAR(std::abs(nf.coeff({2}) + 3.0), 0.0, 1e-14);

    const TruncatedSeries seed = normal_seed(2, 8, {{{2, 0}, 0.5}, {{1, 2}, -1.0}});
    EXPECT_EQ(embed(normal_form(solve_flow(seed, w2())), 8, 3), seed);

    std::mt19937_64 rng(37);
    const TruncatedSeries one_sided = one_sided_seed(rng, w2(), 2, 8);
    const TruncatedSeries h0 = split_by_sign(one_sided, w2()).h0;
    EXPECT_LE(max_abs_difference(embed(normal_form(solve_flow(one_sided, w2())), 8, 3), h0), 1e-15);
}

// ---- invariance theorems ----

TEST(StripInvariance, OneSidedSeedsStayOneSided)
{
    std::mt19937_64 rng(38);
    for (int trial = 0; trial < 5; ++trial) {
        const FlowSolution sol = solve_flow(one_sided_seed(rng, w2(), 2, 8), w2());
        EXPECT_TRUE(check_strip_invariance(sol, 0.0, INFINITY));
    }
    EXPECT_TRUE(check_strip_invariance(solve_flow(TruncatedSeries::diamond(2, 6), w2()), 0.0, INFINITY));
    // normal seeds sit in the degenerate strip [0, 0]
    EXPECT_TRUE(check_strip_invariance(solve_flow(normal_seed(1, 6, {{{2}, 1.0}}), w1()), 0.0, 0.0));
}

TEST(StripInvariance, TwoSidedSeedLeavesHalfStrip)
{
    const FlowSolution sol = solve_flow(cubic_fixture(6), w1());
    EXPECT_THROW(check_strip_invariance(sol, 0.0, INFINITY), PreconditionError);
    EXPECT_TRUE(check_strip_invariance(sol, -3.0, 3.0));
    EXPECT_THROW(check_strip_invariance(sol, 1.0, -1.0), PreconditionError);
}

TEST(BallInvariance, SeriesVanishingThroughOrderStayThatWay)
{
    std::mt19937_64 rng(39);
    const TruncatedSeries seed = random_real_seed(rng, 2, 8, 0.5, 1.0, 6);
    const FlowSolution sol = solve_flow(seed, w2());
    EXPECT_TRUE(check_ball_invariance(sol, 5));
    EXPECT_TRUE(check_ball_invariance(solve_flow(TruncatedSeries::diamond(2, 8), w2()), 5));
    EXPECT_THROW(check_ball_invariance(solve_flow(cubic_fixture(8), w1()), 5), PreconditionError);
}

TEST(BallInvariance, SupportBoundedByDegreeIsNotInvariant)
{
    // Reading the subspace as "coefficients vanish above degree 3" fails already for z^3 + zbar^3:
    // the flow creates kappa^2 at degree 4.
    const FlowSolution sol = solve_flow(cubic_fixture(4), FrequencyVector::for_degree({1.0}, 4));
    EXPECT_FALSE(sol.trajectory(MultiIndex({2}, {2})).is_zero());
}

TEST(Reality, RealSeedsStayReal)
{
    std::mt19937_64 rng(40);
    for (int trial = 0; trial < 5; ++trial) {
        const TruncatedSeries seed = random_real_seed(rng, 2, 8);
        const FlowSolution sol = solve_flow(seed, w2());
        for (double d : {0.1, 1.0, 5.0}) {
            const TruncatedSeries h = sol.h_value_at(d);
            EXPECT_TRUE(is_real(h, 1e-11 * std::max(1.0, h.max_abs()))) << d;
        }
    }
}

TEST(Reversibility, InvolutionInvariantSeedsStayInvariant)
{
    std::mt19937_64 rng(41);
    for (auto sign : {InvolutionSign::plus, InvolutionSign::minus}) {
        for (int trial = 0; trial < 3; ++trial) {
            TruncatedSeries raw = random_real_seed(rng, 2, 7);
            // symmetrize: (H + H o I) / 2 is I-invariant
            const TruncatedSeries seed = 0.5 * (raw + involution(raw, sign));
            ASSERT_LE(max_abs_difference(involution(seed, sign), seed), 1e-15);
            const FlowSolution sol = solve_flow(seed, w2());
            for (double d : {0.1, 1.0, 5.0}) {
                const TruncatedSeries h = sol.h_value_at(d);
                EXPECT_LE(max_abs_difference(involution(h, sign), h), 1e-11 * std::max(1.0, h.max_abs()));
            }
        }
    }
}

TEST(Decay, NonNormalCoefficientsDecay)
{
    // The slowest rate here is sqrt 2 - 1; with the delta^s prefactors it needs delta ~ 100 to
    // fall below 1e-6 of its seed value.
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 3; ++trial) {
        const TruncatedSeries seed = random_real_seed(rng, 2, 6);
        const FlowSolution sol = solve_flow(seed, w2());
        const TruncatedSeries h50 = sol.h_value_at(50.0);
        const TruncatedSeries h100 = sol.h_value_at(100.0);
        const TruncatedSeries h200 = sol.h_value_at(200.0);
        for (const auto &[k, c] : seed.terms()) {
            if (w2().rate(k.prime()) >= 0.3) {
                EXPECT_LT(std::abs(h100.coeff(k)), 1e-6 * std::abs(c)) << to_string(k);
                EXPECT_LE(std::abs(h100.coeff(k)), std::abs(h50.coeff(k))) << to_string(k);
                EXPECT_LE(std::abs(h200.coeff(k)), std::abs(h100.coeff(k))) << to_string(k);
            }
        }
    }
    const FlowSolution cubic = solve_flow(cubic_fixture(6), w1());
    const TruncatedSeries late = cubic.h_value_at(50.0);
    for (const auto &[k, c] : cubic.seed().terms()) {
        EXPECT_LT(std::abs(late.coeff(k)), 1e-6 * std::abs(c));
    }
}

// ---- transform ----

TEST(Transform, IdentityCases)
{
    const TruncatedSeries seed = normal_seed(1, 6, {{{2}, 1.0}});
    const CanonicalTransform a = normalizing_transform(solve_flow(seed, w1()), 1.0, 100);
    const CanonicalTransform id = identity_transform(1, 5);
    EXPECT_EQ(a.Z[0], id.Z[0]);
    EXPECT_EQ(a.Zbar[0], id.Zbar[0]);
    const CanonicalTransform b = normalizing_transform(solve_flow(cubic_fixture(6), w1()), 0.0, 100);
    EXPECT_EQ(b.Z[0], id.Z[0]);
    EXPECT_EQ(symplectic_defect(id, 4), 0.0);
}

TEST(Transform, ComposeWithIdentityIsTruncation)
{
    std::mt19937_64 rng(43);
    const TruncatedSeries h = random_real_seed(rng, 2, 6);
    EXPECT_EQ(compose(h, identity_transform(2, 5), 5), h.truncated(5));
    EXPECT_THROW(compose(h, identity_transform(2, 4), 5), PreconditionError);
}

TEST(Transform, ConjugatesToTheShiftedHamiltonian)
{
    const int M = 6;
    const TruncatedSeries seed = cubic_fixture(M);
    const FlowSolution sol = solve_flow(seed, w1());
    const double delta = 0.7;
    const CanonicalTransform t = normalizing_transform(sol, delta, 0);
    const TruncatedSeries h2 = quadratic_hamiltonian(w1(), M);
    const TruncatedSeries lhs = compose(h2 + sol.h_value_at(delta), t, M - 1);
    EXPECT_LE(max_abs_difference(lhs, (h2 + seed).truncated(M - 1)), 1e-9);
    EXPECT_LE(symplectic_defect(t, M - 2), 1e-9);
}
