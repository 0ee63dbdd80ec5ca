#include <gtest/gtest.h>

#include <cmath>

#include <nkcomm/trait_stats.hpp>

#include "oracles.hpp"

using namespace nkcomm;

TEST(Accumulate, SingleObservation)
{
    TraitMoments acc(3);
    const std::vector<double> v{0.25, 0.5, 2.0};
    acc.accumulate(v);
    EXPECT_EQ(acc.count(), 1U);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_EQ(acc.sum(i), v[i]);
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(acc.co(i, j), v[i] * v[j]);
    }
}

TEST(Accumulate, SameVectorTwiceDoubles)
{
    TraitMoments once(2), twice(2);
    const std::vector<double> v{0.3, 0.9};
    once.accumulate(v);
    twice.accumulate(v);
    twice.accumulate(v);
    EXPECT_EQ(twice.count(), 2U);
    for (std::size_t i = 0; i < 2; ++i) {
        EXPECT_EQ(twice.sum(i), 2 * once.sum(i));
        for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(twice.co(i, j), 2 * once.co(i, j));
    }
}

TEST(Accumulate, HandArithmetic)
{
    TraitMoments acc(2);
    acc.accumulate(std::vector<double>{1, 2});
    acc.accumulate(std::vector<double>{3, 4});
    EXPECT_EQ(acc.sum(0), 4);
    EXPECT_EQ(acc.sum(1), 6);
    EXPECT_EQ(acc.co(0, 0), 10);
    EXPECT_EQ(acc.co(0, 1), 14);
    EXPECT_EQ(acc.co(1, 0), 14);
    EXPECT_EQ(acc.co(1, 1), 20);
}

TEST(Accumulate, LengthMismatch)
{
    TraitMoments acc(3);
    EXPECT_THROW(acc.accumulate(std::vector<double>{1, 2}), ParameterError);
    EXPECT_THROW(acc.merge(TraitMoments(2)), ParameterError);
}

TEST(Merge, IdentityAndCommutativity)
{
    SplitMixStream rng(5);
    TraitMoments a(4), b(4);
    std::vector<double> v(4);
    for (int t = 0; t < 37; ++t) {
        for (auto& x : v) x = unit_from_bits(rng.next());
        (t % 3 ? a : b).accumulate(v);
    }
    EXPECT_EQ(merge(a, TraitMoments(4)), a);
    EXPECT_EQ(merge(a, b), merge(b, a));
}

// Property: splitting a stream anywhere and merging the halves matches one
// sequential pass.
TEST(Merge, SplitStreamMatchesSequential)
{
    SplitMixStream rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 1 + rng.below(6);
        const std::size_t len = 2 + rng.below(200);
        const std::size_t cut = rng.below(len + 1);
        TraitMoments whole(n), left(n), right(n);
        std::vector<double> v(n);
        for (std::size_t t = 0; t < len; ++t) {
            for (auto& x : v) x = 10.0 * unit_from_bits(rng.next()) - 3.0;
            whole.accumulate(v);
            (t < cut ? left : right).accumulate(v);
        }
        const auto merged = merge(left, right);
        ASSERT_EQ(merged.count(), whole.count());
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_NEAR(merged.sum(i), whole.sum(i), 1e-9 * std::max(1.0, std::abs(whole.sum(i))));
            for (std::size_t j = 0; j < n; ++j)
                EXPECT_NEAR(merged.co(i, j), whole.co(i, j), 1e-9 * std::max(1.0, std::abs(whole.co(i, j))));
        }
    }
}

TEST(Enumerate, SingleGene)
{
    const auto e = build_epistasis(1, 0, EpistasisMode::Adjacent, 0);
    const double a = 0.125, b = 0.75;
    const auto m = NkModel::with_tables(e, {{a, b}});
    const auto acc = enumerate_moments(m);
    EXPECT_EQ(acc.count(), 2U);
    EXPECT_EQ(acc.sum(0), a + b);
    EXPECT_EQ(acc.co(0, 0), a * a + b * b);
}

TEST(Enumerate, CountAndCap)
{
    const NkModel m(10, 3, EpistasisMode::Random, 1);
    EXPECT_EQ(enumerate_moments(m).count(), 1024U);
    EnumerationOptions opts;
    opts.max_genes = 8;
    try {
        enumerate_moments(m, opts);
        FAIL() << "expected a capacity error";
    } catch (const CapacityError& e) {
        EXPECT_NE(std::string(e.what()).find("8"), std::string::npos);
        EXPECT_EQ(e.exit_code(), 3);
    }
}

TEST(Enumerate, MatchesNaiveReferenceBitExactly)
{
    for (std::size_t n = 1; n <= 12; ++n) {
        const NkModel m(n, n / 2, n % 2 ? EpistasisMode::Random : EpistasisMode::Adjacent, n * 1000 + 7);
        EXPECT_EQ(enumerate_moments(m), oracle::naive_moments(m)) << "n=" << n;
    }
}

TEST(Enumerate, ThreadCountDoesNotChangeResult)
{
    for (std::size_t n : {13U, 15U}) {
        const NkModel m(n, 3, EpistasisMode::Random, n);
        EnumerationOptions one, many;
        many.threads = 5;
        EXPECT_EQ(enumerate_moments(m, one), enumerate_moments(m, many));
    }
}

TEST(Sample, DistinctGenotypesOnly)
{
    const NkModel m(6, 2, EpistasisMode::Random, 3);
    // sampling the whole space visits every genotype exactly once
    const auto full = sample_moments(m, 64, 9);
    const auto exact = enumerate_moments(m);
    EXPECT_EQ(full.count(), 64U);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(full.sum(i), exact.sum(i), 1e-12);
    EXPECT_THROW(sample_moments(m, 65, 9), ParameterError);
}

TEST(Correlation, DuplicatedAndMirroredColumns)
{
    SplitMixStream rng(3);
    TraitMoments acc(3);
    for (int t = 0; t < 100; ++t) {
        const double v = unit_from_bits(rng.next());
        acc.accumulate(std::vector<double>{v, v, 2.0 - v});
    }
    const auto c = correlation(acc);
    EXPECT_NEAR(c(0, 1), 1.0, 1e-12);
    EXPECT_NEAR(c(0, 2), -1.0, 1e-12);
    EXPECT_EQ(c(1, 1), 1.0);
}

TEST(Correlation, DegenerateTrait)
{
    TraitMoments acc(2);
    acc.accumulate(std::vector<double>{0.5, 0.1});
    acc.accumulate(std::vector<double>{0.5, 0.9});
    acc.accumulate(std::vector<double>{0.5, 0.3});
    const auto c = correlation(acc);
    EXPECT_TRUE(c.degenerate(0));
    EXPECT_FALSE(c.degenerate(1));
    EXPECT_EQ(c(0, 0), 1.0);
    EXPECT_EQ(c(0, 1), 0.0);
}

TEST(Correlation, NeedsTwoObservations)
{
    TraitMoments acc(2);
    acc.accumulate(std::vector<double>{1, 2});
    EXPECT_THROW(correlation(acc), InvariantError);
}

TEST(Correlation, MatchesTwoPassOracle)
{
    for (auto mode : {EpistasisMode::Adjacent, EpistasisMode::Random}) {
        for (std::size_t k : {1U, 2U, 5U, 9U}) {
            const NkModel m(10, k, mode, 500 + k);
            const auto c = correlation(enumerate_moments(m));
            const auto ref = oracle::two_pass_correlation(oracle::all_trait_rows(m));
            for (std::size_t i = 0; i < 10; ++i)
                for (std::size_t j = 0; j < 10; ++j)
                    EXPECT_NEAR(c(i, j), static_cast<double>(ref[i][j]), 1e-12);
        }
    }
}

TEST(Correlation, DegreeZeroIsExactlyUncorrelated)
{
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const NkModel m(10, 0, seed % 2 ? EpistasisMode::Random : EpistasisMode::Adjacent, seed);
        const auto c = correlation(enumerate_moments(m));
        for (std::size_t i = 0; i < 10; ++i)
            for (std::size_t j = 0; j < 10; ++j)
                if (i != j) {
                    ASSERT_LT(std::abs(c(i, j)), 1e-10);
                }
    }
}

// Invariants for arbitrary landscapes: symmetric, unit diagonal, in range.
TEST(Correlation, StructuralInvariants)
{
    SplitMixStream rng(8);
    for (int t = 0; t < 30; ++t) {
        const std::size_t n = 2 + rng.below(9);
        const std::size_t k = rng.below(n);
        const NkModel m(n, k, rng.below(2) ? EpistasisMode::Random : EpistasisMode::Adjacent, rng.next());
        const auto c = correlation(enumerate_moments(m));
        for (std::size_t i = 0; i < n; ++i) {
            EXPECT_EQ(c(i, i), 1.0);
            for (std::size_t j = 0; j < n; ++j) {
                EXPECT_EQ(c(i, j), c(j, i));
                EXPECT_LE(std::abs(c(i, j)), 1.0);
            }
        }
        const double msc = mean_squared_correlation(c);
        EXPECT_GE(msc, 0.0);
        EXPECT_LE(msc, 1.0);
    }
}

TEST(Correlation, ShiftAndScaleInvariance)
{
    SplitMixStream rng(21);
    TraitMoments raw(3), moved(3);
    for (int t = 0; t < 500; ++t) {
        const double a = unit_from_bits(rng.next());
        const double b = unit_from_bits(rng.next()) + 0.3 * a;
        const double c = unit_from_bits(rng.next()) - 0.5 * b;
        raw.accumulate(std::vector<double>{a, b, c});
        moved.accumulate(std::vector<double>{a, 7.5 * b + 100.0, c});
    }
    const auto r1 = correlation(raw);
    const auto r2 = correlation(moved);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(r1(i, j), r2(i, j), 1e-12);
}

TEST(MeanSquaredCorrelation, Examples)
{
    EXPECT_EQ(mean_squared_correlation(CorrelationMatrix::identity(5)), 0.0);
    const CorrelationMatrix ones(3, {1, -1, 1, -1, 1, -1, 1, -1, 1}, {false, false, false});
    EXPECT_EQ(mean_squared_correlation(ones), 1.0);
    const CorrelationMatrix mixed(3, {1, 0.5, -0.5, 0.5, 1, 0, -0.5, 0, 1}, {false, false, false});
    EXPECT_NEAR(mean_squared_correlation(mixed), 1.0 / 6.0, 1e-15);
    EXPECT_THROW(mean_squared_correlation(CorrelationMatrix::identity(1)), ParameterError);
}
