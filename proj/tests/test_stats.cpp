#include <gtest/gtest.h>

#include <atomic>
#include <cmath>

#include "anchorcrc/rng.hpp"
#include "anchorcrc/stats.hpp"

namespace {

using namespace anchorcrc;

TEST(NormalQuantile, ReferenceValues) {
    EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
    EXPECT_NEAR(normal_quantile(0.5), 0.0, 1e-12);
    EXPECT_NEAR(normal_quantile(0.025), -1.959963984540054, 1e-12);
    EXPECT_NEAR(normal_quantile(0.841344746068543), 1.0, 1e-10);
    EXPECT_NEAR(normal_quantile(1e-10), -6.361340902404056, 1e-8);
}

TEST(NormalQuantile, SymmetricUnderComplement) {
    for (double p : {0.001, 0.01, 0.2, 0.4, 0.49}) {
        EXPECT_NEAR(normal_quantile(p), -normal_quantile(1.0 - p), 1e-12);
    }
}

TEST(NormalQuantile, RejectsBoundaryInputs) {
    EXPECT_THROW(normal_quantile(0.0), error);
    EXPECT_THROW(normal_quantile(1.0), error);
}

TEST(NormalCritical, MatchesTwoSidedLevel) {
    EXPECT_NEAR(normal_critical(0.95), 1.959963984540054, 1e-12);
    EXPECT_NEAR(normal_critical(0.5), normal_quantile(0.75), 1e-12);
}

TEST(Percentile, InterpolatesBetweenOrderStatistics) {
    const std::vector<double> v = {10.0, 20.0, 30.0, 40.0};
    EXPECT_DOUBLE_EQ(percentile(v, 0.0), 10.0);
    EXPECT_DOUBLE_EQ(percentile(v, 1.0), 40.0);
    EXPECT_DOUBLE_EQ(percentile(v, 0.5), 25.0);
    EXPECT_DOUBLE_EQ(percentile(v, 0.25), 17.5); // h = 3*0.25 = 0.75
}

TEST(Percentile, MonotoneInQuantile) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> v(101);
    for (auto& x : v) {
        x = unit(rng);
    }
    double prev = -1.0;
    for (double q = 0.0; q <= 1.0; q += 0.05) {
        const double cur = percentile(v, q);
        EXPECT_GE(cur, prev);
        prev = cur;
    }
}

TEST(KahanSum, RecoversSmallIncrements) {
    KahanSum acc;
    acc.add(1.0);
    for (int i = 0; i < 1000000; ++i) {
        acc.add(1e-16);
    }
    EXPECT_NEAR(acc.value(), 1.0 + 1e-10, 1e-14);
}

TEST(SampleStats, MeanAndSd) {
    const std::vector<double> v = {2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0};
    EXPECT_DOUBLE_EQ(mean(v), 5.0);
    EXPECT_NEAR(sample_sd(v), std::sqrt(32.0 / 7.0), 1e-12);
    const std::vector<double> one = {3.0};
    EXPECT_TRUE(std::isnan(sample_sd(one)));
}

TEST(Rng, DerivedSeedsAreStableAndDistinct) {
    const auto s1 = derive_seed(42, 1, 0);
    EXPECT_EQ(s1, derive_seed(42, 1, 0));
    EXPECT_NE(s1, derive_seed(42, 1, 1));
    EXPECT_NE(s1, derive_seed(42, 2, 0));
    EXPECT_NE(s1, derive_seed(43, 1, 0));
}

TEST(Rng, ParallelForCoversEveryIndexOnce) {
    std::vector<std::atomic<int>> hits(1000);
    parallel_for(1000, 4, [&](std::int64_t i) { hits[static_cast<std::size_t>(i)]++; });
    for (const auto& h : hits) {
        EXPECT_EQ(h.load(), 1);
    }
}

TEST(Rng, ParallelForPropagatesExceptions) {
    EXPECT_THROW(
        parallel_for(64, 4,
                     [](std::int64_t i) {
                         if (i == 13) {
                             throw_degenerate("boom");
                         }
                     }),
        error);
}

} // namespace
