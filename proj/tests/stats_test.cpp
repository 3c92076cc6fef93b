#include "lwlock/stats.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

using lwlock::compute_quantiles;

TEST(NearestRank, SmallCases) {
    EXPECT_EQ(lwlock::nearest_rank(0.99, 1), 1u);
    EXPECT_EQ(lwlock::nearest_rank(0.5, 4), 2u);
    EXPECT_EQ(lwlock::nearest_rank(0.5, 5), 3u);
    EXPECT_EQ(lwlock::nearest_rank(1.0, 7), 7u);
    EXPECT_EQ(lwlock::nearest_rank(0.95, 100), 95u);
    EXPECT_EQ(lwlock::nearest_rank(0.01, 100), 1u);
    EXPECT_EQ(lwlock::nearest_rank(0.7, 10), 7u);
}

TEST(Quantiles, Singleton) {
    const std::vector<int> one{5};
    EXPECT_EQ(compute_quantiles(one, {0.99}), std::vector<int>{5});
}

TEST(Quantiles, OneToHundred) {
    std::vector<std::uint64_t> samples(100);
    std::iota(samples.begin(), samples.end(), 1);
    std::shuffle(samples.begin(), samples.end(), std::mt19937(7));
    EXPECT_EQ(compute_quantiles(samples, {0.5, 0.95, 0.99, 1.0}),
              (std::vector<std::uint64_t>{50, 95, 99, 100}));
}

TEST(Quantiles, RejectsBadInput) {
    const std::vector<int> empty;
    EXPECT_THROW(compute_quantiles(empty, {0.5}), std::invalid_argument);
    const std::vector<int> some{1, 2, 3};
    EXPECT_THROW(compute_quantiles(some, {0.0}), std::invalid_argument);
    EXPECT_THROW(compute_quantiles(some, {1.5}), std::invalid_argument);
    EXPECT_THROW(compute_quantiles(some, {-0.1}), std::invalid_argument);
}

TEST(Quantiles, MonotoneInQ) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::uint64_t> samples(1 + rng() % 300);
        for (auto& s : samples) {
            s = rng() % 10000;
        }
        const auto q = compute_quantiles(samples, {0.5, 0.95, 0.99});
        EXPECT_LE(q[0], q[1]);
        EXPECT_LE(q[1], q[2]);
    }
}

TEST(Quantiles, MedianIsLowerMiddle) {
    const std::vector<double> even{4.0, 1.0, 3.0, 2.0};
    EXPECT_EQ(lwlock::median(std::span<const double>(even)), 2.0);
    const std::vector<double> odd{9.0, 1.0, 5.0};
    EXPECT_EQ(lwlock::median(std::span<const double>(odd)), 5.0);
}
