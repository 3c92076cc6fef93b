#include "lwlock/barrier.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <vector>

namespace rt = lwlock::runtime;

TEST(CoopBarrier, RejectsZeroParties) {
    EXPECT_THROW(lwlock::CoopBarrier(0), lwlock::ConfigError);
}

TEST(CoopBarrier, SinglePartyNeverWaits) {
    lwlock::CoopBarrier barrier(1);
    int completions = 0;
    rt::start({}, [&] {
        for (int i = 0; i < 3; ++i) {
            EXPECT_EQ(barrier.arrive_and_wait([&] { ++completions; }),
                      lwlock::CoopBarrier::Role::kLastArriver);
        }
    });
    EXPECT_EQ(completions, 3);
    EXPECT_EQ(barrier.generation(), 3u);
}

class BarrierRounds : public ::testing::TestWithParam<std::size_t> {};

// Nobody leaves round r before everyone finished round r - 1, exactly one
// last arriver per round, and on_complete runs once per round.
TEST_P(BarrierRounds, GenerationsStayInStep) {
    constexpr std::size_t kParties = 12;
    constexpr std::size_t kRounds = 50;
    lwlock::BackoffConfig backoff;
    backoff.yield_limit = 2;
    backoff.suspend_limit = 4;
    lwlock::CoopBarrier barrier(kParties, backoff);
    std::atomic<std::size_t> arrivals{0};
    std::atomic<std::size_t> last_arrivers{0};
    std::atomic<std::size_t> completions{0};
    std::atomic<bool> in_step{true};

    rt::RuntimeConfig config;
    config.carriers = GetParam();
    rt::start(config, [&] {
        std::vector<rt::JoinHandle> handles;
        for (std::size_t p = 0; p < kParties; ++p) {
            handles.push_back(rt::spawn([&] {
                for (std::size_t r = 1; r <= kRounds; ++r) {
                    arrivals.fetch_add(1);
                    const auto role = barrier.arrive_and_wait([&] { completions.fetch_add(1); });
                    if (role == lwlock::CoopBarrier::Role::kLastArriver) {
                        last_arrivers.fetch_add(1);
                    }
                    if (arrivals.load() < r * kParties) {
                        in_step = false;
                    }
                    if (completions.load() < r) {
                        in_step = false;
                    }
                }
            }));
        }
        for (auto& h : handles) {
            h.join();
        }
    });
    EXPECT_TRUE(in_step.load());
    EXPECT_EQ(last_arrivers.load(), kRounds);
    EXPECT_EQ(completions.load(), kRounds);
    EXPECT_EQ(barrier.generation(), kRounds);
}

INSTANTIATE_TEST_SUITE_P(Carriers, BarrierRounds, ::testing::Values(1, 2, 4));
