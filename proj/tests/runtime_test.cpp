#include "lwlock/runtime.hpp"

#include <gtest/gtest.h>

#include <atomic>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace rt = lwlock::runtime;

namespace {

rt::RuntimeConfig carriers(std::size_t n,
                           rt::PoolPolicy policy = rt::PoolPolicy::kGlobalFifo) {
    rt::RuntimeConfig config;
    config.carriers = n;
    config.pool_policy = policy;
    return config;
}

}  // namespace

TEST(Runtime, RejectsBadConfig) {
    EXPECT_THROW(rt::start(carriers(0), [] {}), lwlock::ConfigError);
    rt::RuntimeConfig small;
    small.stack_size = 4096;
    EXPECT_THROW(rt::start(small, [] {}), lwlock::ConfigError);
}

TEST(Runtime, RootRunsAndReturnsZero) {
    bool ran = false;
    EXPECT_EQ(rt::start(carriers(1), [&] {
                  ran = true;
                  EXPECT_TRUE(rt::in_task());
                  EXPECT_EQ(rt::carrier_count(), 1u);
              }),
              0);
    EXPECT_TRUE(ran);
    EXPECT_FALSE(rt::in_task());
    EXPECT_EQ(rt::carrier_count(), 0u);
}

TEST(Runtime, RootExceptionIsRethrown) {
    EXPECT_THROW(rt::start(carriers(2), [] { throw std::runtime_error("boom"); }),
                 std::runtime_error);
}

TEST(Runtime, NestedStartIsRejected) {
    rt::start(carriers(1), [] { EXPECT_THROW(rt::start(carriers(1), [] {}), std::logic_error); });
}

TEST(Runtime, SpawnOutsideTaskThrows) {
    EXPECT_THROW(rt::spawn([] {}), std::logic_error);
}

TEST(Runtime, JoinWaitsAndRethrows) {
    rt::start(carriers(2), [] {
        std::atomic<int> value{0};
        auto ok = rt::spawn([&] {
            for (int i = 0; i < 10; ++i) {
                rt::yield_now();
            }
            value = 42;
        });
        ok.join();
        EXPECT_EQ(value.load(), 42);
        EXPECT_TRUE(ok.finished());
        EXPECT_FALSE(ok.joinable());
        EXPECT_THROW(ok.join(), std::logic_error);

        auto bad = rt::spawn([] { throw std::invalid_argument("task failure"); });
        EXPECT_THROW(bad.join(), std::invalid_argument);
    });
    rt::JoinHandle empty;
    EXPECT_THROW(empty.join(), std::logic_error);
}

TEST(Runtime, YieldAlternatesOnOneCarrier) {
    std::string order;
    rt::start(carriers(1), [&] {
        auto a = rt::spawn([&] {
            for (int i = 0; i < 3; ++i) {
                order += 'a';
                rt::yield_now();
            }
        });
        auto b = rt::spawn([&] {
            for (int i = 0; i < 3; ++i) {
                order += 'b';
                rt::yield_now();
            }
        });
        a.join();
        b.join();
    });
    EXPECT_EQ(order, "ababab");
}

TEST(Runtime, YieldWithEmptyPoolReturnsAtOnce) {
    rt::start(carriers(1), [] {
        for (int i = 0; i < 1000; ++i) {
            rt::yield_now();
        }
    });
    rt::yield_now();  // outside a task: an OS-level yield
}

TEST(Runtime, SuspendAndResume) {
    rt::start(carriers(1), [] {
        std::atomic<std::uintptr_t> slot{0};
        bool resumed = false;
        auto sleeper = rt::spawn([&] {
            rt::suspend_current([&](rt::ResumeHandle h) { slot.store(h.word()); });
            resumed = true;
        });
        while (slot.load() == 0) {
            rt::yield_now();
        }
        EXPECT_FALSE(resumed);
        const rt::ResumeHandle handle{slot.load()};
        EXPECT_FALSE(handle.is_sentinel());
        rt::resume(handle);
        sleeper.join();
        EXPECT_TRUE(resumed);
        EXPECT_THROW(rt::resume(handle), std::logic_error);
        EXPECT_FALSE(rt::try_resume(handle));
    });
}

TEST(Runtime, SentinelHandlesAreRejected) {
    EXPECT_THROW(rt::resume(rt::ResumeHandle{0}), std::invalid_argument);
    EXPECT_THROW(rt::resume(rt::ResumeHandle{1}), std::invalid_argument);
    EXPECT_FALSE(rt::try_resume(rt::ResumeHandle{1}));
}

TEST(Runtime, DeclinedPublishKeepsRunning) {
    rt::start(carriers(1), [] {
        int calls = 0;
        rt::suspend_current([&](rt::ResumeHandle) {
            ++calls;
            return false;
        });
        EXPECT_EQ(calls, 1);
    });
}

TEST(Runtime, ResumeBeforeTheSwitchIsNotLost) {
    // The handle is resumed from inside the publish callback, before the
    // task has left its carrier.
    rt::start(carriers(1), [] {
        rt::suspend_current([](rt::ResumeHandle h) { rt::resume(h); });
    });
}

TEST(Runtime, HandlesDifferAcrossSuspensions) {
    rt::start(carriers(1), [] {
        std::vector<std::uintptr_t> seen;
        for (int i = 0; i < 3; ++i) {
            rt::suspend_current([&](rt::ResumeHandle h) {
                seen.push_back(h.word());
                rt::resume(h);
            });
        }
        EXPECT_EQ(std::set<std::uintptr_t>(seen.begin(), seen.end()).size(), 3u);
    });
}

class RuntimePolicies : public ::testing::TestWithParam<rt::PoolPolicy> {};

TEST_P(RuntimePolicies, ManyTasksOnManyCarriers) {
    constexpr int kTasks = 200;
    std::atomic<int> done{0};
    std::atomic<bool> carrier_in_range{true};
    rt::start(carriers(4, GetParam()), [&] {
        std::vector<rt::JoinHandle> handles;
        for (int i = 0; i < kTasks; ++i) {
            handles.push_back(rt::spawn([&] {
                for (int y = 0; y < 5; ++y) {
                    if (rt::current_carrier().index >= rt::carrier_count()) {
                        carrier_in_range = false;
                    }
                    rt::yield_now();
                }
                done.fetch_add(1);
            }));
        }
        for (auto& h : handles) {
            h.join();
        }
    });
    EXPECT_EQ(done.load(), kTasks);
    EXPECT_TRUE(carrier_in_range.load());
}

TEST_P(RuntimePolicies, CrossCarrierSuspendResume) {
    constexpr int kRounds = 2000;
    rt::start(carriers(2, GetParam()), [&] {
        std::atomic<std::uintptr_t> slot{0};
        auto sleeper = rt::spawn([&] {
            for (int i = 0; i < kRounds; ++i) {
                rt::suspend_current([&](rt::ResumeHandle h) { slot.store(h.word()); });
            }
        });
        auto waker = rt::spawn([&] {
            for (int i = 0; i < kRounds; ++i) {
                std::uintptr_t h = 0;
                while ((h = slot.exchange(0)) == 0) {
                    rt::yield_now();
                }
                rt::resume(rt::ResumeHandle{h});
            }
        });
        sleeper.join();
        waker.join();
    });
}

INSTANTIATE_TEST_SUITE_P(Pools, RuntimePolicies,
                         ::testing::Values(rt::PoolPolicy::kGlobalFifo,
                                           rt::PoolPolicy::kPerCarrierStealing));

TEST(Runtime, TaskIdsAreDistinct) {
    std::vector<rt::TaskId> ids(8);
    rt::start(carriers(2), [&] {
        std::vector<rt::JoinHandle> handles;
        for (std::size_t i = 0; i < ids.size(); ++i) {
            handles.push_back(rt::spawn([&, i] { ids[i] = rt::current_task_id(); }));
        }
        for (std::size_t i = 0; i < ids.size(); ++i) {
            handles[i].join();
            EXPECT_EQ(handles[i].id(), ids[i]);
        }
    });
    std::set<std::uint64_t> unique;
    for (auto id : ids) {
        unique.insert(id.value);
    }
    EXPECT_EQ(unique.size(), ids.size());
}

TEST(Runtime, TaskRandomIsReproducible) {
    auto draw = [] {
        std::vector<std::uint64_t> values;
        rt::start(carriers(1), [&] {
            auto h = rt::spawn([&] {
                for (int i = 0; i < 4; ++i) {
                    values.push_back(rt::task_random());
                }
            });
            h.join();
        });
        return values;
    };
    const auto first = draw();
    EXPECT_EQ(first, draw());
    EXPECT_NE(first[0], first[1]);
}

TEST(Runtime, SpawnAfterRootReturnsStillRuns) {
    std::atomic<int> late{0};
    rt::start(carriers(2), [&] {
        rt::spawn([&] {
            rt::yield_now();
            late = 1;
        });
    });
    EXPECT_EQ(late.load(), 1);
}
