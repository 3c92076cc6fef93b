#include "lwlock/verify.hpp"

#include <gtest/gtest.h>

#include "lwlock/runtime.hpp"

using namespace lwlock::verify;

namespace {

// Test double that never takes anything: lock() only yields.
class NoLock final : public LockUnderTest {
public:
    void lock(lwlock::LockNode&) override { lwlock::runtime::yield_now(); }
    void unlock(lwlock::LockNode&) override {}
};

}  // namespace

TEST(Verify, MutualExclusionMinimalCell) {
    const auto report = check_mutual_exclusion("MCS", "SYS", 1, 2, 10);
    EXPECT_TRUE(report.pass) << report.observed;
    EXPECT_EQ(report.observed, "counter=20 overlaps=0");
}

TEST(Verify, MutualExclusionCatchesABrokenLock) {
    const auto report = check_mutual_exclusion(
        "no-lock", [] { return std::make_unique<NoLock>(); }, 1, 4, 100);
    EXPECT_FALSE(report.pass);
    EXPECT_NE(report.observed, report.expected);
}

TEST(Verify, BadNamesAreVerdictsNotErrors) {
    EXPECT_FALSE(check_mutual_exclusion("CLH", "SYS", 1, 2, 10).pass);
    EXPECT_FALSE(check_deadlock_freedom("MCS", "XYZ", 1, 2).pass);
}

TEST(Verify, DeadlockFreedomWithSuspension) {
    const auto report = check_deadlock_freedom("MCS", "SYS", 1, 8, Seconds(10));
    EXPECT_TRUE(report.pass) << report.observed;
}

TEST(Verify, DeadlockFreedomForBaseline) {
    const auto report = check_deadlock_freedom("BASELINE", "n/a", 2, 16, Seconds(10));
    EXPECT_TRUE(report.pass) << report.observed;
}

TEST(Verify, PureSpinningDeadlocks) {
    const auto report = check_deadlock_freedom("MCS", "S**", 1, 2, Seconds(2));
    EXPECT_FALSE(report.pass);
    EXPECT_NE(report.observed.find("timed out"), std::string::npos) << report.observed;
}

TEST(Verify, HandshakeModelHasNoLostWakeups) {
    const auto report = check_handshake_interleavings();
    EXPECT_TRUE(report.pass) << report.observed;
    EXPECT_EQ(report.observed, "5 schedules, 0 lost wakeups, 0 bad resumes");
}

TEST(Verify, HandshakeModelDetectsABrokenWaker) {
    const auto report = check_handshake_interleavings_broken_waker();
    EXPECT_FALSE(report.pass);
}

TEST(Verify, SuspendHandoffs) {
    const auto report = check_suspend_handoffs(2, 3, 2000);
    EXPECT_TRUE(report.pass) << report.observed;
}

TEST(Verify, LadderConformance) {
    const auto report = check_backoff_ladder();
    EXPECT_TRUE(report.pass) << report.observed;
}

TEST(Verify, CohortSingleQueueIsFifo) {
    const auto report = check_fifo_order("TTAS-MCS-1", "SYS", 8);
    EXPECT_TRUE(report.pass) << report.observed;
}

TEST(Verify, StrategiesPerLock) {
    EXPECT_EQ(strategies_for(lwlock::LockSpec::parse("BASELINE")),
              std::vector<std::string>{"n/a"});
    const auto mcs = strategies_for(lwlock::LockSpec::parse("MCS"));
    EXPECT_EQ(mcs.size(), 6u);
    for (const auto& code : mcs) {
        EXPECT_TRUE(lwlock::StrategyMask::parse(code).cooperative()) << code;
    }
}
