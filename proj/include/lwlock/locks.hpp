#ifndef LWLOCK_LOCKS_HPP_
#define LWLOCK_LOCKS_HPP_

// Locks for cooperative tasks. Every wait loop goes through a BackoffPolicy,
// so a waiter gives its carrier back (yield, suspend) instead of spinning
// while the holder sits in a ready pool. All locks are non-reentrant.

#include <atomic>
#include <cassert>
#include <cstddef>
#include <deque>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lwlock/backoff.hpp"
#include "lwlock/cpu.hpp"
#include "lwlock/spin_guard.hpp"

namespace lwlock {

/// Waiting behaviour shared by all locks.
struct LockOptions {
    BackoffConfig backoff;
    StrategyMask strategy;
};

/// Queue node for one acquire/release cycle. Caller-owned; must outlive
/// the cycle and be fresh (default state) before each lock().
struct alignas(kCacheLineSize) LockNode {
    std::atomic<bool> locked{false};
    std::atomic<LockNode*> next{nullptr};
    ResumeWord resume{kReadyForSuspend};
    /// Cohort queue the node went through; -1 after a fast-path acquire.
    int cohort_queue = -1;

    void reset() {
        locked.store(false, std::memory_order_relaxed);
        next.store(nullptr, std::memory_order_relaxed);
        resume.store(kReadyForSuspend, std::memory_order_relaxed);
        cohort_queue = -1;
    }
};

/// Test-and-test-and-set lock. Waits by spinning and yielding only.
class TtasLock {
public:
    explicit TtasLock(LockOptions options = {}) : options_(options) {}
    TtasLock(const TtasLock&) = delete;
    TtasLock& operator=(const TtasLock&) = delete;

    void lock(BackoffTrace* trace = nullptr);

    bool try_lock() {
        bool expected = false;
        return !flag_.load(std::memory_order_relaxed) &&
               flag_.compare_exchange_strong(expected, true, std::memory_order_acquire,
                                             std::memory_order_relaxed);
    }

    void unlock() {
        assert(flag_.load(std::memory_order_relaxed) && "unlock of a TtasLock that is not held");
        flag_.store(false, std::memory_order_release);
    }

    bool is_locked() const { return flag_.load(std::memory_order_relaxed); }

    /// Waits until the flag is taken, with the given policy. Used by the
    /// cohort lock for its queue heads.
    void lock_with(const BackoffConfig& config, StrategyMask strategy, BackoffTrace* trace);

private:
    alignas(kCacheLineSize) std::atomic<bool> flag_{false};
    LockOptions options_;
};

/// MCS queue lock with spin-yield-suspend waiting on the node's own flag.
class McsLock {
public:
    explicit McsLock(LockOptions options = {}) : options_(options) {}
    McsLock(const McsLock&) = delete;
    McsLock& operator=(const McsLock&) = delete;

    void lock(LockNode& node, BackoffTrace* trace = nullptr);
    void unlock(LockNode& node);

    bool is_locked() const { return tail_.load(std::memory_order_relaxed) != nullptr; }

private:
    alignas(kCacheLineSize) std::atomic<LockNode*> tail_{nullptr};
    LockOptions options_;
};

enum class QueueSelection { kCarrierModN, kRandom };

/// TTAS-MCS-N cohort lock: N MCS queues whose heads race for one outer
/// flag. Holding the outer flag is ownership.
class CohortLock {
public:
    CohortLock(std::size_t queues, LockOptions options = {},
               QueueSelection selection = QueueSelection::kCarrierModN);
    CohortLock(const CohortLock&) = delete;
    CohortLock& operator=(const CohortLock&) = delete;

    void lock(LockNode& node, BackoffTrace* trace = nullptr);
    void unlock(LockNode& node);

    std::size_t queue_count() const { return queue_count_; }
    bool is_locked() const { return outer_.is_locked(); }
    /// Queue a new waiter would join right now.
    std::size_t select_queue() const;

private:
    TtasLock outer_;
    std::size_t queue_count_;
    std::vector<std::unique_ptr<McsLock>> queues_;
    LockOptions options_;
    QueueSelection selection_;
};

/// Library-style mutex: a fast-path flag plus a waitlist of parked tasks
/// behind a short spin lock. Contended callers park right away.
class BaselineMutex {
public:
    BaselineMutex() = default;
    BaselineMutex(const BaselineMutex&) = delete;
    BaselineMutex& operator=(const BaselineMutex&) = delete;

    void lock();
    bool try_lock() { return !flag_.exchange(true, std::memory_order_acquire); }
    void unlock();

    bool is_locked() const { return flag_.load(std::memory_order_relaxed); }
    std::size_t waiting() const;

private:
    alignas(kCacheLineSize) std::atomic<bool> flag_{false};
    mutable SpinGuard guard_;
    std::deque<runtime::ResumeHandle> waitlist_;
};

enum class LockKind { kTtas, kMcs, kCohort, kBaseline };

/// Lock named as on the command line: "TTAS", "MCS", "TTAS-MCS-<N>",
/// "BASELINE". A bare "TTAS-MCS" takes its queue count separately.
struct LockSpec {
    LockKind kind = LockKind::kMcs;
    std::size_t queues = 1;

    static LockSpec parse(std::string_view name, std::size_t default_queues = 1);
    std::string name() const;
    /// Whether a strategy's suspend stage has any effect on this lock.
    bool uses_suspend() const { return kind == LockKind::kMcs || kind == LockKind::kCohort; }
};

/// Strategy for `code` on a lock of kind `spec`. BASELINE has no ladder and
/// also accepts "n/a", which maps to "SYS". Throws ConfigError otherwise.
StrategyMask resolve_strategy(const LockSpec& spec, std::string_view code);

/// Any of the locks behind one lock(node)/unlock(node) surface.
class AnyLock {
public:
    AnyLock(const LockSpec& spec, LockOptions options,
            QueueSelection selection = QueueSelection::kCarrierModN);
    AnyLock(const AnyLock&) = delete;
    AnyLock& operator=(const AnyLock&) = delete;

    void lock(LockNode& node);
    void unlock(LockNode& node);

    const LockSpec& spec() const { return spec_; }

private:
    LockSpec spec_;
    std::variant<std::monostate, TtasLock, McsLock, CohortLock, BaselineMutex> lock_;
};

}  // namespace lwlock

#endif  // LWLOCK_LOCKS_HPP_
