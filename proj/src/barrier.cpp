#include "lwlock/barrier.hpp"

#include <atomic>
#include <mutex>

namespace lwlock {

struct CoopBarrier::Slot {
    std::atomic<bool> released{false};
    ResumeWord resume{kReadyForSuspend};
};

CoopBarrier::CoopBarrier(std::size_t parties, BackoffConfig backoff)
    : parties_(parties), backoff_(backoff) {
    if (parties == 0) {
        throw ConfigError("barrier needs at least one party");
    }
    backoff_.validate();
    waiters_.reserve(parties);
}

std::uint64_t CoopBarrier::generation() const {
    std::lock_guard lock(guard_);
    return generation_;
}

CoopBarrier::Role CoopBarrier::arrive_and_wait(const std::function<void()>& on_complete) {
    guard_.lock();
    if (++arrived_ == parties_) {
        arrived_ = 0;
        ++generation_;
        std::vector<Slot*> released;
        released.swap(waiters_);
        waiters_.reserve(parties_);
        guard_.unlock();

        if (on_complete) {
            on_complete();
        }
        for (Slot* slot : released) {
            // Same order as an MCS handoff: the slot dies once released
            // is observed, so claim the resume word first.
            const auto parked = claim_waiter(slot->resume);
            slot->released.store(true, std::memory_order_release);
            if (parked > kKeepActive) {
                runtime::resume(runtime::ResumeHandle{parked});
            }
        }
        return Role::kLastArriver;
    }

    Slot slot;
    waiters_.push_back(&slot);
    guard_.unlock();

    BackoffPolicy backoff(backoff_, StrategyMask{}, &slot.resume);
    while (!slot.released.load(std::memory_order_acquire)) {
        backoff.on_spin_wait();
    }
    return Role::kFollower;
}

}  // namespace lwlock
