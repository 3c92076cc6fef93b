#ifndef LWLOCK_BARRIER_HPP_
#define LWLOCK_BARRIER_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "lwlock/backoff.hpp"
#include "lwlock/spin_guard.hpp"

namespace lwlock {

/// Reusable barrier for cooperative tasks.
///
/// Waiters run the full spin-yield-suspend ladder on a slot of their own;
/// the last arriver of a generation releases every slot, resuming the
/// parked ones. No carrier is held while waiting.
class CoopBarrier {
public:
    enum class Role { kLastArriver, kFollower };

    explicit CoopBarrier(std::size_t parties, BackoffConfig backoff = {});
    CoopBarrier(const CoopBarrier&) = delete;
    CoopBarrier& operator=(const CoopBarrier&) = delete;

    /// Blocks until `parties` tasks arrived. When given, `on_complete` runs
    /// on the last arriver before anyone is released.
    Role arrive_and_wait(const std::function<void()>& on_complete = {});

    std::size_t parties() const { return parties_; }
    std::uint64_t generation() const;

private:
    struct Slot;

    std::size_t parties_;
    BackoffConfig backoff_;
    mutable SpinGuard guard_;
    std::size_t arrived_ = 0;
    std::uint64_t generation_ = 0;
    std::vector<Slot*> waiters_;
};

}  // namespace lwlock

#endif  // LWLOCK_BARRIER_HPP_
