#ifndef LWLOCK_SPIN_GUARD_HPP_
#define LWLOCK_SPIN_GUARD_HPP_

#include <atomic>

#include "lwlock/cpu.hpp"

namespace lwlock {

/// Short internal spin lock for tiny regions that never contain a context
/// switch point. Not for use around user code.
class SpinGuard {
public:
    SpinGuard() = default;
    SpinGuard(const SpinGuard&) = delete;
    SpinGuard& operator=(const SpinGuard&) = delete;

    void lock() noexcept {
        while (locked_.exchange(true, std::memory_order_acquire)) {
            while (locked_.load(std::memory_order_relaxed)) {
                cpu_relax();
            }
        }
    }

    void unlock() noexcept { locked_.store(false, std::memory_order_release); }

private:
    std::atomic<bool> locked_{false};
};

}  // namespace lwlock

#endif  // LWLOCK_SPIN_GUARD_HPP_
