#ifndef LWLOCK_CPU_HPP_
#define LWLOCK_CPU_HPP_

#include <cstddef>
#include <cstdint>

namespace lwlock {

inline constexpr std::size_t kCacheLineSize = 64;

/// Spin-wait hint for the core (`pause` on x86, `yield` on arm).
inline void cpu_relax() noexcept {
#if defined(__x86_64__) || defined(__i386__)
    __builtin_ia32_pause();
#elif defined(__aarch64__) || defined(__arm__)
    asm volatile("yield" ::: "memory");
#else
    asm volatile("" ::: "memory");
#endif
}

/// One no-op instruction the compiler may not remove or merge.
///
/// This is the unit of work in the benchmark scenarios; every lock is
/// measured against the same instruction.
inline void noop() noexcept { asm volatile("nop"); }

inline void noops(std::uint32_t count) noexcept {
    for (std::uint32_t i = 0; i < count; ++i) {
        noop();
    }
}

}  // namespace lwlock

#endif  // LWLOCK_CPU_HPP_
