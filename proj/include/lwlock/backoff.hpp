#ifndef LWLOCK_BACKOFF_HPP_
#define LWLOCK_BACKOFF_HPP_

// Spin -> yield -> suspend waiting ladder, plus the lock-free handshake on a
// resume word that lets a waiter park while its waker may already be on
// the way.
//
// Resume word values:
//   0 (kReadyForSuspend)  waiter may still park
//   1 (kKeepActive)       waker has passed; the waiter must not park
//   >1                    handle of the parked waiter

#include <atomic>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lwlock/runtime.hpp"

namespace lwlock {

inline constexpr std::uintptr_t kReadyForSuspend = runtime::ResumeHandle::kReadyForSuspend;
inline constexpr std::uintptr_t kKeepActive = runtime::ResumeHandle::kKeepActive;

using ResumeWord = std::atomic<std::uintptr_t>;

struct BackoffConfig {
    std::uint32_t yield_limit = 8;
    std::uint32_t suspend_limit = 64;
    std::uint32_t spin_limit = 1024;

    /// Throws ConfigError unless 0 < yield_limit <= suspend_limit and
    /// spin_limit >= 1.
    void validate() const;
};

/// Which stages of the ladder are enabled, written as a three-letter code:
/// position one is spin (S), two is yield (Y), three is suspend (S); a `*`
/// disables that stage. "SYS" enables everything, "S**" is pure spinning.
struct StrategyMask {
    bool spin = true;
    bool yield = true;
    bool suspend = true;

    static StrategyMask parse(std::string_view code);
    std::string code() const;

    /// True when a waiter can give up its carrier (yield or suspend).
    bool cooperative() const { return yield || suspend; }

    StrategyMask without_suspend() const {
        StrategyMask mask = *this;
        mask.suspend = false;
        return mask;
    }

    friend bool operator==(const StrategyMask&, const StrategyMask&) = default;
};

enum class WaitAction : std::uint8_t { kSpin, kYield, kSuspend };

std::string_view to_string(WaitAction action);

/// One on_spin_wait() step, recorded when a trace is attached.
struct BackoffEvent {
    WaitAction action = WaitAction::kSpin;
    std::uint32_t spins = 0;     ///< no-op count for kSpin
    bool suspended = false;      ///< kSuspend: the task actually parked

    friend bool operator==(const BackoffEvent&, const BackoffEvent&) = default;
};

using BackoffTrace = std::vector<BackoffEvent>;

/// Stage chosen for the `iterations`-th wait step (counting from 1).
///
/// The natural ladder spins below yield_limit, yields below suspend_limit
/// (or always, without a resume word) and suspends afterwards. A disabled
/// stage falls through: spin -> yield -> suspend; a disabled yield keeps
/// spinning until suspend_limit; a disabled suspend keeps yielding (or
/// spinning when yield is off too).
WaitAction select_action(std::uint32_t iterations, const BackoffConfig& config,
                         StrategyMask strategy, bool can_suspend);

/// min(2^iterations, spin_limit) without overflow.
std::uint32_t spin_burst(std::uint32_t iterations, std::uint32_t spin_limit);

void spin(std::uint32_t ops);

/// Parks the current task on `word` unless a waker already set it to
/// kKeepActive. Returns true when the task was parked and then resumed.
/// Outside a task it only yields the OS thread and returns false.
bool try_suspend(ResumeWord& word);

/// Marks `word` kKeepActive and returns the previous value. A value > 1 is
/// a parked waiter's handle that the caller must pass to runtime::resume().
std::uintptr_t claim_waiter(ResumeWord& word);

/// claim_waiter() followed by the resume, when needed.
void resume_waiter(ResumeWord& word);

/// Per-wait-loop state machine. Create one before the loop and call
/// on_spin_wait() once per failed check of the loop condition.
class BackoffPolicy {
public:
    BackoffPolicy(const BackoffConfig& config, StrategyMask strategy,
                  ResumeWord* word = nullptr, BackoffTrace* trace = nullptr)
        : config_(config), strategy_(strategy), word_(word), trace_(trace) {}

    void on_spin_wait();

    std::uint32_t iterations() const { return iterations_; }

private:
    BackoffConfig config_;
    StrategyMask strategy_;
    ResumeWord* word_;
    BackoffTrace* trace_;
    std::uint32_t iterations_ = 0;
};

}  // namespace lwlock

#endif  // LWLOCK_BACKOFF_HPP_
