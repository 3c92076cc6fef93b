#ifndef LWLOCK_RUNTIME_HPP_
#define LWLOCK_RUNTIME_HPP_

// Minimal cooperative runtime: carrier OS threads run stackful tasks taken
// from ready pools. A task leaves its carrier only inside yield_now(),
// suspend_current(), JoinHandle::join() or when its body returns.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <type_traits>
#include <utility>

namespace lwlock {

/// Raised for invalid runtime, lock or benchmark configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace lwlock

namespace lwlock::runtime {

enum class PoolPolicy {
    kGlobalFifo,          ///< one FIFO shared by all carriers
    kPerCarrierStealing,  ///< FIFO per carrier, idle carriers steal
};

struct RuntimeConfig {
    std::size_t carriers = 1;
    PoolPolicy pool_policy = PoolPolicy::kGlobalFifo;
    std::size_t stack_size = 64 * 1024;
    /// Mixed into the per-task generators and the steal victim choice.
    std::uint64_t seed = 0;
};

struct TaskId {
    std::uint64_t value = 0;
    auto operator<=>(const TaskId&) const = default;
};

struct CarrierId {
    std::size_t index = 0;
    auto operator<=>(const CarrierId&) const = default;
};

/// Token that puts one suspended task back into a ready pool.
///
/// Fits a machine word so it can live in a lock node's resume word. The
/// values 0 and 1 are reserved by the waiting protocol; a real handle is
/// always greater than 1. Each suspension mints a distinct handle and a
/// handle is accepted by resume at most once.
class ResumeHandle {
public:
    static constexpr std::uintptr_t kReadyForSuspend = 0;
    static constexpr std::uintptr_t kKeepActive = 1;

    constexpr ResumeHandle() = default;
    constexpr explicit ResumeHandle(std::uintptr_t word) : word_(word) {}

    constexpr std::uintptr_t word() const { return word_; }
    constexpr bool is_sentinel() const { return word_ <= kKeepActive; }

    friend constexpr bool operator==(ResumeHandle, ResumeHandle) = default;

private:
    std::uintptr_t word_ = kReadyForSuspend;
};

namespace detail {
struct Task;
using PublishFn = bool (*)(void* context, ResumeHandle handle);
void suspend_current(PublishFn publish, void* context);
}  // namespace detail

/// Owning reference to a spawned task. Join at most once.
class JoinHandle {
public:
    JoinHandle() = default;
    explicit JoinHandle(std::shared_ptr<detail::Task> task);

    /// Waits cooperatively until the task body has returned. Rethrows an
    /// exception that escaped the body. Throws std::logic_error on a second
    /// join or on an empty handle.
    void join();

    bool joinable() const;
    bool finished() const;
    TaskId id() const;

private:
    std::shared_ptr<detail::Task> task_;
};

/// Runs `root` as the first task on `config.carriers` carrier threads. The
/// calling thread becomes carrier 0. Returns 0 once root and every task
/// spawned from it have finished.
///
/// Throws ConfigError for carriers == 0 and std::logic_error when a
/// runtime is already running in this process. An exception escaping root
/// is rethrown here.
int start(const RuntimeConfig& config, std::function<void()> root);

/// Enqueues a new task. Must be called from inside a task; throws
/// std::logic_error otherwise and std::runtime_error once shutdown began.
JoinHandle spawn(std::function<void()> body);

/// Re-enqueues the caller and lets the carrier run something else. Returns
/// at once when the caller's ready pool is empty. Outside a task this is
/// std::this_thread::yield().
void yield_now();

/// Deschedules the current task after handing a fresh handle to `publish`.
///
/// `publish` runs on the task's own stack before the switch. If it returns
/// false the handle is considered unpublished and the task keeps running.
/// Otherwise the task parks until resume() is called with the handle; a
/// resume that races with the final switch is never lost.
template <typename Publish>
void suspend_current(Publish&& publish) {
    using Fn = std::remove_reference_t<Publish>;
    detail::suspend_current(
        [](void* context, ResumeHandle handle) -> bool {
            auto& fn = *static_cast<Fn*>(context);
            if constexpr (std::is_void_v<std::invoke_result_t<Fn&, ResumeHandle>>) {
                fn(handle);
                return true;
            } else {
                return static_cast<bool>(fn(handle));
            }
        },
        static_cast<void*>(std::addressof(publish)));
}

/// Makes the task behind `handle` runnable again. Throws
/// std::invalid_argument for a sentinel value and std::logic_error for a
/// handle that was already consumed. Callable from any thread.
void resume(ResumeHandle handle);

/// Like resume() but reports a consumed or stale handle by returning false.
bool try_resume(ResumeHandle handle);

/// True on a carrier thread while a task is running.
bool in_task();

/// Carrier executing the caller; {0} outside the runtime.
CarrierId current_carrier();

/// Number of carriers of the running runtime; 0 when none is running.
std::size_t carrier_count();

TaskId current_task_id();

/// Next value of the current task's private generator, seeded from its
/// TaskId. Outside a task a per-thread generator is used.
std::uint64_t task_random();

}  // namespace lwlock::runtime

#endif  // LWLOCK_RUNTIME_HPP_
