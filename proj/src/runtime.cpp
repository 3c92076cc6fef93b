#include "lwlock/runtime.hpp"

#include <atomic>
#include <cassert>
#include <deque>
#include <exception>
#include <memory>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include <boost/context/detail/exception.hpp>
#include <boost/context/fiber.hpp>
#include <boost/context/fixedsize_stack.hpp>

#include "lwlock/cpu.hpp"

namespace lwlock::runtime {
namespace detail {

namespace ctx = boost::context;

enum class TaskState : std::uint8_t {
    kReady,
    kRunning,
    kSuspending,    // handle published, still on its carrier
    kSuspended,     // off-carrier, waiting for resume
    kResumedEarly,  // resume arrived before the switch completed
    kDone,
};

// State word layout: suspension epoch in the high bits, TaskState in the
// low byte. The epoch distinguishes handles from different suspensions.
constexpr std::uint64_t pack(std::uint64_t epoch, TaskState state) {
    return (epoch << 8) | static_cast<std::uint8_t>(state);
}
constexpr std::uint64_t epoch_of(std::uint64_t word) { return word >> 8; }
constexpr TaskState state_of(std::uint64_t word) {
    return static_cast<TaskState>(word & 0xff);
}

// Handle layout: 16-bit epoch above a 48-bit task address.
constexpr unsigned kAddressBits = 48;
constexpr std::uintptr_t kAddressMask = (std::uintptr_t{1} << kAddressBits) - 1;
constexpr std::uint64_t kHandleEpochMask = 0xffff;

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class Runtime;

struct Task {
    TaskId id;
    Runtime* runtime = nullptr;
    std::function<void()> body;
    ctx::fiber context;
    std::atomic<std::uint64_t> state{pack(0, TaskState::kReady)};
    std::atomic<std::uintptr_t> join_word{ResumeHandle::kReadyForSuspend};
    std::atomic<bool> done{false};
    std::atomic<bool> joined{false};
    std::exception_ptr error;
    std::uint64_t rng_state = 0;
    // Keeps the task alive while the scheduler owns it; dropped on finish.
    std::shared_ptr<Task> self;
};

ResumeHandle make_handle(Task* task, std::uint64_t epoch) {
    const auto address = reinterpret_cast<std::uintptr_t>(task);
    assert((address & ~kAddressMask) == 0);
    return ResumeHandle{((epoch & kHandleEpochMask) << kAddressBits) | address};
}

class ReadyQueue {
public:
    void push(Task* task) {
        std::lock_guard guard(mutex_);
        tasks_.push_back(task);
        size_.fetch_add(1, std::memory_order_relaxed);
    }

    Task* pop() {
        if (empty()) {
            return nullptr;
        }
        std::lock_guard guard(mutex_);
        if (tasks_.empty()) {
            return nullptr;
        }
        Task* task = tasks_.front();
        tasks_.pop_front();
        size_.fetch_sub(1, std::memory_order_relaxed);
        return task;
    }

    bool empty() const { return size_.load(std::memory_order_relaxed) == 0; }

private:
    std::mutex mutex_;
    std::deque<Task*> tasks_;
    std::atomic<std::size_t> size_{0};
};

enum class SwitchAction { kNone, kYield, kPark, kFinish };

struct alignas(kCacheLineSize) Carrier {
    std::size_t index = 0;
    Runtime* runtime = nullptr;
    ctx::fiber scheduler;  // continuation of the carrier loop
    Task* current = nullptr;
    SwitchAction pending = SwitchAction::kNone;
    ReadyQueue local;
    std::minstd_rand steal_rng;
};

thread_local Carrier* tls_carrier = nullptr;

// Tasks migrate between OS threads across switch points, so the TLS slot
// must be re-read after every switch instead of cached by the compiler.
[[gnu::noinline]] Carrier* this_carrier() {
    asm volatile("" ::: "memory");
    return tls_carrier;
}

std::atomic<Runtime*> g_runtime{nullptr};

void switch_out(SwitchAction action) {
    Carrier* carrier = this_carrier();
    carrier->pending = action;
    ctx::fiber back = std::move(carrier->scheduler).resume();
    this_carrier()->scheduler = std::move(back);
}

ctx::fiber task_entry(Task* task, ctx::fiber&& scheduler) {
    this_carrier()->scheduler = std::move(scheduler);
    try {
        task->body();
    } catch (const ctx::detail::forced_unwind&) {
        throw;
    } catch (...) {
        task->error = std::current_exception();
    }
    task->body = nullptr;
    Carrier* carrier = this_carrier();
    carrier->pending = SwitchAction::kFinish;
    return std::move(carrier->scheduler);
}

class Runtime {
public:
    explicit Runtime(const RuntimeConfig& config) : config_(config) {
        carriers_.reserve(config.carriers);
        for (std::size_t i = 0; i < config.carriers; ++i) {
            auto carrier = std::make_unique<Carrier>();
            carrier->index = i;
            carrier->runtime = this;
            carrier->steal_rng.seed(static_cast<std::uint32_t>(config.seed * 7919 + i + 1));
            carriers_.push_back(std::move(carrier));
        }
    }

    std::size_t carrier_count() const { return carriers_.size(); }
    bool stopping() const { return stopping_.load(std::memory_order_acquire); }

    std::shared_ptr<Task> make_task(std::function<void()> body) {
        auto task = std::make_shared<Task>();
        task->id = TaskId{next_id_.fetch_add(1, std::memory_order_relaxed)};
        task->runtime = this;
        task->body = std::move(body);
        task->rng_state = task->id.value ^ (config_.seed * 0x9e3779b97f4a7c15ULL);
        task->context = ctx::fiber(std::allocator_arg, ctx::fixedsize_stack(config_.stack_size),
                                   [raw = task.get()](ctx::fiber&& scheduler) {
                                       return task_entry(raw, std::move(scheduler));
                                   });
        task->self = task;
        return task;
    }

    void admit(Task* task, Carrier* origin) {
        live_.fetch_add(1, std::memory_order_relaxed);
        enqueue(task, origin);
    }

    void enqueue(Task* task, Carrier* origin) {
        if (config_.pool_policy == PoolPolicy::kGlobalFifo) {
            global_.push(task);
        } else {
            Carrier* target = origin;
            if (target == nullptr || target->runtime != this) {
                const auto next = round_robin_.fetch_add(1, std::memory_order_relaxed);
                target = carriers_[next % carriers_.size()].get();
            }
            target->local.push(task);
        }
        notify_work();
    }

    bool pool_empty_for(const Carrier& carrier) const {
        if (config_.pool_policy == PoolPolicy::kGlobalFifo) {
            return global_.empty();
        }
        return carrier.local.empty();
    }

    void run(const std::shared_ptr<Task>& root) {
        admit(root.get(), carriers_[0].get());
        std::vector<std::thread> threads;
        threads.reserve(carriers_.size() - 1);
        for (std::size_t i = 1; i < carriers_.size(); ++i) {
            threads.emplace_back([this, i] { carrier_loop(*carriers_[i]); });
        }
        carrier_loop(*carriers_[0]);
        for (auto& thread : threads) {
            thread.join();
        }
    }

private:
    void carrier_loop(Carrier& carrier) {
        tls_carrier = &carrier;
        while (true) {
            if (Task* task = next_task(carrier)) {
                run_task(carrier, task);
                continue;
            }
            if (stopping()) {
                break;
            }
            idle_wait(carrier);
        }
        tls_carrier = nullptr;
    }

    bool has_work(const Carrier& carrier) const {
        if (config_.pool_policy == PoolPolicy::kGlobalFifo) {
            return !global_.empty();
        }
        if (!carrier.local.empty()) {
            return true;
        }
        for (const auto& other : carriers_) {
            if (!other->local.empty()) {
                return true;
            }
        }
        return false;
    }

    Task* next_task(Carrier& carrier) {
        if (config_.pool_policy == PoolPolicy::kGlobalFifo) {
            return global_.pop();
        }
        if (Task* task = carrier.local.pop()) {
            return task;
        }
        const std::size_t n = carriers_.size();
        if (n < 2) {
            return nullptr;
        }
        // Uniformly random first victim, then sweep the rest once.
        std::uniform_int_distribution<std::size_t> pick(0, n - 2);
        std::size_t victim = pick(carrier.steal_rng);
        if (victim >= carrier.index) {
            ++victim;
        }
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t index = (victim + k) % n;
            if (index == carrier.index) {
                continue;
            }
            if (Task* task = carriers_[index]->local.pop()) {
                return task;
            }
        }
        return nullptr;
    }

    void run_task(Carrier& carrier, Task* task) {
        const auto epoch = epoch_of(task->state.load(std::memory_order_acquire));
        task->state.store(pack(epoch, TaskState::kRunning), std::memory_order_relaxed);
        carrier.current = task;
        carrier.pending = SwitchAction::kNone;
        task->context = std::move(task->context).resume();
        carrier.current = nullptr;

        switch (carrier.pending) {
            case SwitchAction::kYield:
                task->state.store(pack(epoch_of(task->state.load(std::memory_order_relaxed)),
                                       TaskState::kReady),
                                  std::memory_order_relaxed);
                enqueue(task, &carrier);
                break;
            case SwitchAction::kPark:
                commit_park(carrier, task);
                break;
            case SwitchAction::kFinish:
                finish(task);
                break;
            case SwitchAction::kNone:
                assert(false && "task switched out without an action");
                break;
        }
    }

    // Runs after the task's context is saved, so a resume observed from here
    // on can safely hand the task to another carrier.
    void commit_park(Carrier& carrier, Task* task) {
        auto word = task->state.load(std::memory_order_acquire);
        while (true) {
            const auto epoch = epoch_of(word);
            switch (state_of(word)) {
                case TaskState::kSuspending:
                    if (task->state.compare_exchange_weak(word, pack(epoch, TaskState::kSuspended),
                                                          std::memory_order_acq_rel,
                                                          std::memory_order_acquire)) {
                        return;
                    }
                    break;
                case TaskState::kResumedEarly:
                    task->state.store(pack(epoch, TaskState::kReady), std::memory_order_relaxed);
                    enqueue(task, &carrier);
                    return;
                default:
                    assert(false && "unexpected state while parking");
                    return;
            }
        }
    }

    void finish(Task* task) {
        std::shared_ptr<Task> keep = std::move(task->self);
        task->state.store(pack(epoch_of(task->state.load(std::memory_order_relaxed)),
                               TaskState::kDone),
                          std::memory_order_relaxed);
        task->done.store(true, std::memory_order_release);
        const auto joiner =
            task->join_word.exchange(ResumeHandle::kKeepActive, std::memory_order_acq_rel);
        if (joiner > ResumeHandle::kKeepActive) {
            [[maybe_unused]] const bool resumed = try_resume(ResumeHandle{joiner});
            assert(resumed);
        }
        if (live_.fetch_sub(1, std::memory_order_acq_rel) == 1) {
            stopping_.store(true, std::memory_order_release);
            work_seq_.fetch_add(1);
            work_seq_.notify_all();
        }
    }

    void idle_wait(Carrier& carrier) {
        for (int i = 0; i < 64; ++i) {
            if (has_work(carrier) || stopping()) {
                return;
            }
            cpu_relax();
        }
        const auto seq = work_seq_.load();
        idle_.fetch_add(1);
        if (!has_work(carrier) && !stopping()) {
            work_seq_.wait(seq);
        }
        idle_.fetch_sub(1);
    }

    void notify_work() {
        work_seq_.fetch_add(1);
        if (idle_.load() > 0) {
            work_seq_.notify_one();
        }
    }

    RuntimeConfig config_;
    std::vector<std::unique_ptr<Carrier>> carriers_;
    ReadyQueue global_;
    std::atomic<std::uint32_t> work_seq_{0};
    std::atomic<std::uint32_t> idle_{0};
    std::atomic<std::int64_t> live_{0};
    std::atomic<bool> stopping_{false};
    std::atomic<std::uint64_t> next_id_{1};
    std::atomic<std::size_t> round_robin_{0};
};

void suspend_current(PublishFn publish, void* context) {
    Carrier* carrier = this_carrier();
    if (carrier == nullptr || carrier->current == nullptr) {
        throw std::logic_error("suspend_current called outside a task");
    }
    Task* task = carrier->current;
    const auto epoch = epoch_of(task->state.load(std::memory_order_relaxed)) + 1;
    task->state.store(pack(epoch, TaskState::kSuspending), std::memory_order_release);
    if (!publish(context, make_handle(task, epoch))) {
        task->state.store(pack(epoch, TaskState::kRunning), std::memory_order_relaxed);
        return;
    }
    switch_out(SwitchAction::kPark);
}

}  // namespace detail

using detail::Task;
using detail::TaskState;

JoinHandle::JoinHandle(std::shared_ptr<detail::Task> task) : task_(std::move(task)) {}

void JoinHandle::join() {
    if (!task_) {
        throw std::logic_error("join on an empty task handle");
    }
    if (task_->joined.exchange(true, std::memory_order_acq_rel)) {
        throw std::logic_error("task already joined");
    }
    Task* task = task_.get();
    if (!task->done.load(std::memory_order_acquire) && in_task()) {
        suspend_current([task](ResumeHandle handle) {
            auto expected = ResumeHandle::kReadyForSuspend;
            return task->join_word.compare_exchange_strong(
                expected, handle.word(), std::memory_order_acq_rel, std::memory_order_acquire);
        });
    }
    while (!task->done.load(std::memory_order_acquire)) {
        yield_now();
    }
    if (task->error) {
        std::rethrow_exception(task->error);
    }
}

bool JoinHandle::joinable() const {
    return task_ != nullptr && !task_->joined.load(std::memory_order_acquire);
}

bool JoinHandle::finished() const {
    return task_ != nullptr && task_->done.load(std::memory_order_acquire);
}

TaskId JoinHandle::id() const { return task_ ? task_->id : TaskId{}; }

int start(const RuntimeConfig& config, std::function<void()> root) {
    if (config.carriers == 0) {
        throw ConfigError("runtime needs at least one carrier");
    }
    if (config.stack_size < 16 * 1024) {
        throw ConfigError("task stack size below 16 KiB");
    }
    if (detail::this_carrier() != nullptr) {
        throw std::logic_error("runtime::start called from inside the runtime");
    }
    detail::Runtime runtime(config);
    detail::Runtime* expected = nullptr;
    if (!detail::g_runtime.compare_exchange_strong(expected, &runtime)) {
        throw std::logic_error("a runtime is already running in this process");
    }
    auto root_task = runtime.make_task(std::move(root));
    try {
        runtime.run(root_task);
    } catch (...) {
        detail::g_runtime.store(nullptr);
        throw;
    }
    detail::g_runtime.store(nullptr);
    if (root_task->error) {
        std::rethrow_exception(root_task->error);
    }
    return 0;
}

JoinHandle spawn(std::function<void()> body) {
    detail::Carrier* carrier = detail::this_carrier();
    if (carrier == nullptr || carrier->current == nullptr) {
        throw std::logic_error("spawn called outside a task");
    }
    detail::Runtime& runtime = *carrier->runtime;
    if (runtime.stopping()) {
        throw std::runtime_error("spawn after runtime shutdown");
    }
    auto task = runtime.make_task(std::move(body));
    runtime.admit(task.get(), carrier);
    return JoinHandle(std::move(task));
}

void yield_now() {
    detail::Carrier* carrier = detail::this_carrier();
    if (carrier == nullptr || carrier->current == nullptr) {
        std::this_thread::yield();
        return;
    }
    if (carrier->runtime->pool_empty_for(*carrier)) {
        return;
    }
    detail::switch_out(detail::SwitchAction::kYield);
}

void resume(ResumeHandle handle) {
    if (handle.is_sentinel()) {
        throw std::invalid_argument("resume called with a reserved sentinel value");
    }
    if (!try_resume(handle)) {
        throw std::logic_error("resume handle already consumed");
    }
}

bool try_resume(ResumeHandle handle) {
    if (handle.is_sentinel()) {
        return false;
    }
    auto* task = reinterpret_cast<Task*>(handle.word() & detail::kAddressMask);
    const auto handle_epoch = handle.word() >> detail::kAddressBits;
    auto word = task->state.load(std::memory_order_acquire);
    while (true) {
        const auto epoch = detail::epoch_of(word);
        if ((epoch & detail::kHandleEpochMask) != handle_epoch) {
            return false;
        }
        switch (detail::state_of(word)) {
            case TaskState::kSuspending:
                if (task->state.compare_exchange_weak(word,
                                                      detail::pack(epoch, TaskState::kResumedEarly),
                                                      std::memory_order_acq_rel,
                                                      std::memory_order_acquire)) {
                    return true;
                }
                break;
            case TaskState::kSuspended:
                if (task->state.compare_exchange_weak(word, detail::pack(epoch, TaskState::kReady),
                                                      std::memory_order_acq_rel,
                                                      std::memory_order_acquire)) {
                    task->runtime->enqueue(task, detail::this_carrier());
                    return true;
                }
                break;
            default:
                return false;
        }
    }
}

bool in_task() {
    const detail::Carrier* carrier = detail::this_carrier();
    return carrier != nullptr && carrier->current != nullptr;
}

CarrierId current_carrier() {
    const detail::Carrier* carrier = detail::this_carrier();
    return CarrierId{carrier ? carrier->index : 0};
}

std::size_t carrier_count() {
    const detail::Runtime* runtime = detail::g_runtime.load(std::memory_order_acquire);
    return runtime ? runtime->carrier_count() : 0;
}

TaskId current_task_id() {
    const detail::Carrier* carrier = detail::this_carrier();
    return (carrier && carrier->current) ? carrier->current->id : TaskId{};
}

std::uint64_t task_random() {
    detail::Carrier* carrier = detail::this_carrier();
    if (carrier && carrier->current) {
        return detail::splitmix64(carrier->current->rng_state);
    }
    thread_local std::uint64_t state =
        std::hash<std::thread::id>{}(std::this_thread::get_id());
    return detail::splitmix64(state);
}

}  // namespace lwlock::runtime
