#include "lwlock/locks.hpp"

#include <charconv>
#include <mutex>

namespace lwlock {

void TtasLock::lock(BackoffTrace* trace) {
    lock_with(options_.backoff, options_.strategy, trace);
}

void TtasLock::lock_with(const BackoffConfig& config, StrategyMask strategy, BackoffTrace* trace) {
    if (try_lock()) {
        return;
    }
    // No resume word: TTAS waiters never park.
    BackoffPolicy backoff(config, strategy, nullptr, trace);
    while (true) {
        while (flag_.load(std::memory_order_relaxed)) {
            backoff.on_spin_wait();
        }
        if (try_lock()) {
            return;
        }
    }
}

void McsLock::lock(LockNode& node, BackoffTrace* trace) {
    node.next.store(nullptr, std::memory_order_relaxed);
    node.resume.store(kReadyForSuspend, std::memory_order_relaxed);
    node.locked.store(true, std::memory_order_relaxed);
    LockNode* predecessor = tail_.exchange(&node, std::memory_order_acq_rel);
    if (predecessor == nullptr) {
        node.locked.store(false, std::memory_order_relaxed);
        return;
    }
    predecessor->next.store(&node, std::memory_order_release);
    BackoffPolicy backoff(options_.backoff, options_.strategy, &node.resume, trace);
    while (node.locked.load(std::memory_order_acquire)) {
        backoff.on_spin_wait();
    }
}

void McsLock::unlock(LockNode& node) {
    LockNode* successor = node.next.load(std::memory_order_acquire);
    if (successor == nullptr) {
        LockNode* expected = &node;
        if (tail_.compare_exchange_strong(expected, nullptr, std::memory_order_acq_rel,
                                          std::memory_order_relaxed)) {
            return;
        }
        assert(expected != nullptr && "unlock of an McsLock that is not held");
        // A successor swapped the tail but has not linked itself yet. That
        // window is short, so no parking here.
        BackoffPolicy backoff(options_.backoff, options_.strategy.without_suspend());
        while ((successor = node.next.load(std::memory_order_acquire)) == nullptr) {
            backoff.on_spin_wait();
        }
    }
    // Claim the resume word before the handoff: once `locked` drops, the
    // successor may return and destroy its node.
    const auto parked = claim_waiter(successor->resume);
    successor->locked.store(false, std::memory_order_release);
    if (parked > kKeepActive) {
        runtime::resume(runtime::ResumeHandle{parked});
    }
}

CohortLock::CohortLock(std::size_t queues, LockOptions options, QueueSelection selection)
    : queue_count_(queues), options_(options), selection_(selection) {
    if (queues == 0) {
        throw ConfigError("cohort lock needs at least one queue");
    }
    queues_.reserve(queues);
    for (std::size_t i = 0; i < queues; ++i) {
        queues_.push_back(std::make_unique<McsLock>(options));
    }
}

std::size_t CohortLock::select_queue() const {
    if (selection_ == QueueSelection::kRandom) {
        return runtime::task_random() % queue_count_;
    }
    return runtime::current_carrier().index % queue_count_;
}

void CohortLock::lock(LockNode& node, BackoffTrace* trace) {
    if (outer_.try_lock()) {
        node.cohort_queue = -1;
        return;
    }
    const std::size_t queue = select_queue();
    node.cohort_queue = static_cast<int>(queue);
    queues_[queue]->lock(node, trace);
    // Queue head: compete for the outer flag, never parking.
    outer_.lock_with(options_.backoff, options_.strategy.without_suspend(), trace);
}

void CohortLock::unlock(LockNode& node) {
    outer_.unlock();
    if (node.cohort_queue >= 0) {
        queues_[static_cast<std::size_t>(node.cohort_queue)]->unlock(node);
    }
}

void BaselineMutex::lock() {
    if (try_lock()) {
        return;
    }
    while (true) {
        guard_.lock();
        // Recheck under the guard; unlock clears the flag before it looks
        // at the waitlist, so a free flag here cannot be missed.
        if (try_lock()) {
            guard_.unlock();
            return;
        }
        if (!runtime::in_task()) {
            guard_.unlock();
            runtime::yield_now();
            continue;
        }
        runtime::suspend_current([this](runtime::ResumeHandle handle) {
            waitlist_.push_back(handle);
            guard_.unlock();
        });
        if (try_lock()) {
            return;
        }
    }
}

void BaselineMutex::unlock() {
    assert(flag_.load(std::memory_order_relaxed) && "unlock of a BaselineMutex that is not held");
    flag_.store(false, std::memory_order_seq_cst);
    runtime::ResumeHandle next;
    {
        std::lock_guard lock(guard_);
        if (waitlist_.empty()) {
            return;
        }
        next = waitlist_.front();
        waitlist_.pop_front();
    }
    runtime::resume(next);
}

std::size_t BaselineMutex::waiting() const {
    std::lock_guard lock(guard_);
    return waitlist_.size();
}

LockSpec LockSpec::parse(std::string_view name, std::size_t default_queues) {
    if (name == "TTAS") {
        return {LockKind::kTtas, 1};
    }
    if (name == "MCS") {
        return {LockKind::kMcs, 1};
    }
    if (name == "BASELINE") {
        return {LockKind::kBaseline, 1};
    }
    constexpr std::string_view kCohortPrefix = "TTAS-MCS";
    if (name.substr(0, kCohortPrefix.size()) == kCohortPrefix) {
        auto rest = name.substr(kCohortPrefix.size());
        if (rest.empty()) {
            if (default_queues == 0) {
                throw ConfigError("cohort lock needs at least one queue");
            }
            return {LockKind::kCohort, default_queues};
        }
        if (rest.front() == '-') {
            rest.remove_prefix(1);
            std::size_t queues = 0;
            const auto [end, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), queues);
            if (ec == std::errc{} && end == rest.data() + rest.size() && queues > 0) {
                return {LockKind::kCohort, queues};
            }
        }
    }
    throw ConfigError("unknown lock name: " + std::string(name));
}

std::string LockSpec::name() const {
    switch (kind) {
        case LockKind::kTtas:
            return "TTAS";
        case LockKind::kMcs:
            return "MCS";
        case LockKind::kCohort:
            return "TTAS-MCS-" + std::to_string(queues);
        case LockKind::kBaseline:
            return "BASELINE";
    }
    return "?";
}

AnyLock::AnyLock(const LockSpec& spec, LockOptions options, QueueSelection selection)
    : spec_(spec) {
    options.backoff.validate();
    switch (spec.kind) {
        case LockKind::kTtas:
            lock_.emplace<TtasLock>(options);
            break;
        case LockKind::kMcs:
            lock_.emplace<McsLock>(options);
            break;
        case LockKind::kCohort:
            lock_.emplace<CohortLock>(spec.queues, options, selection);
            break;
        case LockKind::kBaseline:
            lock_.emplace<BaselineMutex>();
            break;
    }
}

void AnyLock::lock(LockNode& node) {
    switch (spec_.kind) {
        case LockKind::kTtas:
            std::get<TtasLock>(lock_).lock();
            break;
        case LockKind::kMcs:
            std::get<McsLock>(lock_).lock(node);
            break;
        case LockKind::kCohort:
            std::get<CohortLock>(lock_).lock(node);
            break;
        case LockKind::kBaseline:
            std::get<BaselineMutex>(lock_).lock();
            break;
    }
}

void AnyLock::unlock(LockNode& node) {
    switch (spec_.kind) {
        case LockKind::kTtas:
            std::get<TtasLock>(lock_).unlock();
            break;
        case LockKind::kMcs:
            std::get<McsLock>(lock_).unlock(node);
            break;
        case LockKind::kCohort:
            std::get<CohortLock>(lock_).unlock(node);
            break;
        case LockKind::kBaseline:
            std::get<BaselineMutex>(lock_).unlock();
            break;
    }
}

StrategyMask resolve_strategy(const LockSpec& spec, std::string_view code) {
    if (code == "n/a") {
        if (spec.kind != LockKind::kBaseline) {
            throw ConfigError("strategy n/a is only valid for BASELINE");
        }
        return StrategyMask{};
    }
    return StrategyMask::parse(code);
}

}  // namespace lwlock
