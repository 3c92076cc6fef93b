#include "lwlock/backoff.hpp"

#include <algorithm>

#include "lwlock/cpu.hpp"

namespace lwlock {

void BackoffConfig::validate() const {
    if (yield_limit == 0) {
        throw ConfigError("yield_limit must be positive");
    }
    if (yield_limit > suspend_limit) {
        throw ConfigError("yield_limit must not exceed suspend_limit");
    }
    if (spin_limit == 0) {
        throw ConfigError("spin_limit must be at least 1");
    }
}

StrategyMask StrategyMask::parse(std::string_view code) {
    if (code.size() != 3) {
        throw ConfigError("strategy code must have three letters: " + std::string(code));
    }
    auto stage = [&](std::size_t pos, char letter) {
        if (code[pos] == letter) {
            return true;
        }
        if (code[pos] == '*') {
            return false;
        }
        throw ConfigError("bad strategy code: " + std::string(code));
    };
    return StrategyMask{stage(0, 'S'), stage(1, 'Y'), stage(2, 'S')};
}

std::string StrategyMask::code() const {
    return {spin ? 'S' : '*', yield ? 'Y' : '*', suspend ? 'S' : '*'};
}

std::string_view to_string(WaitAction action) {
    switch (action) {
        case WaitAction::kSpin:
            return "spin";
        case WaitAction::kYield:
            return "yield";
        case WaitAction::kSuspend:
            return "suspend";
    }
    return "?";
}

WaitAction select_action(std::uint32_t iterations, const BackoffConfig& config,
                         StrategyMask strategy, bool can_suspend) {
    const bool suspend_ok = strategy.suspend && can_suspend;
    if (iterations < config.yield_limit) {
        if (strategy.spin) {
            return WaitAction::kSpin;
        }
        if (strategy.yield) {
            return WaitAction::kYield;
        }
        return suspend_ok ? WaitAction::kSuspend : WaitAction::kSpin;
    }
    if (iterations < config.suspend_limit || !can_suspend) {
        if (strategy.yield) {
            return WaitAction::kYield;
        }
        if (strategy.spin) {
            return WaitAction::kSpin;
        }
        return suspend_ok ? WaitAction::kSuspend : WaitAction::kSpin;
    }
    if (suspend_ok) {
        return WaitAction::kSuspend;
    }
    return strategy.yield ? WaitAction::kYield : WaitAction::kSpin;
}

std::uint32_t spin_burst(std::uint32_t iterations, std::uint32_t spin_limit) {
    if (iterations >= 31) {
        return spin_limit;
    }
    return std::min(std::uint32_t{1} << iterations, spin_limit);
}

void spin(std::uint32_t ops) {
    for (std::uint32_t i = 0; i < ops; ++i) {
        cpu_relax();
    }
}

bool try_suspend(ResumeWord& word) {
    if (!runtime::in_task()) {
        runtime::yield_now();
        return false;
    }
    if (word.load(std::memory_order_acquire) != kReadyForSuspend) {
        return false;
    }
    bool parked = false;
    runtime::suspend_current([&](runtime::ResumeHandle handle) {
        auto expected = kReadyForSuspend;
        parked = word.compare_exchange_strong(expected, handle.word(), std::memory_order_acq_rel,
                                              std::memory_order_acquire);
        return parked;
    });
    return parked;
}

std::uintptr_t claim_waiter(ResumeWord& word) {
    return word.exchange(kKeepActive, std::memory_order_acq_rel);
}

void resume_waiter(ResumeWord& word) {
    const auto prior = claim_waiter(word);
    if (prior > kKeepActive) {
        runtime::resume(runtime::ResumeHandle{prior});
    }
}

void BackoffPolicy::on_spin_wait() {
    ++iterations_;
    switch (select_action(iterations_, config_, strategy_, word_ != nullptr)) {
        case WaitAction::kSpin: {
            const auto ops = spin_burst(iterations_, config_.spin_limit);
            spin(ops);
            if (trace_) {
                trace_->push_back({WaitAction::kSpin, ops, false});
            }
            break;
        }
        case WaitAction::kYield:
            runtime::yield_now();
            if (trace_) {
                trace_->push_back({WaitAction::kYield, 0, false});
            }
            break;
        case WaitAction::kSuspend: {
            const bool parked = try_suspend(*word_);
            if (trace_) {
                trace_->push_back({WaitAction::kSuspend, 0, parked});
            }
            break;
        }
    }
}

}  // namespace lwlock
