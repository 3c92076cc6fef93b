#include "lwlock/verify.hpp"

#include <algorithm>
#include <atomic>
#include <sstream>

#include "lwlock/isolate.hpp"
#include "lwlock/runtime.hpp"
#include "lwlock/scenarios.hpp"

namespace lwlock::verify {
namespace {

class NamedLock final : public LockUnderTest {
public:
    NamedLock(const LockSpec& spec, LockOptions options) : lock_(spec, options) {}
    void lock(LockNode& node) override { lock_.lock(node); }
    void unlock(LockNode& node) override { lock_.unlock(node); }

private:
    AnyLock lock_;
};

std::string cell_name(std::string_view check, const std::string& lock, const std::string& strategy,
                      std::size_t carriers, std::size_t tasks) {
    std::ostringstream out;
    out << check << ' ' << lock << ' ' << strategy << " carriers=" << carriers
        << " tasks=" << tasks;
    return out.str();
}

std::string describe_failure(const IsolatedOutcome& outcome) {
    std::ostringstream out;
    if (outcome.status == IsolatedOutcome::Status::kTimedOut) {
        out << "timed out after " << outcome.elapsed_s << "s";
    } else {
        out << "error: " << outcome.output;
    }
    return out.str();
}

// Pure model of one park/wake round on a resume word. The waiter runs
// read, CAS and the carrier's commit of the park; the waker runs its
// claim on the word and, when it got a handle, the resume. Task states
// follow the runtime: a resume that lands before the commit is remembered
// and the commit then requeues the task.
enum class ModelTask { kRunning, kSuspending, kSuspended, kResumedEarly, kRequeued };

struct ModelState {
    std::uintptr_t word = kReadyForSuspend;
    ModelTask task = ModelTask::kRunning;
    int waiter_pc = 0;  // 0 read, 1 CAS, 2 commit, 3 finished
    int waker_pc = 0;   // 0 claim, 1 resume, 2 finished
    int resumes = 0;
    bool bad_resume = false;
};

constexpr std::uintptr_t kModelHandle = 0x1000;

struct ModelTally {
    std::size_t schedules = 0;
    std::size_t lost_wakeups = 0;
    std::size_t bad_resumes = 0;
};

void waiter_step(ModelState& s) {
    switch (s.waiter_pc) {
        case 0:
            s.waiter_pc = s.word == kReadyForSuspend ? 1 : 3;
            break;
        case 1:
            if (s.word == kReadyForSuspend) {
                s.word = kModelHandle;
                s.task = ModelTask::kSuspending;
                s.waiter_pc = 2;
            } else {
                s.waiter_pc = 3;
            }
            break;
        case 2:
            s.task = s.task == ModelTask::kResumedEarly ? ModelTask::kRequeued
                                                        : ModelTask::kSuspended;
            s.waiter_pc = 3;
            break;
        default:
            break;
    }
}

void waker_step(ModelState& s, bool broken) {
    if (s.waker_pc == 0) {
        if (broken) {
            s.word = kKeepActive;
            s.waker_pc = 2;
            return;
        }
        const auto prior = s.word;
        s.word = kKeepActive;
        s.waker_pc = prior > kKeepActive ? 1 : 2;
        return;
    }
    if (s.waker_pc == 1) {
        ++s.resumes;
        if (s.task == ModelTask::kSuspending) {
            s.task = ModelTask::kResumedEarly;
        } else if (s.task == ModelTask::kSuspended) {
            s.task = ModelTask::kRequeued;
        } else {
            s.bad_resume = true;
        }
        s.waker_pc = 2;
    }
}

void explore(const ModelState& s, bool broken, ModelTally& tally) {
    const bool waiter_done = s.waiter_pc == 3;
    const bool waker_done = s.waker_pc == 2;
    if (waiter_done && waker_done) {
        ++tally.schedules;
        if (s.task == ModelTask::kSuspended || s.task == ModelTask::kSuspending) {
            ++tally.lost_wakeups;
        }
        if (s.bad_resume || s.resumes > 1) {
            ++tally.bad_resumes;
        }
        return;
    }
    if (!waiter_done) {
        ModelState next = s;
        waiter_step(next);
        explore(next, broken, tally);
    }
    if (!waker_done) {
        ModelState next = s;
        waker_step(next, broken);
        explore(next, broken, tally);
    }
}

OracleReport model_report(std::string name, bool broken) {
    ModelTally tally;
    explore(ModelState{}, broken, tally);
    OracleReport report;
    report.name = std::move(name);
    report.expected = "0 lost wakeups, 0 bad resumes";
    std::ostringstream observed;
    observed << tally.schedules << " schedules, " << tally.lost_wakeups << " lost wakeups, "
             << tally.bad_resumes << " bad resumes";
    report.observed = observed.str();
    report.pass = tally.schedules > 0 && tally.lost_wakeups == 0 && tally.bad_resumes == 0;
    return report;
}

}  // namespace

LockFactory named_lock(const std::string& lock_name, const std::string& strategy,
                       const BackoffConfig& backoff) {
    const LockSpec spec = LockSpec::parse(lock_name);
    const LockOptions options{backoff, resolve_strategy(spec, strategy)};
    return [spec, options] { return std::make_unique<NamedLock>(spec, options); };
}

OracleReport check_mutual_exclusion(const std::string& lock_name, const std::string& strategy,
                                    std::size_t carriers, std::size_t tasks,
                                    std::size_t iterations, Seconds timeout) {
    const auto name = cell_name("mutual-exclusion", lock_name, strategy, carriers, tasks);
    LockFactory factory;
    try {
        factory = named_lock(lock_name, strategy);
    } catch (const std::exception& e) {
        return {name, "valid configuration", e.what(), false};
    }
    return check_mutual_exclusion(name, factory, carriers, tasks, iterations, timeout);
}

OracleReport check_mutual_exclusion(const std::string& name, const LockFactory& factory,
                                    std::size_t carriers, std::size_t tasks,
                                    std::size_t iterations, Seconds timeout) {
    const std::uint64_t target = static_cast<std::uint64_t>(tasks) * iterations;
    OracleReport report;
    report.name = name;
    report.expected = "counter=" + std::to_string(target) + " overlaps=0";

    const auto outcome = run_isolated(
        [&] {
            auto lock = factory();
            std::uint64_t counter = 0;
            std::atomic<bool> in_cs{false};
            std::atomic<std::uint64_t> overlaps{0};
            runtime::RuntimeConfig config;
            config.carriers = carriers;
            runtime::start(config, [&] {
                std::vector<runtime::JoinHandle> workers;
                for (std::size_t t = 0; t < tasks; ++t) {
                    workers.push_back(runtime::spawn([&] {
                        for (std::size_t i = 0; i < iterations; ++i) {
                            LockNode node;
                            lock->lock(node);
                            if (in_cs.exchange(true, std::memory_order_acq_rel)) {
                                overlaps.fetch_add(1, std::memory_order_relaxed);
                            }
                            std::atomic_ref<std::uint64_t> cell(counter);
                            const auto value = cell.load(std::memory_order_relaxed);
                            runtime::yield_now();
                            cell.store(value + 1, std::memory_order_relaxed);
                            in_cs.store(false, std::memory_order_release);
                            lock->unlock(node);
                        }
                    }));
                }
                for (auto& worker : workers) {
                    worker.join();
                }
            });
            return std::to_string(counter) + " " + std::to_string(overlaps.load());
        },
        timeout);

    if (outcome.status != IsolatedOutcome::Status::kCompleted) {
        report.observed = describe_failure(outcome);
        return report;
    }
    std::uint64_t counter = 0;
    std::uint64_t overlaps = 0;
    std::istringstream(outcome.output) >> counter >> overlaps;
    report.observed = "counter=" + std::to_string(counter) +
                      " overlaps=" + std::to_string(overlaps);
    report.pass = counter == target && overlaps == 0;
    return report;
}

OracleReport check_deadlock_freedom(const std::string& lock_name, const std::string& strategy,
                                    std::size_t carriers, std::size_t tasks, Seconds timeout,
                                    std::size_t rounds) {
    OracleReport report;
    report.name = cell_name("deadlock-freedom", lock_name, strategy, carriers, tasks);
    report.expected = "completed=" + std::to_string(tasks) + "/" + std::to_string(tasks);
    LockFactory factory;
    try {
        factory = named_lock(lock_name, strategy);
    } catch (const std::exception& e) {
        report.observed = e.what();
        return report;
    }

    const auto outcome = run_isolated(
        [&] {
            auto lock = factory();
            bench::SharedData data;
            const bench::Scenario scenario{bench::ScenarioKind::kParallelizable, {}};
            std::atomic<std::size_t> completed{0};
            runtime::RuntimeConfig config;
            config.carriers = carriers;
            runtime::start(config, [&] {
                std::vector<runtime::JoinHandle> workers;
                for (std::size_t t = 0; t < tasks; ++t) {
                    workers.push_back(runtime::spawn([&] {
                        for (std::size_t r = 0; r < rounds; ++r) {
                            LockNode node;
                            lock->lock(node);
                            scenario.critical_section(data);
                            lock->unlock(node);
                            scenario.parallel_work();
                        }
                        completed.fetch_add(1, std::memory_order_relaxed);
                    }));
                }
                for (auto& worker : workers) {
                    worker.join();
                }
            });
            return std::to_string(completed.load());
        },
        timeout);

    if (outcome.status != IsolatedOutcome::Status::kCompleted) {
        report.observed = describe_failure(outcome);
        return report;
    }
    report.observed = "completed=" + outcome.output + "/" + std::to_string(tasks);
    report.pass = outcome.output == std::to_string(tasks);
    return report;
}

OracleReport check_handshake_interleavings() {
    return model_report("handshake model: all interleavings", false);
}

OracleReport check_handshake_interleavings_broken_waker() {
    return model_report("handshake model: waker without exchange", true);
}

OracleReport check_suspend_handoffs(std::size_t carriers, std::size_t tasks,
                                    std::size_t handoffs, Seconds timeout) {
    OracleReport report;
    std::ostringstream name;
    name << "suspend handoffs MCS carriers=" << carriers << " tasks=" << tasks
         << " handoffs=" << handoffs;
    report.name = name.str();
    report.expected = "acquisitions=" + std::to_string(handoffs) + " in time";

    const auto outcome = run_isolated(
        [&] {
            BackoffConfig backoff;
            backoff.yield_limit = 1;
            backoff.suspend_limit = 1;
            McsLock lock(LockOptions{backoff, StrategyMask{}});
            std::atomic<std::size_t> remaining{handoffs};
            std::atomic<std::size_t> acquisitions{0};
            std::atomic<std::size_t> parks{0};
            runtime::RuntimeConfig config;
            config.carriers = carriers;
            runtime::start(config, [&] {
                std::vector<runtime::JoinHandle> workers;
                for (std::size_t t = 0; t < tasks; ++t) {
                    workers.push_back(runtime::spawn([&] {
                        BackoffTrace trace;
                        while (true) {
                            LockNode node;
                            trace.clear();
                            lock.lock(node, &trace);
                            for (const auto& event : trace) {
                                parks.fetch_add(event.suspended ? 1 : 0,
                                                std::memory_order_relaxed);
                            }
                            const bool more = remaining.load(std::memory_order_relaxed) > 0;
                            if (more) {
                                remaining.fetch_sub(1, std::memory_order_relaxed);
                                acquisitions.fetch_add(1, std::memory_order_relaxed);
                            }
                            runtime::yield_now();
                            lock.unlock(node);
                            if (!more) {
                                break;
                            }
                        }
                    }));
                }
                for (auto& worker : workers) {
                    worker.join();
                }
            });
            return std::to_string(acquisitions.load()) + " " + std::to_string(parks.load());
        },
        timeout);

    if (outcome.status != IsolatedOutcome::Status::kCompleted) {
        report.observed = describe_failure(outcome);
        return report;
    }
    std::size_t acquisitions = 0;
    std::size_t parks = 0;
    std::istringstream(outcome.output) >> acquisitions >> parks;
    report.observed = "acquisitions=" + std::to_string(acquisitions) +
                      " parks=" + std::to_string(parks);
    report.pass = acquisitions == handoffs;
    return report;
}

std::string format_trace(const BackoffTrace& trace) {
    std::string out = "[";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (i > 0) {
            out += ", ";
        }
        switch (trace[i].action) {
            case WaitAction::kSpin:
                out += "spin " + std::to_string(trace[i].spins);
                break;
            case WaitAction::kYield:
                out += "yield";
                break;
            case WaitAction::kSuspend:
                out += "suspend-attempt";
                break;
        }
    }
    out += "]";
    return out;
}

BackoffTrace record_ladder(const BackoffConfig& config, StrategyMask strategy,
                           std::uint32_t steps) {
    BackoffTrace trace;
    ResumeWord word{kReadyForSuspend};
    std::atomic<bool> finished{false};
    runtime::start(runtime::RuntimeConfig{}, [&] {
        auto waiter = runtime::spawn([&] {
            BackoffPolicy policy(config, strategy, &word, &trace);
            for (std::uint32_t i = 0; i < steps; ++i) {
                policy.on_spin_wait();
            }
            finished.store(true, std::memory_order_release);
        });
        auto waker = runtime::spawn([&] {
            while (!finished.load(std::memory_order_acquire)) {
                if (word.load(std::memory_order_acquire) > kKeepActive) {
                    resume_waiter(word);
                }
                runtime::yield_now();
            }
        });
        waiter.join();
        waker.join();
    });
    return trace;
}

OracleReport check_backoff_ladder() {
    BackoffConfig config;
    config.yield_limit = 4;
    config.suspend_limit = 6;
    config.spin_limit = 1024;
    OracleReport report;
    report.name = "backoff ladder yield_limit=4 suspend_limit=6 SYS";
    report.expected = "[spin 2, spin 4, spin 8, yield, yield, suspend-attempt]";
    report.observed = format_trace(record_ladder(config, StrategyMask{}, 6));
    report.pass = report.observed == report.expected;
    return report;
}

OracleReport check_fifo_order(const std::string& lock_name, const std::string& strategy,
                              std::size_t tasks, Seconds timeout) {
    OracleReport report;
    report.name = "fifo " + lock_name + " " + strategy + " tasks=" + std::to_string(tasks);
    std::string order;
    for (std::size_t i = 0; i < tasks; ++i) {
        order += (i ? " " : "") + std::to_string(i);
    }
    report.expected = order;
    LockFactory factory;
    try {
        BackoffConfig backoff;
        backoff.yield_limit = 2;
        backoff.suspend_limit = 4;
        factory = named_lock(lock_name, strategy, backoff);
    } catch (const std::exception& e) {
        report.observed = e.what();
        return report;
    }

    const auto outcome = run_isolated(
        [&] {
            auto lock = factory();
            std::vector<std::size_t> queued;
            std::vector<std::size_t> acquired;
            runtime::RuntimeConfig config;
            config.pool_policy = runtime::PoolPolicy::kGlobalFifo;
            runtime::start(config, [&] {
                LockNode holder;
                lock->lock(holder);
                std::vector<runtime::JoinHandle> workers;
                for (std::size_t t = 0; t < tasks; ++t) {
                    workers.push_back(runtime::spawn([&, t] {
                        LockNode node;
                        // Nothing between here and the queue join can switch.
                        queued.push_back(t);
                        lock->lock(node);
                        acquired.push_back(t);
                        runtime::yield_now();
                        lock->unlock(node);
                    }));
                }
                while (queued.size() < tasks) {
                    runtime::yield_now();
                }
                lock->unlock(holder);
                for (auto& worker : workers) {
                    worker.join();
                }
            });
            std::string line;
            for (std::size_t i = 0; i < acquired.size(); ++i) {
                line += (i ? " " : "") + std::to_string(acquired[i]);
            }
            line += "|";
            for (std::size_t i = 0; i < queued.size(); ++i) {
                line += (i ? " " : "") + std::to_string(queued[i]);
            }
            return line;
        },
        timeout);

    if (outcome.status != IsolatedOutcome::Status::kCompleted) {
        report.observed = describe_failure(outcome);
        return report;
    }
    const auto bar = outcome.output.find('|');
    report.observed = outcome.output.substr(0, bar);
    report.expected = outcome.output.substr(bar + 1);
    report.pass = report.observed == report.expected && report.observed == order;
    return report;
}

std::vector<std::string> strategies_for(const LockSpec& spec) {
    switch (spec.kind) {
        case LockKind::kTtas:
            return {"SYS", "SY*", "*Y*"};
        case LockKind::kMcs:
            return {"SYS", "SY*", "S*S", "*YS", "*Y*", "**S"};
        case LockKind::kCohort:
            // Queue heads wait on the outer flag without parking, so a
            // strategy without yield would spin there.
            return {"SYS", "SY*", "*YS", "*Y*"};
        case LockKind::kBaseline:
            return {"n/a"};
    }
    return {};
}

std::vector<MatrixRow> run_matrix(const MatrixOptions& options,
                                  const std::function<void(const MatrixRow&)>& progress) {
    std::vector<MatrixRow> rows;
    auto add = [&](OracleReport report, bool expect_pass) {
        rows.push_back({std::move(report), expect_pass});
        if (progress) {
            progress(rows.back());
        }
    };

    const std::vector<std::string> locks{"TTAS", "MCS", "TTAS-MCS-1", "TTAS-MCS-4", "BASELINE"};
    for (const auto& lock : locks) {
        const LockSpec spec = LockSpec::parse(lock);
        std::vector<std::string> strategies;
        if (spec.kind == LockKind::kBaseline) {
            strategies = {"n/a"};
        } else if (spec.uses_suspend()) {
            strategies = {"SY*", "SYS"};
        } else {
            strategies = {"SY*"};
        }
        for (const auto& strategy : strategies) {
            for (std::size_t carriers : options.me_carriers) {
                add(check_mutual_exclusion(lock, strategy, carriers, options.me_tasks,
                                           options.me_iterations, options.me_timeout),
                    true);
            }
        }
    }

    for (const auto& lock : locks) {
        for (const auto& strategy : strategies_for(LockSpec::parse(lock))) {
            for (std::size_t carriers : options.deadlock_carriers) {
                for (std::size_t tasks : {carriers, options.tasks_factor * carriers}) {
                    add(check_deadlock_freedom(lock, strategy, carriers, tasks,
                                               options.deadlock_timeout),
                        true);
                }
            }
        }
    }
    // A pure spinner waiting for a holder parked on the same carrier.
    add(check_deadlock_freedom("MCS", "S**", 1, 2, options.deadlock_timeout), false);
    add(check_deadlock_freedom("TTAS", "S**", 1, 2, options.deadlock_timeout), false);

    add(check_handshake_interleavings(), true);
    add(check_handshake_interleavings_broken_waker(), false);
    add(check_suspend_handoffs(2, 4, 10000), true);
    add(check_backoff_ladder(), true);
    add(check_fifo_order("MCS", "SYS", 8), true);
    add(check_fifo_order("TTAS-MCS-1", "SYS", 8), true);
    return rows;
}

}  // namespace lwlock::verify
