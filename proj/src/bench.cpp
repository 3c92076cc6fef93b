#include "lwlock/bench.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <span>
#include <tuple>
#include <type_traits>

#include "lwlock/barrier.hpp"
#include "lwlock/isolate.hpp"
#include "lwlock/stats.hpp"

namespace lwlock::bench {
namespace {

using Clock = std::chrono::steady_clock;

struct TaskTally {
    std::uint64_t acquisitions = 0;
    std::vector<std::uint64_t> latencies_ns;
};

BenchmarkRecord blank_record(const BenchConfig& config, std::size_t rep) {
    BenchmarkRecord record;
    record.lock = LockSpec::parse(config.lock_name, config.queues).name();
    record.strategy = config.strategy_code;
    record.scenario = std::string(scenario_name(config.scenario));
    record.carriers = config.carriers;
    record.tasks = config.tasks;
    record.queues = LockSpec::parse(config.lock_name, config.queues).queues;
    record.rep = rep;
    return record;
}

}  // namespace

void BenchConfig::validate() const {
    resolve_strategy(LockSpec::parse(lock_name, queues), strategy_code);
    backoff.validate();
    if (carriers == 0) {
        throw ConfigError("carriers must be at least 1");
    }
    if (tasks == 0) {
        throw ConfigError("tasks must be at least 1");
    }
    if (!(duration_s > 0.0)) {
        throw ConfigError("duration must be positive");
    }
    if (warmup_s < 0.0) {
        throw ConfigError("warmup must not be negative");
    }
    if (repetitions == 0) {
        throw ConfigError("repetitions must be at least 1");
    }
    if (grace_factor < 1.0) {
        throw ConfigError("grace factor below 1");
    }
}

std::string_view to_string(RunStatus status) {
    switch (status) {
        case RunStatus::kOk:
            return "ok";
        case RunStatus::kDeadlocked:
            return "deadlocked";
        case RunStatus::kInconsistent:
            return "inconsistent";
        case RunStatus::kError:
            return "error";
    }
    return "error";
}

RunStatus parse_run_status(std::string_view text) {
    for (auto status : {RunStatus::kOk, RunStatus::kDeadlocked, RunStatus::kInconsistent,
                        RunStatus::kError}) {
        if (to_string(status) == text) {
            return status;
        }
    }
    throw std::runtime_error("unknown run status: " + std::string(text));
}

RepetitionDetail run_repetition(const BenchConfig& config, std::size_t rep) {
    config.validate();
    const LockSpec spec = LockSpec::parse(config.lock_name, config.queues);
    const LockOptions options{config.backoff, resolve_strategy(spec, config.strategy_code)};

    AnyLock lock(spec, options, config.selection);
    SharedData data;
    CoopBarrier barrier(config.tasks, config.backoff);
    const Scenario scenario{config.scenario, {}};
    std::vector<TaskTally> tallies(config.tasks);

    const auto warmup = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(config.warmup_s));
    const auto duration = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(config.duration_s));
    Clock::time_point warm_end;
    Clock::time_point start;
    Clock::time_point deadline;
    Clock::time_point end;

    auto worker = [&](std::size_t index) {
        barrier.arrive_and_wait([&] { warm_end = Clock::now() + warmup; });
        while (Clock::now() < warm_end) {
            LockNode node;
            lock.lock(node);
            scenario.critical_section(data);
            lock.unlock(node);
            scenario.parallel_work();
        }
        barrier.arrive_and_wait([&] {
            data.reset();
            start = Clock::now();
            deadline = start + duration;
        });

        TaskTally& tally = tallies[index];
        tally.latencies_ns.reserve(1 << 14);
        while (Clock::now() < deadline) {
            LockNode node;
            const auto before = Clock::now();
            lock.lock(node);
            const auto after = Clock::now();
            scenario.critical_section(data);
            lock.unlock(node);
            scenario.parallel_work();
            tally.latencies_ns.push_back(static_cast<std::uint64_t>(
                std::chrono::duration_cast<std::chrono::nanoseconds>(after - before).count()));
            ++tally.acquisitions;
        }
        barrier.arrive_and_wait([&] { end = Clock::now(); });
    };

    runtime::RuntimeConfig runtime_config;
    runtime_config.carriers = config.carriers;
    runtime_config.pool_policy = config.pool_policy;
    runtime_config.seed = config.seed;
    runtime::start(runtime_config, [&] {
        std::vector<runtime::JoinHandle> workers;
        workers.reserve(config.tasks);
        for (std::size_t i = 0; i < config.tasks; ++i) {
            workers.push_back(runtime::spawn([&worker, i] { worker(i); }));
        }
        for (auto& handle : workers) {
            handle.join();
        }
    });

    RepetitionDetail detail;
    BenchmarkRecord& record = detail.record;
    record = blank_record(config, rep);
    record.duration_s = std::chrono::duration<double>(end - start).count();

    std::vector<std::uint64_t> latencies;
    for (const auto& tally : tallies) {
        record.acquisitions += tally.acquisitions;
        detail.per_task_acquisitions.push_back(tally.acquisitions);
        latencies.insert(latencies.end(), tally.latencies_ns.begin(), tally.latencies_ns.end());
    }
    detail.latency_samples = latencies.size();
    detail.shared_fields = data.snapshot();
    if (record.duration_s > 0.0) {
        record.throughput_per_s = static_cast<double>(record.acquisitions) / record.duration_s;
    }
    if (!latencies.empty()) {
        const auto q = compute_quantiles(latencies, {0.5, 0.95, 0.99});
        record.lat_ns_q50 = q[0];
        record.lat_ns_q95 = q[1];
        record.lat_ns_q99 = q[2];
    }
    const bool counts_match =
        config.scenario != ScenarioKind::kCacheLineIncrement ||
        data.all_equal(static_cast<std::int64_t>(record.acquisitions));
    record.status = counts_match ? RunStatus::kOk : RunStatus::kInconsistent;
    return detail;
}

std::vector<BenchmarkRecord> run_benchmark(const BenchConfig& config) {
    config.validate();
    std::vector<BenchmarkRecord> records;
    records.reserve(config.repetitions);
    for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
        if (!config.isolate) {
            records.push_back(run_repetition(config, rep).record);
            continue;
        }
        const auto outcome = run_isolated(
            [&] { return to_csv_row(run_repetition(config, rep).record); },
            std::chrono::duration<double>(config.timeout_s()));
        BenchmarkRecord record = blank_record(config, rep);
        switch (outcome.status) {
            case IsolatedOutcome::Status::kCompleted:
                record = parse_csv_row(outcome.output);
                break;
            case IsolatedOutcome::Status::kTimedOut:
                record.status = RunStatus::kDeadlocked;
                break;
            case IsolatedOutcome::Status::kFailed:
                record.status = RunStatus::kError;
                break;
        }
        records.push_back(std::move(record));
    }
    return records;
}

std::vector<BenchmarkRecord> run_sweep(const BenchConfig& base,
                                       const std::vector<std::string>& locks,
                                       const std::vector<std::string>& strategies,
                                       const std::vector<std::size_t>& task_counts) {
    std::vector<BenchmarkRecord> all;
    for (const auto& lock : locks) {
        for (const auto& strategy : strategies) {
            for (std::size_t tasks : task_counts) {
                BenchConfig config = base;
                config.lock_name = lock;
                config.strategy_code = strategy;
                config.tasks = tasks;
                auto records = run_benchmark(config);
                all.insert(all.end(), records.begin(), records.end());
            }
        }
    }
    return all;
}

std::vector<std::size_t> power_of_two_task_counts(std::size_t carriers, std::size_t factor) {
    std::vector<std::size_t> counts;
    const std::size_t limit = std::max<std::size_t>(1, carriers * factor);
    for (std::size_t n = 1; n <= limit; n *= 2) {
        counts.push_back(n);
    }
    return counts;
}

std::vector<BenchmarkRecord> summarize_medians(const std::vector<BenchmarkRecord>& records) {
    using Key = std::tuple<std::string, std::string, std::string, std::size_t, std::size_t,
                           std::size_t>;
    std::map<Key, std::vector<const BenchmarkRecord*>> groups;
    for (const auto& record : records) {
        if (record.status != RunStatus::kOk) {
            continue;
        }
        groups[{record.lock, record.strategy, record.scenario, record.carriers, record.tasks,
                record.queues}]
            .push_back(&record);
    }

    std::vector<BenchmarkRecord> out;
    for (const auto& [key, group] : groups) {
        auto column = [&](auto field) {
            using T = std::decay_t<decltype(group.front()->*field)>;
            std::vector<T> values;
            for (const auto* record : group) {
                values.push_back(record->*field);
            }
            return median(std::span<const T>(values));
        };
        BenchmarkRecord summary = *group.front();
        summary.rep = group.size();
        summary.duration_s = column(&BenchmarkRecord::duration_s);
        summary.acquisitions = column(&BenchmarkRecord::acquisitions);
        summary.throughput_per_s = column(&BenchmarkRecord::throughput_per_s);
        summary.lat_ns_q50 = column(&BenchmarkRecord::lat_ns_q50);
        summary.lat_ns_q95 = column(&BenchmarkRecord::lat_ns_q95);
        summary.lat_ns_q99 = column(&BenchmarkRecord::lat_ns_q99);
        out.push_back(std::move(summary));
    }
    return out;
}

}  // namespace lwlock::bench
