#ifndef LWLOCK_BENCH_HPP_
#define LWLOCK_BENCH_HPP_

// Benchmark harness: N tasks on K carriers loop
//   t0 = now; LOCK; t1 = now; critical section; UNLOCK; parallel work
// between two barriers for a fixed time. Throughput is total acquisitions
// over the measured time; latency is the distribution of t1 - t0.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "lwlock/backoff.hpp"
#include "lwlock/locks.hpp"
#include "lwlock/runtime.hpp"
#include "lwlock/scenarios.hpp"

namespace lwlock::bench {

struct BenchConfig {
    std::string lock_name = "MCS";
    std::string strategy_code = "SYS";
    ScenarioKind scenario = ScenarioKind::kCacheLineIncrement;
    std::size_t carriers = 1;
    std::size_t tasks = 1;
    double duration_s = 2.0;
    double warmup_s = 1.0;
    std::size_t repetitions = 5;
    /// Queue count for a bare "TTAS-MCS" lock name.
    std::size_t queues = 1;
    BackoffConfig backoff;
    QueueSelection selection = QueueSelection::kCarrierModN;
    runtime::PoolPolicy pool_policy = runtime::PoolPolicy::kGlobalFifo;
    std::uint64_t seed = 1;
    /// Run each repetition in a child process so a hung run can be killed
    /// and recorded instead of hanging the caller.
    bool isolate = true;
    /// A repetition may take warmup + grace_factor * duration in total.
    double grace_factor = 5.0;

    /// Throws ConfigError on bad values or unknown names.
    void validate() const;
    double timeout_s() const { return warmup_s + grace_factor * duration_s; }
};

enum class RunStatus { kOk, kDeadlocked, kInconsistent, kError };

std::string_view to_string(RunStatus status);
RunStatus parse_run_status(std::string_view text);

struct BenchmarkRecord {
    std::string lock;
    std::string strategy;
    std::string scenario;
    std::size_t carriers = 0;
    std::size_t tasks = 0;
    std::size_t queues = 0;
    std::size_t rep = 0;
    double duration_s = 0.0;  ///< measured, barrier to barrier
    std::uint64_t acquisitions = 0;
    double throughput_per_s = 0.0;
    std::uint64_t lat_ns_q50 = 0;
    std::uint64_t lat_ns_q95 = 0;
    std::uint64_t lat_ns_q99 = 0;
    RunStatus status = RunStatus::kOk;

    friend bool operator==(const BenchmarkRecord&, const BenchmarkRecord&) = default;
};

/// Details of one in-process repetition beyond the CSV record.
struct RepetitionDetail {
    BenchmarkRecord record;
    std::vector<std::uint64_t> per_task_acquisitions;
    std::size_t latency_samples = 0;
    std::array<std::int64_t, 8> shared_fields{};
};

/// One repetition in this process. Starts and stops its own runtime; must
/// not be called while a runtime is running. Hangs if the lock deadlocks.
RepetitionDetail run_repetition(const BenchConfig& config, std::size_t rep);

/// All repetitions, isolated per config.isolate. A run that exceeds the
/// timeout is recorded with RunStatus::kDeadlocked.
std::vector<BenchmarkRecord> run_benchmark(const BenchConfig& config);

/// Cartesian sweep over locks x strategies x task counts, other fields
/// taken from `base`.
std::vector<BenchmarkRecord> run_sweep(const BenchConfig& base,
                                       const std::vector<std::string>& locks,
                                       const std::vector<std::string>& strategies,
                                       const std::vector<std::size_t>& task_counts);

/// 1, 2, 4, ... up to factor * carriers.
std::vector<std::size_t> power_of_two_task_counts(std::size_t carriers, std::size_t factor);

/// Per (lock, strategy, scenario, carriers, tasks, queues) medians over
/// the ok repetitions; rep is set to the number of repetitions used.
std::vector<BenchmarkRecord> summarize_medians(const std::vector<BenchmarkRecord>& records);

// CSV with a fixed header. Timestamps come from std::chrono::steady_clock.
inline constexpr std::string_view kCsvHeader =
    "lock,strategy,scenario,carriers,tasks,queues,rep,duration_s,acquisitions,"
    "throughput_per_s,lat_ns_q50,lat_ns_q95,lat_ns_q99,status";

std::string to_csv_row(const BenchmarkRecord& record);
/// Throws std::runtime_error on a malformed row.
BenchmarkRecord parse_csv_row(std::string_view line);

void write_csv(std::ostream& out, const std::vector<BenchmarkRecord>& records, bool header);
/// Writes to `path`; with `append`, the header is only written when the
/// file is new or empty. Throws std::runtime_error on I/O failure.
void write_csv(const std::string& path, const std::vector<BenchmarkRecord>& records,
               bool append = false);
std::vector<BenchmarkRecord> read_csv(std::istream& in);
std::vector<BenchmarkRecord> read_csv(const std::string& path);

}  // namespace lwlock::bench

#endif  // LWLOCK_BENCH_HPP_
