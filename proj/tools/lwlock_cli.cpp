// Command line front end: bench, sweep and verify.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lwlock/bench.hpp"
#include "lwlock/verify.hpp"

namespace {

using lwlock::bench::BenchConfig;
using lwlock::bench::BenchmarkRecord;

struct CommonFlags {
    BenchConfig config;
    std::string scenario = "cache";
    std::string pool = "global";
    std::string selection = "carrier";
    bool in_process = false;
    bool append = false;
    std::string out;
};

void add_common(CLI::App& app, CommonFlags& flags) {
    auto& c = flags.config;
    app.add_option("--scenario", flags.scenario, "cache or parallel")
        ->check(CLI::IsMember({"cache", "parallel"}));
    app.add_option("--carriers", c.carriers, "carrier threads")->check(CLI::PositiveNumber);
    app.add_option("--duration", c.duration_s, "measured seconds per repetition");
    app.add_option("--warmup", c.warmup_s, "warmup seconds per repetition");
    app.add_option("--reps", c.repetitions, "repetitions")->check(CLI::PositiveNumber);
    app.add_option("--queues", c.queues, "queue count for a bare TTAS-MCS lock name");
    app.add_option("--yield-limit", c.backoff.yield_limit);
    app.add_option("--suspend-limit", c.backoff.suspend_limit);
    app.add_option("--spin-limit", c.backoff.spin_limit);
    app.add_option("--seed", c.seed);
    app.add_option("--pool", flags.pool, "ready pool: global or stealing")
        ->check(CLI::IsMember({"global", "stealing"}));
    app.add_option("--queue-selection", flags.selection, "cohort queue choice: carrier or random")
        ->check(CLI::IsMember({"carrier", "random"}));
    app.add_option("--grace", c.grace_factor, "hang timeout as a multiple of --duration");
    app.add_flag("--in-process", flags.in_process,
                 "run repetitions in this process (a deadlock then hangs the tool)");
    app.add_flag("--append", flags.append, "append to --out instead of replacing it");
    app.add_option("--out", flags.out, "CSV output path")->required();
}

void finish_config(CommonFlags& flags) {
    auto& c = flags.config;
    c.scenario = lwlock::bench::parse_scenario(flags.scenario);
    c.pool_policy = flags.pool == "stealing" ? lwlock::runtime::PoolPolicy::kPerCarrierStealing
                                             : lwlock::runtime::PoolPolicy::kGlobalFifo;
    c.selection = flags.selection == "random" ? lwlock::QueueSelection::kRandom
                                              : lwlock::QueueSelection::kCarrierModN;
    c.isolate = !flags.in_process;
}

// Run parameters that do not fit the CSV columns go to a sidecar file.
void write_metadata(const CommonFlags& flags, const std::string& command) {
    const auto& c = flags.config;
    nlohmann::json meta;
    meta["command"] = command;
    meta["clock"] = "std::chrono::steady_clock";
    meta["clock_period_ns"] = 1e9 * std::chrono::steady_clock::period::num /
                              std::chrono::steady_clock::period::den;
    meta["latency"] = "nanoseconds from before LOCK to after LOCK, nearest-rank quantiles";
    meta["warmup_s"] = c.warmup_s;
    meta["requested_duration_s"] = c.duration_s;
    meta["yield_limit"] = c.backoff.yield_limit;
    meta["suspend_limit"] = c.backoff.suspend_limit;
    meta["spin_limit"] = c.backoff.spin_limit;
    meta["seed"] = c.seed;
    meta["pool"] = flags.pool;
    meta["queue_selection"] = flags.selection;
    meta["hang_timeout_s"] = c.timeout_s();
    std::ofstream(flags.out + ".meta.json") << meta.dump(2) << '\n';
}

void print_records(const std::vector<BenchmarkRecord>& records) {
    std::cout << std::left << std::setw(12) << "lock" << std::setw(5) << "str" << std::setw(9)
              << "scenario" << std::right << std::setw(4) << "K" << std::setw(6) << "N"
              << std::setw(4) << "rep" << std::setw(14) << "acq/s" << std::setw(12) << "q50ns"
              << std::setw(12) << "q99ns" << "  status\n";
    for (const auto& r : records) {
        std::cout << std::left << std::setw(12) << r.lock << std::setw(5) << r.strategy
                  << std::setw(9) << r.scenario << std::right << std::setw(4) << r.carriers
                  << std::setw(6) << r.tasks << std::setw(4) << r.rep << std::setw(14)
                  << std::fixed << std::setprecision(0) << r.throughput_per_s << std::setw(12)
                  << r.lat_ns_q50 << std::setw(12) << r.lat_ns_q99 << "  "
                  << lwlock::bench::to_string(r.status) << '\n';
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> items;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (!item.empty()) {
            items.push_back(item);
        }
    }
    return items;
}

int run_verify(const lwlock::verify::MatrixOptions& options) {
    std::size_t unexpected = 0;
    std::cout << std::left << std::setw(7) << "result" << std::setw(6) << "want"
              << std::setw(58) << "check" << "observed\n";
    lwlock::verify::run_matrix(options, [&](const lwlock::verify::MatrixRow& row) {
        const char* result = row.report.pass ? "pass" : "FAIL";
        const char* want = row.expect_pass ? "pass" : "fail";
        if (!row.as_expected()) {
            ++unexpected;
        }
        std::cout << std::left << std::setw(7) << result << std::setw(6) << want
                  << std::setw(58) << row.report.name << row.report.observed;
        if (!row.as_expected()) {
            std::cout << "  (expected " << row.report.expected << ")  UNEXPECTED";
        }
        std::cout << std::endl;
    });
    std::cout << (unexpected == 0 ? "all verdicts as expected"
                                  : std::to_string(unexpected) + " unexpected verdict(s)")
              << '\n';
    return unexpected == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Locks for cooperative tasks: benchmarks and verification"};
    app.require_subcommand(1);

    CommonFlags bench_flags;
    auto* bench = app.add_subcommand("bench", "benchmark one lock configuration");
    bench->add_option("--lock", bench_flags.config.lock_name,
                      "TTAS, MCS, TTAS-MCS-<N> or BASELINE")
        ->required();
    bench->add_option("--strategy", bench_flags.config.strategy_code,
                      "three-letter code such as SYS, SY*, S*S, *Y*, S** (n/a for BASELINE)");
    bench->add_option("--tasks", bench_flags.config.tasks, "tasks")->check(CLI::PositiveNumber);
    add_common(*bench, bench_flags);

    CommonFlags sweep_flags;
    std::string sweep_locks = "TTAS,MCS,TTAS-MCS-4,BASELINE";
    std::string sweep_strategies = "SYS,SY*";
    std::vector<std::size_t> sweep_tasks;
    std::size_t sweep_factor = 16;
    auto* sweep = app.add_subcommand("sweep", "benchmark over locks, strategies and task counts");
    sweep->add_option("--locks", sweep_locks, "comma separated lock names");
    sweep->add_option("--strategies", sweep_strategies,
                      "comma separated codes; BASELINE always runs as n/a");
    sweep->add_option("--tasks", sweep_tasks, "task counts (default powers of two)");
    sweep->add_option("--max-factor", sweep_factor,
                      "default task counts are powers of two up to this times --carriers");
    add_common(*sweep, sweep_flags);

    lwlock::verify::MatrixOptions verify_options;
    double deadlock_timeout = verify_options.deadlock_timeout.count();
    auto* verify = app.add_subcommand("verify", "run the correctness matrix");
    verify->add_option("--me-iterations", verify_options.me_iterations,
                       "acquisitions per task in the mutual exclusion cells");
    verify->add_option("--me-tasks", verify_options.me_tasks);
    verify->add_option("--deadlock-timeout", deadlock_timeout, "seconds per deadlock cell");
    verify->add_option("--max-carriers", verify_options.deadlock_carriers,
                       "carrier counts for the deadlock cells");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*bench) {
            finish_config(bench_flags);
            bench_flags.config.validate();
            const auto records = lwlock::bench::run_benchmark(bench_flags.config);
            lwlock::bench::write_csv(bench_flags.out, records, bench_flags.append);
            write_metadata(bench_flags, "bench");
            print_records(records);
            return 0;
        }
        if (*sweep) {
            finish_config(sweep_flags);
            if (sweep_tasks.empty()) {
                sweep_tasks = lwlock::bench::power_of_two_task_counts(
                    sweep_flags.config.carriers, sweep_factor);
            }
            std::vector<BenchmarkRecord> records;
            for (const auto& lock : split_list(sweep_locks)) {
                const auto spec = lwlock::LockSpec::parse(lock, sweep_flags.config.queues);
                auto strategies = split_list(sweep_strategies);
                if (spec.kind == lwlock::LockKind::kBaseline) {
                    strategies = {"n/a"};
                }
                auto part = lwlock::bench::run_sweep(sweep_flags.config, {lock}, strategies,
                                                     sweep_tasks);
                print_records(part);
                records.insert(records.end(), part.begin(), part.end());
            }
            lwlock::bench::write_csv(sweep_flags.out, records, sweep_flags.append);
            write_metadata(sweep_flags, "sweep");
            return 0;
        }
        verify_options.deadlock_timeout = lwlock::verify::Seconds(deadlock_timeout);
        return run_verify(verify_options);
    } catch (const lwlock::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
