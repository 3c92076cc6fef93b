#include "lwlock/bench.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

using namespace lwlock::bench;

namespace {

BenchConfig small(const char* lock, const char* strategy, std::size_t carriers,
                  std::size_t tasks) {
    BenchConfig config;
    config.lock_name = lock;
    config.strategy_code = strategy;
    config.carriers = carriers;
    config.tasks = tasks;
    config.duration_s = 0.2;
    config.warmup_s = 0.05;
    config.repetitions = 1;
    return config;
}

BenchmarkRecord sample_record(std::size_t rep) {
    BenchmarkRecord r;
    r.lock = "TTAS-MCS-4";
    r.strategy = "S*S";
    r.scenario = "cache";
    r.carriers = 4;
    r.tasks = 64;
    r.queues = 4;
    r.rep = rep;
    r.duration_s = 2.000123456789;
    r.acquisitions = 123456789;
    r.throughput_per_s = 61724600.1234567;
    r.lat_ns_q50 = 120;
    r.lat_ns_q95 = 4500;
    r.lat_ns_q99 = 98000;
    r.status = RunStatus::kOk;
    return r;
}

std::filesystem::path temp_csv(const std::string& name) {
    auto path = std::filesystem::temp_directory_path() / ("lwlock_" + name + ".csv");
    std::filesystem::remove(path);
    return path;
}

std::size_t line_count(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) {
        ++n;
    }
    return n;
}

}  // namespace

TEST(BenchConfig, Validation) {
    EXPECT_NO_THROW(BenchConfig{}.validate());
    auto bad = [](auto mutate) {
        BenchConfig c;
        mutate(c);
        return c;
    };
    EXPECT_THROW(bad([](auto& c) { c.lock_name = "NOPE"; }).validate(), lwlock::ConfigError);
    EXPECT_THROW(bad([](auto& c) { c.strategy_code = "XYZ"; }).validate(), lwlock::ConfigError);
    EXPECT_THROW(bad([](auto& c) { c.carriers = 0; }).validate(), lwlock::ConfigError);
    EXPECT_THROW(bad([](auto& c) { c.tasks = 0; }).validate(), lwlock::ConfigError);
    EXPECT_THROW(bad([](auto& c) { c.duration_s = 0; }).validate(), lwlock::ConfigError);
    EXPECT_THROW(bad([](auto& c) { c.warmup_s = -1; }).validate(), lwlock::ConfigError);
    EXPECT_THROW(bad([](auto& c) { c.repetitions = 0; }).validate(), lwlock::ConfigError);
    EXPECT_THROW(bad([](auto& c) { c.backoff.yield_limit = 100; }).validate(),
                 lwlock::ConfigError);
    EXPECT_NO_THROW(bad([](auto& c) {
                        c.lock_name = "BASELINE";
                        c.strategy_code = "n/a";
                    }).validate());
}

TEST(BenchConfig, DeskScaleDefaults) {
    const BenchConfig c;
    EXPECT_EQ(c.duration_s, 2.0);
    EXPECT_EQ(c.warmup_s, 1.0);
    EXPECT_EQ(c.repetitions, 5u);
    EXPECT_EQ(c.timeout_s(), 1.0 + 5 * 2.0);
}

TEST(RunRepetition, CacheScenarioArithmetic) {
    auto config = small("MCS", "SYS", 2, 6);
    const auto detail = run_repetition(config, 3);
    const auto& r = detail.record;
    EXPECT_EQ(r.status, RunStatus::kOk);
    EXPECT_EQ(r.rep, 3u);
    EXPECT_EQ(r.lock, "MCS");
    EXPECT_EQ(r.scenario, "cache");
    EXPECT_GT(r.acquisitions, 0u);
    EXPECT_EQ(std::accumulate(detail.per_task_acquisitions.begin(),
                              detail.per_task_acquisitions.end(), std::uint64_t{0}),
              r.acquisitions);
    for (auto field : detail.shared_fields) {
        EXPECT_EQ(field, static_cast<std::int64_t>(r.acquisitions));
    }
    EXPECT_EQ(detail.latency_samples, r.acquisitions);
    EXPECT_GE(r.duration_s, 0.2);
    EXPECT_NEAR(r.throughput_per_s, r.acquisitions / r.duration_s, 1e-6);
    EXPECT_LE(r.lat_ns_q50, r.lat_ns_q95);
    EXPECT_LE(r.lat_ns_q95, r.lat_ns_q99);
}

TEST(RunRepetition, EveryLockAndScenarioRuns) {
    for (const char* lock : {"TTAS", "MCS", "TTAS-MCS-2", "BASELINE"}) {
        for (auto scenario : {ScenarioKind::kCacheLineIncrement, ScenarioKind::kParallelizable}) {
            auto config = small(lock, lock == std::string("BASELINE") ? "n/a" : "SY*", 2, 4);
            config.scenario = scenario;
            config.duration_s = 0.1;
            config.warmup_s = 0.0;
            const auto r = run_repetition(config, 0).record;
            EXPECT_EQ(r.status, RunStatus::kOk) << lock;
            EXPECT_GT(r.acquisitions, 0u) << lock;
        }
    }
}

TEST(RunBenchmark, IsolatedRepetitions) {
    auto config = small("TTAS-MCS", "SYS", 2, 4);
    config.queues = 2;
    config.repetitions = 2;
    const auto records = run_benchmark(config);
    ASSERT_EQ(records.size(), 2u);
    for (std::size_t i = 0; i < records.size(); ++i) {
        EXPECT_EQ(records[i].rep, i);
        EXPECT_EQ(records[i].lock, "TTAS-MCS-2");
        EXPECT_EQ(records[i].queues, 2u);
        EXPECT_EQ(records[i].status, RunStatus::kOk);
    }
}

TEST(RunBenchmark, HungRunIsRecordedNotFatal) {
    auto config = small("MCS", "S**", 1, 2);
    config.scenario = ScenarioKind::kParallelizable;
    config.warmup_s = 0.0;
    config.grace_factor = 5.0;
    const auto records = run_benchmark(config);
    ASSERT_EQ(records.size(), 1u);
    EXPECT_EQ(records[0].status, RunStatus::kDeadlocked);
    EXPECT_EQ(records[0].acquisitions, 0u);
}

TEST(Sweep, PowerOfTwoTaskCounts) {
    EXPECT_EQ(power_of_two_task_counts(2, 16),
              (std::vector<std::size_t>{1, 2, 4, 8, 16, 32}));
    EXPECT_EQ(power_of_two_task_counts(3, 1), (std::vector<std::size_t>{1, 2}));
}

TEST(Sweep, CoversTheGrid) {
    auto base = small("MCS", "SYS", 1, 1);
    base.duration_s = 0.05;
    base.warmup_s = 0.0;
    const auto records = run_sweep(base, {"TTAS", "MCS"}, {"SY*", "SYS"}, {1, 2});
    ASSERT_EQ(records.size(), 8u);
    EXPECT_EQ(records.front().lock, "TTAS");
    EXPECT_EQ(records.back().lock, "MCS");
    EXPECT_EQ(records.back().strategy, "SYS");
    EXPECT_EQ(records.back().tasks, 2u);
}

TEST(Summary, MediansAcrossRepetitions) {
    std::vector<BenchmarkRecord> records;
    for (std::size_t rep = 0; rep < 5; ++rep) {
        auto r = sample_record(rep);
        r.throughput_per_s = 10.0 * (5 - rep);  // 50 40 30 20 10
        r.lat_ns_q99 = 100 + rep;
        records.push_back(r);
    }
    records[4].status = RunStatus::kDeadlocked;  // excluded
    auto other = sample_record(0);
    other.tasks = 8;
    records.push_back(other);

    const auto summary = summarize_medians(records);
    ASSERT_EQ(summary.size(), 2u);
    const auto& big = summary[0].tasks == 64 ? summary[0] : summary[1];
    EXPECT_EQ(big.rep, 4u);
    EXPECT_EQ(big.throughput_per_s, 30.0);  // lower middle of 50 40 30 20
    EXPECT_EQ(big.lat_ns_q99, 101u);
}

TEST(Csv, HeaderIsFixed) {
    EXPECT_EQ(kCsvHeader,
              "lock,strategy,scenario,carriers,tasks,queues,rep,duration_s,acquisitions,"
              "throughput_per_s,lat_ns_q50,lat_ns_q95,lat_ns_q99,status");
}

TEST(Csv, RoundTripsExactly) {
    std::vector<BenchmarkRecord> records{sample_record(0), sample_record(1)};
    records[1].status = RunStatus::kDeadlocked;
    records[1].throughput_per_s = 0.1 + 0.2;
    std::stringstream buffer;
    write_csv(buffer, records, true);
    EXPECT_EQ(read_csv(buffer), records);
    EXPECT_EQ(parse_csv_row(to_csv_row(records[0]) + "\r\n"), records[0]);
}

TEST(Csv, OneRecordIsTwoLines) {
    const auto path = temp_csv("one");
    write_csv(path.string(), {sample_record(0)});
    EXPECT_EQ(line_count(path), 2u);
    std::filesystem::remove(path);
}

TEST(Csv, AppendWritesHeaderOnce) {
    const auto path = temp_csv("append");
    write_csv(path.string(), {sample_record(0)}, true);
    write_csv(path.string(), {sample_record(1), sample_record(2)}, true);
    EXPECT_EQ(line_count(path), 4u);
    const auto back = read_csv(path.string());
    ASSERT_EQ(back.size(), 3u);
    EXPECT_EQ(back[2], sample_record(2));
    write_csv(path.string(), {sample_record(0)});
    EXPECT_EQ(line_count(path), 2u);
    std::filesystem::remove(path);
}

TEST(Csv, MalformedRowsThrow) {
    EXPECT_THROW(parse_csv_row("MCS,SYS,cache"), std::runtime_error);
    auto row = to_csv_row(sample_record(0));
    EXPECT_THROW(parse_csv_row(row.substr(0, row.rfind(',')) + ",sideways"), std::runtime_error);
    auto bad_number = row;
    bad_number.replace(bad_number.find(",4,64,"), 6, ",4,6x,");
    EXPECT_THROW(parse_csv_row(bad_number), std::runtime_error);
}

TEST(Csv, IoFailuresSurface) {
    EXPECT_THROW(write_csv("/nonexistent-dir/x.csv", {sample_record(0)}), std::runtime_error);
    EXPECT_THROW(read_csv("/nonexistent-dir/x.csv"), std::runtime_error);
}
