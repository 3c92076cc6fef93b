#ifndef LWLOCK_SCENARIOS_HPP_
#define LWLOCK_SCENARIOS_HPP_

// The two benchmark workloads. Each is a critical section (run under the
// lock) plus a parallel section (run after unlock). Both contain context
// switches, which is what breaks spin-only locks on cooperative tasks.

#include <array>
#include <atomic>
#include <cstdint>
#include <string>
#include <string_view>

#include "lwlock/cpu.hpp"

namespace lwlock::bench {

inline constexpr std::uint32_t kBlockNoops = 1000;
inline constexpr std::uint32_t kCacheLineParallelBlocks = 100;
inline constexpr std::uint32_t kParallelizableChildren = 12;
inline constexpr std::uint32_t kChildNoops = 10000;
inline constexpr std::uint32_t kParallelizableBlocks = 10;

struct alignas(kCacheLineSize) CacheLineRecord {
    std::array<std::int64_t, 4> fields{};
};

/// Two cache-line aligned records of four integers each.
struct SharedData {
    CacheLineRecord first;
    CacheLineRecord second;

    /// Adds one to all eight fields. Plain loads and stores, so unprotected
    /// concurrent calls lose updates instead of hiding the race.
    void increment_all();
    void reset();
    /// True when all eight fields equal `value`.
    bool all_equal(std::int64_t value) const;
    std::array<std::int64_t, 8> snapshot() const;
};

/// Optional instrumentation for the scenario procedures.
struct ScenarioCounters {
    std::atomic<std::uint64_t> noops{0};
    std::atomic<std::uint64_t> yields{0};
    std::atomic<std::uint64_t> spawned{0};
    std::atomic<std::uint64_t> completed{0};
};

struct ScenarioOptions {
    ScenarioCounters* counters = nullptr;
    /// Drop the yields from the parallel sections. Only for starvation
    /// experiments; never set in benchmarks.
    bool skip_parallel_yields = false;
};

enum class ScenarioKind { kCacheLineIncrement, kParallelizable };

/// "cache" or "parallel".
ScenarioKind parse_scenario(std::string_view name);
std::string_view scenario_name(ScenarioKind kind);

/// Increment every field once, then yield before returning.
void cs_cache_line_increment(SharedData& data, const ScenarioOptions& options = {});

/// 100 blocks of 1000 no-ops, a yield after each.
void parallel_cache_line_scenario(const ScenarioOptions& options = {});

/// Spawn 12 tasks of 10000 no-ops each and join them all.
void cs_parallelizable(const ScenarioOptions& options = {});

/// 10 blocks of 1000 no-ops, a yield after each.
void parallel_parallelizable_scenario(const ScenarioOptions& options = {});

struct Scenario {
    ScenarioKind kind = ScenarioKind::kCacheLineIncrement;
    ScenarioOptions options;

    void critical_section(SharedData& data) const;
    void parallel_work() const;
};

}  // namespace lwlock::bench

#endif  // LWLOCK_SCENARIOS_HPP_
