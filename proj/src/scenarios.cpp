#include "lwlock/scenarios.hpp"

#include <atomic>
#include <vector>

#include "lwlock/runtime.hpp"

namespace lwlock::bench {
namespace {

void count(std::atomic<std::uint64_t> ScenarioCounters::*field, const ScenarioOptions& options,
           std::uint64_t n) {
    if (options.counters != nullptr) {
        (options.counters->*field).fetch_add(n, std::memory_order_relaxed);
    }
}

void yielding_blocks(std::uint32_t blocks, const ScenarioOptions& options) {
    for (std::uint32_t i = 0; i < blocks; ++i) {
        noops(kBlockNoops);
        count(&ScenarioCounters::noops, options, kBlockNoops);
        if (!options.skip_parallel_yields) {
            runtime::yield_now();
            count(&ScenarioCounters::yields, options, 1);
        }
    }
}

void bump(std::int64_t& field) {
    std::atomic_ref<std::int64_t> ref(field);
    ref.store(ref.load(std::memory_order_relaxed) + 1, std::memory_order_relaxed);
}

}  // namespace

void SharedData::increment_all() {
    for (auto& field : first.fields) {
        bump(field);
    }
    for (auto& field : second.fields) {
        bump(field);
    }
}

void SharedData::reset() {
    first.fields.fill(0);
    second.fields.fill(0);
}

std::array<std::int64_t, 8> SharedData::snapshot() const {
    std::array<std::int64_t, 8> out{};
    for (std::size_t i = 0; i < 4; ++i) {
        out[i] = first.fields[i];
        out[i + 4] = second.fields[i];
    }
    return out;
}

bool SharedData::all_equal(std::int64_t value) const {
    for (auto field : snapshot()) {
        if (field != value) {
            return false;
        }
    }
    return true;
}

ScenarioKind parse_scenario(std::string_view name) {
    if (name == "cache") {
        return ScenarioKind::kCacheLineIncrement;
    }
    if (name == "parallel") {
        return ScenarioKind::kParallelizable;
    }
    throw ConfigError("unknown scenario: " + std::string(name));
}

std::string_view scenario_name(ScenarioKind kind) {
    return kind == ScenarioKind::kCacheLineIncrement ? "cache" : "parallel";
}

void cs_cache_line_increment(SharedData& data, const ScenarioOptions& options) {
    data.increment_all();
    runtime::yield_now();
    count(&ScenarioCounters::yields, options, 1);
}

void parallel_cache_line_scenario(const ScenarioOptions& options) {
    yielding_blocks(kCacheLineParallelBlocks, options);
}

void cs_parallelizable(const ScenarioOptions& options) {
    std::vector<runtime::JoinHandle> children;
    children.reserve(kParallelizableChildren);
    for (std::uint32_t i = 0; i < kParallelizableChildren; ++i) {
        children.push_back(runtime::spawn([&options] {
            noops(kChildNoops);
            count(&ScenarioCounters::noops, options, kChildNoops);
            count(&ScenarioCounters::completed, options, 1);
        }));
        count(&ScenarioCounters::spawned, options, 1);
    }
    for (auto& child : children) {
        child.join();
    }
}

void parallel_parallelizable_scenario(const ScenarioOptions& options) {
    yielding_blocks(kParallelizableBlocks, options);
}

void Scenario::critical_section(SharedData& data) const {
    if (kind == ScenarioKind::kCacheLineIncrement) {
        cs_cache_line_increment(data, options);
    } else {
        cs_parallelizable(options);
    }
}

void Scenario::parallel_work() const {
    if (kind == ScenarioKind::kCacheLineIncrement) {
        parallel_cache_line_scenario(options);
    } else {
        parallel_parallelizable_scenario(options);
    }
}

}  // namespace lwlock::bench
