#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "lwlock/bench.hpp"
#include "lwlock/stats.hpp"
#include "lwlock/verify.hpp"

namespace py = pybind11;
using namespace lwlock;

namespace {

// Latency quantiles over integer nanosecond samples.
std::vector<std::uint64_t> quantiles(const std::vector<std::uint64_t>& samples,
                                     const std::vector<double>& qs) {
    return compute_quantiles(std::span<const std::uint64_t>(samples),
                             std::span<const double>(qs));
}

std::vector<std::string> ladder(const BackoffConfig& config, const std::string& strategy,
                                std::uint32_t steps, bool can_suspend) {
    const auto mask = StrategyMask::parse(strategy);
    std::vector<std::string> out;
    for (std::uint32_t i = 1; i <= steps; ++i) {
        const auto action = select_action(i, config, mask, can_suspend);
        if (action == WaitAction::kSpin) {
            out.push_back("spin " + std::to_string(spin_burst(i, config.spin_limit)));
        } else {
            out.emplace_back(to_string(action));
        }
    }
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Locks for cooperative tasks: benchmark harness and correctness oracles";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<BackoffConfig>(m, "BackoffConfig")
        .def(py::init([](std::uint32_t yield_limit, std::uint32_t suspend_limit,
                         std::uint32_t spin_limit) {
                 BackoffConfig c{yield_limit, suspend_limit, spin_limit};
                 c.validate();
                 return c;
             }),
             py::arg("yield_limit") = 8, py::arg("suspend_limit") = 64,
             py::arg("spin_limit") = 1024)
        .def_readwrite("yield_limit", &BackoffConfig::yield_limit)
        .def_readwrite("suspend_limit", &BackoffConfig::suspend_limit)
        .def_readwrite("spin_limit", &BackoffConfig::spin_limit)
        .def("validate", &BackoffConfig::validate);

    m.def("parse_strategy", [](const std::string& code) { return StrategyMask::parse(code).code(); },
          py::arg("code"), "Normalized strategy code; raises ConfigError when malformed.");
    m.def("lock_name", [](const std::string& name, std::size_t queues) {
              return LockSpec::parse(name, queues).name();
          },
          py::arg("name"), py::arg("queues") = 1);
    m.def("ladder", &ladder, py::arg("config"), py::arg("strategy"), py::arg("steps"),
          py::arg("can_suspend") = true,
          "Planned action per wait step, e.g. ['spin 2', 'spin 4', 'yield', 'suspend'].");
    m.def("record_ladder",
          [](const BackoffConfig& config, const std::string& strategy, std::uint32_t steps) {
              py::gil_scoped_release release;
              return verify::format_trace(
                  verify::record_ladder(config, StrategyMask::parse(strategy), steps));
          },
          py::arg("config"), py::arg("strategy"), py::arg("steps"));
    m.def("compute_quantiles", &quantiles, py::arg("samples"), py::arg("qs"));

    py::enum_<bench::ScenarioKind>(m, "Scenario")
        .value("CACHE", bench::ScenarioKind::kCacheLineIncrement)
        .value("PARALLEL", bench::ScenarioKind::kParallelizable);

    py::class_<bench::BenchConfig>(m, "BenchConfig")
        .def(py::init<>())
        .def_readwrite("lock", &bench::BenchConfig::lock_name)
        .def_readwrite("strategy", &bench::BenchConfig::strategy_code)
        .def_readwrite("scenario", &bench::BenchConfig::scenario)
        .def_readwrite("carriers", &bench::BenchConfig::carriers)
        .def_readwrite("tasks", &bench::BenchConfig::tasks)
        .def_readwrite("duration_s", &bench::BenchConfig::duration_s)
        .def_readwrite("warmup_s", &bench::BenchConfig::warmup_s)
        .def_readwrite("repetitions", &bench::BenchConfig::repetitions)
        .def_readwrite("queues", &bench::BenchConfig::queues)
        .def_readwrite("backoff", &bench::BenchConfig::backoff)
        .def_readwrite("seed", &bench::BenchConfig::seed)
        .def_readwrite("grace_factor", &bench::BenchConfig::grace_factor)
        .def("validate", &bench::BenchConfig::validate)
        .def("timeout_s", &bench::BenchConfig::timeout_s);

    py::class_<bench::BenchmarkRecord>(m, "BenchmarkRecord")
        .def(py::init<>())
        .def_readwrite("lock", &bench::BenchmarkRecord::lock)
        .def_readwrite("strategy", &bench::BenchmarkRecord::strategy)
        .def_readwrite("scenario", &bench::BenchmarkRecord::scenario)
        .def_readwrite("carriers", &bench::BenchmarkRecord::carriers)
        .def_readwrite("tasks", &bench::BenchmarkRecord::tasks)
        .def_readwrite("queues", &bench::BenchmarkRecord::queues)
        .def_readwrite("rep", &bench::BenchmarkRecord::rep)
        .def_readwrite("duration_s", &bench::BenchmarkRecord::duration_s)
        .def_readwrite("acquisitions", &bench::BenchmarkRecord::acquisitions)
        .def_readwrite("throughput_per_s", &bench::BenchmarkRecord::throughput_per_s)
        .def_readwrite("lat_ns_q50", &bench::BenchmarkRecord::lat_ns_q50)
        .def_readwrite("lat_ns_q95", &bench::BenchmarkRecord::lat_ns_q95)
        .def_readwrite("lat_ns_q99", &bench::BenchmarkRecord::lat_ns_q99)
        .def_property(
            "status",
            [](const bench::BenchmarkRecord& r) { return std::string(bench::to_string(r.status)); },
            [](bench::BenchmarkRecord& r, const std::string& s) {
                r.status = bench::parse_run_status(s);
            })
        .def("to_csv_row", [](const bench::BenchmarkRecord& r) { return bench::to_csv_row(r); })
        .def(py::self == py::self)
        .def("__repr__", [](const bench::BenchmarkRecord& r) {
            return "<BenchmarkRecord " + bench::to_csv_row(r) + ">";
        });

    m.attr("CSV_HEADER") = std::string(bench::kCsvHeader);
    m.def("parse_csv_row", [](const std::string& line) { return bench::parse_csv_row(line); });
    m.def("write_csv",
          [](const std::string& path, const std::vector<bench::BenchmarkRecord>& records,
             bool append) { bench::write_csv(path, records, append); },
          py::arg("path"), py::arg("records"), py::arg("append") = false);
    m.def("read_csv", [](const std::string& path) { return bench::read_csv(path); });
    m.def("run_benchmark", &bench::run_benchmark, py::arg("config"),
          py::call_guard<py::gil_scoped_release>(),
          "Runs all repetitions, each in a child process; hung runs come back as "
          "status 'deadlocked'.");
    m.def("summarize_medians", &bench::summarize_medians);
    m.def("power_of_two_task_counts", &bench::power_of_two_task_counts);

    py::class_<verify::OracleReport>(m, "OracleReport")
        .def_readonly("name", &verify::OracleReport::name)
        .def_readonly("expected", &verify::OracleReport::expected)
        .def_readonly("observed", &verify::OracleReport::observed)
        .def_readonly("passed", &verify::OracleReport::pass)
        .def("__bool__", [](const verify::OracleReport& r) { return r.pass; })
        .def("__repr__", [](const verify::OracleReport& r) {
            return std::string("<OracleReport ") + (r.pass ? "pass " : "fail ") + r.name + ": " +
                   r.observed + ">";
        });

    m.def("check_mutual_exclusion",
          [](const std::string& lock, const std::string& strategy, std::size_t carriers,
             std::size_t tasks, std::size_t iterations, double timeout) {
              return verify::check_mutual_exclusion(lock, strategy, carriers, tasks, iterations,
                                                    verify::Seconds(timeout));
          },
          py::arg("lock"), py::arg("strategy"), py::arg("carriers"), py::arg("tasks"),
          py::arg("iterations"), py::arg("timeout") = 120.0,
          py::call_guard<py::gil_scoped_release>());
    m.def("check_deadlock_freedom",
          [](const std::string& lock, const std::string& strategy, std::size_t carriers,
             std::size_t tasks, double timeout) {
              return verify::check_deadlock_freedom(lock, strategy, carriers, tasks,
                                                    verify::Seconds(timeout));
          },
          py::arg("lock"), py::arg("strategy"), py::arg("carriers"), py::arg("tasks"),
          py::arg("timeout") = 10.0, py::call_guard<py::gil_scoped_release>());
    m.def("check_handshake_interleavings", &verify::check_handshake_interleavings);
    m.def("check_backoff_ladder", &verify::check_backoff_ladder,
          py::call_guard<py::gil_scoped_release>());
    m.def("check_fifo_order",
          [](const std::string& lock, const std::string& strategy, std::size_t tasks) {
              return verify::check_fifo_order(lock, strategy, tasks);
          },
          py::arg("lock") = "MCS", py::arg("strategy") = "SYS", py::arg("tasks") = 8,
          py::call_guard<py::gil_scoped_release>());
}
