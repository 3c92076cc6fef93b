#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <system_error>

#include "lwlock/bench.hpp"

namespace lwlock::bench {
namespace {

constexpr std::size_t kColumns = 14;

std::string format_double(double value) {
    char buffer[64];
    const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (ec != std::errc{}) {
        throw std::runtime_error("cannot format number");
    }
    return {buffer, end};
}

template <typename T>
T parse_number(std::string_view text, std::string_view column) {
    T value{};
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size()) {
        throw std::runtime_error("bad value '" + std::string(text) + "' in column " +
                                 std::string(column));
    }
    return value;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t begin = 0;
    while (true) {
        const auto comma = line.find(',', begin);
        if (comma == std::string_view::npos) {
            cells.push_back(line.substr(begin));
            return cells;
        }
        cells.push_back(line.substr(begin, comma - begin));
        begin = comma + 1;
    }
}

}  // namespace

std::string to_csv_row(const BenchmarkRecord& r) {
    std::string row;
    row += r.lock + ',' + r.strategy + ',' + r.scenario + ',';
    row += std::to_string(r.carriers) + ',' + std::to_string(r.tasks) + ',' +
           std::to_string(r.queues) + ',' + std::to_string(r.rep) + ',';
    row += format_double(r.duration_s) + ',' + std::to_string(r.acquisitions) + ',' +
           format_double(r.throughput_per_s) + ',';
    row += std::to_string(r.lat_ns_q50) + ',' + std::to_string(r.lat_ns_q95) + ',' +
           std::to_string(r.lat_ns_q99) + ',';
    row += to_string(r.status);
    return row;
}

BenchmarkRecord parse_csv_row(std::string_view line) {
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) {
        line.remove_suffix(1);
    }
    const auto cells = split(line);
    if (cells.size() != kColumns) {
        throw std::runtime_error("expected " + std::to_string(kColumns) + " columns, got " +
                                 std::to_string(cells.size()));
    }
    BenchmarkRecord r;
    r.lock = cells[0];
    r.strategy = cells[1];
    r.scenario = cells[2];
    r.carriers = parse_number<std::size_t>(cells[3], "carriers");
    r.tasks = parse_number<std::size_t>(cells[4], "tasks");
    r.queues = parse_number<std::size_t>(cells[5], "queues");
    r.rep = parse_number<std::size_t>(cells[6], "rep");
    r.duration_s = parse_number<double>(cells[7], "duration_s");
    r.acquisitions = parse_number<std::uint64_t>(cells[8], "acquisitions");
    r.throughput_per_s = parse_number<double>(cells[9], "throughput_per_s");
    r.lat_ns_q50 = parse_number<std::uint64_t>(cells[10], "lat_ns_q50");
    r.lat_ns_q95 = parse_number<std::uint64_t>(cells[11], "lat_ns_q95");
    r.lat_ns_q99 = parse_number<std::uint64_t>(cells[12], "lat_ns_q99");
    r.status = parse_run_status(cells[13]);
    return r;
}

void write_csv(std::ostream& out, const std::vector<BenchmarkRecord>& records, bool header) {
    if (header) {
        out << kCsvHeader << '\n';
    }
    for (const auto& record : records) {
        out << to_csv_row(record) << '\n';
    }
}

void write_csv(const std::string& path, const std::vector<BenchmarkRecord>& records,
               bool append) {
    bool header = true;
    if (append) {
        std::ifstream existing(path, std::ios::binary | std::ios::ate);
        header = !existing || existing.tellg() <= 0;
    }
    std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open " + path + " for writing");
    }
    write_csv(out, records, header);
    out.flush();
    if (!out) {
        throw std::runtime_error("write to " + path + " failed");
    }
}

std::vector<BenchmarkRecord> read_csv(std::istream& in) {
    std::vector<BenchmarkRecord> records;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (first) {
            first = false;
            if (line == kCsvHeader) {
                continue;
            }
        }
        records.push_back(parse_csv_row(line));
    }
    return records;
}

std::vector<BenchmarkRecord> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path);
    }
    return read_csv(in);
}

}  // namespace lwlock::bench
