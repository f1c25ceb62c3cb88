#include "partsim/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace partsim {

namespace {

__extension__ using wide = __int128;

// Floor division for a possibly negative numerator and positive divisor.
wide floor_div(wide a, wide b)
{
    wide q = a / b;
    if ((a % b != 0) && (a < 0)) {
        --q;
    }
    return q;
}

std::optional<Duration> metric(const RunRow& row)
{
    return row.mode == ScenarioMode::Partitioned ? row.latency : row.tx_delay;
}

std::string format_ratio(double r)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", r);
    return buf;
}

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty()) {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) {
        throw CsvError("line " + std::to_string(line_no) + ": unterminated quote");
    }
    out.push_back(std::move(cur));
    return out;
}

template <typename T>
T parse_int(const std::string& s, std::size_t line_no, std::string_view column)
{
    T out{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw CsvError("line " + std::to_string(line_no) + ": bad " + std::string{column} + " '" + s + "'");
    }
    return out;
}

std::optional<Duration> parse_opt_ns(const std::string& s, std::size_t line_no, std::string_view column)
{
    if (s.empty()) {
        return std::nullopt;
    }
    return Duration{parse_int<Duration::rep>(s, line_no, column)};
}

}  // namespace

Duration rounded_mean(std::span<const Duration> values)
{
    if (values.empty()) {
        throw EmptyResult();
    }
    wide sum = 0;
    for (const auto v : values) {
        sum += v.count();
    }
    const auto n = static_cast<wide>(values.size());
    // round(sum / n) with ties toward +inf == floor((2*sum + n) / (2*n))
    return Duration{static_cast<Duration::rep>(floor_div(2 * sum + n, 2 * n))};
}

Duration nearest_rank(std::span<const Duration> sorted, int percentile)
{
    if (sorted.empty()) {
        throw EmptyResult();
    }
    const std::size_t n = sorted.size();
    std::size_t rank = (static_cast<std::size_t>(percentile) * n + 99) / 100;
    rank = std::clamp<std::size_t>(rank, 1, n);
    return sorted[rank - 1];
}

SummaryStats summarize(std::span<const RunRow> rows)
{
    std::vector<Duration> values;
    std::optional<Duration> gap;
    bool gap_consistent = true;
    for (const auto& row : rows) {
        const auto v = metric(row);
        if (!v) {
            continue;
        }
        values.push_back(*v);
        if (row.mode == ScenarioMode::Partitioned) {
            if (!row.gap) {
                gap_consistent = false;
            } else if (!gap) {
                gap = row.gap;
            } else if (*gap != *row.gap) {
                gap_consistent = false;
            }
        }
    }
    if (values.empty()) {
        throw EmptyResult();
    }

    SummaryStats s;
    s.count = values.size();
    s.mean = rounded_mean(values);
    std::sort(values.begin(), values.end());
    s.min = values.front();
    s.max = values.back();
    s.p50 = nearest_rank(values, 50);
    s.p99 = nearest_rank(values, 99);

    if (gap && gap_consistent) {
        s.gap = gap;
        if (*gap > Duration{0}) {
            wide sum = 0;
            for (const auto v : values) {
                sum += v.count();
            }
            const wide denom = static_cast<wide>(values.size()) * gap->count();
            s.latency_to_gap_ratio = static_cast<double>(static_cast<long double>(sum) / denom);
            s.overhead_ratio = static_cast<double>(static_cast<long double>(sum - denom) / denom);
        }
    }
    return s;
}

std::vector<GroupSummary> summarize_groups(std::span<const RunRow> rows)
{
    std::vector<std::pair<std::string, std::uint64_t>> order;
    std::map<std::pair<std::string, std::uint64_t>, std::vector<RunRow>> groups;
    for (const auto& row : rows) {
        auto key = std::make_pair(row.scenario, row.payload_bytes);
        auto [it, inserted] = groups.try_emplace(key);
        if (inserted) {
            order.push_back(key);
        }
        it->second.push_back(row);
    }

    std::vector<GroupSummary> out;
    for (const auto& key : order) {
        const auto& members = groups[key];
        const bool has_data = std::any_of(members.begin(), members.end(),
                                          [](const RunRow& r) { return metric(r).has_value(); });
        if (!has_data) {
            continue;
        }
        out.push_back(GroupSummary{key.first, members.front().mode, key.second, summarize(members)});
    }
    return out;
}

std::string format_percent(double ratio)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f%%", ratio * 100.0);
    std::string s = buf;
    if (s == "-0.0%") {
        s = "0.0%";
    }
    return s;
}

std::string format_summary_table(std::span<const GroupSummary> groups)
{
    const std::vector<std::string> header{"scenario", "mode",   "payload_bytes", "n",     "mean_ns", "min_ns",
                                          "max_ns",   "p50_ns", "p99_ns",        "gap_ns", "ratio", "overhead"};
    std::vector<std::vector<std::string>> table{header};
    for (const auto& g : groups) {
        const auto& s = g.stats;
        table.push_back({g.scenario, std::string{to_string(g.mode)}, std::to_string(g.payload_bytes),
                         std::to_string(s.count), std::to_string(s.mean.count()), std::to_string(s.min.count()),
                         std::to_string(s.max.count()), std::to_string(s.p50.count()), std::to_string(s.p99.count()),
                         s.gap ? std::to_string(s.gap->count()) : "-",
                         s.latency_to_gap_ratio ? format_ratio(*s.latency_to_gap_ratio) : "-",
                         s.overhead_ratio ? format_percent(*s.overhead_ratio) : "-"});
    }

    std::vector<std::size_t> width(header.size(), 0);
    for (const auto& row : table) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            width[c] = std::max(width[c], row[c].size());
        }
    }
    std::ostringstream os;
    for (const auto& row : table) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            // text columns left-aligned, numbers right-aligned
            const bool left = c < 2;
            const std::string pad(width[c] - row[c].size(), ' ');
            if (c > 0) {
                os << "  ";
            }
            if (left) {
                os << row[c] << (c + 1 < row.size() ? pad : "");
            } else {
                os << pad << row[c];
            }
        }
        os << '\n';
    }
    return os.str();
}

std::string to_csv(std::span<const RunRow> rows)
{
    auto ns = [](const std::optional<Duration>& d) { return d ? std::to_string(d->count()) : std::string{}; };
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (const auto& r : rows) {
        os << csv_field(r.scenario) << ',' << to_string(r.mode) << ',' << r.repetition << ',' << r.payload_bytes
           << ',' << ns(r.t_send) << ',' << ns(r.t_recv) << ',' << ns(r.latency) << ',' << ns(r.gap) << ','
           << (r.latency_to_gap_ratio ? format_ratio(*r.latency_to_gap_ratio) : std::string{}) << ','
           << ns(r.tx_relaxed) << ',' << ns(r.tx_stressed) << ',' << ns(r.tx_delay) << '\n';
    }
    return os.str();
}

void export_csv(std::span<const RunRow> rows, const std::filesystem::path& path)
{
    std::ofstream out{path, std::ios::binary | std::ios::trunc};
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    out << to_csv(rows);
    out.flush();
    if (!out) {
        throw IoError("error writing " + path.string());
    }
}

std::vector<RunRow> parse_csv(std::string_view text)
{
    std::vector<RunRow> rows;
    std::istringstream in{std::string{text}};
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) {
        throw CsvError("missing header");
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    if (line != kCsvHeader) {
        throw CsvError("unexpected header '" + line + "'");
    }
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto f = split_csv_line(line, line_no);
        if (f.size() != 12) {
            throw CsvError("line " + std::to_string(line_no) + ": expected 12 columns, got " +
                           std::to_string(f.size()));
        }
        RunRow r;
        r.scenario = f[0];
        if (f[1] == "PARTITIONED") {
            r.mode = ScenarioMode::Partitioned;
        } else if (f[1] == "BROKER") {
            r.mode = ScenarioMode::Broker;
        } else {
            throw CsvError("line " + std::to_string(line_no) + ": bad mode '" + f[1] + "'");
        }
        r.repetition = parse_int<std::uint64_t>(f[2], line_no, "repetition");
        r.payload_bytes = parse_int<std::uint64_t>(f[3], line_no, "payload_bytes");
        r.t_send = parse_opt_ns(f[4], line_no, "t_send_ns");
        r.t_recv = parse_opt_ns(f[5], line_no, "t_recv_ns");
        r.latency = parse_opt_ns(f[6], line_no, "latency_ns");
        r.gap = parse_opt_ns(f[7], line_no, "gap_ns");
        if (!f[8].empty()) {
            std::size_t used = 0;
            try {
                r.latency_to_gap_ratio = std::stod(f[8], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != f[8].size()) {
                throw CsvError("line " + std::to_string(line_no) + ": bad latency_to_gap_ratio '" + f[8] + "'");
            }
        }
        r.tx_relaxed = parse_opt_ns(f[9], line_no, "tx_relaxed_ns");
        r.tx_stressed = parse_opt_ns(f[10], line_no, "tx_stressed_ns");
        r.tx_delay = parse_opt_ns(f[11], line_no, "tx_delay_ns");
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace partsim
