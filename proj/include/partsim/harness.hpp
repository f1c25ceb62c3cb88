#pragma once

#include "partsim/config.hpp"
#include "partsim/duration.hpp"
#include "partsim/health.hpp"
#include "partsim/middleware.hpp"
#include "partsim/trace.hpp"
#include "partsim/workload.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace partsim {

enum class ScenarioMode { Partitioned, Broker };

std::string_view to_string(ScenarioMode m);

struct LoadPair {
    LoadProfile relaxed;
    LoadProfile stressed;
};

struct Scenario {
    std::string name = "scenario";
    ScenarioMode mode = ScenarioMode::Partitioned;

    // PARTITIONED
    std::optional<SystemConfig> system;
    std::vector<AppScript> scripts;
    HealthTable health_table;
    Duration api_call_cost;
    std::uint64_t max_frames = 1000;   // give up on a repetition after this many frames
    std::string tx_label = "tx";
    std::string rx_label = "rx";

    // BROKER
    std::optional<BrokerTopology> broker;
    std::vector<LoadPair> load_pairs;

    std::vector<std::uint64_t> payload_sizes{1, 1'000'000, 6'000'000};
    std::uint64_t repetitions = 100;
    std::uint64_t seed = 0;
};

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ScenarioInvalid : public std::runtime_error {
public:
    explicit ScenarioInvalid(ValidationReport findings);
    [[nodiscard]] const ValidationReport& findings() const { return findings_; }

private:
    ValidationReport findings_;
};

/// Parses the scenario text format (see README). `base_dir` resolves a
/// relative `system = <file>` reference.
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& path);

ValidationReport validate_scenario(const Scenario& sc);

/// One CSV row. Fields that do not apply to the row's mode stay empty.
struct RunRow {
    std::string scenario;
    ScenarioMode mode = ScenarioMode::Partitioned;
    std::uint64_t repetition = 0;
    std::uint64_t payload_bytes = 0;
    std::optional<Duration> t_send;
    std::optional<Duration> t_recv;
    std::optional<Duration> latency;
    std::optional<Duration> gap;
    std::optional<double> latency_to_gap_ratio;
    std::optional<Duration> tx_relaxed;
    std::optional<Duration> tx_stressed;
    std::optional<Duration> tx_delay;

    friend bool operator==(const RunRow&, const RunRow&) = default;
};

struct RunResult {
    std::vector<RunRow> rows;
    /// PARTITIONED: trace of the first repetition of the first payload size.
    std::vector<TraceRecord> trace;
    /// BROKER: relaxed and stressed deliveries of repetition 0, per payload.
    std::vector<DeliveryRecord> deliveries;
    /// Set when a repetition could not complete (HALT_SYSTEM, no delivery).
    std::optional<std::string> fault;
    bool system_halted = false;
};

struct RunOptions {
    /// Run each PARTITIONED repetition to this absolute time instead of
    /// stopping at the first delivery.
    std::optional<Duration> horizon;
    bool capture_trace = true;
};

/// Throws ScenarioInvalid when validate_scenario reports findings.
RunResult run_scenario(const Scenario& sc, const RunOptions& options = {});

struct Delivery {
    Duration t_send;
    SlotId tx_slot = 0;
    Duration t_recv;
    SlotId rx_slot = 0;
};

/// First `tx_label` MARK, then the first `rx_label` MARK after it whose
/// preceding port operation succeeded.
std::optional<Delivery> find_delivery(std::span<const TraceRecord> trace, std::string_view tx_label,
                                      std::string_view rx_label);

struct SummaryStats {
    std::size_t count = 0;
    Duration mean;
    Duration min;
    Duration max;
    Duration p50;
    Duration p99;
    std::optional<Duration> gap;                 // PARTITIONED
    std::optional<double> latency_to_gap_ratio;  // mean latency / gap
    std::optional<double> overhead_ratio;        // (mean latency - gap) / gap
};

class EmptyResult : public std::invalid_argument {
public:
    EmptyResult() : std::invalid_argument("no rows to summarize") {}
};

/// Exact integer statistics over latency (PARTITIONED) or tx_delay (BROKER).
/// Mean rounds to the nearest ns with ties toward +inf; percentiles use the
/// nearest-rank method.
SummaryStats summarize(std::span<const RunRow> rows);

/// Nearest-rank percentile of an ascending-sorted, non-empty sample.
Duration nearest_rank(std::span<const Duration> sorted, int percentile);
Duration rounded_mean(std::span<const Duration> values);

struct GroupSummary {
    std::string scenario;
    ScenarioMode mode = ScenarioMode::Partitioned;
    std::uint64_t payload_bytes = 0;
    SummaryStats stats;
};

/// One summary per (scenario, payload), in order of first appearance.
std::vector<GroupSummary> summarize_groups(std::span<const RunRow> rows);

/// Aligned text table of group summaries.
std::string format_summary_table(std::span<const GroupSummary> groups);
/// "2.1%" style rendering of an overhead ratio.
std::string format_percent(double ratio);

inline constexpr std::string_view kCsvHeader =
    "scenario,mode,repetition,payload_bytes,t_send_ns,t_recv_ns,latency_ns,gap_ns,latency_to_gap_ratio,"
    "tx_relaxed_ns,tx_stressed_ns,tx_delay_ns";

class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string to_csv(std::span<const RunRow> rows);
/// Throws IoError when the file cannot be written.
void export_csv(std::span<const RunRow> rows, const std::filesystem::path& path);
std::vector<RunRow> parse_csv(std::string_view text);

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::filesystem::path& path);

}  // namespace partsim
