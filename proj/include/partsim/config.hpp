#pragma once

#include "partsim/duration.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace partsim {

using PartitionId = int;
using SlotId = int;

struct MemoryArea {
    std::uint64_t start = 0;
    std::uint64_t size = 0;

    [[nodiscard]] std::uint64_t end() const { return start + size; }
    friend bool operator==(const MemoryArea&, const MemoryArea&) = default;
};

struct PartitionSpec {
    PartitionId id = 0;
    std::string name;
    std::vector<MemoryArea> memory_areas;

    friend bool operator==(const PartitionSpec&, const PartitionSpec&) = default;
};

/// One window of the major frame, half-open: [start, start + duration).
struct ScheduleSlot {
    SlotId slot_id = 0;
    PartitionId partition_id = 0;
    Duration start;
    Duration duration;

    [[nodiscard]] Duration end() const { return start + duration; }
    friend bool operator==(const ScheduleSlot&, const ScheduleSlot&) = default;
};

struct SchedulePlan {
    Duration major_frame;
    std::vector<ScheduleSlot> slots;  // ordered by start

    [[nodiscard]] const ScheduleSlot* find_slot(SlotId id) const;
    friend bool operator==(const SchedulePlan&, const SchedulePlan&) = default;
};

enum class ChannelKind { Sampling, Queuing };

struct PortRef {
    PartitionId partition = 0;
    std::string port;

    friend auto operator<=>(const PortRef&, const PortRef&) = default;
    friend bool operator==(const PortRef&, const PortRef&) = default;
};

struct ChannelSpec {
    ChannelKind kind = ChannelKind::Queuing;
    PortRef source;
    std::vector<PortRef> destinations;
    std::uint64_t max_message_size = 0;
    Duration refresh_period;    // sampling only
    std::uint64_t capacity = 0; // queuing only

    friend bool operator==(const ChannelSpec&, const ChannelSpec&) = default;
};

/// Per-message hypervisor transport overhead: fixed + per_byte * size.
struct CopyCost {
    Duration fixed;
    Duration per_byte;

    [[nodiscard]] Duration of(std::uint64_t bytes) const
    {
        return fixed + per_byte * static_cast<Duration::rep>(bytes);
    }
    friend bool operator==(const CopyCost&, const CopyCost&) = default;
};

struct SystemConfig {
    std::vector<PartitionSpec> partitions;
    SchedulePlan plan;
    std::vector<ChannelSpec> channels;
    CopyCost hypervisor_copy_cost;

    [[nodiscard]] const PartitionSpec* find_partition(PartitionId id) const;
    friend bool operator==(const SystemConfig&, const SystemConfig&) = default;
};

// Parse failures. Validation findings are data (see validate), not exceptions.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};
class SyntaxError : public ConfigError {
public:
    using ConfigError::ConfigError;
};
class SchemaError : public ConfigError {
public:
    using ConfigError::ConfigError;
};
class RangeError : public ConfigError {
public:
    using ConfigError::ConfigError;
};
class UnknownSlot : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

SystemConfig parse_config(std::string_view xml_text);
std::string serialize_config(const SystemConfig& cfg);

enum class Severity { Error, Warning };

struct Finding {
    std::string code;
    Severity severity = Severity::Error;
    std::string location;
    std::string message;

    friend bool operator==(const Finding&, const Finding&) = default;
};

using ValidationReport = std::vector<Finding>;

ValidationReport validate(const SystemConfig& cfg);

/// "SEVERITY CODE location message"
std::string format_finding(const Finding& f);

/// Time from the end of `from_slot` to the next start of `to_slot`, wrapping
/// across the major frame. Always in [0, major_frame).
Duration transition_gap(const SchedulePlan& plan, SlotId from_slot, SlotId to_slot);

std::string_view to_string(ChannelKind kind);

}  // namespace partsim
