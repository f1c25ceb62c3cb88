#pragma once

#include "partsim/config.hpp"
#include "partsim/duration.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace partsim {

/// Partition id used for records that belong to the hypervisor itself
/// (FRAME_WRAP, system-wide health events). Printed as "-".
inline constexpr PartitionId kSystemPartition = -1;

enum class RecordKind {
    SlotStart,
    SlotEnd,
    FrameWrap,
    AppAction,
    HmEvent,
    HmPropagate,
    StateChange,
    PortOp,
    Mark,
};

std::string_view to_string(RecordKind kind);

/// One line of the simulation trace.
///
/// Event records print as `time_ns,KIND,partition,seq`. Auxiliary records
/// append their fields after the seq column, except PORT_OP which uses
/// `time_ns,PORT_OP,op,channel,partition,size,result`.
struct TraceRecord {
    Duration time;
    RecordKind kind = RecordKind::SlotStart;
    PartitionId partition = kSystemPartition;
    std::uint64_t seq = 0;
    std::vector<std::string> fields;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

std::string to_line(const TraceRecord& r);
void write_trace(std::ostream& os, std::span<const TraceRecord> records);
std::string format_trace(std::span<const TraceRecord> records);

/// Records whose partition column equals `partition`, in trace order.
std::vector<TraceRecord> project(std::span<const TraceRecord> records, PartitionId partition);

}  // namespace partsim
