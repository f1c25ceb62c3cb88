#include "partsim/trace.hpp"

#include <ostream>
#include <sstream>

namespace partsim {

std::string_view to_string(RecordKind kind)
{
    switch (kind) {
    case RecordKind::SlotStart: return "SLOT_START";
    case RecordKind::SlotEnd: return "SLOT_END";
    case RecordKind::FrameWrap: return "FRAME_WRAP";
    case RecordKind::AppAction: return "APP_ACTION";
    case RecordKind::HmEvent: return "HM_EVENT";
    case RecordKind::HmPropagate: return "HM_PROPAGATE";
    case RecordKind::StateChange: return "STATE";
    case RecordKind::PortOp: return "PORT_OP";
    case RecordKind::Mark: return "MARK";
    }
    return "?";
}

namespace {

std::string partition_column(PartitionId p)
{
    return p == kSystemPartition ? std::string{"-"} : std::to_string(p);
}

}  // namespace

std::string to_line(const TraceRecord& r)
{
    std::string line = std::to_string(r.time.count());
    line += ',';
    line += to_string(r.kind);
    if (r.kind == RecordKind::PortOp && r.fields.size() == 4) {
        // op,channel,partition,size,result
        line += ',' + r.fields[0] + ',' + r.fields[1] + ',' + partition_column(r.partition) + ',' + r.fields[2] +
                ',' + r.fields[3];
        return line;
    }
    line += ',' + partition_column(r.partition) + ',' + std::to_string(r.seq);
    for (const auto& f : r.fields) {
        line += ',';
        line += f;
    }
    return line;
}

void write_trace(std::ostream& os, std::span<const TraceRecord> records)
{
    for (const auto& r : records) {
        os << to_line(r) << '\n';
    }
}

std::string format_trace(std::span<const TraceRecord> records)
{
    std::ostringstream os;
    write_trace(os, records);
    return os.str();
}

std::vector<TraceRecord> project(std::span<const TraceRecord> records, PartitionId partition)
{
    std::vector<TraceRecord> out;
    for (const auto& r : records) {
        if (r.partition == partition) {
            out.push_back(r);
        }
    }
    return out;
}

}  // namespace partsim
