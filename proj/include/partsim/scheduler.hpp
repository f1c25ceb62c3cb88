#pragma once

#include "partsim/channels.hpp"
#include "partsim/config.hpp"
#include "partsim/duration.hpp"
#include "partsim/health.hpp"
#include "partsim/trace.hpp"
#include "partsim/workload.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace partsim {

enum class PartitionState { Boot, Normal, Suspended, Halted };

std::string_view to_string(PartitionState s);

/// BOOT->NORMAL, NORMAL->SUSPENDED, SUSPENDED->NORMAL, any->HALTED.
bool transition_allowed(PartitionState from, PartitionState to);

enum class EventKind { SlotStart, SlotEnd, FrameWrap, AppAction, HmEvent };

/// Tie-break rank among simultaneous events:
/// SLOT_END < FRAME_WRAP < HM_EVENT < SLOT_START < APP_ACTION.
int rank(EventKind k);

struct Event {
    Duration time;
    EventKind kind = EventKind::SlotStart;
    PartitionId partition = kSystemPartition;
    std::uint64_t seq = 0;
    SlotId slot_id = 0;                // SLOT_START / SLOT_END
    std::optional<HealthEvent> health; // HM_EVENT payload
};

/// Total order (time, rank, partition, seq). seq is allocated per partition,
/// so (partition, seq) is unique.
struct EventOrder {
    bool operator()(const Event& a, const Event& b) const;
};

struct ActiveSlot {
    SlotId slot_id = 0;
    PartitionId partition = 0;
    Duration start;
    Duration end;
};

struct SimOptions {
    std::vector<AppScript> scripts;
    HealthTable health_table;
    Duration api_call_cost;
};

/// Everything a run owns. Single owner; mutated only through the operations
/// in this header and the port/health/workload operations.
struct SimState {
    explicit SimState(SystemConfig cfg, SimOptions options = {});

    Duration now;
    SystemConfig config;
    std::map<PartitionId, PartitionState> partition_states;
    std::vector<ChannelState> ports;
    std::set<Event, EventOrder> event_queue;
    std::vector<TraceRecord> trace;

    HealthTable health_table;
    Duration api_call_cost;
    std::map<PartitionId, AppScript> scripts;
    std::map<PartitionId, AppCursor> cursors;

    std::optional<ActiveSlot> active;
    bool booted = false;
    bool system_halted = false;

    std::uint64_t next_seq(PartitionId partition) { return seq_counters_[partition]++; }
    void schedule(Event ev);
    void record(RecordKind kind, PartitionId partition, std::vector<std::string> fields = {});

private:
    std::map<PartitionId, std::uint64_t> seq_counters_;
};

class ConfigInvalid : public std::runtime_error {
public:
    ConfigInvalid(ValidationReport findings);
    [[nodiscard]] const ValidationReport& findings() const { return findings_; }

private:
    ValidationReport findings_;
};

class QueueEmpty : public std::logic_error {
public:
    QueueEmpty() : std::logic_error("event queue is empty") {}
};

class IllegalTransition : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Validates the configuration and scripts, moves every partition from BOOT to
/// NORMAL at time 0 and schedules frame 0 plus the first FRAME_WRAP.
void boot(SimState& state);

/// Pops the least event, advances the clock to it and applies its effect.
Event step(SimState& state);

/// Steps every event with time <= t_end, then sets now = t_end. Returns the
/// trace records appended by this call (valid until the trace grows again).
std::span<const TraceRecord> run_until(SimState& state, Duration t_end);

void set_partition_state(SimState& state, PartitionId partition, PartitionState next);

}  // namespace partsim
