#include "partsim/health.hpp"

#include "partsim/scheduler.hpp"

#include <algorithm>
#include <array>

namespace partsim {

namespace {

constexpr std::array kAllKinds{HealthEventKind::SlotOverrun, HealthEventKind::MemoryViolation,
                               HealthEventKind::Trap, HealthEventKind::HypervisorEvent};
constexpr std::array kAllActions{HealthAction::Log, HealthAction::SuspendPartition, HealthAction::HaltPartition,
                                 HealthAction::HaltSystem};

}  // namespace

std::string_view to_string(HealthEventKind k)
{
    switch (k) {
    case HealthEventKind::SlotOverrun: return "SLOT_OVERRUN";
    case HealthEventKind::MemoryViolation: return "MEMORY_VIOLATION";
    case HealthEventKind::Trap: return "TRAP";
    case HealthEventKind::HypervisorEvent: return "HYPERVISOR_EVENT";
    }
    return "?";
}

std::string_view to_string(HealthAction a)
{
    switch (a) {
    case HealthAction::Log: return "LOG";
    case HealthAction::SuspendPartition: return "SUSPEND_PARTITION";
    case HealthAction::HaltPartition: return "HALT_PARTITION";
    case HealthAction::HaltSystem: return "HALT_SYSTEM";
    }
    return "?";
}

std::optional<HealthEventKind> health_event_kind_from_string(std::string_view s)
{
    for (auto k : kAllKinds) {
        if (to_string(k) == s) {
            return k;
        }
    }
    return std::nullopt;
}

std::optional<HealthAction> health_action_from_string(std::string_view s)
{
    for (auto a : kAllActions) {
        if (to_string(a) == s) {
            return a;
        }
    }
    return std::nullopt;
}

HealthTable::HealthTable()
    : defaults_{{HealthEventKind::SlotOverrun, HealthAction::Log},
                {HealthEventKind::MemoryViolation, HealthAction::SuspendPartition},
                {HealthEventKind::Trap, HealthAction::Log},
                {HealthEventKind::HypervisorEvent, HealthAction::Log}}
{
}

void HealthTable::set_default(HealthEventKind kind, HealthAction action)
{
    defaults_[kind] = action;
}

void HealthTable::set(HealthEventKind kind, PartitionId partition, HealthAction action)
{
    overrides_[{kind, partition}] = action;
}

HealthAction HealthTable::resolve(HealthEventKind kind, PartitionId partition) const
{
    if (auto it = overrides_.find({kind, partition}); it != overrides_.end()) {
        return it->second;
    }
    return defaults_.at(kind);
}

void raise(SimState& state, const HealthEvent& ev)
{
    const auto action = state.health_table.resolve(ev.kind, ev.source_partition);
    std::string detail = ev.detail;
    std::replace(detail.begin(), detail.end(), ',', ';');
    state.record(RecordKind::HmEvent, ev.source_partition,
                 {std::string{to_string(ev.kind)}, std::string{to_string(action)},
                  std::to_string(ev.overrun_amount.count()), std::move(detail)});

    const bool is_partition = state.partition_states.count(ev.source_partition) != 0;
    if (is_partition) {
        state.record(RecordKind::HmPropagate, ev.source_partition, {std::string{to_string(ev.kind)}});
    }

    switch (action) {
    case HealthAction::Log:
        break;
    case HealthAction::SuspendPartition:
        if (is_partition && state.partition_states.at(ev.source_partition) == PartitionState::Normal) {
            set_partition_state(state, ev.source_partition, PartitionState::Suspended);
        }
        break;
    case HealthAction::HaltPartition:
        if (is_partition) {
            set_partition_state(state, ev.source_partition, PartitionState::Halted);
        }
        break;
    case HealthAction::HaltSystem:
        state.event_queue.clear();
        state.active.reset();
        state.system_halted = true;
        break;
    }
}

std::optional<HealthEvent> detect_overrun(const SimState& state, PartitionId partition, Duration demanded,
                                          Duration remaining)
{
    if (demanded <= remaining) {
        return std::nullopt;
    }
    return HealthEvent{state.now, HealthEventKind::SlotOverrun, partition,
                       "demanded " + format_duration(demanded) + " with " + format_duration(remaining) + " left",
                       demanded - remaining};
}

}  // namespace partsim
