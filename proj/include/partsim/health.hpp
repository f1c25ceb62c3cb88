#pragma once

#include "partsim/config.hpp"
#include "partsim/duration.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace partsim {

struct SimState;

enum class HealthEventKind { SlotOverrun, MemoryViolation, Trap, HypervisorEvent };
enum class HealthAction { Log, SuspendPartition, HaltPartition, HaltSystem };

std::string_view to_string(HealthEventKind k);
std::string_view to_string(HealthAction a);
std::optional<HealthEventKind> health_event_kind_from_string(std::string_view s);
std::optional<HealthAction> health_action_from_string(std::string_view s);

/// overrun_amount is positive exactly when kind == SlotOverrun.
struct HealthEvent {
    Duration time;
    HealthEventKind kind = HealthEventKind::Trap;
    PartitionId source_partition = 0;
    std::string detail;
    Duration overrun_amount;

    friend bool operator==(const HealthEvent&, const HealthEvent&) = default;
};

/// Maps (event kind, source partition) to an action, falling back to a
/// per-kind default. Every kind always has a default.
class HealthTable {
public:
    /// SLOT_OVERRUN -> LOG, MEMORY_VIOLATION -> SUSPEND_PARTITION,
    /// TRAP -> LOG, HYPERVISOR_EVENT -> LOG.
    HealthTable();

    void set_default(HealthEventKind kind, HealthAction action);
    void set(HealthEventKind kind, PartitionId partition, HealthAction action);
    [[nodiscard]] HealthAction resolve(HealthEventKind kind, PartitionId partition) const;

    friend bool operator==(const HealthTable&, const HealthTable&) = default;

private:
    std::map<HealthEventKind, HealthAction> defaults_;
    std::map<std::pair<HealthEventKind, PartitionId>, HealthAction> overrides_;
};

/// Records the event (HM_EVENT with its resolved action), propagates it to
/// the source partition (HM_PROPAGATE) and applies the action. HALT_SYSTEM
/// drains the event queue and ends the run.
void raise(SimState& state, const HealthEvent& ev);

/// SLOT_OVERRUN with amount demanded - remaining iff demanded > remaining.
std::optional<HealthEvent> detect_overrun(const SimState& state, PartitionId partition, Duration demanded,
                                          Duration remaining);

}  // namespace partsim
