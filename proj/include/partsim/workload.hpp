#pragma once

#include "partsim/channels.hpp"
#include "partsim/config.hpp"
#include "partsim/duration.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace partsim {

struct SimState;
struct ActiveSlot;

enum class ActionKind { Compute, Send, Receive, Read, Mark };

struct Action {
    ActionKind kind = ActionKind::Compute;
    Duration duration;              // Compute
    std::string port;               // Send / Receive / Read
    std::uint64_t size = 0;         // Send
    bool size_from_payload = false; // Send with the "payload" placeholder
    std::string label;              // Mark

    friend bool operator==(const Action&, const Action&) = default;
};

enum class ScriptMode { Once, RepeatEachSlot };

struct AppScript {
    PartitionId partition_id = 0;
    std::vector<Action> actions;
    ScriptMode mode = ScriptMode::Once;

    friend bool operator==(const AppScript&, const AppScript&) = default;
};

struct AppCursor {
    std::size_t next = 0;
    Duration carry;   // unfinished COMPUTE time, non-zero only after an overrun
    std::optional<PortStatus> last_result;
    std::uint64_t misses = 0;
    std::uint64_t iterations = 0;
};

class ScriptError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One action per line: `compute 100us`, `send out 64`, `send out payload`,
/// `recv in`, `read in`, `mark tx`. Blank lines and `#` comments are skipped.
AppScript parse_script(std::string_view text, PartitionId partition, ScriptMode mode);
std::string format_action(const Action& a);

/// Replaces every `payload` placeholder size with `size`.
AppScript bind_payload(AppScript script, std::uint64_t size);

/// Port references must name ports owned by the script's partition, with the
/// right direction and channel kind.
ValidationReport validate_scripts(const SystemConfig& cfg, std::span<const AppScript> scripts);

/// Called at SLOT_START of a NORMAL partition: restarts a finished
/// REPEAT_EACH_SLOT script and schedules the first APP_ACTION at state.now.
void begin_slot(SimState& state, PartitionId partition);

/// Runs the partition's script from its cursor at state.now until an action
/// consumes time (a continuation APP_ACTION is scheduled), the slot budget is
/// exhausted, or the script ends. A COMPUTE that does not fit raises a
/// SLOT_OVERRUN at the slot end and carries the remainder to the next slot.
void dispatch_slot(SimState& state, PartitionId partition, const ActiveSlot& slot);

}  // namespace partsim
