#include "partsim/workload.hpp"

#include "partsim/health.hpp"
#include "partsim/scheduler.hpp"

#include <charconv>
#include <set>
#include <sstream>

namespace partsim {

namespace {

std::vector<std::string> split_words(std::string_view line)
{
    std::vector<std::string> words;
    std::istringstream is{std::string{line}};
    for (std::string w; is >> w;) {
        words.push_back(std::move(w));
    }
    return words;
}

std::string line_error(std::size_t line_no, const std::string& message)
{
    return "script line " + std::to_string(line_no) + ": " + message;
}

bool plain_token(std::string_view s)
{
    return !s.empty() && s.find_first_of(",#") == std::string_view::npos;
}

}  // namespace

AppScript parse_script(std::string_view text, PartitionId partition, ScriptMode mode)
{
    AppScript script;
    script.partition_id = partition;
    script.mode = mode;

    std::size_t line_no = 0;
    std::istringstream in{std::string{text}};
    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string::npos) {
            raw.erase(hash);
        }
        const auto words = split_words(raw);
        if (words.empty()) {
            continue;
        }
        const auto& verb = words[0];
        Action a;
        auto expect_args = [&](std::size_t n) {
            if (words.size() != n + 1) {
                throw ScriptError(line_error(line_no, "'" + verb + "' takes " + std::to_string(n) + " argument(s)"));
            }
        };
        if (verb == "compute") {
            expect_args(1);
            a.kind = ActionKind::Compute;
            try {
                a.duration = parse_duration(words[1]);
            } catch (const DurationFormatError& e) {
                throw ScriptError(line_error(line_no, e.what()));
            }
        } else if (verb == "send") {
            expect_args(2);
            a.kind = ActionKind::Send;
            a.port = words[1];
            if (words[2] == "payload") {
                a.size_from_payload = true;
            } else {
                const auto& w = words[2];
                const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), a.size);
                if (ec != std::errc{} || ptr != w.data() + w.size()) {
                    throw ScriptError(line_error(line_no, "bad message size '" + w + "'"));
                }
            }
        } else if (verb == "recv" || verb == "read") {
            expect_args(1);
            a.kind = verb == "recv" ? ActionKind::Receive : ActionKind::Read;
            a.port = words[1];
        } else if (verb == "mark") {
            expect_args(1);
            a.kind = ActionKind::Mark;
            a.label = words[1];
        } else {
            throw ScriptError(line_error(line_no, "unknown action '" + verb + "'"));
        }
        if ((!a.port.empty() && !plain_token(a.port)) || (a.kind == ActionKind::Mark && !plain_token(a.label))) {
            throw ScriptError(line_error(line_no, "names may not contain ',' or '#'"));
        }
        script.actions.push_back(std::move(a));
    }
    return script;
}

std::string format_action(const Action& a)
{
    switch (a.kind) {
    case ActionKind::Compute: return "compute " + format_duration(a.duration);
    case ActionKind::Send:
        return "send " + a.port + " " + (a.size_from_payload ? std::string{"payload"} : std::to_string(a.size));
    case ActionKind::Receive: return "recv " + a.port;
    case ActionKind::Read: return "read " + a.port;
    case ActionKind::Mark: return "mark " + a.label;
    }
    return {};
}

AppScript bind_payload(AppScript script, std::uint64_t size)
{
    for (auto& a : script.actions) {
        if (a.kind == ActionKind::Send && a.size_from_payload) {
            a.size = size;
            a.size_from_payload = false;
        }
    }
    return script;
}

ValidationReport validate_scripts(const SystemConfig& cfg, std::span<const AppScript> scripts)
{
    ValidationReport report;
    auto error = [&report](std::string code, std::string location, std::string message) {
        report.push_back(Finding{std::move(code), Severity::Error, std::move(location), std::move(message)});
    };

    std::set<PartitionId> seen;
    for (const auto& script : scripts) {
        const auto pid = script.partition_id;
        const std::string loc = "Script[partition=" + std::to_string(pid) + "]";
        if (cfg.find_partition(pid) == nullptr) {
            error("SCRIPT_UNKNOWN_PARTITION", loc, "script for nonexistent partition");
        }
        if (!seen.insert(pid).second) {
            error("DUPLICATE_SCRIPT", loc, "partition has more than one script");
        }
        for (std::size_t i = 0; i < script.actions.size(); ++i) {
            const auto& a = script.actions[i];
            const std::string aloc = loc + "/Action[" + std::to_string(i) + "]";
            const PortRef ref{pid, a.port};
            switch (a.kind) {
            case ActionKind::Compute:
                if (a.duration < Duration{0}) {
                    error("NEGATIVE_DURATION", aloc, "compute time must be non-negative");
                }
                break;
            case ActionKind::Send: {
                const auto ch = find_source_channel(cfg, ref);
                if (!ch) {
                    error("UNKNOWN_PORT", aloc, "partition owns no source port '" + a.port + "'");
                } else if (!a.size_from_payload && a.size > cfg.channels[*ch].max_message_size) {
                    error("PAYLOAD_TOO_LARGE", aloc,
                          std::to_string(a.size) + " bytes exceeds maxMessageSize " +
                              std::to_string(cfg.channels[*ch].max_message_size));
                }
                if (!a.size_from_payload && a.size == 0) {
                    error("ZERO_PAYLOAD", aloc, "message size must be positive");
                }
                break;
            }
            case ActionKind::Receive:
            case ActionKind::Read: {
                const auto ch = find_destination_channel(cfg, ref);
                const auto want = a.kind == ActionKind::Receive ? ChannelKind::Queuing : ChannelKind::Sampling;
                if (!ch) {
                    error("UNKNOWN_PORT", aloc, "partition owns no destination port '" + a.port + "'");
                } else if (cfg.channels[*ch].kind != want) {
                    error("PORT_KIND_MISMATCH", aloc,
                          format_action(a) + " needs a " + std::string{to_string(want)} + " channel");
                }
                break;
            }
            case ActionKind::Mark:
                break;
            }
        }
    }
    return report;
}

void begin_slot(SimState& state, PartitionId partition)
{
    const auto it = state.scripts.find(partition);
    if (it == state.scripts.end()) {
        return;
    }
    const auto& script = it->second;
    auto& cursor = state.cursors[partition];
    if (script.mode == ScriptMode::RepeatEachSlot && cursor.next >= script.actions.size()) {
        cursor.next = 0;
    }
    if (cursor.next < script.actions.size()) {
        Event ev;
        ev.time = state.now;
        ev.kind = EventKind::AppAction;
        ev.partition = partition;
        ev.seq = state.next_seq(partition);
        state.schedule(ev);
    }
}

void dispatch_slot(SimState& state, PartitionId partition, const ActiveSlot& slot)
{
    const auto it = state.scripts.find(partition);
    if (it == state.scripts.end()) {
        return;
    }
    const auto& script = it->second;
    auto& cursor = state.cursors[partition];

    while (cursor.next < script.actions.size()) {
        if (state.system_halted || state.partition_states.at(partition) != PartitionState::Normal) {
            return;
        }
        const Action& a = script.actions[cursor.next];
        Duration cost{0};
        switch (a.kind) {
        case ActionKind::Compute: {
            const Duration demanded = cursor.carry > Duration{0} ? cursor.carry : a.duration;
            if (auto overrun = detect_overrun(state, partition, demanded, slot.end - state.now)) {
                cursor.carry = overrun->overrun_amount;
                overrun->time = slot.end;
                Event ev;
                ev.time = slot.end;
                ev.kind = EventKind::HmEvent;
                ev.partition = partition;
                ev.seq = state.next_seq(partition);
                ev.health = std::move(*overrun);
                state.schedule(std::move(ev));
                return;
            }
            cursor.carry = Duration{0};
            cost = demanded;
            break;
        }
        case ActionKind::Send: {
            const PortRef port{partition, a.port};
            const auto ch = find_source_channel(state.config, port);
            const bool sampling = ch && state.config.channels[*ch].kind == ChannelKind::Sampling;
            const auto result = sampling ? sampling_write(state, partition, port, a.size)
                                         : queuing_send(state, partition, port, a.size);
            cursor.last_result = result.status;
            cost = state.api_call_cost + result.copy_time;
            break;
        }
        case ActionKind::Receive:
        case ActionKind::Read: {
            const PortRef port{partition, a.port};
            const auto result = a.kind == ActionKind::Receive ? queuing_receive(state, partition, port)
                                                              : sampling_read(state, partition, port);
            cursor.last_result = result.status;
            if (result.status != PortStatus::Ok) {
                ++cursor.misses;
            }
            cost = state.api_call_cost + result.copy_time;
            break;
        }
        case ActionKind::Mark:
            state.record(RecordKind::Mark, partition,
                         {a.label, std::to_string(slot.slot_id),
                          cursor.last_result ? std::string{to_string(*cursor.last_result)} : std::string{"-"}});
            break;
        }

        ++cursor.next;
        if (cursor.next == script.actions.size()) {
            ++cursor.iterations;
        }
        if (cost > Duration{0}) {
            const auto resume = state.now + cost;
            if (resume < slot.end && cursor.next < script.actions.size()) {
                Event ev;
                ev.time = resume;
                ev.kind = EventKind::AppAction;
                ev.partition = partition;
                ev.seq = state.next_seq(partition);
                state.schedule(ev);
            }
            return;
        }
    }
}

}  // namespace partsim
