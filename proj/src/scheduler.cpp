#include "partsim/scheduler.hpp"

#include <algorithm>
#include <iterator>
#include <tuple>

namespace partsim {

std::string_view to_string(PartitionState s)
{
    switch (s) {
    case PartitionState::Boot: return "BOOT";
    case PartitionState::Normal: return "NORMAL";
    case PartitionState::Suspended: return "SUSPENDED";
    case PartitionState::Halted: return "HALTED";
    }
    return "?";
}

bool transition_allowed(PartitionState from, PartitionState to)
{
    using S = PartitionState;
    if (to == S::Halted) {
        return true;
    }
    return (from == S::Boot && to == S::Normal) || (from == S::Normal && to == S::Suspended) ||
           (from == S::Suspended && to == S::Normal);
}

int rank(EventKind k)
{
    switch (k) {
    case EventKind::SlotEnd: return 0;
    case EventKind::FrameWrap: return 1;
    case EventKind::HmEvent: return 2;
    case EventKind::SlotStart: return 3;
    case EventKind::AppAction: return 4;
    }
    return 5;
}

bool EventOrder::operator()(const Event& a, const Event& b) const
{
    return std::forward_as_tuple(a.time, rank(a.kind), a.partition, a.seq) <
           std::forward_as_tuple(b.time, rank(b.kind), b.partition, b.seq);
}

namespace {

RecordKind record_kind(EventKind k)
{
    switch (k) {
    case EventKind::SlotStart: return RecordKind::SlotStart;
    case EventKind::SlotEnd: return RecordKind::SlotEnd;
    case EventKind::FrameWrap: return RecordKind::FrameWrap;
    case EventKind::AppAction: return RecordKind::AppAction;
    case EventKind::HmEvent: return RecordKind::HmEvent;
    }
    return RecordKind::HmEvent;
}

void record_event(SimState& state, const Event& ev)
{
    state.trace.push_back(TraceRecord{ev.time, record_kind(ev.kind), ev.partition, ev.seq, {}});
}

void schedule_frame(SimState& state, Duration::rep frame)
{
    const auto base = state.config.plan.major_frame * frame;
    for (const auto& slot : state.config.plan.slots) {
        Event start;
        start.time = base + slot.start;
        start.kind = EventKind::SlotStart;
        start.partition = slot.partition_id;
        start.seq = state.next_seq(slot.partition_id);
        start.slot_id = slot.slot_id;
        state.schedule(start);

        Event end = start;
        end.time = base + slot.end();
        end.kind = EventKind::SlotEnd;
        end.seq = state.next_seq(slot.partition_id);
        state.schedule(end);
    }
    Event wrap;
    wrap.time = base + state.config.plan.major_frame;
    wrap.kind = EventKind::FrameWrap;
    wrap.partition = kSystemPartition;
    wrap.seq = state.next_seq(kSystemPartition);
    state.schedule(wrap);
}

void purge_app_actions(SimState& state, PartitionId partition)
{
    std::erase_if(state.event_queue, [partition](const Event& ev) {
        return ev.kind == EventKind::AppAction && ev.partition == partition;
    });
}

std::string join_codes(const ValidationReport& findings)
{
    std::string msg = "configuration invalid:";
    for (const auto& f : findings) {
        msg += " " + f.code;
    }
    return msg;
}

}  // namespace

ConfigInvalid::ConfigInvalid(ValidationReport findings)
    : std::runtime_error(join_codes(findings)), findings_(std::move(findings))
{
}

SimState::SimState(SystemConfig cfg, SimOptions options)
    : config(std::move(cfg)),
      ports(make_channel_states(config)),
      health_table(std::move(options.health_table)),
      api_call_cost(options.api_call_cost)
{
    for (const auto& p : config.partitions) {
        partition_states.emplace(p.id, PartitionState::Boot);
    }
    for (auto& script : options.scripts) {
        const auto pid = script.partition_id;
        if (!scripts.emplace(pid, std::move(script)).second) {
            throw ScriptError("more than one script for partition " + std::to_string(pid));
        }
        cursors.emplace(pid, AppCursor{});
    }
}

void SimState::schedule(Event ev)
{
    event_queue.insert(std::move(ev));
}

void SimState::record(RecordKind kind, PartitionId partition, std::vector<std::string> fields)
{
    trace.push_back(TraceRecord{now, kind, partition, next_seq(partition), std::move(fields)});
}

void boot(SimState& state)
{
    if (state.booted) {
        throw IllegalTransition("system already booted");
    }
    auto findings = validate(state.config);
    std::vector<AppScript> scripts;
    for (const auto& [pid, script] : state.scripts) {
        scripts.push_back(script);
    }
    auto script_findings = validate_scripts(state.config, scripts);
    findings.insert(findings.end(), script_findings.begin(), script_findings.end());
    if (!findings.empty()) {
        throw ConfigInvalid(std::move(findings));
    }

    state.now = Duration{0};
    state.booted = true;
    for (const auto& [pid, ps] : state.partition_states) {
        if (ps == PartitionState::Boot) {
            set_partition_state(state, pid, PartitionState::Normal);
        }
    }
    schedule_frame(state, 0);
}

Event step(SimState& state)
{
    if (state.event_queue.empty()) {
        throw QueueEmpty();
    }
    const Event ev = *state.event_queue.begin();
    state.event_queue.erase(state.event_queue.begin());
    state.now = ev.time;

    switch (ev.kind) {
    case EventKind::SlotStart: {
        record_event(state, ev);
        const auto* slot = state.config.plan.find_slot(ev.slot_id);
        state.active = ActiveSlot{ev.slot_id, ev.partition, ev.time, ev.time + slot->duration};
        if (state.partition_states.at(ev.partition) == PartitionState::Normal) {
            begin_slot(state, ev.partition);
        }
        break;
    }
    case EventKind::SlotEnd:
        record_event(state, ev);
        state.active.reset();
        purge_app_actions(state, ev.partition);
        break;
    case EventKind::FrameWrap:
        record_event(state, ev);
        schedule_frame(state, ev.time / state.config.plan.major_frame);
        break;
    case EventKind::AppAction:
        if (state.active && state.active->partition == ev.partition &&
            state.partition_states.at(ev.partition) == PartitionState::Normal) {
            record_event(state, ev);
            dispatch_slot(state, ev.partition, *state.active);
        }
        break;
    case EventKind::HmEvent:
        raise(state, *ev.health);
        break;
    }
    return ev;
}

std::span<const TraceRecord> run_until(SimState& state, Duration t_end)
{
    const auto first = state.trace.size();
    while (!state.event_queue.empty() && state.event_queue.begin()->time <= t_end) {
        step(state);
    }
    state.now = std::max(state.now, t_end);
    return std::span<const TraceRecord>{state.trace}.subspan(first);
}

void set_partition_state(SimState& state, PartitionId partition, PartitionState next)
{
    const auto it = state.partition_states.find(partition);
    if (it == state.partition_states.end()) {
        throw IllegalTransition("unknown partition " + std::to_string(partition));
    }
    const auto current = it->second;
    if (!transition_allowed(current, next)) {
        throw IllegalTransition("partition " + std::to_string(partition) + ": " + std::string{to_string(current)} +
                                " -> " + std::string{to_string(next)} + " not permitted");
    }
    if (current == next) {
        return;
    }
    it->second = next;
    state.record(RecordKind::StateChange, partition,
                 {std::string{to_string(current)}, std::string{to_string(next)}});
    if (next != PartitionState::Normal) {
        purge_app_actions(state, partition);
    }
}

}  // namespace partsim
