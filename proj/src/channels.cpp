#include "partsim/channels.hpp"

#include "partsim/health.hpp"
#include "partsim/scheduler.hpp"

#include <algorithm>
#include <tuple>

namespace partsim {

namespace {

std::uint64_t mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

bool newer(const Message& a, const Message& b)
{
    return std::tie(a.written_at, a.seq) > std::tie(b.written_at, b.seq);
}

enum class Op { Write, Read, Send, Receive };

std::string_view op_name(Op op)
{
    switch (op) {
    case Op::Write: return "WRITE";
    case Op::Read: return "READ";
    case Op::Send: return "SEND";
    case Op::Receive: return "RECV";
    }
    return "?";
}

void record_port_op(SimState& state, Op op, const std::optional<std::size_t>& channel, PartitionId caller,
                    std::uint64_t size, const PortResult& result)
{
    std::string status{to_string(result.status)};
    if (op == Op::Read && result.status == PortStatus::Ok && !result.valid) {
        status = "STALE";
    }
    state.record(RecordKind::PortOp, caller,
                 {std::string{op_name(op)}, channel ? std::to_string(*channel) : std::string{"-"},
                  std::to_string(size), std::move(status)});
}

void raise_violation(SimState& state, PartitionId caller, const PortRef& port, Op op)
{
    raise(state, HealthEvent{state.now, HealthEventKind::MemoryViolation, caller,
                             std::string{op_name(op)} + " on port " + std::to_string(port.partition) + ":" +
                                 port.port + " not owned by partition " + std::to_string(caller),
                             Duration{0}});
}

PortResult write_like(SimState& state, PartitionId caller, const PortRef& port, std::uint64_t size, Op op,
                      ChannelKind kind)
{
    PortResult result;
    result.channel = find_source_channel(state.config, port);
    if (!result.channel) {
        result.status = PortStatus::NoSuchPort;
    } else if (caller != port.partition) {
        result.status = PortStatus::NotOwner;
    } else if (state.config.channels[*result.channel].kind != kind) {
        result.status = PortStatus::WrongKind;
    } else if (size > state.config.channels[*result.channel].max_message_size) {
        result.status = PortStatus::TooLarge;
    }

    if (result.status == PortStatus::Ok) {
        auto& channel = state.ports[*result.channel];
        Message msg;
        msg.payload_size = size;
        msg.written_at = state.now;
        msg.source_partition = caller;
        msg.seq = channel.next_seq;
        msg.checksum = payload_checksum(*result.channel, caller, msg.seq, size);
        msg.visible_at = state.now + state.config.hypervisor_copy_cost.of(size);
        if (kind == ChannelKind::Sampling) {
            channel.sampling.write(msg);
            ++channel.next_seq;
            result.message = msg;
        } else if (channel.queuing.push(msg)) {
            ++channel.next_seq;
            result.message = msg;
        } else {
            result.status = PortStatus::Full;
        }
        if (result.message) {
            result.copy_time = msg.visible_at - msg.written_at;
        }
    }

    record_port_op(state, op, result.channel, caller, size, result);
    if (result.status == PortStatus::NotOwner) {
        raise_violation(state, caller, port, op);
    }
    return result;
}

PortResult read_like(SimState& state, PartitionId caller, const PortRef& port, Op op, ChannelKind kind)
{
    PortResult result;
    result.channel = find_destination_channel(state.config, port);
    if (!result.channel) {
        result.status = PortStatus::NoSuchPort;
    } else if (caller != port.partition) {
        result.status = PortStatus::NotOwner;
    } else if (state.config.channels[*result.channel].kind != kind) {
        result.status = PortStatus::WrongKind;
    }

    if (result.status == PortStatus::Ok) {
        const auto& spec = state.config.channels[*result.channel];
        auto& channel = state.ports[*result.channel];
        if (kind == ChannelKind::Sampling) {
            result.message = channel.sampling.read(state.now);
            if (result.message) {
                result.valid = state.now - result.message->written_at <= spec.refresh_period;
            }
        } else {
            result.message = channel.queuing.pop(state.now);
            result.valid = result.message.has_value();
        }
        if (!result.message) {
            result.status = PortStatus::Empty;
        } else {
            result.copy_time = state.config.hypervisor_copy_cost.of(result.message->payload_size);
        }
    }

    record_port_op(state, op, result.channel, caller, result.message ? result.message->payload_size : 0, result);
    if (result.status == PortStatus::NotOwner) {
        raise_violation(state, caller, port, op);
    }
    return result;
}

}  // namespace

std::uint64_t payload_checksum(std::size_t channel, PartitionId source, std::uint64_t seq, std::uint64_t size)
{
    std::uint64_t h = mix64(0x9e3779b97f4a7c15ULL ^ channel);
    h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(source)));
    h = mix64(h ^ seq);
    return mix64(h ^ size);
}

void SamplingPortState::write(const Message& msg)
{
    last_ = msg;
    pending_.push_back(msg);
}

void SamplingPortState::settle(Duration now)
{
    auto it = std::partition(pending_.begin(), pending_.end(),
                             [now](const Message& m) { return m.visible_at > now; });
    for (auto v = it; v != pending_.end(); ++v) {
        if (!visible_ || newer(*v, *visible_)) {
            visible_ = *v;
        }
    }
    pending_.erase(it, pending_.end());
    if (visible_) {
        // Anything older than the visible value can never be returned.
        std::erase_if(pending_, [this](const Message& m) { return !newer(m, *visible_); });
    }
}

std::optional<Message> SamplingPortState::read(Duration now)
{
    settle(now);
    return visible_;
}

bool QueuingPortState::push(const Message& msg)
{
    if (full()) {
        return false;
    }
    fifo_.push_back(msg);
    return true;
}

std::optional<Message> QueuingPortState::pop(Duration now)
{
    if (fifo_.empty() || fifo_.front().visible_at > now) {
        return std::nullopt;
    }
    Message head = fifo_.front();
    fifo_.pop_front();
    return head;
}

std::vector<ChannelState> make_channel_states(const SystemConfig& cfg)
{
    std::vector<ChannelState> states;
    states.reserve(cfg.channels.size());
    for (const auto& c : cfg.channels) {
        ChannelState s;
        s.kind = c.kind;
        s.queuing = QueuingPortState{c.kind == ChannelKind::Queuing ? c.capacity : 0};
        states.push_back(std::move(s));
    }
    return states;
}

std::string_view to_string(PortStatus s)
{
    switch (s) {
    case PortStatus::Ok: return "OK";
    case PortStatus::Empty: return "EMPTY";
    case PortStatus::Full: return "FULL";
    case PortStatus::NotOwner: return "NOT_OWNER";
    case PortStatus::TooLarge: return "TOO_LARGE";
    case PortStatus::NoSuchPort: return "NO_SUCH_PORT";
    case PortStatus::WrongKind: return "WRONG_KIND";
    }
    return "?";
}

std::optional<std::size_t> find_source_channel(const SystemConfig& cfg, const PortRef& port)
{
    for (std::size_t i = 0; i < cfg.channels.size(); ++i) {
        if (cfg.channels[i].source == port) {
            return i;
        }
    }
    return std::nullopt;
}

std::optional<std::size_t> find_destination_channel(const SystemConfig& cfg, const PortRef& port)
{
    for (std::size_t i = 0; i < cfg.channels.size(); ++i) {
        const auto& d = cfg.channels[i].destinations;
        if (std::find(d.begin(), d.end(), port) != d.end()) {
            return i;
        }
    }
    return std::nullopt;
}

PortResult sampling_write(SimState& state, PartitionId caller, const PortRef& source_port, std::uint64_t size)
{
    return write_like(state, caller, source_port, size, Op::Write, ChannelKind::Sampling);
}

PortResult sampling_read(SimState& state, PartitionId caller, const PortRef& destination_port)
{
    return read_like(state, caller, destination_port, Op::Read, ChannelKind::Sampling);
}

PortResult queuing_send(SimState& state, PartitionId caller, const PortRef& source_port, std::uint64_t size)
{
    return write_like(state, caller, source_port, size, Op::Send, ChannelKind::Queuing);
}

PortResult queuing_receive(SimState& state, PartitionId caller, const PortRef& destination_port)
{
    return read_like(state, caller, destination_port, Op::Receive, ChannelKind::Queuing);
}

}  // namespace partsim
