#pragma once

#include "partsim/config.hpp"
#include "partsim/duration.hpp"

#include <cstdint>
#include <deque>
#include <optional>
#include <string_view>
#include <vector>

namespace partsim {

struct SimState;

/// A message crossing a channel. The payload itself is not stored; it is
/// represented by its size and a checksum derived deterministically from
/// (channel, source, seq, size), so multi-megabyte payloads cost nothing.
struct Message {
    std::uint64_t payload_size = 0;
    Duration written_at;
    PartitionId source_partition = 0;
    std::uint64_t seq = 0;
    std::uint64_t checksum = 0;
    Duration visible_at;

    friend bool operator==(const Message&, const Message&) = default;
};

std::uint64_t payload_checksum(std::size_t channel, PartitionId source, std::uint64_t seq, std::uint64_t size);

/// Latest-value cell. Writes overwrite unconditionally; a write stays pending
/// until its copy completes (visible_at), after which it may replace the
/// visible value if it is newer by (written_at, seq).
class SamplingPortState {
public:
    void write(const Message& msg);
    /// Latest visible message at `now`, if any.
    [[nodiscard]] std::optional<Message> read(Duration now);
    /// Most recent write regardless of visibility.
    [[nodiscard]] const std::optional<Message>& last() const { return last_; }

private:
    void settle(Duration now);

    std::optional<Message> last_;
    std::optional<Message> visible_;
    std::vector<Message> pending_;
};

/// Bounded FIFO. Capacity counts messages still in flight.
class QueuingPortState {
public:
    explicit QueuingPortState(std::uint64_t capacity = 0) : capacity_(capacity) {}

    [[nodiscard]] bool full() const { return fifo_.size() >= capacity_; }
    [[nodiscard]] std::size_t size() const { return fifo_.size(); }
    [[nodiscard]] std::uint64_t capacity() const { return capacity_; }
    [[nodiscard]] const std::deque<Message>& fifo() const { return fifo_; }

    /// False when full; the message is dropped.
    bool push(const Message& msg);
    /// Pops the head if it is visible at `now`. A not-yet-visible head blocks
    /// later messages so FIFO order is never violated.
    std::optional<Message> pop(Duration now);

private:
    std::uint64_t capacity_;
    std::deque<Message> fifo_;
};

struct ChannelState {
    ChannelKind kind = ChannelKind::Queuing;
    SamplingPortState sampling;
    QueuingPortState queuing;
    std::uint64_t next_seq = 0;

    friend bool operator==(const ChannelState& a, const ChannelState& b)
    {
        return a.kind == b.kind && a.next_seq == b.next_seq && a.sampling.last() == b.sampling.last() &&
               a.queuing.fifo() == b.queuing.fifo();
    }
};

std::vector<ChannelState> make_channel_states(const SystemConfig& cfg);

enum class PortStatus {
    Ok,
    Empty,
    Full,
    NotOwner,
    TooLarge,
    NoSuchPort,
    WrongKind,
};

std::string_view to_string(PortStatus s);

struct PortResult {
    PortStatus status = PortStatus::Ok;
    std::optional<Message> message;
    bool valid = false;            // sampling reads: age <= refresh period
    std::optional<std::size_t> channel;
    Duration copy_time;            // hypervisor copy charged to the caller
};

// Partition-facing port operations. They resolve the port in the system
// configuration, enforce ownership (a NotOwner access raises a
// MEMORY_VIOLATION health event and leaves every port untouched), apply the
// hypervisor copy cost, and append a PORT_OP trace record. Time is state.now.
PortResult sampling_write(SimState& state, PartitionId caller, const PortRef& source_port, std::uint64_t size);
PortResult sampling_read(SimState& state, PartitionId caller, const PortRef& destination_port);
PortResult queuing_send(SimState& state, PartitionId caller, const PortRef& source_port, std::uint64_t size);
PortResult queuing_receive(SimState& state, PartitionId caller, const PortRef& destination_port);

/// Index of the channel whose source (or one of whose destinations) is `port`.
std::optional<std::size_t> find_source_channel(const SystemConfig& cfg, const PortRef& port);
std::optional<std::size_t> find_destination_channel(const SystemConfig& cfg, const PortRef& port);

}  // namespace partsim
