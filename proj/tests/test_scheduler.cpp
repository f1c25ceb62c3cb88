#include "partsim/scheduler.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <tuple>

using namespace partsim;
using namespace partsim::literals;

namespace {

// Three partitions with back-to-back slots and a slot ending on the frame
// boundary, so every tie-break rule is exercised.
SystemConfig three_partition_config()
{
    SystemConfig cfg;
    cfg.partitions = {PartitionSpec{0, "a", {}}, PartitionSpec{1, "b", {}}, PartitionSpec{2, "c", {}}};
    cfg.plan.major_frame = 1_ms;
    cfg.plan.slots = {
        ScheduleSlot{0, 0, 0_us, 300_us},
        ScheduleSlot{1, 1, 300_us, 200_us},
        ScheduleSlot{2, 2, 600_us, 150_us},
        ScheduleSlot{3, 0, 800_us, 200_us},
    };
    return cfg;
}

struct Key {
    Duration time;
    EventKind kind;
    PartitionId partition;
    SlotId slot;
    friend bool operator==(const Key&, const Key&) = default;
};

std::vector<Key> offline_events(const SystemConfig& cfg, int frames)
{
    std::vector<Key> out;
    const Duration limit = cfg.plan.major_frame * frames;
    for (int k = 0; k <= frames; ++k) {
        const Duration base = cfg.plan.major_frame * k;
        for (const auto& s : cfg.plan.slots) {
            out.push_back(Key{base + s.start, EventKind::SlotStart, s.partition_id, s.slot_id});
            out.push_back(Key{base + s.end(), EventKind::SlotEnd, s.partition_id, s.slot_id});
        }
        out.push_back(Key{base + cfg.plan.major_frame, EventKind::FrameWrap, kSystemPartition, 0});
    }
    std::erase_if(out, [&](const Key& k) { return k.time > limit; });
    std::sort(out.begin(), out.end(), [](const Key& a, const Key& b) {
        return std::make_tuple(a.time, rank(a.kind), a.partition) < std::make_tuple(b.time, rank(b.kind), b.partition);
    });
    return out;
}

std::map<PartitionId, Duration> active_time(std::span<const TraceRecord> trace)
{
    std::map<PartitionId, Duration> total;
    std::map<PartitionId, Duration> open;
    for (const auto& r : trace) {
        if (r.kind == RecordKind::SlotStart) {
            open[r.partition] = r.time;
        } else if (r.kind == RecordKind::SlotEnd) {
            total[r.partition] += r.time - open.at(r.partition);
        }
    }
    return total;
}

SimOptions independent_scripts()
{
    SimOptions o;
    o.scripts = {parse_script("compute 100us\nmark a\ncompute 50us\nmark b\n", 0, ScriptMode::RepeatEachSlot),
                 parse_script("compute 20us\nmark c\n", 1, ScriptMode::RepeatEachSlot)};
    return o;
}

}  // namespace

TEST_CASE("partition state machine")
{
    using S = PartitionState;
    CHECK(transition_allowed(S::Boot, S::Normal));
    CHECK(transition_allowed(S::Normal, S::Suspended));
    CHECK(transition_allowed(S::Suspended, S::Normal));
    for (auto s : {S::Boot, S::Normal, S::Suspended, S::Halted}) {
        CHECK(transition_allowed(s, S::Halted));
    }
    CHECK_FALSE(transition_allowed(S::Boot, S::Suspended));
    CHECK_FALSE(transition_allowed(S::Halted, S::Normal));
    CHECK_FALSE(transition_allowed(S::Normal, S::Boot));
    CHECK_FALSE(transition_allowed(S::Suspended, S::Boot));

    SimState state{test::cookbook_config()};
    CHECK_THROWS_AS(set_partition_state(state, 0, S::Suspended), IllegalTransition);
    CHECK_THROWS_AS(set_partition_state(state, 9, S::Halted), IllegalTransition);
}

TEST_CASE("tie-break ranks")
{
    CHECK(rank(EventKind::SlotEnd) < rank(EventKind::FrameWrap));
    CHECK(rank(EventKind::FrameWrap) < rank(EventKind::HmEvent));
    CHECK(rank(EventKind::HmEvent) < rank(EventKind::SlotStart));
    CHECK(rank(EventKind::SlotStart) < rank(EventKind::AppAction));
}

TEST_CASE("boot moves every partition to NORMAL at time zero")
{
    SimState state{test::cookbook_config()};
    boot(state);
    CHECK(state.now == 0_ns);
    CHECK(state.partition_states.at(0) == PartitionState::Normal);
    CHECK(state.partition_states.at(1) == PartitionState::Normal);
    REQUIRE(state.trace.size() == 2);
    CHECK(to_line(state.trace[0]) == "0,STATE,0,0,BOOT,NORMAL");
    CHECK(to_line(state.trace[1]) == "0,STATE,1,0,BOOT,NORMAL");
    CHECK_THROWS_AS(boot(state), IllegalTransition);
}

TEST_CASE("boot skips halted partitions")
{
    SimState state{test::cookbook_config()};
    set_partition_state(state, 1, PartitionState::Halted);
    boot(state);
    CHECK(state.partition_states.at(0) == PartitionState::Normal);
    CHECK(state.partition_states.at(1) == PartitionState::Halted);
}

TEST_CASE("boot rejects invalid configurations")
{
    auto cfg = test::cookbook_config();
    cfg.partitions.clear();
    cfg.plan.slots.clear();
    cfg.channels.clear();
    SimState state{cfg};
    CHECK_THROWS_AS(boot(state), ConfigInvalid);

    SimState overlapping{test::cookbook_config()};
    overlapping.config.plan.slots[1].start = 300_us;
    try {
        boot(overlapping);
        FAIL("expected ConfigInvalid");
    } catch (const ConfigInvalid& e) {
        REQUIRE(e.findings().size() == 1);
        CHECK(e.findings()[0].code == "SLOT_OVERLAP");
    }
}

TEST_CASE("step on an empty queue")
{
    SimState state{test::cookbook_config()};
    CHECK_THROWS_AS(step(state), QueueEmpty);
}

TEST_CASE("first three events of the cookbook plan")
{
    SimState state{test::cookbook_config()};
    boot(state);
    const auto e1 = step(state);
    const auto e2 = step(state);
    const auto e3 = step(state);
    CHECK((e1.kind == EventKind::SlotStart && e1.partition == 0 && e1.time == 0_us));
    CHECK((e2.kind == EventKind::SlotEnd && e2.partition == 0 && e2.time == 400_us));
    CHECK((e3.kind == EventKind::SlotStart && e3.partition == 1 && e3.time == 500_us));
    CHECK(state.now == 500_us);
}

TEST_CASE("frame wraps at every multiple of the major frame")
{
    SimState state{test::cookbook_config()};
    boot(state);
    run_until(state, 10_ms);
    std::vector<Duration> wraps;
    for (const auto& r : state.trace) {
        if (r.kind == RecordKind::FrameWrap) {
            wraps.push_back(r.time);
        }
    }
    REQUIRE(wraps.size() == 10);
    for (std::size_t k = 0; k < wraps.size(); ++k) {
        CHECK(wraps[k] == 1_ms * static_cast<Duration::rep>(k + 1));
    }
}

TEST_CASE("event order equals the sorted offline event list")
{
    const auto cfg = three_partition_config();
    const int frames = 5;
    SimState state{cfg};
    boot(state);
    std::vector<Key> stepped;
    while (!state.event_queue.empty() && state.event_queue.begin()->time <= cfg.plan.major_frame * frames) {
        const auto ev = step(state);
        stepped.push_back(Key{ev.time, ev.kind, ev.partition, ev.kind == EventKind::FrameWrap ? 0 : ev.slot_id});
    }
    CHECK(stepped == offline_events(cfg, frames));
}

TEST_CASE("run_until stops at the bound")
{
    SimState state{test::cookbook_config()};
    boot(state);
    const auto at_zero = run_until(state, 0_ns);
    for (const auto& r : at_zero) {
        CHECK(r.time == 0_ns);
    }
    CHECK(state.now == 0_ns);
    for (const auto& r : state.trace) {
        CHECK(r.time == 0_ns);
    }

    run_until(state, 450_us);
    CHECK(state.now == 450_us);
    CHECK(state.trace.back().kind == RecordKind::SlotEnd);
    CHECK(state.event_queue.begin()->time == 500_us);
}

TEST_CASE("active time over ten frames")
{
    const auto cfg = three_partition_config();
    SimState state{cfg, independent_scripts()};
    boot(state);
    run_until(state, 10_ms);
    const auto total = active_time(state.trace);
    CHECK(total.at(0) == 10 * (300_us + 200_us));
    CHECK(total.at(1) == 10 * 200_us);
    CHECK(total.at(2) == 10 * 150_us);
}

TEST_CASE("active intervals are disjoint and times are monotone")
{
    SimState state{three_partition_config(), independent_scripts()};
    boot(state);
    run_until(state, 5_ms);
    std::optional<PartitionId> active;
    Duration last{0};
    for (const auto& r : state.trace) {
        CHECK(r.time >= last);
        last = r.time;
        if (r.kind == RecordKind::SlotStart) {
            CHECK_FALSE(active.has_value());
            active = r.partition;
        } else if (r.kind == RecordKind::SlotEnd) {
            CHECK(active == r.partition);
            active.reset();
        } else if (r.kind == RecordKind::AppAction || r.kind == RecordKind::Mark) {
            CHECK(active == r.partition);
        }
    }
}

TEST_CASE("run_until is composable")
{
    const auto sc = test::cookbook_scenario();
    SimOptions options;
    for (const auto& s : sc.scripts) {
        options.scripts.push_back(bind_payload(s, 64));
    }
    std::mt19937_64 rng{5};
    for (int i = 0; i < 50; ++i) {
        Duration a{std::uniform_int_distribution<Duration::rep>{0, 4'000'000}(rng)};
        Duration b{std::uniform_int_distribution<Duration::rep>{0, 4'000'000}(rng)};
        if (b < a) {
            std::swap(a, b);
        }
        SimState split{sc.system.value(), options};
        boot(split);
        run_until(split, a);
        run_until(split, b);

        SimState whole{sc.system.value(), options};
        boot(whole);
        run_until(whole, b);
        CHECK(split.trace == whole.trace);
        CHECK(split.now == whole.now);
    }
}

TEST_CASE("repeated boots produce identical traces")
{
    auto run = [] {
        SimState state{three_partition_config(), independent_scripts()};
        boot(state);
        run_until(state, 3_ms);
        return format_trace(state.trace);
    };
    CHECK(run() == run());
}

TEST_CASE("a halted partition leaves the others untouched")
{
    const auto cfg = three_partition_config();
    SimState reference{cfg, independent_scripts()};
    boot(reference);
    run_until(reference, 10_ms);

    SimState halted{cfg, independent_scripts()};
    boot(halted);
    run_until(halted, 2'350_us);
    set_partition_state(halted, 0, PartitionState::Halted);
    run_until(halted, 10_ms);

    for (PartitionId p : {1, 2}) {
        CHECK(project(halted.trace, p) == project(reference.trace, p));
    }
    CHECK(project(halted.trace, kSystemPartition) == project(reference.trace, kSystemPartition));

    // P0 keeps its slots but runs nothing after the halt.
    for (const auto& r : project(halted.trace, 0)) {
        if (r.time > 2'350_us) {
            CHECK(r.kind != RecordKind::AppAction);
            CHECK(r.kind != RecordKind::Mark);
        }
    }
    CHECK(active_time(halted.trace).at(0) == active_time(reference.trace).at(0));
}

TEST_CASE("suspend and resume")
{
    SimState state{three_partition_config(), independent_scripts()};
    boot(state);
    run_until(state, 1_ms);
    set_partition_state(state, 1, PartitionState::Suspended);
    run_until(state, 2_ms);
    for (const auto& r : project(state.trace, 1)) {
        if (r.time > 1_ms) {
            CHECK(r.kind != RecordKind::Mark);
        }
    }
    set_partition_state(state, 1, PartitionState::Normal);
    run_until(state, 3_ms);
    const auto marks = std::count_if(state.trace.begin(), state.trace.end(), [](const TraceRecord& r) {
        return r.kind == RecordKind::Mark && r.partition == 1 && r.time > 2_ms;
    });
    CHECK(marks == 1);
}
