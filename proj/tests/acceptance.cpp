// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include "partsim/cli.hpp"
#include "partsim/harness.hpp"
#include "partsim/scheduler.hpp"

#include "port_models.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

using namespace partsim;
using namespace partsim::literals;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

class Failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& what)
{
    if (!cond) {
        throw Failure(what);
    }
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v, int digits = 3)
{
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << v;
    return os.str();
}

ExitCode cli(const std::vector<std::string>& args)
{
    std::ostringstream out;
    std::ostringstream err;
    return run_cli(args, out, err);
}

std::string scenario_path(const std::string& name)
{
    return (test::scenario_dir() / name).string();
}

// 1. Same seed, same bytes.
Verdict determinism()
{
    test::TempDir dir;
    const auto start = std::chrono::steady_clock::now();
    for (const std::string name : {"cookbook_partitioned", "cookbook_broker"}) {
        std::vector<std::string> csv;
        std::vector<std::string> trace;
        for (int run = 0; run < 2; ++run) {
            const auto tag = name + "-" + std::to_string(run);
            const auto code = cli({"run", scenario_path(name + ".scn"), "--seed", "42", "--out",
                                   (dir / (tag + ".csv")).string(), "--trace", (dir / (tag + ".trace")).string()});
            require(code == ExitCode::Success, name + ": run failed");
            csv.push_back(read_file(dir / (tag + ".csv")));
            trace.push_back(read_file(dir / (tag + ".trace")));
        }
        require(!csv[0].empty() && !trace[0].empty(), name + ": empty output");
        require(csv[0] == csv[1], name + ": CSV differs between runs");
        require(trace[0] == trace[1], name + ": trace differs between runs");
    }
    const double elapsed = seconds_since(start);
    require(elapsed < 10.0, "took " + fmt(elapsed) + " s");
    return {true, "CSV and trace byte-identical, " + fmt(elapsed) + " s"};
}

// 2. Active time and exclusivity over 1000 frames of a 3-partition plan.
Verdict schedule_conformance()
{
    SystemConfig cfg;
    cfg.partitions = {PartitionSpec{0, "a", {}}, PartitionSpec{1, "b", {}}, PartitionSpec{2, "c", {}}};
    cfg.plan.major_frame = 1_ms;
    cfg.plan.slots = {ScheduleSlot{0, 0, 0_us, 250_us}, ScheduleSlot{1, 1, 250_us, 300_us},
                      ScheduleSlot{2, 2, 600_us, 150_us}, ScheduleSlot{3, 0, 800_us, 200_us}};
    SimOptions options;
    options.scripts = {parse_script("compute 100us\nmark a\n", 0, ScriptMode::RepeatEachSlot),
                       parse_script("compute 10us\nmark b\n", 1, ScriptMode::RepeatEachSlot),
                       parse_script("compute 200us\n", 2, ScriptMode::RepeatEachSlot)};
    SimState state{cfg, options};
    boot(state);
    const Duration::rep frames = 1000;
    run_until(state, cfg.plan.major_frame * frames);

    struct Interval {
        Duration start;
        Duration end;
        PartitionId partition;
    };
    std::vector<Interval> intervals;
    std::map<PartitionId, Duration> open;
    std::map<PartitionId, Duration> total;
    for (const auto& r : state.trace) {
        if (r.kind == RecordKind::SlotStart) {
            open[r.partition] = r.time;
        } else if (r.kind == RecordKind::SlotEnd) {
            intervals.push_back(Interval{open.at(r.partition), r.time, r.partition});
            total[r.partition] += r.time - open.at(r.partition);
        }
    }
    std::map<PartitionId, Duration> per_frame;
    for (const auto& s : cfg.plan.slots) {
        per_frame[s.partition_id] += s.duration;
    }
    for (const auto& [pid, d] : per_frame) {
        require(total[pid] == d * frames, "partition " + std::to_string(pid) + " active " +
                                              format_duration(total[pid]) + ", expected " +
                                              format_duration(d * frames));
    }
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        for (std::size_t j = i + 1; j < intervals.size(); ++j) {
            const auto& a = intervals[i];
            const auto& b = intervals[j];
            require(!(a.start < b.end && b.start < a.end), "intervals " + std::to_string(i) + " and " +
                                                                std::to_string(j) + " overlap");
        }
    }
    return {true, std::to_string(intervals.size()) + " intervals, pairwise disjoint, active time exact"};
}

// 3. Randomized port sequences against the reference models.
Verdict port_equivalence()
{
    std::size_t divergences = 0;
    std::string first;
    for (auto kind : {ChannelKind::Sampling, ChannelKind::Queuing}) {
        for (std::uint64_t seed = 0; seed < 10'000; ++seed) {
            const auto problem = test::check_port_sequence(kind, 1'000'000 + seed, 60);
            if (!problem.empty()) {
                ++divergences;
                if (first.empty()) {
                    first = std::string{to_string(kind)} + " " + problem;
                }
            }
        }
    }
    require(divergences == 0, std::to_string(divergences) + " divergences, first: " + first);
    return {true, "2 x 10000 sequences, 0 divergences"};
}

// 4. Latency law on the cookbook scenario.
Verdict latency_law()
{
    auto run = [](Duration copy) {
        auto sc = test::cookbook_scenario();
        sc.system->hypervisor_copy_cost = CopyCost{copy, 0_ns};
        return run_scenario(sc);
    };
    const auto base = run(0_ns);
    require(!base.rows.empty() && !base.fault, "cookbook run failed");
    for (const auto& r : base.rows) {
        require(r.latency == 400_us, "repetition " + std::to_string(r.repetition) + " latency " +
                                         (r.latency ? format_duration(*r.latency) : "missing"));
        require(r.gap == 100_us, "repetition " + std::to_string(r.repetition) + " gap wrong");
    }
    for (Duration c : {1_us, 50_us}) {
        const auto shifted = run(c);
        require(shifted.rows.size() == base.rows.size(), "row count changed");
        for (std::size_t i = 0; i < shifted.rows.size(); ++i) {
            require(*shifted.rows[i].latency - *base.rows[i].latency == c,
                    "copy " + format_duration(c) + " shifted latency by " +
                        format_duration(*shifted.rows[i].latency - *base.rows[i].latency));
            require(shifted.rows[i].gap == 100_us, "gap changed under copy cost");
        }
    }
    return {true, std::to_string(base.rows.size()) + " reps at 400us/100us; +1us and +50us shift exactly"};
}

// 5. The 2.1% demo.
Verdict ratio_demo()
{
    auto sc = load_scenario(test::scenario_dir() / "ratio_demo.scn");
    const Duration copy = sc.system->hypervisor_copy_cost.fixed;
    const auto with_copy = summarize(run_scenario(sc).rows);
    sc.system->hypervisor_copy_cost = CopyCost{};
    const auto without = summarize(run_scenario(sc).rows);

    require(with_copy.gap && with_copy.overhead_ratio, "no gap in summary");
    const Duration gap = *with_copy.gap;
    // copy / gap == 21 / 1000 exactly, and so is the latency it adds.
    require(copy.count() * 1000 == 21 * gap.count(), "copy/gap is not 0.021");
    const Duration added = with_copy.mean - without.mean;
    require(added.count() * 1000 == 21 * gap.count(), "copy-attributable latency/gap is not 0.021");
    const auto reported = format_percent(*with_copy.overhead_ratio);
    require(reported == "2.1%", "reported overhead " + reported);
    return {true, "latency_to_gap_ratio " + fmt(*with_copy.latency_to_gap_ratio, 5) + ", overhead " + reported +
                      ", copy/gap 0.021"};
}

// 6. Overrun anomaly and isolation.
Verdict overrun()
{
    const auto cfg = test::cookbook_config();
    const Duration::rep frames = 20;
    auto run = [&](const std::string& p0, ScriptMode mode) {
        SimOptions o;
        o.scripts = {parse_script(p0, 0, mode),
                     parse_script("compute 100us\nmark beat\ncompute 250us\nmark done\n", 1,
                                  ScriptMode::RepeatEachSlot)};
        SimState state{cfg, o};
        boot(state);
        run_until(state, cfg.plan.major_frame * frames);
        return state.trace;
    };
    auto overruns = [&](const std::vector<TraceRecord>& trace) {
        std::map<Duration::rep, std::vector<TraceRecord>> by_frame;
        for (const auto& r : trace) {
            if (r.kind == RecordKind::HmEvent && r.fields.at(0) == "SLOT_OVERRUN") {
                by_frame[r.time / cfg.plan.major_frame].push_back(r);
            }
        }
        return by_frame;
    };

    // Once: one 50us overrun in frame 0, drained in frame 1.
    const auto once = overruns(run("compute 450us\nmark tx\n", ScriptMode::Once));
    require(once.size() == 1 && once.count(0) == 1 && once.at(0).size() == 1, "ONCE: expected one overrun");
    require(once.at(0)[0].fields.at(2) == "50000", "ONCE: amount " + once.at(0)[0].fields.at(2));

    // Repeating: each overrun is 50us, at most one per frame, and a frame
    // without one is exactly a frame draining the previous carry.
    const auto faulty = run("compute 450us\n", ScriptMode::RepeatEachSlot);
    const auto rep = overruns(faulty);
    for (Duration::rep k = 0; k < frames; ++k) {
        const bool draining = k > 0 && rep.count(k - 1) == 1;
        if (draining) {
            require(rep.count(k) == 0, "frame " + std::to_string(k) + " overran while draining");
        } else {
            require(rep.count(k) == 1 && rep.at(k).size() == 1,
                    "frame " + std::to_string(k) + ": expected exactly one overrun");
            require(rep.at(k)[0].fields.at(2) == "50000", "frame " + std::to_string(k) + " amount wrong");
        }
    }

    const auto clean = run("compute 350us\n", ScriptMode::RepeatEachSlot);
    require(project(faulty, 1) == project(clean, 1), "partition 1 trace differs from the fault-free run");
    require(project(faulty, kSystemPartition) == project(clean, kSystemPartition), "system records differ");
    return {true, std::to_string(rep.size()) + " overruns of 50us in " + std::to_string(frames) +
                      " frames (one per non-draining frame); partition 1 trace identical"};
}

// 7. Broker delay model.
Verdict broker()
{
    auto quiet = parse_scenario(R"(name = quiet
mode = broker
repetitions = 100
[broker]
subscribers = 2
uplink = 50us 1ns 0ns
downlink = 50us 1ns 0ns
[loads]
0.7 0.5 -> 0.7 0.5
)");
    for (const auto& r : run_scenario(quiet).rows) {
        require(r.tx_delay == 0_ns, "zero-jitter equal-load delay " + format_duration(*r.tx_delay));
    }

    auto jitter = parse_scenario(R"(name = jitter
mode = broker
repetitions = 1000
payload_sizes = 1000000
seed = 2024
[loads]
0.5 0.75 -> 0.5 0.75
)");
    const auto rows = run_scenario(jitter).rows;
    double sum = 0;
    for (const auto& r : rows) {
        sum += static_cast<double>(r.tx_delay->count());
    }
    const double n = static_cast<double>(rows.size());
    const double mean = sum / n;
    double ss = 0;
    for (const auto& r : rows) {
        const double d = static_cast<double>(r.tx_delay->count()) - mean;
        ss += d * d;
    }
    const double se = std::sqrt(ss / (n - 1)) / std::sqrt(n);
    require(se > 0 && std::fabs(mean) <= 3 * se,
            "equal-load mean " + fmt(mean, 1) + " ns vs 3 x stderr " + fmt(3 * se, 1) + " ns");

    const auto stressed = summarize(run_scenario(load_scenario(test::scenario_dir() / "cookbook_broker.scn")).rows);
    require(stressed.mean >= 4_ms && stressed.mean <= 6_ms,
            "1 MB stressed-vs-relaxed mean " + format_duration(stressed.mean));
    return {true, "zero-jitter delay 0; jitter mean " + fmt(mean, 1) + " ns (3 se = " + fmt(3 * se, 1) +
                      " ns); 1 MB mean delay " + fmt(static_cast<double>(stressed.mean.count()) / 1e6) + " ms"};
}

// 8. Payload sweep end to end.
Verdict payload_sweep()
{
    test::TempDir dir;
    const auto start = std::chrono::steady_clock::now();
    std::vector<RunRow> all;
    for (const std::string name : {"payload_sweep", "payload_sweep_broker"}) {
        const auto csv = dir / (name + ".csv");
        require(cli({"run", scenario_path(name + ".scn"), "--out", csv.string()}) == ExitCode::Success,
                name + ": run failed");
        const auto text = read_file(csv);
        require(text.rfind(std::string{kCsvHeader} + "\n", 0) == 0, name + ": header mismatch");
        std::istringstream lines{text};
        std::string line;
        std::getline(lines, line);
        while (std::getline(lines, line)) {
            require(std::count(line.begin(), line.end(), ',') == 11, name + ": row without 12 columns");
        }
        const auto rows = parse_csv(text);
        std::map<std::uint64_t, std::size_t> per_payload;
        for (const auto& r : rows) {
            ++per_payload[r.payload_bytes];
            const bool partitioned = r.mode == ScenarioMode::Partitioned;
            require(partitioned == r.latency.has_value() && partitioned == r.gap.has_value() &&
                        partitioned == r.latency_to_gap_ratio.has_value() && partitioned == r.t_send.has_value() &&
                        partitioned == r.t_recv.has_value(),
                    name + ": partitioned columns");
            require(partitioned != r.tx_relaxed.has_value() && partitioned != r.tx_stressed.has_value() &&
                        partitioned != r.tx_delay.has_value(),
                    name + ": broker columns");
        }
        for (std::uint64_t p : {1ULL, 1'000'000ULL, 6'000'000ULL}) {
            require(per_payload[p] >= 100, name + ": fewer than 100 repetitions for " + std::to_string(p) + " B");
        }
        all.insert(all.end(), rows.begin(), rows.end());
    }
    require(cli({"report", (dir / "payload_sweep.csv").string(), (dir / "payload_sweep_broker.csv").string()}) ==
                ExitCode::Success,
            "report failed");
    const double elapsed = seconds_since(start);
    require(elapsed < 60.0, "took " + fmt(elapsed) + " s");
    return {true, std::to_string(all.size()) + " rows over {1 B, 1 MB, 6 MB} x 100 reps in both modes, " +
                      fmt(elapsed) + " s"};
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"determinism", determinism},
        {"schedule conformance", schedule_conformance},
        {"port-model equivalence", port_equivalence},
        {"exact latency law", latency_law},
        {"2.1% ratio demo", ratio_demo},
        {"overrun anomaly and isolation", overrun},
        {"tx-delay formula", broker},
        {"payload sweep", payload_sweep},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, e.what()};
        }
        failed += v.pass ? 0 : 1;
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << (i + 1) << " " << criteria[i].first << ": "
                  << v.detail << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
