#include "partsim/harness.hpp"

#include "partsim/scheduler.hpp"

#include <algorithm>
#include <charconv>

namespace partsim {

namespace {

std::optional<SlotId> parse_slot(const std::string& s)
{
    SlotId out = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        return std::nullopt;
    }
    return out;
}

// Incremental search for the tx MARK / successful rx MARK pair.
class DeliveryScanner {
public:
    DeliveryScanner(std::string_view tx_label, std::string_view rx_label) : tx_(tx_label), rx_(rx_label) {}

    std::optional<Delivery> feed(std::span<const TraceRecord> records)
    {
        for (const auto& r : records) {
            if (r.kind != RecordKind::Mark || r.fields.size() < 3) {
                continue;
            }
            const auto slot = parse_slot(r.fields[1]);
            if (!slot) {
                continue;
            }
            if (!sent_) {
                if (r.fields[0] == tx_) {
                    sent_ = true;
                    t_send_ = r.time;
                    tx_slot_ = *slot;
                }
            } else if (r.fields[0] == rx_ && r.fields[2] == to_string(PortStatus::Ok)) {
                return Delivery{t_send_, tx_slot_, r.time, *slot};
            }
        }
        return std::nullopt;
    }

private:
    std::string tx_;
    std::string rx_;
    bool sent_ = false;
    Duration t_send_;
    SlotId tx_slot_ = 0;
};

std::string broker_scenario_name(const Scenario& sc, std::size_t pair_index)
{
    if (sc.load_pairs.size() <= 1) {
        return sc.name;
    }
    return sc.name + "#" + std::to_string(pair_index);
}

void run_partitioned(const Scenario& sc, const RunOptions& options, RunResult& result)
{
    const SystemConfig& cfg = *sc.system;
    const Duration limit = cfg.plan.major_frame * static_cast<Duration::rep>(sc.max_frames);

    for (std::size_t pi = 0; pi < sc.payload_sizes.size(); ++pi) {
        const std::uint64_t size = sc.payload_sizes[pi];
        SimOptions sim_options;
        for (const auto& script : sc.scripts) {
            sim_options.scripts.push_back(bind_payload(script, size));
        }
        sim_options.health_table = sc.health_table;
        sim_options.api_call_cost = sc.api_call_cost;

        for (std::uint64_t rep = 0; rep < sc.repetitions; ++rep) {
            SimState state{cfg, sim_options};
            boot(state);

            std::optional<Delivery> delivery;
            if (options.horizon) {
                run_until(state, *options.horizon);
                delivery = find_delivery(state.trace, sc.tx_label, sc.rx_label);
            } else {
                DeliveryScanner scanner{sc.tx_label, sc.rx_label};
                std::size_t scanned = 0;
                while (!delivery && !state.system_halted && !state.event_queue.empty() &&
                       state.event_queue.begin()->time <= limit) {
                    step(state);
                    delivery = scanner.feed(std::span{state.trace}.subspan(scanned));
                    scanned = state.trace.size();
                }
            }

            if (options.capture_trace && pi == 0 && rep == 0) {
                result.trace = state.trace;
            }

            RunRow row;
            row.scenario = sc.name;
            row.mode = ScenarioMode::Partitioned;
            row.repetition = rep;
            row.payload_bytes = size;
            if (delivery) {
                row.t_send = delivery->t_send;
                row.t_recv = delivery->t_recv;
                row.latency = delivery->t_recv - delivery->t_send;
                if (delivery->tx_slot != delivery->rx_slot) {
                    row.gap = transition_gap(cfg.plan, delivery->tx_slot, delivery->rx_slot);
                    if (*row.gap > Duration{0}) {
                        row.latency_to_gap_ratio =
                            static_cast<double>(row.latency->count()) / static_cast<double>(row.gap->count());
                    }
                }
            }
            result.rows.push_back(std::move(row));

            if (state.system_halted) {
                result.system_halted = true;
                result.fault = "HALT_SYSTEM at " + format_duration(state.now) + " (payload " +
                               std::to_string(size) + ", repetition " + std::to_string(rep) + ")";
                return;
            }
            if (!delivery && !options.horizon) {
                result.fault = "no delivery within " + std::to_string(sc.max_frames) + " frames (payload " +
                               std::to_string(size) + ", repetition " + std::to_string(rep) + ")";
                return;
            }
        }
    }
}

void run_broker(const Scenario& sc, RunResult& result)
{
    const BrokerTopology& topo = *sc.broker;
    auto worst = [](const std::vector<Duration>& times) { return *std::max_element(times.begin(), times.end()); };

    for (std::size_t li = 0; li < sc.load_pairs.size(); ++li) {
        const auto& pair = sc.load_pairs[li];
        for (std::size_t pi = 0; pi < sc.payload_sizes.size(); ++pi) {
            const std::uint64_t size = sc.payload_sizes[pi];
            for (std::uint64_t rep = 0; rep < sc.repetitions; ++rep) {
                const auto relaxed_seed = derive_seed(sc.seed, rep, pi, li, 0);
                const auto stressed_seed = derive_seed(sc.seed, rep, pi, li, 1);

                RunRow row;
                row.scenario = broker_scenario_name(sc, li);
                row.mode = ScenarioMode::Broker;
                row.repetition = rep;
                row.payload_bytes = size;
                row.tx_relaxed = worst(tx_time(topo, size, pair.relaxed, relaxed_seed));
                row.tx_stressed = worst(tx_time(topo, size, pair.stressed, stressed_seed));
                row.tx_delay = tx_delay(*row.tx_stressed, *row.tx_relaxed);
                result.rows.push_back(std::move(row));

                if (rep == 0) {
                    result.deliveries.push_back(publish(topo, size, Duration{0}, pair.relaxed, relaxed_seed));
                    result.deliveries.push_back(publish(topo, size, Duration{0}, pair.stressed, stressed_seed));
                }
            }
        }
    }
}

}  // namespace

std::optional<Delivery> find_delivery(std::span<const TraceRecord> trace, std::string_view tx_label,
                                      std::string_view rx_label)
{
    DeliveryScanner scanner{tx_label, rx_label};
    return scanner.feed(trace);
}

RunResult run_scenario(const Scenario& sc, const RunOptions& options)
{
    auto findings = validate_scenario(sc);
    const bool has_error = std::any_of(findings.begin(), findings.end(),
                                       [](const Finding& f) { return f.severity == Severity::Error; });
    if (has_error) {
        throw ScenarioInvalid(std::move(findings));
    }

    RunResult result;
    if (sc.mode == ScenarioMode::Partitioned) {
        run_partitioned(sc, options, result);
    } else {
        run_broker(sc, result);
    }
    return result;
}

}  // namespace partsim
