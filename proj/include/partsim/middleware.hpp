#pragma once

#include "partsim/duration.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace partsim {

/// Deterministic random stream: mt19937_64 plus a hand-written Box-Muller
/// transform so draws do not depend on the standard library's distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in (0, 1], 53-bit resolution.
    double uniform();
    double standard_normal();
    /// |N(0, stddev)| rounded to whole nanoseconds; zero stddev draws nothing.
    Duration half_normal(Duration stddev);

private:
    std::mt19937_64 engine_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Seed derivation used everywhere a run needs an independent stream:
/// splitmix64 folded over (base, a, b, c, d).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0,
                          std::uint64_t d = 0);

struct LinkModel {
    Duration base_latency;
    Duration per_byte;
    Duration jitter_stddev;
    std::uint64_t rng_seed = 0;   // salt for this link's jitter stream

    [[nodiscard]] Duration nominal(std::uint64_t bytes) const
    {
        return base_latency + per_byte * static_cast<Duration::rep>(bytes);
    }
};

struct LoadProfile {
    double cpu_load = 0.0;
    double memory_load = 0.0;   // recorded for reports; no effect on timing

    [[nodiscard]] bool valid() const;
};

/// Publisher -> server (mediator) -> subscribers. There is no direct
/// publisher -> subscriber path.
struct BrokerTopology {
    LinkModel uplink;                  // publisher -> server
    std::vector<LinkModel> downlinks;  // server -> subscriber i
    Duration proc_fixed;
    Duration proc_per_byte;
    double load_factor = 0.0;

    [[nodiscard]] std::size_t subscriber_count() const { return downlinks.size(); }
};

/// Topology with the values from calibration.hpp and `subscribers` downlinks.
BrokerTopology default_topology(std::size_t subscribers = 1);

struct DeliveryRecord {
    std::uint64_t payload_size = 0;
    Duration sent_at;
    std::vector<Duration> delivered_at;
    LoadProfile load;
};

/// Server processing time under load: (fixed + per_byte*size) * (1 + k*cpu).
Duration processing_time(const BrokerTopology& topology, std::uint64_t size, const LoadProfile& load);

/// Per-subscriber end-to-end time:
///   uplink(size) + processing(size)*(1 + k*cpu) + downlink_i(size) + jitter.
/// The uplink jitter is drawn once (shared); each downlink draws its own.
/// Every link draws from Rng(derive_seed(seed, link.rng_seed)).
std::vector<Duration> tx_time(const BrokerTopology& topology, std::uint64_t size, const LoadProfile& load,
                              std::uint64_t seed);

/// Stressed Tx Time - Relaxed Tx Time; may be negative under jitter.
constexpr Duration tx_delay(Duration stressed, Duration relaxed)
{
    return stressed - relaxed;
}

DeliveryRecord publish(const BrokerTopology& topology, std::uint64_t size, Duration t, const LoadProfile& load,
                       std::uint64_t seed);

}  // namespace partsim
