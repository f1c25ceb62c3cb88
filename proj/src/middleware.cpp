#include "partsim/middleware.hpp"

#include "partsim/calibration.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace partsim {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

Duration scaled(Duration d, double factor)
{
    return Duration{static_cast<Duration::rep>(std::llround(static_cast<double>(d.count()) * factor))};
}

}  // namespace

double Rng::uniform()
{
    // (engine >> 11) + 1 lies in [1, 2^53], so the result is never 0.
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
}

double Rng::standard_normal()
{
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
}

Duration Rng::half_normal(Duration stddev)
{
    if (stddev <= Duration{0}) {
        return Duration{0};
    }
    return scaled(stddev, std::fabs(standard_normal()));
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d)
{
    std::uint64_t h = splitmix64(base);
    for (std::uint64_t v : {a, b, c, d}) {
        h = splitmix64(h ^ v);
    }
    return h;
}

bool LoadProfile::valid() const
{
    return cpu_load >= 0.0 && cpu_load <= 1.0 && memory_load >= 0.0 && memory_load <= 1.0;
}

BrokerTopology default_topology(std::size_t subscribers)
{
    using namespace calibration;
    BrokerTopology t;
    t.uplink = LinkModel{kLinkBaseLatency, kLinkPerByte, kLinkJitterStddev, 1};
    for (std::size_t i = 0; i < subscribers; ++i) {
        t.downlinks.push_back(LinkModel{kLinkBaseLatency, kLinkPerByte, kLinkJitterStddev, 2 + i});
    }
    t.proc_fixed = kServerProcFixed;
    t.proc_per_byte = kServerProcPerByte;
    t.load_factor = kLoadFactor;
    return t;
}

Duration processing_time(const BrokerTopology& topology, std::uint64_t size, const LoadProfile& load)
{
    const Duration base = topology.proc_fixed + topology.proc_per_byte * static_cast<Duration::rep>(size);
    return scaled(base, 1.0 + topology.load_factor * load.cpu_load);
}

std::vector<Duration> tx_time(const BrokerTopology& topology, std::uint64_t size, const LoadProfile& load,
                              std::uint64_t seed)
{
    if (size == 0) {
        throw std::invalid_argument("tx_time: payload size must be positive");
    }
    Rng up_rng{derive_seed(seed, topology.uplink.rng_seed)};
    const Duration shared = topology.uplink.nominal(size) + up_rng.half_normal(topology.uplink.jitter_stddev) +
                            processing_time(topology, size, load);

    std::vector<Duration> out;
    out.reserve(topology.downlinks.size());
    for (const auto& link : topology.downlinks) {
        Rng rng{derive_seed(seed, link.rng_seed)};
        out.push_back(shared + link.nominal(size) + rng.half_normal(link.jitter_stddev));
    }
    return out;
}

DeliveryRecord publish(const BrokerTopology& topology, std::uint64_t size, Duration t, const LoadProfile& load,
                       std::uint64_t seed)
{
    DeliveryRecord rec;
    rec.payload_size = size;
    rec.sent_at = t;
    rec.load = load;
    for (const auto tx : tx_time(topology, size, load, seed)) {
        rec.delivered_at.push_back(t + tx);
    }
    return rec;
}

}  // namespace partsim
