#pragma once

// Calibration constants for the broker (publisher -> server -> subscriber)
// model. These are tuning values, NOT measurements: they are chosen so that a
// 1 MB payload at full CPU load shows a Tx Delay just under 5 ms against an
// idle host:
//
//   processing(1 MB) = 20 us + 1 ns/B * 1'000'000 B = 1.02 ms
//   tx_delay         = processing * k * (1.0 - 0.0) = 1.02 ms * 4.9 = 4.998 ms
//
// Links are load-independent; only server processing scales with CPU load.

#include "partsim/duration.hpp"

namespace partsim::calibration {

using namespace partsim::literals;

inline constexpr Duration kServerProcFixed = 20_us;
inline constexpr Duration kServerProcPerByte = 1_ns;
inline constexpr double kLoadFactor = 4.9;

inline constexpr Duration kLinkBaseLatency = 50_us;
inline constexpr Duration kLinkPerByte = 1_ns;
inline constexpr Duration kLinkJitterStddev = 20_us;

inline constexpr double kStressedCpuLoad = 1.0;
inline constexpr double kStressedMemoryLoad = 0.75;

}  // namespace partsim::calibration
