// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "openstate/common.hpp"
#include "openstate/pipeline/packet.hpp"

namespace openstate::simnet {

// New TCP flows at `rate` flows/s; each flow is a train of pkts_per_flow
// packets pkt_gap apart with a fresh l4_src.
struct TcpFlowArrivals {
  std::uint64_t rate = 0;
  std::uint64_t flows = 0;
  std::uint32_t pkts_per_flow = 1;
  Duration pkt_gap = 0;
  FieldValue first_l4_src = 10000;
};

// Constant bit rate, one flow, `rate` packets/s.
struct Cbr {
  std::uint64_t rate = 0;
};

// One flow with explicitly listed emission times (ascending).
struct Explicit {
  std::vector<SimTime> times;
};

// Emissions are evenly spaced: the n-th tick of a grid with rate r sits at
//   anchor + floor((n * 1e6 + phase_ppm) / r)
// and only ticks in [start, stop) are emitted. TcpFlowArrivals uses the same
// grid for flow starts, counting n from the first tick at or after start.
struct TrafficGen {
  std::variant<TcpFlowArrivals, Cbr, Explicit> kind;
  NodeId src = 0;  // host emitting the packets
  NodeId dst = 0;  // informational (metrics, traces)
  pipeline::Packet header;
  SimTime start = 0;
  SimTime stop = kNever;
  SimTime anchor = 0;
  std::uint32_t phase_ppm = 0;
  // Adds a uniform offset in [0, jitter] to every grid tick (flow starts for
  // TcpFlowArrivals), drawn from the scenario seed. Must stay below the grid
  // spacing; ignored by Explicit.
  Duration jitter = 0;
  std::string label;
};

// Grid arithmetic shared by the simulator and by test oracles.
SimTime grid_tick(std::uint64_t rate, SimTime anchor, std::uint32_t phase_ppm,
                  std::int64_t n);
// Smallest n whose tick is >= t.
std::int64_t first_tick_at_or_after(std::uint64_t rate, SimTime anchor,
                                    std::uint32_t phase_ppm, SimTime t);

// Flow identifier used in the metrics log: generator g (0-based) owns ids
// (g + 1) * kFlowIdStride + n, with n = 0 for single-flow generators.
constexpr std::uint64_t kFlowIdStride = 1'000'000;
inline std::uint64_t flow_id_for(std::size_t generator, std::uint64_t n) {
  return (generator + 1) * kFlowIdStride + n;
}

}  // namespace openstate::simnet
