// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "openstate/common.hpp"
#include "openstate/pipeline/switch.hpp"
#include "openstate/simnet/controller.hpp"
#include "openstate/simnet/topology.hpp"
#include "openstate/simnet/traffic.hpp"

namespace openstate::simnet {

// Link (a, b) changes status at `at`.
struct LinkChange {
  NodeId a = 0;
  NodeId b = 0;
  bool up = false;
  SimTime at = 0;
};

struct Scenario {
  std::string id;
  std::uint64_t seed = 0;
  Topology topology;
  // Switches without an entry run an empty table with the Drop miss policy.
  std::map<NodeId, pipeline::SwitchConfig> switch_configs;
  std::vector<TrafficGen> traffic;
  std::vector<LinkChange> link_changes;
  // Delay between a link changing and its switches seeing the port change.
  Duration detection_delay = 0;
  // Per-packet pipeline latency at every switch.
  Duration switch_latency = 0;
  std::optional<ControllerChannel> controller;
  // Schedule state-table expiry as timer events instead of only at lookup.
  bool eager_timers = false;
};

}  // namespace openstate::simnet
