// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "openstate/common.hpp"
#include "openstate/pipeline/switch.hpp"

namespace openstate::apps {

// Learning switch with lookup scope [eth_dst] and update scope [eth_src].
// The state label of a MAC address is the port it was last seen on, so
// labels equal port ids.
struct MacLearningIntent {
  std::vector<PortId> ports;
  std::optional<Duration> idle_timeout;
  int priority = 10;
};

pipeline::SwitchConfig build_mac_learning(const MacLearningIntent& intent);

}  // namespace openstate::apps
