// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "openstate/apps/config_builder.hpp"
#include "openstate/simnet/topology.hpp"

namespace openstate::apps {

struct Diagnostic {
  NodeId node = 0;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
  auto operator<=>(const Diagnostic&) const = default;
};

// Static checks over compiled configs:
//  - configs only for switches, every Output port linked, groups defined;
//  - rules with equal priority and match but different actions;
//  - matched state labels producible by some set-state or rollback;
//  - every pushed tag followed hop by hop until popped: reaching a host
//    still tagged, pushing onto a tagged packet or finding no rule at all
//    are reported. Rules whose outcome depends on state or on header fields
//    not fixed by the pushing rule are followed as alternatives.
// Returns diagnostics sorted and deduplicated; empty means clean.
std::vector<Diagnostic> validate_config(const simnet::Topology& topo,
                                        const ConfigMap& configs);

std::string format_diagnostic(const Diagnostic& d);

}  // namespace openstate::apps
