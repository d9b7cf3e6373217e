// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "openstate/apps/config_builder.hpp"
#include "openstate/common.hpp"
#include "openstate/pipeline/switch.hpp"
#include "openstate/simnet/topology.hpp"

namespace openstate::apps {

// Detour for the case where node `failed` becomes unreachable from its
// predecessor on the primary path (the detect node). For a link failure this
// is the node across the failed link.
struct FailurePlan {
  NodeId failed = 0;
  NodeId reroute = 0;
  // From the reroute node to the node where it rejoins the primary path.
  std::vector<NodeId> detour;
  Duration delta = kSecond;  // probe period
};

using DemandMatch = std::vector<std::pair<pipeline::HeaderField, FieldValue>>;

struct ProtectedDemand {
  // Ingress and egress switches, used for naming only.
  NodeId src = 0;
  NodeId dst = 0;
  // Source host, the switches in order, destination host.
  std::vector<NodeId> primary_path;
  // Header values identifying the demand's packets. The field list is also
  // the state-table scope at reroute nodes.
  DemandMatch match;
  std::vector<FailurePlan> plans;
};

// A plan checked against its demand and topology, with the derived roles.
struct ResolvedPlan {
  NodeId failed = 0;
  NodeId detect = 0;
  NodeId reroute = 0;
  NodeId rejoin = 0;
  std::size_t failed_index = 0;  // positions in primary_path
  std::size_t detect_index = 0;
  std::size_t reroute_index = 0;
  std::size_t rejoin_index = 0;
  // Primary nodes strictly between reroute and detect, upstream first.
  std::vector<NodeId> bounce;
  std::vector<NodeId> detour;
  Label f_tag = 0;
  Label p_tag = 0;
  Duration delta = 0;

  bool local() const { return reroute == detect; }
};

// Rule priorities. Tagged traffic always outranks the untagged demand rules
// it would otherwise also match.
inline constexpr int kPrimaryPriority = 10;
inline constexpr int kRerouteStatePriority = 20;
inline constexpr int kReactiveDetourPriority = 25;
inline constexpr int kTaggedPriority = 30;
inline constexpr int kRerouteEnterPriority = 32;
inline constexpr int kRejoinPriority = 35;
inline constexpr int kProbeReturnPriority = 40;

// Throws ConfigError when the path is not a host-switches-host walk of
// adjacent, distinct nodes or the match is empty.
void check_demand(const simnet::Topology& topo, const ProtectedDemand& demand);
// Throws ConfigError when the plan does not fit the demand.
ResolvedPlan resolve_plan(const simnet::Topology& topo,
                          const ProtectedDemand& demand,
                          const FailurePlan& plan);

pipeline::ScopeSpec demand_scope(const ProtectedDemand& demand);
pipeline::Match demand_match(const ProtectedDemand& demand, int priority);
std::string demand_name(const ProtectedDemand& demand);

// Untagged forwarding along the primary path on every switch except `skip`.
void add_primary_rules(ConfigBuilder& b, const simnet::Topology& topo,
                       const ProtectedDemand& demand,
                       const std::vector<NodeId>& skip);
// F-tagged forwarding on the detour intermediates and the tag pop at rejoin.
void add_detour_rules(ConfigBuilder& b, const simnet::Topology& topo,
                      const ProtectedDemand& demand, const ResolvedPlan& plan);

// Full stateful scheme: primary forwarding, fast-failover bounce at detect
// nodes, F/P state machine at reroute nodes, detour and probe handling.
// Throws ConfigError on invalid plans or tag collisions.
ConfigMap build_failure_recovery(const simnet::Topology& topo,
                                 const std::vector<ProtectedDemand>& demands);

}  // namespace openstate::apps
