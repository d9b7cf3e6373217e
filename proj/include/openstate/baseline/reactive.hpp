// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "openstate/apps/config_builder.hpp"
#include "openstate/apps/failure_recovery.hpp"
#include "openstate/common.hpp"
#include "openstate/pipeline/switch.hpp"
#include "openstate/simnet/controller.hpp"
#include "openstate/simnet/topology.hpp"

namespace openstate::baseline {

// Balancer switch for the controller-driven variant: traffic to each
// destination goes to the controller until a pinning rule exists.
struct ReactiveConsistencyIntent {
  NodeId node = 0;
  std::vector<PortId> out_ports;
  std::vector<FieldValue> destinations;
};

inline constexpr int kDispatchPriority = 1;
inline constexpr int kPinPriority = 100;

pipeline::SwitchConfig build_reactive_consistency(
    const ReactiveConsistencyIntent& intent);

// Pins every new 4-tuple to a uniformly drawn port with a flow-mod and
// releases the held packet with a packet-out. Packets of a flow already
// decided (arriving before the pin is installed) are released on the same
// port without a second flow-mod.
class ReactiveConsistencyApp : public simnet::ControllerApp {
 public:
  ReactiveConsistencyApp(std::vector<ReactiveConsistencyIntent> balancers,
                         std::uint64_t seed);

  std::vector<simnet::ControllerAction> on_packet_in(
      NodeId node, const pipeline::Packet& packet, SimTime now) override;
  std::vector<simnet::ControllerAction> on_port_status(NodeId node, PortId port,
                                                       bool up,
                                                       SimTime now) override;
  std::vector<std::string> drain_notes() override;

  std::size_t pinned() const { return registry_.size(); }

 private:
  std::map<NodeId, ReactiveConsistencyIntent> balancers_;
  std::map<std::pair<NodeId, std::vector<FieldValue>>, PortId> registry_;
  std::mt19937_64 rng_;
  std::vector<std::string> notes_;
};

// Tables for the controller-driven recovery: primary forwarding, a
// fast-failover group at each detect node holding only the primary port, and
// the pre-provisioned detour and rejoin rules. Nothing bounces and no switch
// keeps state; local plans (reroute == detect) keep their local fallback.
apps::ConfigMap build_reactive_recovery(
    const simnet::Topology& topo,
    const std::vector<apps::ProtectedDemand>& demands);

// On a port-down from a detect node, steers every affected demand onto its
// detour at the reroute node; on port-up removes those rules again.
class ReactiveRecoveryApp : public simnet::ControllerApp {
 public:
  ReactiveRecoveryApp(const simnet::Topology& topo,
                      std::vector<apps::ProtectedDemand> demands);

  std::vector<simnet::ControllerAction> on_packet_in(
      NodeId node, const pipeline::Packet& packet, SimTime now) override;
  std::vector<simnet::ControllerAction> on_port_status(NodeId node, PortId port,
                                                       bool up,
                                                       SimTime now) override;
  std::vector<std::string> drain_notes() override;

 private:
  struct Plan {
    NodeId reroute;
    std::uint64_t cookie;
    pipeline::FlowEntry entry;
  };
  std::map<std::pair<NodeId, PortId>, std::vector<Plan>> plans_;
  std::vector<std::string> notes_;
};

// Routes packet-ins and port-status messages to the app owning them.
class ControllerMux : public simnet::ControllerApp {
 public:
  ControllerMux(std::unique_ptr<simnet::ControllerApp> packet_in,
                std::unique_ptr<simnet::ControllerApp> port_status);

  std::vector<simnet::ControllerAction> on_packet_in(
      NodeId node, const pipeline::Packet& packet, SimTime now) override;
  std::vector<simnet::ControllerAction> on_port_status(NodeId node, PortId port,
                                                       bool up,
                                                       SimTime now) override;
  std::vector<std::string> drain_notes() override;

 private:
  std::unique_ptr<simnet::ControllerApp> packet_in_;
  std::unique_ptr<simnet::ControllerApp> port_status_;
};

}  // namespace openstate::baseline
