// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <set>
#include <vector>

#include "openstate/common.hpp"
#include "openstate/pipeline/switch.hpp"
#include "openstate/simnet/controller.hpp"
#include "openstate/simnet/event.hpp"
#include "openstate/simnet/metrics.hpp"
#include "openstate/simnet/scenario.hpp"

namespace openstate::simnet {

// Packets traversing more switches than this are dropped as looping.
constexpr std::size_t kMaxHops = 64;

// Single-use event loop over one scenario.
//
// run(until) stops generating traffic and applying link changes after
// `until`, then drains the packets and controller messages still in flight so
// that every generated packet ends delivered or dropped.
class Simulator {
 public:
  // Throws ConfigError on structural problems (configs for non-switches,
  // generators on unattached hosts).
  explicit Simulator(Scenario scenario);
  ~Simulator();

  Simulator(const Simulator&) = delete;
  Simulator& operator=(const Simulator&) = delete;

  // Schedules a status change of link (a, b). Throws UnknownLink, or
  // ConfigError when `at` lies in the past.
  void inject_link_status(NodeId a, NodeId b, bool up, SimTime at);

  MetricsLog run(SimTime until);

  SimTime now() const { return now_; }
  const Topology& topology() const { return scenario_.topology; }
  // Throws ConfigError for non-switch nodes.
  const pipeline::Switch& switch_at(NodeId id) const;

 private:
  void schedule_traffic(SimTime until);
  void schedule_gen_tick(std::size_t g, std::int64_t n, std::uint32_t pkt,
                         SimTime until);
  void schedule_timer(NodeId node, SimTime until);

  void on_gen_tick(const GenTick& ev, SimTime until);
  void on_arrival(PacketArrival& ev, SimTime until);
  void on_link_status(const LinkStatus& ev);
  void on_port_status(const PortStatus& ev);
  void on_timer(const TimerFire& ev, SimTime until);
  void on_ctrl(CtrlMsg& ev, SimTime until);

  std::uint64_t new_record(const pipeline::Packet& packet, std::size_t gen,
                           std::optional<std::uint64_t> parent);
  std::uint64_t clone_record(std::uint64_t original);
  void transmit(NodeId node, PortId port, pipeline::Packet packet,
                SimTime at);
  void deliver(NodeId host, const pipeline::Packet& packet);
  void drop(std::uint64_t packet_id, NodeId node, DropReason reason);
  void send_to_controller(NodeId node, SimTime at, CtrlMsg msg);
  void send_to_switch(NodeId node, SimTime at, ControllerAction action,
                      std::optional<RecoveryTrigger> trigger);
  void drain_controller_notes();

  Scenario scenario_;
  std::map<NodeId, pipeline::Switch> switches_;
  std::unique_ptr<ControllerApp> controller_;
  std::vector<std::uint64_t> link_epoch_;
  std::vector<std::int64_t> first_tick_;
  std::set<std::pair<NodeId, SimTime>> timers_;
  EventQueue queue_;
  MetricsLog log_;
  SimTime now_ = 0;
  bool ran_ = false;
};

// Convenience wrapper: constructs a simulator and runs it.
MetricsLog run(const Scenario& scenario, SimTime until);

}  // namespace openstate::simnet
