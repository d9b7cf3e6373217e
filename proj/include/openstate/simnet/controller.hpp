// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "openstate/common.hpp"
#include "openstate/pipeline/flow_table.hpp"
#include "openstate/pipeline/packet.hpp"

namespace openstate::simnet {

struct FlowMod {
  enum class Op : std::uint8_t { kAdd, kDeleteByCookie };

  NodeId node = 0;
  Op op = Op::kAdd;
  pipeline::FlowEntry entry;  // kAdd
  std::uint64_t cookie = 0;   // kDeleteByCookie
};

struct PacketOut {
  NodeId node = 0;
  pipeline::Packet packet;
  PortId port = 0;
};

using ControllerAction = std::variant<FlowMod, PacketOut>;

// Application logic running on the logical controller node. Handlers are
// invoked inside the event loop when a message reaches the controller; the
// channel adds processing and propagation delay to whatever they return.
class ControllerApp {
 public:
  virtual ~ControllerApp() = default;

  virtual std::vector<ControllerAction> on_packet_in(
      NodeId node, const pipeline::Packet& packet, SimTime now) = 0;
  virtual std::vector<ControllerAction> on_port_status(NodeId node,
                                                       PortId port, bool up,
                                                       SimTime now) = 0;

  // Diagnostics produced since the last call (e.g. notifications with no
  // matching plan).
  virtual std::vector<std::string> drain_notes() { return {}; }
};

using ControllerFactory =
    std::function<std::unique_ptr<ControllerApp>(std::uint64_t seed)>;

// Every message in either direction takes one_way_delay; the handler adds
// proc_delay before its replies leave the controller.
struct ControllerChannel {
  Duration one_way_delay = 0;
  Duration proc_delay = kMillisecond;
  bool notify_port_status = true;
  ControllerFactory make_app;
};

}  // namespace openstate::simnet
