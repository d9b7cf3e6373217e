// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <queue>
#include <variant>
#include <vector>

#include "openstate/common.hpp"
#include "openstate/pipeline/packet.hpp"
#include "openstate/simnet/controller.hpp"
#include "openstate/simnet/metrics.hpp"

namespace openstate::simnet {

// A packet reaching (node, port). link_epoch is compared against the link's
// epoch on arrival; a mismatch means the link failed while it was in flight.
struct PacketArrival {
  NodeId node = 0;
  PortId port = 0;
  pipeline::Packet packet;
  LinkId link = 0;
  std::uint64_t link_epoch = 0;
};

struct LinkStatus {
  LinkId link = 0;
  bool up = false;
};

// A switch observing a port change (detection delay already applied).
struct PortStatus {
  NodeId node = 0;
  PortId port = 0;
  bool up = false;
};

struct TimerFire {
  NodeId node = 0;
};

struct PacketIn {
  pipeline::Packet packet;
};

struct PortStatusMsg {
  PortId port = 0;
  bool up = false;
};

// The port-status notification a controller reply answers.
struct RecoveryTrigger {
  NodeId node = 0;
  PortId port = 0;
  bool up = false;
  SimTime notified_at = 0;
};

struct CtrlMsg {
  CtrlDirection direction = CtrlDirection::kToController;
  NodeId node = 0;  // the switch on the other end
  SimTime sent_at = 0;
  std::variant<PacketIn, PortStatusMsg, ControllerAction> payload;
  std::optional<RecoveryTrigger> trigger;
};

// Generator tick: n is the grid index (or the index into an explicit list),
// pkt the packet number within a TCP flow.
struct GenTick {
  std::size_t generator = 0;
  std::int64_t n = 0;
  std::uint32_t pkt = 0;
};

using EventKind = std::variant<PacketArrival, LinkStatus, PortStatus,
                               TimerFire, CtrlMsg, GenTick>;

struct Event {
  SimTime time = 0;
  std::uint64_t seq = 0;
  EventKind kind;
};

// Min-queue on (time, seq). seq grows with every push, so events scheduled
// for the same instant run in scheduling order.
class EventQueue {
 public:
  std::uint64_t push(SimTime time, EventKind kind);
  Event pop();
  const Event& top() const { return heap_.top(); }
  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const Event& x, const Event& y) const {
      return x.time != y.time ? x.time > y.time : x.seq > y.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, Later> heap_;
  std::uint64_t next_seq_ = 0;
};

}  // namespace openstate::simnet
