// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "openstate/common.hpp"

namespace openstate::simnet {

enum class PacketStatus : std::uint8_t { kInFlight, kDelivered, kDropped };

enum class DropReason : std::uint8_t {
  kNone,
  kTableMiss,
  kDropAction,
  kNoLiveBucket,
  kLinkDown,
  kInFlightOnFailedLink,
  kUnlinkedPort,
  kNoController,
  kControllerDiscard,
  kHopLimit,
};

std::string_view to_string(PacketStatus status);
std::string_view to_string(DropReason reason);

// One switch traversal. depart is -1 while the packet sits at the controller
// or when the switch dropped it.
struct Hop {
  NodeId node = 0;
  PortId in_port = 0;
  SimTime arrive = 0;
  SimTime depart = -1;
  std::optional<PortId> out_port;
  std::optional<Label> tag_in;
  std::optional<Label> tag_out;
  Label state_before = kDefaultState;
  Label state_after = kDefaultState;
  bool via_controller = false;
  std::uint32_t groups_invoked = 0;
};

struct PacketRecord {
  std::uint64_t packet_id = 0;
  std::uint64_t flow_id = 0;
  std::size_t generator = 0;
  // Set on copies made by multi-bucket groups; the original keeps its id.
  std::optional<std::uint64_t> parent;
  SimTime created_at = 0;
  PacketStatus status = PacketStatus::kInFlight;
  DropReason reason = DropReason::kNone;
  SimTime terminal_at = -1;
  NodeId terminal_node = 0;
  bool tagged_on_delivery = false;
  std::vector<Hop> hops;

  bool is_copy() const { return parent.has_value(); }
};

enum class CtrlDirection : std::uint8_t { kToController, kToSwitch };
enum class CtrlKind : std::uint8_t {
  kPacketIn,
  kPortStatus,
  kFlowModAdd,
  kFlowModDelete,
  kPacketOut,
};

std::string_view to_string(CtrlKind kind);

struct CtrlRecord {
  SimTime sent_at = 0;
  SimTime delivered_at = 0;
  CtrlDirection direction = CtrlDirection::kToController;
  CtrlKind kind = CtrlKind::kPacketIn;
  NodeId node = 0;
};

// A flow-table update caused by a port-status notification.
struct RecoveryRecord {
  NodeId notifying_node = 0;
  PortId port = 0;
  bool port_up = false;
  NodeId target_node = 0;
  std::uint64_t cookie = 0;
  SimTime notified_at = 0;
  SimTime installed_at = 0;

  Duration delay() const { return installed_at - notified_at; }
};

struct LinkEvent {
  SimTime at = 0;
  LinkId link = 0;
  bool up = false;
};

struct MetricsLog {
  std::vector<PacketRecord> packets;  // indexed by packet_id
  std::vector<CtrlRecord> ctrl;
  std::vector<RecoveryRecord> recoveries;
  std::vector<LinkEvent> link_events;
  std::vector<std::string> notes;

  // Counts over original (non-copy) packets.
  std::uint64_t generated() const;
  std::uint64_t delivered() const;
  std::uint64_t dropped() const;
};

// Departure from the first switch minus arrival there, for the flow's first
// packet. Throws UnknownFlow.
Duration measure_processing_time(const MetricsLog& log, std::uint64_t flow_id);

// Original packets created within [from, to] that were dropped.
std::uint64_t count_losses(const MetricsLog& log, SimTime from, SimTime to);
inline std::uint64_t count_losses(const MetricsLog& log) {
  return count_losses(log, std::numeric_limits<SimTime>::min(), kNever);
}

// Compact hop list: "node:in>out" entries joined by spaces, with "@host"
// appended for delivery.
std::string format_hop_list(const PacketRecord& record);

// Columns: flow_id,created_at,status,drop_reason,hop_list
void write_packet_csv(std::ostream& os, const MetricsLog& log);

struct RunSummary {
  std::string scenario_id;
  std::uint64_t seed = 0;
  std::uint64_t rate = 0;
  Duration rtt = 0;
  std::uint64_t losses = 0;
  Duration recovery_delay = 0;
};

void write_summary_header(std::ostream& os);
void write_summary_row(std::ostream& os, const RunSummary& summary);

}  // namespace openstate::simnet
