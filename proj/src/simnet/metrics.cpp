// SPDX-License-Identifier: Apache-2.0

#include "openstate/simnet/metrics.hpp"

#include <ostream>

namespace openstate::simnet {

std::string_view to_string(PacketStatus status) {
  switch (status) {
    case PacketStatus::kInFlight: return "in_flight";
    case PacketStatus::kDelivered: return "delivered";
    case PacketStatus::kDropped: return "dropped";
  }
  return "?";
}

std::string_view to_string(DropReason reason) {
  switch (reason) {
    case DropReason::kNone: return "";
    case DropReason::kTableMiss: return "table_miss";
    case DropReason::kDropAction: return "drop_action";
    case DropReason::kNoLiveBucket: return "no_live_bucket";
    case DropReason::kLinkDown: return "link_down";
    case DropReason::kInFlightOnFailedLink: return "in_flight_on_failed_link";
    case DropReason::kUnlinkedPort: return "unlinked_port";
    case DropReason::kNoController: return "no_controller";
    case DropReason::kControllerDiscard: return "controller_discard";
    case DropReason::kHopLimit: return "hop_limit";
  }
  return "?";
}

std::string_view to_string(CtrlKind kind) {
  switch (kind) {
    case CtrlKind::kPacketIn: return "packet_in";
    case CtrlKind::kPortStatus: return "port_status";
    case CtrlKind::kFlowModAdd: return "flow_mod_add";
    case CtrlKind::kFlowModDelete: return "flow_mod_delete";
    case CtrlKind::kPacketOut: return "packet_out";
  }
  return "?";
}

std::uint64_t MetricsLog::generated() const {
  std::uint64_t n = 0;
  for (const auto& p : packets) n += p.is_copy() ? 0 : 1;
  return n;
}

std::uint64_t MetricsLog::delivered() const {
  std::uint64_t n = 0;
  for (const auto& p : packets) {
    if (!p.is_copy() && p.status == PacketStatus::kDelivered) ++n;
  }
  return n;
}

std::uint64_t MetricsLog::dropped() const {
  std::uint64_t n = 0;
  for (const auto& p : packets) {
    if (!p.is_copy() && p.status == PacketStatus::kDropped) ++n;
  }
  return n;
}

Duration measure_processing_time(const MetricsLog& log, std::uint64_t flow_id) {
  for (const PacketRecord& p : log.packets) {
    if (p.flow_id != flow_id || p.is_copy()) continue;
    // Packets are stored in creation order, so this is the first one.
    if (p.hops.empty() || p.hops.front().depart < 0) {
      throw UnknownFlow("flow " + std::to_string(flow_id) +
                        " never left its first switch");
    }
    return p.hops.front().depart - p.hops.front().arrive;
  }
  throw UnknownFlow("flow " + std::to_string(flow_id) + " not in log");
}

std::uint64_t count_losses(const MetricsLog& log, SimTime from, SimTime to) {
  std::uint64_t n = 0;
  for (const PacketRecord& p : log.packets) {
    if (p.is_copy() || p.status != PacketStatus::kDropped) continue;
    if (p.created_at >= from && p.created_at <= to) ++n;
  }
  return n;
}

std::string format_hop_list(const PacketRecord& record) {
  std::string out;
  for (const Hop& h : record.hops) {
    if (!out.empty()) out += ' ';
    out += std::to_string(h.node) + ':' + std::to_string(h.in_port) + '>';
    out += h.out_port ? std::to_string(*h.out_port) : std::string("x");
  }
  if (record.status == PacketStatus::kDelivered) {
    if (!out.empty()) out += ' ';
    out += '@' + std::to_string(record.terminal_node);
  }
  return out;
}

void write_packet_csv(std::ostream& os, const MetricsLog& log) {
  os << "flow_id,created_at,status,drop_reason,hop_list\n";
  for (const PacketRecord& p : log.packets) {
    os << p.flow_id << ',' << p.created_at << ',' << to_string(p.status)
       << ',' << to_string(p.reason) << ',' << format_hop_list(p) << '\n';
  }
}

void write_summary_header(std::ostream& os) {
  os << "scenario_id,seed,rate,rtt,losses,recovery_delay\n";
}

void write_summary_row(std::ostream& os, const RunSummary& s) {
  os << s.scenario_id << ',' << s.seed << ',' << s.rate << ',' << s.rtt << ','
     << s.losses << ',' << s.recovery_delay << '\n';
}

}  // namespace openstate::simnet
