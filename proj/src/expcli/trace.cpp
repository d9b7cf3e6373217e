// SPDX-License-Identifier: Apache-2.0

#include <sstream>

#include "openstate/apps/tag_code.hpp"
#include "openstate/expcli/experiment.hpp"

namespace openstate::expcli {

namespace {

std::string tag_text(const std::optional<Label>& tag,
                     const std::function<std::string(Label)>& fmt) {
  return tag ? fmt(*tag) : std::string("-");
}

// Everything about a packet's journey except timing.
std::string signature(const simnet::PacketRecord& p) {
  std::ostringstream os;
  os << p.is_copy() << '|' << static_cast<int>(p.status) << '|'
     << static_cast<int>(p.reason) << '|' << p.terminal_node << '|'
     << p.tagged_on_delivery;
  for (const simnet::Hop& h : p.hops) {
    os << '|' << h.node << ',' << h.in_port << ','
       << (h.out_port ? static_cast<std::int64_t>(*h.out_port) : -1) << ','
       << h.tag_in.value_or(0) << ',' << h.tag_out.value_or(0) << ','
       << h.state_before << ',' << h.state_after << ',' << h.groups_invoked
       << ',' << h.via_controller;
  }
  return os.str();
}

std::string path_line(const simnet::PacketRecord& p) {
  std::string s;
  for (const simnet::Hop& h : p.hops) {
    if (!s.empty()) s += " > ";
    s += std::to_string(h.node);
  }
  if (p.status == simnet::PacketStatus::kDelivered) {
    s += " > host " + std::to_string(p.terminal_node);
  }
  return s;
}

std::string outcome(const simnet::PacketRecord& p) {
  switch (p.status) {
    case simnet::PacketStatus::kDelivered:
      return p.tagged_on_delivery ? "delivered TAGGED" : "delivered";
    case simnet::PacketStatus::kDropped:
      return "dropped at " + std::to_string(p.terminal_node) + " (" +
             std::string(simnet::to_string(p.reason)) + ")";
    case simnet::PacketStatus::kInFlight:
      return "in flight";
  }
  return "?";
}

void hop_lines(std::ostream& os, const simnet::PacketRecord& p,
               const std::function<std::string(Label)>& fmt) {
  for (const simnet::Hop& h : p.hops) {
    os << "    " << h.node << "  in " << h.in_port << "  out "
       << (h.out_port ? std::to_string(*h.out_port) : std::string("-"));
    if (!h.out_port) {
      // Nothing left the switch, so there is no outgoing tag to compare.
      if (h.tag_in) os << "  tag " << tag_text(h.tag_in, fmt);
    } else if (h.tag_in || h.tag_out) {
      if (h.tag_in == h.tag_out) {
        os << "  tag " << tag_text(h.tag_in, fmt);
      } else if (!h.tag_in) {
        os << "  push " << tag_text(h.tag_out, fmt);
      } else if (!h.tag_out) {
        os << "  pop " << tag_text(h.tag_in, fmt);
      } else {
        os << "  tag " << tag_text(h.tag_in, fmt) << " > " << tag_text(h.tag_out, fmt);
      }
    }
    if (h.state_before != kDefaultState || h.state_after != kDefaultState) {
      os << "  state " << fmt(h.state_before);
      if (h.state_after != h.state_before) os << " > " << fmt(h.state_after);
    }
    if (h.groups_invoked) os << "  group";
    if (h.via_controller) os << "  via controller";
    os << '\n';
  }
}

}  // namespace

std::string emit_trace(const simnet::MetricsLog& log, std::uint64_t flow_id,
                       const std::function<std::string(Label)>& format_label) {
  const std::function<std::string(Label)> fmt =
      format_label ? format_label : std::function<std::string(Label)>(apps::format_tag);
  std::vector<const simnet::PacketRecord*> packets;
  for (const simnet::PacketRecord& p : log.packets) {
    if (p.flow_id == flow_id) packets.push_back(&p);
  }
  if (packets.empty()) {
    throw UnknownFlow("flow " + std::to_string(flow_id) + " not in log");
  }
  std::ostringstream os;
  os << "flow " << flow_id << ": " << packets.size() << " packets\n";
  std::size_t k = 0;
  while (k < packets.size()) {
    const std::string sig = signature(*packets[k]);
    std::size_t end = k + 1;
    while (end < packets.size() && signature(*packets[end]) == sig) ++end;
    const simnet::PacketRecord& first = *packets[k];
    const simnet::PacketRecord& last = *packets[end - 1];
    os << "packet " << first.packet_id;
    if (end - k > 1) os << " .. " << last.packet_id << " (" << end - k << " packets)";
    if (first.is_copy()) os << " copy of " << *first.parent;
    os << "  created " << first.created_at;
    if (end - k > 1) os << " .. " << last.created_at;
    os << " us  " << outcome(first) << '\n';
    os << "  path " << path_line(first) << '\n';
    hop_lines(os, first, fmt);
    k = end;
  }
  return os.str();
}

}  // namespace openstate::expcli
