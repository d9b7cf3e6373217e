// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <map>
#include <optional>
#include <vector>

#include "openstate/common.hpp"

namespace openstate::simnet {

enum class NodeKind : std::uint8_t { kSwitch, kHost };

struct Node {
  NodeId id = 0;
  NodeKind kind = NodeKind::kSwitch;
  FieldValue ip = 0;   // hosts only
  FieldValue eth = 0;  // hosts only
};

struct Endpoint {
  NodeId node = 0;
  PortId port = 0;

  auto operator<=>(const Endpoint&) const = default;
};

struct Link {
  LinkId id = 0;
  Endpoint a;
  Endpoint b;
  Duration delay = 0;  // symmetric
  bool up = true;
};

// Nodes and bidirectional links. Ports are numbered per node from 1 in the
// order links are added unless given explicitly.
class Topology {
 public:
  void add_switch(NodeId id);
  void add_host(NodeId id, FieldValue ip, FieldValue eth);
  LinkId add_link(NodeId a, NodeId b, Duration delay,
                  std::optional<PortId> a_port = std::nullopt,
                  std::optional<PortId> b_port = std::nullopt);

  bool has_node(NodeId id) const { return nodes_.contains(id); }
  const Node& node(NodeId id) const;
  bool is_switch(NodeId id) const;
  bool is_host(NodeId id) const;
  const std::map<NodeId, Node>& nodes() const { return nodes_; }

  const std::vector<Link>& links() const { return links_; }
  const Link& link(LinkId id) const { return links_.at(id); }
  void set_link_up(LinkId id, bool up) { links_.at(id).up = up; }
  std::optional<LinkId> link_between(NodeId a, NodeId b) const;
  std::optional<LinkId> link_at(Endpoint ep) const;
  std::optional<Endpoint> peer(Endpoint ep) const;

  // Throws ConfigError when the nodes are not adjacent.
  PortId port_toward(NodeId from, NodeId to) const;
  std::vector<PortId> ports(NodeId id) const;
  std::vector<NodeId> neighbors(NodeId id) const;

  // Sum of link delays along consecutive nodes; throws ConfigError on a gap.
  Duration path_delay(const std::vector<NodeId>& path) const;

  // Switch a host hangs off, if the host has a link.
  std::optional<NodeId> attachment(NodeId host) const;
  // First host attached to a switch, if any.
  std::optional<NodeId> host_of(NodeId sw) const;

 private:
  std::map<NodeId, Node> nodes_;
  std::vector<Link> links_;
  std::map<Endpoint, LinkId> by_endpoint_;
  std::map<NodeId, PortId> next_port_;
};

}  // namespace openstate::simnet
