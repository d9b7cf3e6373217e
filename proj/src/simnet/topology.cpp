// SPDX-License-Identifier: Apache-2.0

#include "openstate/simnet/topology.hpp"

#include <string>

namespace openstate::simnet {

void Topology::add_switch(NodeId id) {
  if (nodes_.contains(id)) {
    throw ConfigError("duplicate node " + std::to_string(id));
  }
  nodes_[id] = Node{id, NodeKind::kSwitch, 0, 0};
}

void Topology::add_host(NodeId id, FieldValue ip, FieldValue eth) {
  if (nodes_.contains(id)) {
    throw ConfigError("duplicate node " + std::to_string(id));
  }
  nodes_[id] = Node{id, NodeKind::kHost, ip, eth};
}

LinkId Topology::add_link(NodeId a, NodeId b, Duration delay,
                          std::optional<PortId> a_port,
                          std::optional<PortId> b_port) {
  if (!has_node(a) || !has_node(b)) {
    throw ConfigError("link " + std::to_string(a) + "-" + std::to_string(b) +
                      " references an unknown node");
  }
  if (a == b) throw ConfigError("self loop on node " + std::to_string(a));
  if (delay < 0) throw ConfigError("negative link delay");
  if (link_between(a, b)) {
    throw ConfigError("parallel link " + std::to_string(a) + "-" +
                      std::to_string(b));
  }
  auto assign = [this](NodeId n, std::optional<PortId> port) {
    PortId p = port ? *port : next_port_[n] + 1;
    if (p == 0) throw ConfigError("port 0 is reserved");
    if (by_endpoint_.contains(Endpoint{n, p})) {
      throw ConfigError("port " + std::to_string(p) + " on node " +
                        std::to_string(n) + " is already linked");
    }
    if (p > next_port_[n]) next_port_[n] = p;
    return p;
  };
  if (nodes_.at(a).kind == NodeKind::kHost && !ports(a).empty()) {
    throw ConfigError("host " + std::to_string(a) + " already has a link");
  }
  if (nodes_.at(b).kind == NodeKind::kHost && !ports(b).empty()) {
    throw ConfigError("host " + std::to_string(b) + " already has a link");
  }
  Link link;
  link.id = static_cast<LinkId>(links_.size());
  link.a = Endpoint{a, assign(a, a_port)};
  link.b = Endpoint{b, assign(b, b_port)};
  link.delay = delay;
  by_endpoint_[link.a] = link.id;
  by_endpoint_[link.b] = link.id;
  links_.push_back(link);
  return link.id;
}

const Node& Topology::node(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) {
    throw ConfigError("unknown node " + std::to_string(id));
  }
  return it->second;
}

bool Topology::is_switch(NodeId id) const {
  auto it = nodes_.find(id);
  return it != nodes_.end() && it->second.kind == NodeKind::kSwitch;
}

bool Topology::is_host(NodeId id) const {
  auto it = nodes_.find(id);
  return it != nodes_.end() && it->second.kind == NodeKind::kHost;
}

std::optional<LinkId> Topology::link_between(NodeId a, NodeId b) const {
  for (const Link& l : links_) {
    if ((l.a.node == a && l.b.node == b) || (l.a.node == b && l.b.node == a)) {
      return l.id;
    }
  }
  return std::nullopt;
}

std::optional<LinkId> Topology::link_at(Endpoint ep) const {
  auto it = by_endpoint_.find(ep);
  if (it == by_endpoint_.end()) return std::nullopt;
  return it->second;
}

std::optional<Endpoint> Topology::peer(Endpoint ep) const {
  auto id = link_at(ep);
  if (!id) return std::nullopt;
  const Link& l = links_[*id];
  return l.a == ep ? l.b : l.a;
}

PortId Topology::port_toward(NodeId from, NodeId to) const {
  auto id = link_between(from, to);
  if (!id) {
    throw ConfigError("nodes " + std::to_string(from) + " and " +
                      std::to_string(to) + " are not adjacent");
  }
  const Link& l = links_[*id];
  return l.a.node == from ? l.a.port : l.b.port;
}

std::vector<PortId> Topology::ports(NodeId id) const {
  std::vector<PortId> out;
  for (auto it = by_endpoint_.lower_bound(Endpoint{id, 0});
       it != by_endpoint_.end() && it->first.node == id; ++it) {
    out.push_back(it->first.port);
  }
  return out;
}

std::vector<NodeId> Topology::neighbors(NodeId id) const {
  std::vector<NodeId> out;
  for (PortId p : ports(id)) out.push_back(peer(Endpoint{id, p})->node);
  return out;
}

Duration Topology::path_delay(const std::vector<NodeId>& path) const {
  Duration total = 0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    auto id = link_between(path[i - 1], path[i]);
    if (!id) {
      throw ConfigError("path gap between " + std::to_string(path[i - 1]) +
                        " and " + std::to_string(path[i]));
    }
    total += links_[*id].delay;
  }
  return total;
}

std::optional<NodeId> Topology::attachment(NodeId host) const {
  auto p = ports(host);
  if (p.empty()) return std::nullopt;
  return peer(Endpoint{host, p.front()})->node;
}

std::optional<NodeId> Topology::host_of(NodeId sw) const {
  for (NodeId n : neighbors(sw)) {
    if (is_host(n)) return n;
  }
  return std::nullopt;
}

}  // namespace openstate::simnet
