// SPDX-License-Identifier: Apache-2.0

#include "openstate/baseline/reactive.hpp"

#include <set>

#include "openstate/apps/tag_code.hpp"
#include "openstate/util/random.hpp"

namespace openstate::baseline {

namespace {

using pipeline::HeaderField;

const pipeline::ScopeSpec kFourTuple = {HeaderField::kIpSrc, HeaderField::kIpDst,
                                        HeaderField::kL4Src, HeaderField::kL4Dst};

// Cookies for recovery rules: high bit set so they never clash with rules
// provisioned with the default cookie 0.
constexpr std::uint64_t kRecoveryCookieBase = 1ULL << 63;

}  // namespace

pipeline::SwitchConfig build_reactive_consistency(
    const ReactiveConsistencyIntent& in) {
  if (in.out_ports.size() < 2) {
    throw ConfigError("reactive balancer needs at least two output ports");
  }
  if (in.destinations.empty()) {
    throw ConfigError("reactive balancer needs at least one destination");
  }
  pipeline::SwitchConfig c;
  c.miss_policy = pipeline::MissPolicy::kToController;
  for (FieldValue dst : in.destinations) {
    pipeline::FlowEntry e;
    e.match.priority = kDispatchPriority;
    e.match.where(HeaderField::kIpDst, dst);
    e.actions = {pipeline::ToController{}};
    c.flows.push_back(std::move(e));
  }
  return c;
}

ReactiveConsistencyApp::ReactiveConsistencyApp(
    std::vector<ReactiveConsistencyIntent> balancers, std::uint64_t seed)
    : rng_(seed) {
  for (auto& b : balancers) {
    const NodeId node = b.node;
    balancers_.emplace(node, std::move(b));
  }
}

std::vector<simnet::ControllerAction> ReactiveConsistencyApp::on_packet_in(
    NodeId node, const pipeline::Packet& packet, SimTime /*now*/) {
  auto b = balancers_.find(node);
  if (b == balancers_.end()) {
    notes_.push_back("packet-in from switch " + std::to_string(node) +
                     " with no balancer; discarded");
    return {};
  }
  pipeline::FlowKey key;
  try {
    key = pipeline::extract_key(packet, kFourTuple);
  } catch (const MissingField&) {
    notes_.push_back("packet-in without a 4-tuple at switch " +
                     std::to_string(node) + "; discarded");
    return {};
  }
  std::vector<simnet::ControllerAction> out;
  auto [it, fresh] = registry_.try_emplace({node, key.values}, 0);
  if (fresh) {
    const auto& ports = b->second.out_ports;
    it->second = ports[util::bounded(rng_, ports.size())];
    simnet::FlowMod fm;
    fm.node = node;
    fm.op = simnet::FlowMod::Op::kAdd;
    fm.entry.match.priority = kPinPriority;
    for (std::size_t k = 0; k < kFourTuple.size(); ++k) {
      fm.entry.match.where(kFourTuple[k], key.values[k]);
    }
    fm.entry.actions = {pipeline::Output{it->second}};
    out.emplace_back(std::move(fm));
  }
  simnet::PacketOut po;
  po.node = node;
  po.packet = packet;
  po.port = it->second;
  out.emplace_back(std::move(po));
  return out;
}

std::vector<simnet::ControllerAction> ReactiveConsistencyApp::on_port_status(
    NodeId, PortId, bool, SimTime) {
  return {};
}

std::vector<std::string> ReactiveConsistencyApp::drain_notes() {
  return std::exchange(notes_, {});
}

apps::ConfigMap build_reactive_recovery(
    const simnet::Topology& topo,
    const std::vector<apps::ProtectedDemand>& demands) {
  apps::ConfigBuilder b;
  std::set<std::pair<std::size_t, NodeId>> seen;
  for (std::size_t di = 0; di < demands.size(); ++di) {
    const apps::ProtectedDemand& d = demands[di];
    apps::check_demand(topo, d);
    std::vector<apps::ResolvedPlan> plans;
    std::vector<NodeId> detect_nodes;
    for (const apps::FailurePlan& p : d.plans) {
      if (!seen.emplace(di, p.failed).second) {
        throw ConfigError(apps::demand_name(d) + " has two plans for node " +
                          std::to_string(p.failed));
      }
      plans.push_back(apps::resolve_plan(topo, d, p));
      detect_nodes.push_back(plans.back().detect);
    }
    apps::add_primary_rules(b, topo, d, detect_nodes);
    for (const apps::ResolvedPlan& r : plans) {
      const PortId down = topo.port_toward(r.detect, r.failed);
      std::vector<pipeline::Bucket> buckets{
          pipeline::Bucket{down, 1, {pipeline::Output{down}}}};
      if (r.local()) {
        buckets.push_back(pipeline::Bucket{
            std::nullopt, 1,
            {pipeline::PushTag{r.f_tag},
             pipeline::Output{topo.port_toward(r.reroute, r.detour[1])}}});
      }
      const GroupId g =
          b.add_group(r.detect, pipeline::GroupKind::kFastFailover, buckets);
      pipeline::FlowEntry e;
      e.match = apps::demand_match(d, apps::kPrimaryPriority);
      e.actions = {pipeline::ApplyGroup{g}};
      b.add_flow(r.detect, std::move(e), apps::demand_name(d) + " detect rule");
      apps::add_detour_rules(b, topo, d, r);
    }
  }
  return b.take();
}

ReactiveRecoveryApp::ReactiveRecoveryApp(
    const simnet::Topology& topo, std::vector<apps::ProtectedDemand> demands) {
  std::uint64_t next_cookie = kRecoveryCookieBase;
  for (const apps::ProtectedDemand& d : demands) {
    for (const apps::FailurePlan& p : d.plans) {
      const apps::ResolvedPlan r = apps::resolve_plan(topo, d, p);
      if (r.local()) continue;
      Plan plan;
      plan.reroute = r.reroute;
      plan.cookie = next_cookie++;
      plan.entry.match = apps::demand_match(d, apps::kReactiveDetourPriority);
      plan.entry.actions = {
          pipeline::PushTag{r.f_tag},
          pipeline::Output{topo.port_toward(r.reroute, r.detour[1])}};
      plan.entry.cookie = plan.cookie;
      plans_[{r.detect, topo.port_toward(r.detect, r.failed)}].push_back(
          std::move(plan));
    }
  }
}

std::vector<simnet::ControllerAction> ReactiveRecoveryApp::on_packet_in(
    NodeId node, const pipeline::Packet&, SimTime) {
  notes_.push_back("unexpected packet-in from switch " + std::to_string(node) +
                   "; discarded");
  return {};
}

std::vector<simnet::ControllerAction> ReactiveRecoveryApp::on_port_status(
    NodeId node, PortId port, bool up, SimTime) {
  auto it = plans_.find({node, port});
  if (it == plans_.end()) {
    notes_.push_back("port-" + std::string(up ? "up" : "down") +
                     " from switch " + std::to_string(node) + " port " +
                     std::to_string(port) + " matches no recovery plan");
    return {};
  }
  std::vector<simnet::ControllerAction> out;
  for (const Plan& p : it->second) {
    simnet::FlowMod fm;
    fm.node = p.reroute;
    if (up) {
      fm.op = simnet::FlowMod::Op::kDeleteByCookie;
      fm.cookie = p.cookie;
    } else {
      fm.op = simnet::FlowMod::Op::kAdd;
      fm.entry = p.entry;
      fm.cookie = p.cookie;
    }
    out.emplace_back(std::move(fm));
  }
  return out;
}

std::vector<std::string> ReactiveRecoveryApp::drain_notes() {
  return std::exchange(notes_, {});
}

ControllerMux::ControllerMux(std::unique_ptr<simnet::ControllerApp> packet_in,
                             std::unique_ptr<simnet::ControllerApp> port_status)
    : packet_in_(std::move(packet_in)), port_status_(std::move(port_status)) {}

std::vector<simnet::ControllerAction> ControllerMux::on_packet_in(
    NodeId node, const pipeline::Packet& packet, SimTime now) {
  if (!packet_in_) return {};
  return packet_in_->on_packet_in(node, packet, now);
}

std::vector<simnet::ControllerAction> ControllerMux::on_port_status(
    NodeId node, PortId port, bool up, SimTime now) {
  if (!port_status_) return {};
  return port_status_->on_port_status(node, port, up, now);
}

std::vector<std::string> ControllerMux::drain_notes() {
  std::vector<std::string> out;
  for (auto* app : {packet_in_.get(), port_status_.get()}) {
    if (!app) continue;
    for (auto& n : app->drain_notes()) out.push_back(std::move(n));
  }
  return out;
}

}  // namespace openstate::baseline
