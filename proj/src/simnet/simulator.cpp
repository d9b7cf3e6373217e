// SPDX-License-Identifier: Apache-2.0

#include "openstate/simnet/simulator.hpp"

#include <string>
#include <utility>

#include "openstate/util/random.hpp"

namespace openstate::simnet {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr std::uint64_t kControllerSalt = 0xC0A7'0011'E500'0001ULL;
constexpr std::uint64_t kJitterSalt = 0x7177'E500'0000'0000ULL;

std::uint64_t grid_rate(const TrafficGen& gen) {
  if (const auto* k = std::get_if<TcpFlowArrivals>(&gen.kind)) return k->rate;
  if (const auto* k = std::get_if<Cbr>(&gen.kind)) return k->rate;
  return 0;
}

DropReason drop_reason_for(pipeline::DropCause cause) {
  switch (cause) {
    case pipeline::DropCause::kTableMiss: return DropReason::kTableMiss;
    case pipeline::DropCause::kNoLiveBucket: return DropReason::kNoLiveBucket;
    case pipeline::DropCause::kDropAction:
    case pipeline::DropCause::kNone: return DropReason::kDropAction;
  }
  return DropReason::kDropAction;
}

Label observed_state(const pipeline::Switch& sw, const pipeline::Packet& p) {
  const pipeline::StateTable* table = sw.state_table();
  if (table == nullptr) return kDefaultState;
  try {
    const pipeline::StateEntry* e =
        table->find(pipeline::extract_key(p, table->lookup_scope()));
    return e ? e->label : kDefaultState;
  } catch (const MissingField&) {
    return kDefaultState;
  }
}

std::string at_node(NodeId node, SimTime t) {
  return "switch " + std::to_string(node) + " at t=" + std::to_string(t) +
         "us: ";
}

}  // namespace

std::uint64_t EventQueue::push(SimTime time, EventKind kind) {
  const std::uint64_t seq = next_seq_++;
  heap_.push(Event{time, seq, std::move(kind)});
  return seq;
}

Event EventQueue::pop() {
  Event e = heap_.top();
  heap_.pop();
  return e;
}

Simulator::Simulator(Scenario scenario) : scenario_(std::move(scenario)) {
  const Topology& topo = scenario_.topology;
  for (const auto& [id, config] : scenario_.switch_configs) {
    if (!topo.has_node(id) || !topo.is_switch(id)) {
      throw ConfigError("switch config for non-switch node " +
                        std::to_string(id));
    }
  }
  for (const auto& [id, node] : topo.nodes()) {
    if (node.kind != NodeKind::kSwitch) continue;
    auto it = scenario_.switch_configs.find(id);
    pipeline::SwitchConfig config =
        it != scenario_.switch_configs.end() ? it->second
                                             : pipeline::SwitchConfig{};
    pipeline::Switch sw(id, std::move(config),
                        util::mix_seed(scenario_.seed, id));
    for (PortId p : topo.ports(id)) {
      sw.add_port(p, topo.link(*topo.link_at({id, p})).up);
    }
    switches_.emplace(id, std::move(sw));
  }
  for (std::size_t g = 0; g < scenario_.traffic.size(); ++g) {
    const TrafficGen& gen = scenario_.traffic[g];
    if (!topo.has_node(gen.src) || !topo.is_host(gen.src) ||
        topo.ports(gen.src).size() != 1) {
      throw ConfigError("generator " + std::to_string(g) +
                        " must start at a host with exactly one link");
    }
    const std::uint64_t rate = grid_rate(gen);
    if (gen.jitter < 0 ||
        (gen.jitter > 0 && rate > 0 &&
         static_cast<std::uint64_t>(gen.jitter) >= kSecond / rate)) {
      throw ConfigError("generator " + std::to_string(g) +
                        ": jitter must be non-negative and below the tick spacing");
    }
  }
  if (scenario_.detection_delay < 0 || scenario_.switch_latency < 0) {
    throw ConfigError("negative detection delay or switch latency");
  }
  if (scenario_.controller) {
    const ControllerChannel& ch = *scenario_.controller;
    if (ch.one_way_delay < 0 || ch.proc_delay < 0) {
      throw ConfigError("negative controller delay");
    }
    if (ch.make_app) {
      controller_ = ch.make_app(util::mix_seed(scenario_.seed, kControllerSalt));
    }
  }
  link_epoch_.assign(topo.links().size(), 0);
  for (const LinkChange& c : scenario_.link_changes) {
    inject_link_status(c.a, c.b, c.up, c.at);
  }
}

Simulator::~Simulator() = default;

void Simulator::inject_link_status(NodeId a, NodeId b, bool up, SimTime at) {
  auto link = scenario_.topology.link_between(a, b);
  if (!link) {
    throw UnknownLink("no link " + std::to_string(a) + "-" +
                      std::to_string(b));
  }
  if (at < now_) {
    throw ConfigError("link status change scheduled in the past");
  }
  queue_.push(at, LinkStatus{*link, up});
}

const pipeline::Switch& Simulator::switch_at(NodeId id) const {
  auto it = switches_.find(id);
  if (it == switches_.end()) {
    throw ConfigError("node " + std::to_string(id) + " is not a switch");
  }
  return it->second;
}

MetricsLog Simulator::run(SimTime until) {
  if (ran_) throw Error("simulator instances are single-use");
  ran_ = true;
  schedule_traffic(until);
  if (scenario_.eager_timers) {
    for (const auto& [id, sw] : switches_) schedule_timer(id, until);
  }
  while (!queue_.empty()) {
    Event ev = queue_.pop();
    const bool late = ev.time > until;
    if (late && !std::holds_alternative<PacketArrival>(ev.kind) &&
        !std::holds_alternative<CtrlMsg>(ev.kind) &&
        !std::holds_alternative<PortStatus>(ev.kind)) {
      continue;
    }
    now_ = ev.time;
    std::visit(Overloaded{
                   [&](GenTick& e) { on_gen_tick(e, until); },
                   [&](PacketArrival& e) { on_arrival(e, until); },
                   [&](LinkStatus& e) { on_link_status(e); },
                   [&](PortStatus& e) { on_port_status(e); },
                   [&](TimerFire& e) { on_timer(e, until); },
                   [&](CtrlMsg& e) { on_ctrl(e, until); },
               },
               ev.kind);
  }
  return std::move(log_);
}

void Simulator::schedule_traffic(SimTime until) {
  first_tick_.assign(scenario_.traffic.size(), 0);
  for (std::size_t g = 0; g < scenario_.traffic.size(); ++g) {
    const TrafficGen& gen = scenario_.traffic[g];
    std::visit(
        Overloaded{
            [&](const TcpFlowArrivals& k) {
              if (k.rate == 0 || k.flows == 0) return;
              first_tick_[g] = first_tick_at_or_after(k.rate, gen.anchor,
                                                      gen.phase_ppm, gen.start);
              schedule_gen_tick(g, first_tick_[g], 0, until);
            },
            [&](const Cbr& k) {
              if (k.rate == 0) return;
              first_tick_[g] = first_tick_at_or_after(k.rate, gen.anchor,
                                                      gen.phase_ppm, gen.start);
              schedule_gen_tick(g, first_tick_[g], 0, until);
            },
            [&](const Explicit& k) {
              std::int64_t i = 0;
              while (i < static_cast<std::int64_t>(k.times.size()) &&
                     k.times[i] < gen.start) {
                ++i;
              }
              schedule_gen_tick(g, i, 0, until);
            },
        },
        gen.kind);
  }
}

void Simulator::schedule_gen_tick(std::size_t g, std::int64_t n,
                                  std::uint32_t pkt, SimTime until) {
  const TrafficGen& gen = scenario_.traffic[g];
  SimTime t = 0;
  std::visit(Overloaded{
                 [&](const TcpFlowArrivals& k) {
                   if (n - first_tick_[g] >= static_cast<std::int64_t>(k.flows)) {
                     t = kNever;
                     return;
                   }
                   t = grid_tick(k.rate, gen.anchor, gen.phase_ppm, n) +
                       static_cast<Duration>(pkt) * k.pkt_gap;
                 },
                 [&](const Cbr& k) {
                   t = grid_tick(k.rate, gen.anchor, gen.phase_ppm, n);
                 },
                 [&](const Explicit& k) {
                   t = n < static_cast<std::int64_t>(k.times.size())
                           ? k.times[n]
                           : kNever;
                 },
             },
             gen.kind);
  if (gen.jitter > 0 && t != kNever && grid_rate(gen) > 0) {
    // Stateless in (seed, generator, tick) so reruns draw the same offsets.
    const std::uint64_t h = util::mix_seed(
        util::mix_seed(scenario_.seed, kJitterSalt + g), static_cast<std::uint64_t>(n));
    t += static_cast<Duration>(h % (static_cast<std::uint64_t>(gen.jitter) + 1));
  }
  // A flow's trailing packets may run past stop; only flow starts obey it.
  const bool starts_flow = pkt == 0;
  if (t == kNever || t > until || (starts_flow && t >= gen.stop)) return;
  queue_.push(t, GenTick{g, n, pkt});
}

void Simulator::on_gen_tick(const GenTick& ev, SimTime until) {
  const TrafficGen& gen = scenario_.traffic[ev.generator];
  pipeline::Packet p = gen.header;
  p.meta = pipeline::PacketMeta{};
  p.meta.created_at = now_;
  std::uint64_t flow_n = 0;
  std::visit(
      Overloaded{
          [&](const TcpFlowArrivals& k) {
            flow_n = static_cast<std::uint64_t>(ev.n - first_tick_[ev.generator]);
            p.set(pipeline::HeaderField::kL4Src, k.first_l4_src + flow_n);
            if (ev.pkt == 0) schedule_gen_tick(ev.generator, ev.n + 1, 0, until);
            if (ev.pkt + 1 < k.pkts_per_flow) {
              schedule_gen_tick(ev.generator, ev.n, ev.pkt + 1, until);
            }
          },
          [&](const Cbr&) { schedule_gen_tick(ev.generator, ev.n + 1, 0, until); },
          [&](const Explicit&) {
            schedule_gen_tick(ev.generator, ev.n + 1, 0, until);
          },
      },
      gen.kind);
  p.meta.flow_id = flow_id_for(ev.generator, flow_n);
  const std::uint64_t id = new_record(p, ev.generator, std::nullopt);
  p.meta.packet_id = id;
  const PortId port = scenario_.topology.ports(gen.src).front();
  transmit(gen.src, port, std::move(p), now_);
}

std::uint64_t Simulator::new_record(const pipeline::Packet& packet,
                                    std::size_t gen,
                                    std::optional<std::uint64_t> parent) {
  PacketRecord r;
  r.packet_id = log_.packets.size();
  r.flow_id = packet.meta.flow_id;
  r.generator = gen;
  r.parent = parent;
  r.created_at = packet.meta.created_at;
  log_.packets.push_back(std::move(r));
  return log_.packets.back().packet_id;
}

std::uint64_t Simulator::clone_record(std::uint64_t original) {
  PacketRecord copy = log_.packets[original];
  copy.packet_id = log_.packets.size();
  copy.parent = original;
  log_.packets.push_back(std::move(copy));
  return log_.packets.back().packet_id;
}

void Simulator::transmit(NodeId node, PortId port, pipeline::Packet packet,
                         SimTime at) {
  const Topology& topo = scenario_.topology;
  auto link_id = topo.link_at({node, port});
  if (!link_id) {
    drop(packet.meta.packet_id, node, DropReason::kUnlinkedPort);
    return;
  }
  const Link& link = topo.link(*link_id);
  if (!link.up) {
    drop(packet.meta.packet_id, node, DropReason::kLinkDown);
    return;
  }
  const Endpoint peer = *topo.peer({node, port});
  queue_.push(at + link.delay, PacketArrival{peer.node, peer.port,
                                             std::move(packet), *link_id,
                                             link_epoch_[*link_id]});
}

void Simulator::deliver(NodeId host, const pipeline::Packet& packet) {
  PacketRecord& r = log_.packets[packet.meta.packet_id];
  r.status = PacketStatus::kDelivered;
  r.terminal_at = now_;
  r.terminal_node = host;
  r.tagged_on_delivery = packet.has_tag();
}

void Simulator::drop(std::uint64_t packet_id, NodeId node, DropReason reason) {
  PacketRecord& r = log_.packets[packet_id];
  r.status = PacketStatus::kDropped;
  r.reason = reason;
  r.terminal_at = now_;
  r.terminal_node = node;
}

void Simulator::on_arrival(PacketArrival& ev, SimTime until) {
  const std::uint64_t id = ev.packet.meta.packet_id;
  if (ev.link_epoch != link_epoch_[ev.link]) {
    drop(id, ev.node, DropReason::kInFlightOnFailedLink);
    return;
  }
  if (scenario_.topology.is_host(ev.node)) {
    deliver(ev.node, ev.packet);
    return;
  }
  if (log_.packets[id].hops.size() >= kMaxHops) {
    drop(id, ev.node, DropReason::kHopLimit);
    return;
  }
  pipeline::Switch& sw = switches_.at(ev.node);
  pipeline::Packet arrived = std::move(ev.packet);
  arrived.meta.ingress_port = ev.port;

  Hop hop;
  hop.node = ev.node;
  hop.in_port = ev.port;
  hop.arrive = now_;
  hop.tag_in = arrived.tag();

  pipeline::ProcessResult result;
  try {
    result = sw.process_packet(arrived, now_);
  } catch (const Error& e) {
    throw Error(at_node(ev.node, now_) + e.what());
  }
  hop.state_before = result.state;
  hop.state_after = observed_state(sw, arrived);
  hop.groups_invoked = result.groups_invoked;
  if (scenario_.eager_timers) schedule_timer(ev.node, until);

  const SimTime depart = now_ + scenario_.switch_latency;
  log_.packets[id].hops.push_back(hop);

  bool original_used = false;
  auto record_for_emission = [&](PortId port, const pipeline::Packet& p) {
    std::uint64_t rid = id;
    if (original_used) rid = clone_record(id);
    original_used = true;
    Hop& h = log_.packets[rid].hops.back();
    h.depart = depart;
    h.out_port = port;
    h.tag_out = p.tag();
    return rid;
  };

  for (pipeline::Emission& em : result.emissions) {
    const std::uint64_t rid = record_for_emission(em.port, em.packet);
    em.packet.meta.packet_id = rid;
    em.packet.meta.ingress_port.reset();
    transmit(ev.node, em.port, std::move(em.packet), depart);
  }

  if (result.to_controller) {
    std::uint64_t rid = id;
    if (original_used) rid = clone_record(id);
    original_used = true;
    if (!scenario_.controller || !controller_) {
      drop(rid, ev.node, DropReason::kNoController);
      return;
    }
    Hop& h = log_.packets[rid].hops.back();
    h.via_controller = true;
    h.depart = -1;
    h.out_port.reset();
    h.tag_out.reset();
    pipeline::Packet held = std::move(*result.to_controller);
    held.meta.packet_id = rid;
    CtrlMsg msg;
    msg.direction = CtrlDirection::kToController;
    msg.node = ev.node;
    msg.payload = PacketIn{std::move(held)};
    send_to_controller(ev.node, depart, std::move(msg));
  }

  if (!original_used) drop(id, ev.node, drop_reason_for(result.drop_cause));
}

void Simulator::on_link_status(const LinkStatus& ev) {
  const Link& link = scenario_.topology.link(ev.link);
  if (link.up == ev.up) return;
  scenario_.topology.set_link_up(ev.link, ev.up);
  if (!ev.up) ++link_epoch_[ev.link];
  log_.link_events.push_back(LinkEvent{now_, ev.link, ev.up});
  for (const Endpoint& ep : {link.a, link.b}) {
    if (!scenario_.topology.is_switch(ep.node)) continue;
    queue_.push(now_ + scenario_.detection_delay,
                PortStatus{ep.node, ep.port, ev.up});
  }
}

void Simulator::on_port_status(const PortStatus& ev) {
  switches_.at(ev.node).set_port_status(ev.port, ev.up);
  if (!scenario_.controller || !controller_ ||
      !scenario_.controller->notify_port_status) {
    return;
  }
  CtrlMsg msg;
  msg.direction = CtrlDirection::kToController;
  msg.node = ev.node;
  msg.payload = PortStatusMsg{ev.port, ev.up};
  send_to_controller(ev.node, now_, std::move(msg));
}

void Simulator::schedule_timer(NodeId node, SimTime until) {
  const pipeline::StateTable* table = switches_.at(node).state_table();
  if (table == nullptr) return;
  auto deadline = table->next_deadline();
  if (!deadline || *deadline > until || *deadline < now_) return;
  if (!timers_.emplace(node, *deadline).second) return;
  queue_.push(*deadline, TimerFire{node});
}

void Simulator::on_timer(const TimerFire& ev, SimTime until) {
  timers_.erase({ev.node, now_});
  pipeline::StateTable* table = switches_.at(ev.node).state_table();
  if (table != nullptr) table->expire_due(now_);
  schedule_timer(ev.node, until);
}

void Simulator::send_to_controller(NodeId node, SimTime at, CtrlMsg msg) {
  msg.sent_at = at;
  const Duration ow = scenario_.controller->one_way_delay;
  const CtrlKind kind = std::holds_alternative<PacketIn>(msg.payload)
                            ? CtrlKind::kPacketIn
                            : CtrlKind::kPortStatus;
  log_.ctrl.push_back(
      CtrlRecord{at, at + ow, CtrlDirection::kToController, kind, node});
  queue_.push(at + ow, std::move(msg));
}

void Simulator::send_to_switch(NodeId node, SimTime at, ControllerAction action,
                               std::optional<RecoveryTrigger> trigger) {
  const Duration ow = scenario_.controller->one_way_delay;
  CtrlKind kind = CtrlKind::kPacketOut;
  if (const auto* fm = std::get_if<FlowMod>(&action)) {
    kind = fm->op == FlowMod::Op::kAdd ? CtrlKind::kFlowModAdd
                                       : CtrlKind::kFlowModDelete;
  }
  log_.ctrl.push_back(
      CtrlRecord{at, at + ow, CtrlDirection::kToSwitch, kind, node});
  CtrlMsg msg;
  msg.direction = CtrlDirection::kToSwitch;
  msg.node = node;
  msg.sent_at = at;
  msg.payload = std::move(action);
  msg.trigger = trigger;
  queue_.push(at + ow, std::move(msg));
}

void Simulator::drain_controller_notes() {
  for (std::string& note : controller_->drain_notes()) {
    log_.notes.push_back("t=" + std::to_string(now_) + "us: " +
                         std::move(note));
  }
}

void Simulator::on_ctrl(CtrlMsg& ev, SimTime until) {
  const Duration proc = scenario_.controller->proc_delay;
  if (ev.direction == CtrlDirection::kToController) {
    if (auto* in = std::get_if<PacketIn>(&ev.payload)) {
      const std::uint64_t held = in->packet.meta.packet_id;
      auto actions = controller_->on_packet_in(ev.node, in->packet, now_);
      drain_controller_notes();
      bool released = false;
      for (ControllerAction& a : actions) {
        if (const auto* po = std::get_if<PacketOut>(&a)) {
          if (po->packet.meta.packet_id == held) released = true;
        }
        const NodeId target = std::visit([](const auto& x) { return x.node; }, a);
        send_to_switch(target, now_ + proc, std::move(a), std::nullopt);
      }
      if (!released) drop(held, ev.node, DropReason::kControllerDiscard);
    } else if (auto* ps = std::get_if<PortStatusMsg>(&ev.payload)) {
      auto actions = controller_->on_port_status(ev.node, ps->port, ps->up, now_);
      drain_controller_notes();
      const RecoveryTrigger trig{ev.node, ps->port, ps->up, ev.sent_at};
      for (ControllerAction& a : actions) {
        const NodeId target = std::visit([](const auto& x) { return x.node; }, a);
        send_to_switch(target, now_ + proc, std::move(a), trig);
      }
    }
    return;
  }

  auto& action = std::get<ControllerAction>(ev.payload);
  pipeline::Switch& sw = switches_.at(ev.node);
  if (auto* fm = std::get_if<FlowMod>(&action)) {
    std::uint64_t cookie = fm->cookie;
    try {
      if (fm->op == FlowMod::Op::kAdd) {
        cookie = fm->entry.cookie;
        sw.flow_table().add(fm->entry);
      } else {
        sw.flow_table().remove_by_cookie(fm->cookie);
      }
    } catch (const Error& e) {
      throw Error(at_node(ev.node, now_) + "flow-mod rejected: " + e.what());
    }
    if (ev.trigger) {
      log_.recoveries.push_back(RecoveryRecord{
          ev.trigger->node, ev.trigger->port, ev.trigger->up, ev.node, cookie,
          ev.trigger->notified_at, now_});
    }
    if (scenario_.eager_timers) schedule_timer(ev.node, until);
    return;
  }
  auto& po = std::get<PacketOut>(action);
  const std::uint64_t id = po.packet.meta.packet_id;
  PacketRecord& r = log_.packets.at(id);
  if (r.hops.empty() || r.hops.back().node != ev.node || r.hops.back().depart >= 0) {
    throw Error(at_node(ev.node, now_) + "packet-out for a packet not held there");
  }
  Hop& h = r.hops.back();
  h.depart = now_;
  h.out_port = po.port;
  h.tag_out = po.packet.tag();
  po.packet.meta.ingress_port.reset();
  transmit(ev.node, po.port, std::move(po.packet), now_);
}

MetricsLog run(const Scenario& scenario, SimTime until) {
  Simulator sim(scenario);
  return sim.run(until);
}

}  // namespace openstate::simnet
