// SPDX-License-Identifier: Apache-2.0

#include "openstate/apps/failure_recovery.hpp"

#include <algorithm>
#include <set>

#include "openstate/apps/tag_code.hpp"

namespace openstate::apps {

namespace {

using pipeline::HeaderField;

std::string name(const ProtectedDemand& d) { return demand_name(d); }

std::size_t index_of(const std::vector<NodeId>& path, NodeId node,
                     const std::string& what) {
  auto it = std::find(path.begin(), path.end(), node);
  if (it == path.end()) throw ConfigError(what);
  return static_cast<std::size_t>(it - path.begin());
}

pipeline::FlowEntry rule(pipeline::Match match, pipeline::ActionList actions) {
  pipeline::FlowEntry e;
  e.match = std::move(match);
  e.actions = std::move(actions);
  return e;
}

}  // namespace

pipeline::ScopeSpec demand_scope(const ProtectedDemand& demand) {
  pipeline::ScopeSpec s;
  for (const auto& [field, value] : demand.match) s.push_back(field);
  return s;
}

pipeline::Match demand_match(const ProtectedDemand& demand, int priority) {
  pipeline::Match m;
  m.priority = priority;
  for (const auto& [field, value] : demand.match) m.where(field, value);
  return m;
}

std::string demand_name(const ProtectedDemand& demand) {
  return "demand (" + std::to_string(demand.src) + "," +
         std::to_string(demand.dst) + ")";
}

void check_demand(const simnet::Topology& topo, const ProtectedDemand& d) {
  const auto& path = d.primary_path;
  if (path.size() < 3) {
    throw ConfigError(name(d) + ": primary path needs a host, a switch and a host");
  }
  if (d.match.empty()) throw ConfigError(name(d) + ": empty match");
  std::set<HeaderField> fields;
  for (const auto& [field, value] : d.match) {
    if (field == HeaderField::kTagLabel || field == HeaderField::kInPort) {
      throw ConfigError(name(d) + ": demand match cannot use tag or in_port");
    }
    if (!fields.insert(field).second) {
      throw ConfigError(name(d) + ": demand match repeats a field");
    }
  }
  for (std::size_t k = 0; k < path.size(); ++k) {
    if (!topo.has_node(path[k])) {
      throw ConfigError(name(d) + ": unknown node " + std::to_string(path[k]));
    }
    const bool end = k == 0 || k + 1 == path.size();
    if (end != topo.is_host(path[k])) {
      throw ConfigError(name(d) + ": primary path must be host, switches, host");
    }
    if (k > 0 && !topo.link_between(path[k - 1], path[k])) {
      throw ConfigError(name(d) + ": nodes " + std::to_string(path[k - 1]) +
                        " and " + std::to_string(path[k]) + " are not adjacent");
    }
  }
  if (std::set<NodeId>(path.begin(), path.end()).size() != path.size()) {
    throw ConfigError(name(d) + ": primary path has a loop");
  }
}

ResolvedPlan resolve_plan(const simnet::Topology& topo,
                          const ProtectedDemand& d, const FailurePlan& plan) {
  const auto& path = d.primary_path;
  const std::string who = name(d) + ", failure of node " +
                          std::to_string(plan.failed) + ": ";
  ResolvedPlan r;
  r.failed = plan.failed;
  r.failed_index =
      index_of(path, plan.failed, who + "failed node not on primary path");
  if (r.failed_index < 2 || r.failed_index + 1 >= path.size()) {
    throw ConfigError(who + "failed node must be a switch with a switch predecessor");
  }
  r.detect_index = r.failed_index - 1;
  r.detect = path[r.detect_index];
  r.reroute = plan.reroute;
  r.reroute_index =
      index_of(path, plan.reroute, who + "reroute node not on primary path");
  if (r.reroute_index == 0 || r.reroute_index > r.detect_index) {
    throw ConfigError(who + "reroute node must precede the failure");
  }
  if (plan.delta <= 0) throw ConfigError(who + "delta must be positive");
  const auto& q = plan.detour;
  if (q.size() < 2 || q.front() != plan.reroute) {
    throw ConfigError(who + "detour must start at the reroute node");
  }
  r.rejoin = q.back();
  r.rejoin_index = index_of(path, r.rejoin, who + "detour must end on the primary path");
  if (r.rejoin_index <= r.failed_index || r.rejoin_index + 1 >= path.size()) {
    throw ConfigError(who + "detour must rejoin at a switch after the failure");
  }
  if (std::set<NodeId>(q.begin(), q.end()).size() != q.size()) {
    throw ConfigError(who + "detour has a loop");
  }
  for (std::size_t k = 0; k < q.size(); ++k) {
    if (!topo.has_node(q[k]) || !topo.is_switch(q[k])) {
      throw ConfigError(who + "detour node " + std::to_string(q[k]) +
                        " is not a switch");
    }
    if (k > 0 && !topo.link_between(q[k - 1], q[k])) {
      throw ConfigError(who + "detour hop " + std::to_string(q[k - 1]) + "-" +
                        std::to_string(q[k]) + " does not exist");
    }
    if (k > 0 && k + 1 < q.size() &&
        std::find(path.begin(), path.end(), q[k]) != path.end()) {
      throw ConfigError(who + "detour intermediate " + std::to_string(q[k]) +
                        " lies on the primary path");
    }
  }
  for (std::size_t k = r.reroute_index + 1; k < r.detect_index; ++k) {
    r.bounce.push_back(path[k]);
  }
  r.detour = q;
  r.f_tag = f_label(plan.failed);
  r.p_tag = p_label(plan.failed);
  r.delta = plan.delta;
  return r;
}

void add_primary_rules(ConfigBuilder& b, const simnet::Topology& topo,
                       const ProtectedDemand& d,
                       const std::vector<NodeId>& skip) {
  const auto& path = d.primary_path;
  for (std::size_t k = 1; k + 1 < path.size(); ++k) {
    if (std::find(skip.begin(), skip.end(), path[k]) != skip.end()) continue;
    b.add_flow(path[k],
               rule(demand_match(d, kPrimaryPriority),
                    {pipeline::Output{topo.port_toward(path[k], path[k + 1])}}),
               name(d) + " primary rule");
  }
}

void add_detour_rules(ConfigBuilder& b, const simnet::Topology& topo,
                      const ProtectedDemand& d, const ResolvedPlan& r) {
  const auto& q = r.detour;
  const std::string what = name(d) + " detour for F" +
                           std::to_string(r.failed) + " (tag collision?)";
  for (std::size_t k = 1; k + 1 < q.size(); ++k) {
    pipeline::Match m;
    m.priority = kTaggedPriority;
    m.where(HeaderField::kTagLabel, r.f_tag)
        .where(HeaderField::kInPort, topo.port_toward(q[k], q[k - 1]));
    b.add_flow(q[k], rule(m, {pipeline::Output{topo.port_toward(q[k], q[k + 1])}}),
               what);
  }
  const NodeId j = r.rejoin;
  pipeline::Match m = demand_match(d, kRejoinPriority);
  m.where(HeaderField::kTagLabel, r.f_tag)
      .where(HeaderField::kInPort, topo.port_toward(j, q[q.size() - 2]));
  const NodeId next = d.primary_path[r.rejoin_index + 1];
  b.add_flow(j,
             rule(m, {pipeline::PopTag{},
                      pipeline::Output{topo.port_toward(j, next)}}),
             what);
}

ConfigMap build_failure_recovery(const simnet::Topology& topo,
                                 const std::vector<ProtectedDemand>& demands) {
  ConfigBuilder b;
  std::set<std::pair<std::size_t, NodeId>> seen;
  for (std::size_t di = 0; di < demands.size(); ++di) {
    const ProtectedDemand& d = demands[di];
    check_demand(topo, d);
    const auto& path = d.primary_path;
    std::vector<ResolvedPlan> plans;
    std::vector<NodeId> detect_nodes;
    for (const FailurePlan& p : d.plans) {
      if (!seen.emplace(di, p.failed).second) {
        throw ConfigError(name(d) + " has two plans for node " +
                          std::to_string(p.failed));
      }
      plans.push_back(resolve_plan(topo, d, p));
      detect_nodes.push_back(plans.back().detect);
    }
    add_primary_rules(b, topo, d, detect_nodes);

    for (const ResolvedPlan& r : plans) {
      const NodeId dn = r.detect;
      const NodeId rn = r.reroute;
      const PortId d_down = topo.port_toward(dn, r.failed);
      const PortId r_down = topo.port_toward(rn, path[r.reroute_index + 1]);
      const PortId r_detour = topo.port_toward(rn, r.detour[1]);
      const std::string what = name(d) + " plan for node " + std::to_string(r.failed);

      // Detect node: primary port while alive, else bounce or local detour.
      pipeline::Bucket primary{d_down, 1, {pipeline::Output{d_down}}};
      pipeline::Bucket fallback;
      if (r.local()) {
        fallback.actions = {pipeline::PushTag{r.f_tag}, pipeline::Output{r_detour}};
      } else {
        fallback.actions = {
            pipeline::PushTag{r.f_tag},
            pipeline::Output{topo.port_toward(dn, path[r.detect_index - 1])}};
      }
      const GroupId ff = b.add_group(dn, pipeline::GroupKind::kFastFailover,
                                     {primary, fallback});
      b.add_flow(dn, rule(demand_match(d, kPrimaryPriority), {pipeline::ApplyGroup{ff}}),
                 what);
      add_detour_rules(b, topo, d, r);
      if (r.local()) continue;

      const PortId d_up = topo.port_toward(dn, path[r.detect_index - 1]);
      // Probes towards the failed node pass only while its port is up, and
      // come back untouched.
      {
        pipeline::Match m = demand_match(d, kTaggedPriority);
        m.where(HeaderField::kTagLabel, r.p_tag).where(HeaderField::kInPort, d_up);
        const GroupId g = b.add_group(
            dn, pipeline::GroupKind::kFastFailover,
            {pipeline::Bucket{d_down, 1, {pipeline::Output{d_down}}},
             pipeline::Bucket{std::nullopt, 1, {pipeline::Drop{}}}});
        b.add_flow(dn, rule(m, {pipeline::ApplyGroup{g}}), what);

        pipeline::Match back = demand_match(d, kTaggedPriority);
        back.where(HeaderField::kTagLabel, r.p_tag)
            .where(HeaderField::kInPort, d_down);
        b.add_flow(dn, rule(back, {pipeline::Output{d_up}}), what);
      }
      {
        const PortId i_up = topo.port_toward(r.failed, dn);
        pipeline::Match m = demand_match(d, kTaggedPriority);
        m.where(HeaderField::kTagLabel, r.p_tag).where(HeaderField::kInPort, i_up);
        b.add_flow(r.failed, rule(m, {pipeline::Output{i_up}}), what);
      }
      for (std::size_t k = r.reroute_index + 1; k < r.detect_index; ++k) {
        const NodeId n = path[k];
        const PortId up = topo.port_toward(n, path[k - 1]);
        const PortId down = topo.port_toward(n, path[k + 1]);
        for (Label tag : {r.f_tag, r.p_tag}) {
          pipeline::Match m = demand_match(d, kTaggedPriority);
          m.where(HeaderField::kTagLabel, tag).where(HeaderField::kInPort, down);
          b.add_flow(n, rule(m, {pipeline::Output{up}}), what);
        }
        pipeline::Match m = demand_match(d, kTaggedPriority);
        m.where(HeaderField::kTagLabel, r.p_tag).where(HeaderField::kInPort, up);
        b.add_flow(n, rule(m, {pipeline::Output{down}}), what);
      }

      // Reroute node state machine, one entry per demand key.
      const pipeline::ScopeSpec scope = demand_scope(d);
      b.require_state_table(rn, {scope, scope});
      pipeline::SetState to_f;
      to_f.label = r.f_tag;
      to_f.hard_timeout = r.delta;
      to_f.hard_rollback = r.p_tag;
      pipeline::SetState to_zero;
      to_zero.label = kDefaultState;

      pipeline::Match probe_back = demand_match(d, kProbeReturnPriority);
      probe_back.where(HeaderField::kTagLabel, r.p_tag)
          .where(HeaderField::kInPort, r_down);
      b.add_flow(rn,
                 rule(probe_back, {to_zero, pipeline::PopTag{},
                                   pipeline::Output{r_down}}),
                 what);

      pipeline::Match enter = demand_match(d, kRerouteEnterPriority);
      enter.where_state(kDefaultState)
          .where(HeaderField::kTagLabel, r.f_tag)
          .where(HeaderField::kInPort, r_down);
      b.add_flow(rn, rule(enter, {to_f, pipeline::Output{r_detour}}), what);

      pipeline::Match bounced = demand_match(d, kTaggedPriority);
      bounced.where(HeaderField::kTagLabel, r.f_tag)
          .where(HeaderField::kInPort, r_down);
      b.add_flow(rn, rule(bounced, {pipeline::Output{r_detour}}), what);

      pipeline::Match in_f = demand_match(d, kRerouteStatePriority);
      in_f.where_state(r.f_tag);
      b.add_flow(rn,
                 rule(in_f, {pipeline::PushTag{r.f_tag}, pipeline::Output{r_detour}}),
                 what);

      const GroupId dup = b.add_group(
          rn, pipeline::GroupKind::kAll,
          {pipeline::Bucket{std::nullopt, 1,
                            {pipeline::PushTag{r.f_tag}, pipeline::Output{r_detour}}},
           pipeline::Bucket{std::nullopt, 1,
                            {pipeline::PushTag{r.p_tag}, pipeline::Output{r_down}}}});
      pipeline::Match in_p = demand_match(d, kRerouteStatePriority);
      in_p.where_state(r.p_tag);
      b.add_flow(rn, rule(in_p, {to_f, pipeline::ApplyGroup{dup}}), what);
    }
  }
  return b.take();
}

}  // namespace openstate::apps
