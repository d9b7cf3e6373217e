// SPDX-License-Identifier: Apache-2.0

#include "openstate/pipeline/switch.hpp"

#include <numeric>
#include <string>

#include "openstate/util/random.hpp"

namespace openstate::pipeline {

namespace {

constexpr int kMaxGroupDepth = 4;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

std::string_view to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::kSelectRandom: return "select_random";
    case GroupKind::kSelectHash: return "select_hash";
    case GroupKind::kSelectRoundRobin: return "select_rr";
    case GroupKind::kAll: return "all";
    case GroupKind::kFastFailover: return "fast_failover";
  }
  return "?";
}

std::string_view to_string(DropCause cause) {
  switch (cause) {
    case DropCause::kNone: return "none";
    case DropCause::kTableMiss: return "table_miss";
    case DropCause::kDropAction: return "drop_action";
    case DropCause::kNoLiveBucket: return "no_live_bucket";
  }
  return "?";
}

Switch::Switch(NodeId id, SwitchConfig config, std::uint64_t seed)
    : id_(id), miss_policy_(config.miss_policy), rng_(seed) {
  if (config.state_table) {
    state_table_.emplace(config.state_table->lookup_scope,
                         config.state_table->update_scope);
  }
  for (auto& g : config.groups) add_group(std::move(g));
  for (auto& f : config.flows) flow_table_.add(std::move(f));
}

void Switch::add_port(PortId port, bool up) { ports_[port] = up; }

void Switch::set_port_status(PortId port, bool up) { ports_[port] = up; }

bool Switch::port_up(PortId port) const {
  auto it = ports_.find(port);
  return it != ports_.end() && it->second;
}

void Switch::add_group(GroupEntry group) {
  if (group.kind == GroupKind::kFastFailover) {
    for (std::size_t i = 0; i + 1 < group.buckets.size(); ++i) {
      if (!group.buckets[i].watch_port) {
        throw ConfigError("fast-failover group " + std::to_string(group.id) +
                          ": only the last bucket may omit a watch port");
      }
    }
  }
  if (group.kind == GroupKind::kSelectHash && group.hash_fields.empty()) {
    throw ConfigError("select-hash group " + std::to_string(group.id) +
                      " has no hash fields");
  }
  for (const Bucket& b : group.buckets) {
    if (b.weight == 0) throw ConfigError("bucket weight must be positive");
  }
  groups_.insert_or_assign(group.id, std::move(group));
}

const FlowEntry* Switch::flow_match(const Packet& packet, Label state) const {
  return flow_table_.match(packet, state);
}

std::vector<Emission> Switch::group_execute(const Packet& packet, GroupId group,
                                            SimTime now) {
  ProcessResult result;
  run_group(group, packet, now, result, 0);
  return std::move(result.emissions);
}

ProcessResult Switch::process_packet(Packet packet, SimTime now) {
  ProcessResult result;
  if (state_table_) result.state = state_table_->lookup(packet, now);
  const FlowEntry* entry = flow_match(packet, result.state);
  if (entry == nullptr) {
    result.table_miss = true;
    if (miss_policy_ == MissPolicy::kToController) {
      result.to_controller = std::move(packet);
    } else {
      result.drop_cause = DropCause::kTableMiss;
    }
    return result;
  }
  // Copied: the action list must outlive any table mutation it triggers.
  const ActionList actions = entry->actions;
  execute(actions, packet, now, result, 0);
  if (result.emissions.empty() && !result.to_controller &&
      result.drop_cause == DropCause::kNone) {
    result.drop_cause = DropCause::kDropAction;
  }
  return result;
}

void Switch::execute(const ActionList& actions, Packet& packet, SimTime now,
                     ProcessResult& result, int depth) {
  for (const Action& action : actions) {
    bool stop = false;
    std::visit(
        Overloaded{
            [&](const Output& a) { result.emissions.push_back({a.port, packet}); },
            [&](const PushTag& a) { packet.push_tag(a.label); },
            [&](const PopTag&) { packet.pop_tag(); },
            [&](const SetState& a) {
              if (!state_table_) {
                throw MalformedAction("set_state on switch " +
                                      std::to_string(id_) +
                                      " without a state table");
              }
              state_table_->set_state(packet, a, now);
            },
            [&](const ApplyGroup& a) {
              run_group(a.group, packet, now, result, depth + 1);
            },
            [&](const Drop&) {
              if (result.emissions.empty()) {
                result.drop_cause = DropCause::kDropAction;
              }
              stop = true;
            },
            [&](const ToController&) { result.to_controller = packet; },
        },
        action);
    if (stop) return;
  }
}

void Switch::run_group(GroupId gid, const Packet& packet, SimTime now,
                       ProcessResult& result, int depth) {
  if (depth > kMaxGroupDepth) {
    throw MalformedAction("group chaining deeper than " +
                          std::to_string(kMaxGroupDepth));
  }
  auto it = groups_.find(gid);
  if (it == groups_.end()) {
    throw UnknownGroup("switch " + std::to_string(id_) + " has no group " +
                       std::to_string(gid));
  }
  GroupEntry& group = it->second;
  if (group.buckets.empty()) {
    throw EmptyGroup("group " + std::to_string(gid) + " has no buckets");
  }
  ++result.groups_invoked;

  auto run_bucket = [&](const Bucket& bucket) {
    Packet copy = packet;
    execute(bucket.actions, copy, now, result, depth);
  };

  switch (group.kind) {
    case GroupKind::kAll:
      for (const Bucket& b : group.buckets) run_bucket(b);
      return;
    case GroupKind::kFastFailover:
      for (const Bucket& b : group.buckets) {
        if (!b.watch_port || port_up(*b.watch_port)) {
          run_bucket(b);
          return;
        }
      }
      result.drop_cause = DropCause::kNoLiveBucket;
      return;
    case GroupKind::kSelectRandom: {
      std::uint64_t total = 0;
      for (const Bucket& b : group.buckets) total += b.weight;
      std::uint64_t draw = util::bounded(rng_, total);
      for (const Bucket& b : group.buckets) {
        if (draw < b.weight) {
          run_bucket(b);
          return;
        }
        draw -= b.weight;
      }
      return;
    }
    case GroupKind::kSelectHash: {
      FlowKey key = extract_key(packet, group.hash_fields);
      run_bucket(group.buckets[util::fnv1a(key.values) % group.buckets.size()]);
      return;
    }
    case GroupKind::kSelectRoundRobin: {
      const Bucket& b = group.buckets[group.rr_cursor % group.buckets.size()];
      group.rr_cursor = (group.rr_cursor + 1) % group.buckets.size();
      run_bucket(b);
      return;
    }
  }
}

}  // namespace openstate::pipeline
