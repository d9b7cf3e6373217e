// SPDX-License-Identifier: Apache-2.0

#include "openstate/apps/config_builder.hpp"

#include <algorithm>
#include <variant>

namespace openstate::apps {

namespace {

bool condition_less(const pipeline::Condition& x, const pipeline::Condition& y) {
  auto key = [](const pipeline::Condition& c) {
    return std::tuple(c.field.is_state, static_cast<int>(c.field.field),
                      c.value.has_value(), c.value.value_or(0));
  };
  return key(x) < key(y);
}

std::vector<pipeline::Condition> sorted(const pipeline::Match& m) {
  auto c = m.conditions;
  std::sort(c.begin(), c.end(), condition_less);
  return c;
}

GroupId next_group_id(const pipeline::SwitchConfig& config) {
  GroupId next = 1;
  for (const auto& g : config.groups) next = std::max(next, g.id + 1);
  return next;
}

void remap_groups(pipeline::ActionList& actions,
                  const std::map<GroupId, GroupId>& ids) {
  for (pipeline::Action& a : actions) {
    if (auto* g = std::get_if<pipeline::ApplyGroup>(&a)) {
      auto it = ids.find(g->group);
      if (it != ids.end()) g->group = it->second;
    }
  }
}

}  // namespace

bool same_match(const pipeline::Match& a, const pipeline::Match& b) {
  return a.priority == b.priority && sorted(a) == sorted(b);
}

void ConfigBuilder::add_flow(NodeId node, pipeline::FlowEntry entry,
                             const std::string& what) {
  pipeline::SwitchConfig& c = configs_[node];
  for (const pipeline::FlowEntry& e : c.flows) {
    if (!same_match(e.match, entry.match)) continue;
    if (e.actions == entry.actions && e.cookie == entry.cookie) return;
    throw ConfigError(what + " conflicts with an existing rule on switch " +
                      std::to_string(node));
  }
  c.flows.push_back(std::move(entry));
}

GroupId ConfigBuilder::add_group(NodeId node, pipeline::GroupKind kind,
                                 std::vector<pipeline::Bucket> buckets,
                                 pipeline::ScopeSpec hash_fields) {
  pipeline::SwitchConfig& c = configs_[node];
  pipeline::GroupEntry g;
  g.id = next_group_id(c);
  g.kind = kind;
  g.buckets = std::move(buckets);
  g.hash_fields = std::move(hash_fields);
  c.groups.push_back(std::move(g));
  return c.groups.back().id;
}

void ConfigBuilder::require_state_table(NodeId node,
                                        const pipeline::StateTableSpec& spec) {
  pipeline::SwitchConfig& c = configs_[node];
  if (c.state_table && *c.state_table != spec) {
    throw ConfigError("switch " + std::to_string(node) +
                      " needs two different state table scopes");
  }
  c.state_table = spec;
}

void ConfigBuilder::set_miss_policy(NodeId node, pipeline::MissPolicy policy) {
  configs_[node].miss_policy = policy;
}

void merge_configs(ConfigMap& base, const ConfigMap& extra) {
  for (const auto& [node, add] : extra) {
    pipeline::SwitchConfig& c = base[node];
    if (add.state_table) {
      if (c.state_table && *c.state_table != *add.state_table) {
        throw ConfigError("switch " + std::to_string(node) +
                          " merged with a different state table scope");
      }
      c.state_table = add.state_table;
    }
    if (add.miss_policy != pipeline::MissPolicy::kDrop) {
      c.miss_policy = add.miss_policy;
    }
    std::map<GroupId, GroupId> ids;
    GroupId next = next_group_id(c);
    for (const auto& g : add.groups) ids[g.id] = next++;
    for (pipeline::GroupEntry g : add.groups) {
      g.id = ids.at(g.id);
      for (auto& b : g.buckets) remap_groups(b.actions, ids);
      c.groups.push_back(std::move(g));
    }
    for (pipeline::FlowEntry f : add.flows) {
      remap_groups(f.actions, ids);
      const bool dup = std::any_of(c.flows.begin(), c.flows.end(),
                                   [&](const pipeline::FlowEntry& e) {
                                     return same_match(e.match, f.match) &&
                                            e.actions == f.actions;
                                   });
      if (!dup) c.flows.push_back(std::move(f));
    }
  }
}

}  // namespace openstate::apps
