// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <string>
#include <vector>

#include "openstate/common.hpp"
#include "openstate/pipeline/switch.hpp"

namespace openstate::apps {

using ConfigMap = std::map<NodeId, pipeline::SwitchConfig>;

// Condition lists compare as sets: two matches with the same conditions in a
// different order are the same match.
bool same_match(const pipeline::Match& a, const pipeline::Match& b);

// Accumulates per-switch configs. Re-adding an identical rule is a no-op; a
// rule with the same priority and match but different actions is a conflict
// and throws ConfigError naming `what`.
class ConfigBuilder {
 public:
  void add_flow(NodeId node, pipeline::FlowEntry entry,
                const std::string& what = "rule");
  // Allocates the next free group id on the node.
  GroupId add_group(NodeId node, pipeline::GroupKind kind,
                    std::vector<pipeline::Bucket> buckets,
                    pipeline::ScopeSpec hash_fields = {});
  // Throws ConfigError when the node already has a different state table.
  void require_state_table(NodeId node, const pipeline::StateTableSpec& spec);
  void set_miss_policy(NodeId node, pipeline::MissPolicy policy);

  pipeline::SwitchConfig& config(NodeId node) { return configs_[node]; }
  const ConfigMap& configs() const { return configs_; }
  ConfigMap take() { return std::move(configs_); }

 private:
  ConfigMap configs_;
};

// Merges `extra` into `base` without conflict checks: identical rules are
// skipped, everything else is appended, and group ids of `extra` are
// renumbered. Throws ConfigError on incompatible state tables.
void merge_configs(ConfigMap& base, const ConfigMap& extra);

}  // namespace openstate::apps
