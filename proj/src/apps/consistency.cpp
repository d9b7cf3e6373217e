// SPDX-License-Identifier: Apache-2.0

#include "openstate/apps/consistency.hpp"

#include <set>

#include "openstate/apps/config_builder.hpp"

namespace openstate::apps {

namespace {

void check(const ConsistencyIntent& in) {
  if (in.out_ports.size() < 2) {
    throw ConfigError("consistency needs at least two output ports");
  }
  if (std::set<PortId>(in.out_ports.begin(), in.out_ports.end()).size() !=
      in.out_ports.size()) {
    throw ConfigError("consistency output ports repeat");
  }
  if (in.delta <= 0) throw ConfigError("consistency delta must be positive");
  if (in.lookup_scope.empty()) throw ConfigError("empty lookup scope");
  if (in.destinations.empty()) {
    throw ConfigError("consistency needs at least one destination");
  }
  switch (in.selection) {
    case pipeline::GroupKind::kSelectRandom:
    case pipeline::GroupKind::kSelectRoundRobin:
      break;
    case pipeline::GroupKind::kSelectHash:
      if (in.hash_fields.empty()) {
        throw ConfigError("hash selection needs hash fields");
      }
      break;
    default:
      throw ConfigError("consistency selection must be a select group kind");
  }
  if (!in.weights.empty()) {
    if (in.selection != pipeline::GroupKind::kSelectRandom) {
      throw ConfigError("weights apply to random selection only");
    }
    if (in.weights.size() != in.out_ports.size()) {
      throw ConfigError("one weight per output port required");
    }
    for (auto w : in.weights) {
      if (w == 0) throw ConfigError("weights must be positive");
    }
  }
}

}  // namespace

pipeline::SwitchConfig build_consistency(const ConsistencyIntent& in) {
  check(in);
  using pipeline::HeaderField;
  constexpr NodeId kSelf = 0;
  ConfigBuilder b;
  b.require_state_table(kSelf, {in.lookup_scope, in.lookup_scope});

  auto refresh = [&](std::size_t k) {
    pipeline::SetState s;
    s.label = port_label(k);
    s.idle_timeout = in.delta;
    return pipeline::ActionList{s, pipeline::Output{in.out_ports[k]}};
  };

  for (FieldValue dst : in.destinations) {
    std::vector<pipeline::Bucket> buckets;
    for (std::size_t k = 0; k < in.out_ports.size(); ++k) {
      pipeline::Bucket bucket;
      bucket.actions = refresh(k);
      if (!in.weights.empty()) bucket.weight = in.weights[k];
      buckets.push_back(std::move(bucket));
    }
    const GroupId gid =
        b.add_group(kSelf, in.selection, std::move(buckets), in.hash_fields);

    pipeline::FlowEntry miss;
    miss.match.priority = in.priority;
    miss.match.where_state(kDefaultState).where(HeaderField::kIpDst, dst);
    miss.actions = {pipeline::ApplyGroup{gid}};
    b.add_flow(kSelf, std::move(miss), "consistency rule");

    for (std::size_t k = 0; k < in.out_ports.size(); ++k) {
      pipeline::FlowEntry hit;
      hit.match.priority = in.priority;
      hit.match.where_state(port_label(k)).where(HeaderField::kIpDst, dst);
      hit.actions = refresh(k);
      b.add_flow(kSelf, std::move(hit), "consistency rule");
    }
  }
  return b.take().at(kSelf);
}

}  // namespace openstate::apps
