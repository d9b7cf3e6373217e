// SPDX-License-Identifier: Apache-2.0

#include "openstate/apps/mac_learning.hpp"

#include <set>

#include "openstate/apps/config_builder.hpp"

namespace openstate::apps {

pipeline::SwitchConfig build_mac_learning(const MacLearningIntent& in) {
  using pipeline::HeaderField;
  if (in.ports.size() < 2) {
    throw ConfigError("MAC learning needs at least two ports");
  }
  if (std::set<PortId>(in.ports.begin(), in.ports.end()).size() !=
      in.ports.size()) {
    throw ConfigError("MAC learning ports repeat");
  }
  if (in.idle_timeout && *in.idle_timeout <= 0) {
    throw ConfigError("MAC learning idle timeout must be positive");
  }
  constexpr NodeId kSelf = 0;
  ConfigBuilder b;
  b.require_state_table(kSelf, {{HeaderField::kEthDst}, {HeaderField::kEthSrc}});

  for (PortId q : in.ports) {
    if (q == 0) throw ConfigError("port 0 is reserved");
    pipeline::SetState learn;
    learn.label = q;
    learn.idle_timeout = in.idle_timeout;

    std::vector<pipeline::Bucket> flood;
    for (PortId p : in.ports) {
      if (p != q) flood.push_back({std::nullopt, 1, {pipeline::Output{p}}});
    }
    const GroupId gid =
        b.add_group(kSelf, pipeline::GroupKind::kAll, std::move(flood));

    pipeline::FlowEntry unknown;
    unknown.match.priority = in.priority;
    unknown.match.where(HeaderField::kInPort, q).where_state(kDefaultState);
    unknown.actions = {learn, pipeline::ApplyGroup{gid}};
    b.add_flow(kSelf, std::move(unknown));

    for (PortId p : in.ports) {
      pipeline::FlowEntry known;
      known.match.priority = in.priority;
      known.match.where(HeaderField::kInPort, q).where_state(p);
      if (p == q) {
        known.actions = {learn, pipeline::Drop{}};
      } else {
        known.actions = {learn, pipeline::Output{p}};
      }
      b.add_flow(kSelf, std::move(known));
    }
  }
  return b.take().at(kSelf);
}

}  // namespace openstate::apps
