// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include "openstate/apps/scenario_file.hpp"
#include "openstate/pipeline/packet.hpp"
#include "openstate/simnet/metrics.hpp"

#ifndef OPENSTATE_SOURCE_DIR
#define OPENSTATE_SOURCE_DIR "."
#endif

namespace fixtures {

using openstate::FieldValue;
using openstate::PortId;
using openstate::pipeline::HeaderField;
using openstate::pipeline::Packet;

inline std::filesystem::path source_dir() { return OPENSTATE_SOURCE_DIR; }
inline std::filesystem::path scenario_path(const std::string& name) {
  return source_dir() / "scenarios" / name;
}

inline Packet tcp(FieldValue ip_src, FieldValue ip_dst, FieldValue l4_src,
                  FieldValue l4_dst = 80, PortId in_port = 1) {
  Packet p;
  p.set(HeaderField::kIpSrc, ip_src);
  p.set(HeaderField::kIpDst, ip_dst);
  p.set(HeaderField::kIpProto, 6);
  p.set(HeaderField::kL4Src, l4_src);
  p.set(HeaderField::kL4Dst, l4_dst);
  p.meta.ingress_port = in_port;
  return p;
}

inline Packet eth(FieldValue src, FieldValue dst, PortId in_port) {
  Packet p;
  p.set(HeaderField::kEthSrc, src);
  p.set(HeaderField::kEthDst, dst);
  p.meta.ingress_port = in_port;
  return p;
}

inline const openstate::apps::ScenarioDoc& norway() {
  static const auto doc =
      openstate::apps::load_scenario_file(scenario_path("norway_link_failure.json"));
  return doc;
}

inline const openstate::apps::ScenarioDoc& consistency_1x3() {
  static const auto doc =
      openstate::apps::load_scenario_file(scenario_path("consistency_1x3.json"));
  return doc;
}

// Original records of one flow, in creation order.
inline std::vector<const openstate::simnet::PacketRecord*> originals(
    const openstate::simnet::MetricsLog& log, std::uint64_t flow_id) {
  std::vector<const openstate::simnet::PacketRecord*> out;
  for (const auto& p : log.packets) {
    if (!p.is_copy() && p.flow_id == flow_id) out.push_back(&p);
  }
  return out;
}

}  // namespace fixtures
