// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "openstate/common.hpp"
#include "openstate/pipeline/switch.hpp"

namespace openstate::apps {

// Load balancing with per-flow (or per-burst) consistency. Each destination
// gets a select group over out_ports; the chosen bucket records its port in
// the state table with an idle timeout of delta, and later packets of the
// same key follow the stored port.
struct ConsistencyIntent {
  std::vector<PortId> out_ports;
  pipeline::ScopeSpec lookup_scope = {
      pipeline::HeaderField::kIpSrc, pipeline::HeaderField::kIpDst,
      pipeline::HeaderField::kL4Src, pipeline::HeaderField::kL4Dst};
  Duration delta = 10 * kSecond;
  pipeline::GroupKind selection = pipeline::GroupKind::kSelectRandom;
  pipeline::ScopeSpec hash_fields;      // kSelectHash only
  std::vector<std::uint32_t> weights;   // kSelectRandom only; empty = equal
  std::vector<FieldValue> destinations; // ip_dst values
  int priority = 10;
};

// State label used for bucket k.
constexpr Label port_label(std::size_t bucket) { return bucket + 1; }

// Throws ConfigError on an invalid intent.
pipeline::SwitchConfig build_consistency(const ConsistencyIntent& intent);

}  // namespace openstate::apps
