// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "openstate/apps/config_builder.hpp"
#include "openstate/apps/consistency.hpp"
#include "openstate/apps/failure_recovery.hpp"
#include "openstate/apps/mac_learning.hpp"
#include "openstate/simnet/topology.hpp"
#include "openstate/simnet/traffic.hpp"

namespace openstate::apps {

inline constexpr int kScenarioSchemaVersion = 1;

struct ConsistencySpec {
  NodeId node = 0;
  ConsistencyIntent intent;
};

struct MacLearningSpec {
  NodeId node = 0;
  MacLearningIntent intent;
};

struct FailureSpec {
  NodeId a = 0;
  NodeId b = 0;
  SimTime down_at = 0;
  std::optional<SimTime> up_at;
};

struct ControllerSpec {
  Duration rtt = 0;
  Duration proc_delay = kMillisecond;
};

// A parsed scenario file, independent of the forwarding mode it will run in.
struct ScenarioDoc {
  std::string id;
  std::uint64_t seed = 0;
  simnet::Topology topology;
  std::vector<ConsistencySpec> consistency;
  std::vector<MacLearningSpec> mac_learning;
  std::vector<ProtectedDemand> demands;
  std::vector<simnet::TrafficGen> traffic;
  // Demand a generator feeds, if it was declared against one.
  std::vector<std::optional<std::size_t>> traffic_demand;
  std::vector<FailureSpec> failures;
  Duration detection_delay = 0;
  Duration switch_latency = 0;
  ControllerSpec controller;
  bool eager_timers = false;
  SimTime until = 0;
};

// Throws ConfigError with the offending path on any schema violation.
ScenarioDoc parse_scenario(const std::string& json_text,
                           const std::filesystem::path& base_dir = {});
ScenarioDoc load_scenario_file(const std::filesystem::path& path);

// Node and link sections of an SNDlib native-format network. Nodes get ids
// 1..N in listing order; `names` receives the original names by id - 1.
simnet::Topology parse_sndlib(std::istream& in, Duration link_delay,
                              std::vector<std::string>* names = nullptr);

// Parses "a.b.c.d" or a decimal integer.
FieldValue parse_field_value(const std::string& text);

// Configs for the stateful (OpenState) mode: every intent in the document,
// merged per switch.
ConfigMap build_stateful_configs(const ScenarioDoc& doc);

}  // namespace openstate::apps
