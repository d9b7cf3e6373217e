// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "openstate/common.hpp"
#include "openstate/pipeline/flow_table.hpp"
#include "openstate/pipeline/packet.hpp"
#include "openstate/pipeline/state_table.hpp"

namespace openstate::pipeline {

enum class GroupKind : std::uint8_t {
  kSelectRandom,
  kSelectHash,
  kSelectRoundRobin,
  kAll,
  kFastFailover,
};

std::string_view to_string(GroupKind kind);

struct Bucket {
  std::optional<PortId> watch_port;  // fast-failover only
  std::uint32_t weight = 1;          // SelectRandom only
  ActionList actions;

  bool operator==(const Bucket&) const = default;
};

struct GroupEntry {
  GroupId id = 0;
  GroupKind kind = GroupKind::kAll;
  ScopeSpec hash_fields;  // SelectHash only
  std::vector<Bucket> buckets;
  std::size_t rr_cursor = 0;

  bool operator==(const GroupEntry&) const = default;
};

// Table-miss handling, configured per switch.
enum class MissPolicy : std::uint8_t { kDrop, kToController };

struct StateTableSpec {
  ScopeSpec lookup_scope;
  ScopeSpec update_scope;

  bool operator==(const StateTableSpec&) const = default;
};

// Everything a rule compiler produces for one switch.
struct SwitchConfig {
  std::optional<StateTableSpec> state_table;
  std::vector<FlowEntry> flows;
  std::vector<GroupEntry> groups;
  MissPolicy miss_policy = MissPolicy::kDrop;
};

struct Emission {
  PortId port;
  Packet packet;
};

enum class DropCause : std::uint8_t {
  kNone,
  kTableMiss,
  kDropAction,
  kNoLiveBucket,
};

std::string_view to_string(DropCause cause);

struct ProcessResult {
  std::vector<Emission> emissions;
  // Packet as it stood when a ToController action (or a miss under the
  // ToController policy) handed it over.
  std::optional<Packet> to_controller;
  DropCause drop_cause = DropCause::kNone;
  Label state = kDefaultState;  // label returned by the state lookup
  bool table_miss = false;
  std::uint32_t groups_invoked = 0;
};

class Switch {
 public:
  Switch(NodeId id, SwitchConfig config, std::uint64_t seed);

  NodeId id() const { return id_; }

  void add_port(PortId port, bool up = true);
  void set_port_status(PortId port, bool up);
  // Unknown ports count as down.
  bool port_up(PortId port) const;
  const std::map<PortId, bool>& ports() const { return ports_; }

  StateTable* state_table() { return state_table_ ? &*state_table_ : nullptr; }
  const StateTable* state_table() const {
    return state_table_ ? &*state_table_ : nullptr;
  }
  FlowTable& flow_table() { return flow_table_; }
  const FlowTable& flow_table() const { return flow_table_; }
  const std::map<GroupId, GroupEntry>& groups() const { return groups_; }
  void add_group(GroupEntry group);
  MissPolicy miss_policy() const { return miss_policy_; }

  // Highest-priority entry whose conditions hold; nullptr is a table miss.
  const FlowEntry* flow_match(const Packet& packet, Label state) const;

  // Throws UnknownGroup or EmptyGroup.
  std::vector<Emission> group_execute(const Packet& packet, GroupId group,
                                      SimTime now);

  // State lookup, flow match, then the matched action list in order.
  ProcessResult process_packet(Packet packet, SimTime now);

 private:
  void execute(const ActionList& actions, Packet& packet, SimTime now,
               ProcessResult& result, int depth);
  void run_group(GroupId gid, const Packet& packet, SimTime now,
                 ProcessResult& result, int depth);

  NodeId id_;
  std::optional<StateTable> state_table_;
  FlowTable flow_table_;
  std::map<GroupId, GroupEntry> groups_;
  std::map<PortId, bool> ports_;
  MissPolicy miss_policy_;
  std::mt19937_64 rng_;
};

}  // namespace openstate::pipeline
