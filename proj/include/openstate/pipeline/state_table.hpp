// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <unordered_map>
#include <variant>
#include <vector>

#include "openstate/common.hpp"
#include "openstate/pipeline/packet.hpp"

namespace openstate::pipeline {

// Ordered list of fields forming a flow key. Order is significant.
using ScopeSpec = std::vector<HeaderField>;

struct FlowKey {
  std::vector<FieldValue> values;

  bool operator==(const FlowKey&) const = default;
  auto operator<=>(const FlowKey&) const = default;
};

struct FlowKeyHash {
  std::size_t operator()(const FlowKey& key) const noexcept;
};

// Throws MissingField when a scoped field is absent (an untagged packet has
// no tag_label, a packet without ingress port has no in_port).
FlowKey extract_key(const Packet& packet, const ScopeSpec& scope);

// The set-state action. A label of 0 deletes the entry.
struct SetState {
  Label label = kDefaultState;
  std::optional<Duration> idle_timeout;
  std::optional<Duration> hard_timeout;
  Label idle_rollback = kDefaultState;
  Label hard_rollback = kDefaultState;

  bool operator==(const SetState&) const = default;
};

struct StateEntry {
  FlowKey key;
  Label label = kDefaultState;
  std::optional<Duration> idle_timeout;
  std::optional<Duration> hard_timeout;
  Label idle_rollback = kDefaultState;
  Label hard_rollback = kDefaultState;
  SimTime last_hit = 0;
  SimTime installed_at = 0;

  // Earliest instant at which a timeout fires, if any is configured.
  std::optional<SimTime> next_deadline() const;
};

struct Kept {};
struct Replaced {
  Label label;
};
struct Deleted {};
using ExpiryOutcome = std::variant<Kept, Replaced, Deleted>;

// Applies every timeout that has elapsed by `now`, in deadline order.
//
// The hard deadline is measured from installed_at and the idle deadline from
// last_hit. When both fall due at the same instant the hard one wins. A zero
// rollback label deletes the entry; a non-zero one replaces the label and
// re-arms both configured timeouts from the expiry instant (not from `now`),
// so lazy evaluation at lookup time and eager evaluation at the deadline
// leave the entry in the same condition.
ExpiryOutcome expire_entry(StateEntry& entry, SimTime now);

class StateTable {
 public:
  StateTable(ScopeSpec lookup_scope, ScopeSpec update_scope);

  const ScopeSpec& lookup_scope() const { return lookup_scope_; }
  const ScopeSpec& update_scope() const { return update_scope_; }

  // Expires the matching entry if due, then returns its label (0 on a miss).
  // A hit refreshes the idle timer.
  Label lookup(const Packet& packet, SimTime now);

  // Writes the entry keyed by the update scope.
  void set_state(const Packet& packet, const SetState& action, SimTime now);
  void set_state(const FlowKey& key, const SetState& action, SimTime now);

  // Eager sweep: applies expire_entry to every entry.
  void expire_due(SimTime now);
  std::optional<SimTime> next_deadline() const;

  // Raw access without expiry or refresh.
  const StateEntry* find(const FlowKey& key) const;
  std::size_t size() const { return entries_.size(); }
  std::vector<const StateEntry*> sorted_entries() const;

 private:
  ScopeSpec lookup_scope_;
  ScopeSpec update_scope_;
  std::unordered_map<FlowKey, StateEntry, FlowKeyHash> entries_;
};

inline Label state_lookup(StateTable& table, const Packet& packet,
                          SimTime now) {
  return table.lookup(packet, now);
}

}  // namespace openstate::pipeline
