// SPDX-License-Identifier: Apache-2.0

#include "openstate/pipeline/state_table.hpp"

#include <algorithm>
#include <string>

#include "openstate/util/random.hpp"

namespace openstate::pipeline {

std::size_t FlowKeyHash::operator()(const FlowKey& key) const noexcept {
  return static_cast<std::size_t>(util::fnv1a(key.values));
}

FlowKey extract_key(const Packet& packet, const ScopeSpec& scope) {
  FlowKey key;
  key.values.reserve(scope.size());
  for (HeaderField field : scope) {
    auto value = packet.get(field);
    if (!value) {
      throw MissingField("packet lacks scoped field " +
                         std::string(to_string(field)));
    }
    key.values.push_back(*value);
  }
  return key;
}

std::optional<SimTime> StateEntry::next_deadline() const {
  std::optional<SimTime> deadline;
  if (hard_timeout) deadline = installed_at + *hard_timeout;
  if (idle_timeout) {
    SimTime idle = last_hit + *idle_timeout;
    if (!deadline || idle < *deadline) deadline = idle;
  }
  return deadline;
}

ExpiryOutcome expire_entry(StateEntry& entry, SimTime now) {
  bool replaced = false;
  for (;;) {
    std::optional<SimTime> hard_at;
    std::optional<SimTime> idle_at;
    if (entry.hard_timeout) hard_at = entry.installed_at + *entry.hard_timeout;
    if (entry.idle_timeout) idle_at = entry.last_hit + *entry.idle_timeout;
    const bool hard_due = hard_at && *hard_at <= now;
    const bool idle_due = idle_at && *idle_at <= now;
    if (!hard_due && !idle_due) break;

    const bool fire_hard = hard_due && (!idle_due || *hard_at <= *idle_at);
    const SimTime at = fire_hard ? *hard_at : *idle_at;
    const Label next = fire_hard ? entry.hard_rollback : entry.idle_rollback;
    if (next == kDefaultState) return Deleted{};

    // A single-timer self loop (e.g. P_i -> P_i) would otherwise iterate once
    // per period; jump straight to the last period that elapsed.
    SimTime rearm = at;
    const bool single_timer = !(entry.hard_timeout && entry.idle_timeout);
    if (next == entry.label && single_timer) {
      const Duration period =
          fire_hard ? *entry.hard_timeout : *entry.idle_timeout;
      rearm = at + ((now - at) / period) * period;
    }
    entry.label = next;
    entry.installed_at = rearm;
    entry.last_hit = rearm;
    replaced = true;
  }
  if (replaced) return Replaced{entry.label};
  return Kept{};
}

StateTable::StateTable(ScopeSpec lookup_scope, ScopeSpec update_scope)
    : lookup_scope_(std::move(lookup_scope)),
      update_scope_(std::move(update_scope)) {
  if (lookup_scope_.empty() || update_scope_.empty()) {
    throw ConfigError("state table scopes must be non-empty");
  }
  if (lookup_scope_.size() != update_scope_.size()) {
    throw ConfigError("lookup and update scopes must have equal arity");
  }
}

Label StateTable::lookup(const Packet& packet, SimTime now) {
  FlowKey key = extract_key(packet, lookup_scope_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return kDefaultState;
  if (std::holds_alternative<Deleted>(expire_entry(it->second, now))) {
    entries_.erase(it);
    return kDefaultState;
  }
  it->second.last_hit = now;
  return it->second.label;
}

void StateTable::set_state(const Packet& packet, const SetState& action,
                           SimTime now) {
  set_state(extract_key(packet, update_scope_), action, now);
}

void StateTable::set_state(const FlowKey& key, const SetState& action,
                           SimTime now) {
  if (key.values.size() != update_scope_.size()) {
    throw ConfigError("flow key arity does not match the update scope");
  }
  if ((action.idle_timeout && *action.idle_timeout <= 0) ||
      (action.hard_timeout && *action.hard_timeout <= 0)) {
    throw MalformedAction("set_state timeouts must be positive");
  }
  if (action.label == kDefaultState) {
    entries_.erase(key);
    return;
  }
  StateEntry entry;
  entry.key = key;
  entry.label = action.label;
  entry.idle_timeout = action.idle_timeout;
  entry.hard_timeout = action.hard_timeout;
  entry.idle_rollback = action.idle_rollback;
  entry.hard_rollback = action.hard_rollback;
  entry.last_hit = now;
  entry.installed_at = now;
  entries_.insert_or_assign(key, std::move(entry));
}

void StateTable::expire_due(SimTime now) {
  for (auto it = entries_.begin(); it != entries_.end();) {
    if (std::holds_alternative<Deleted>(expire_entry(it->second, now))) {
      it = entries_.erase(it);
    } else {
      ++it;
    }
  }
}

std::optional<SimTime> StateTable::next_deadline() const {
  std::optional<SimTime> best;
  for (const auto& [key, entry] : entries_) {
    auto d = entry.next_deadline();
    if (d && (!best || *d < *best)) best = d;
  }
  return best;
}

const StateEntry* StateTable::find(const FlowKey& key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<const StateEntry*> StateTable::sorted_entries() const {
  std::vector<const StateEntry*> out;
  out.reserve(entries_.size());
  for (const auto& [key, entry] : entries_) out.push_back(&entry);
  std::sort(out.begin(), out.end(),
            [](const StateEntry* a, const StateEntry* b) {
              return a->key < b->key;
            });
  return out;
}

}  // namespace openstate::pipeline
