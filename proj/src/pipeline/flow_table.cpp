// SPDX-License-Identifier: Apache-2.0

#include "openstate/pipeline/flow_table.hpp"

#include <algorithm>
#include <string>

namespace openstate::pipeline {

Match& Match::where(HeaderField field, FieldValue value) {
  conditions.push_back(Condition{MatchField::header(field), value});
  return *this;
}

Match& Match::where_state(Label label) {
  conditions.push_back(Condition{MatchField::state(), label});
  return *this;
}

bool Match::matches(const Packet& packet, Label state) const {
  for (const Condition& c : conditions) {
    if (!c.value) continue;
    if (c.field.is_state) {
      if (state != *c.value) return false;
      continue;
    }
    auto v = packet.get(c.field.field);
    if (!v || *v != *c.value) return false;
  }
  return true;
}

void FlowTable::add(FlowEntry entry) {
  const auto& conds = entry.match.conditions;
  for (std::size_t i = 0; i < conds.size(); ++i) {
    for (std::size_t j = i + 1; j < conds.size(); ++j) {
      if (conds[i].field == conds[j].field) {
        throw ConfigError("match repeats a field");
      }
    }
  }
  const int prio = entry.match.priority;
  auto pos = std::find_if(entries_.begin(), entries_.end(),
                          [prio](const FlowEntry& e) {
                            return e.match.priority < prio;
                          });
  entries_.insert(pos, std::move(entry));
}

std::size_t FlowTable::remove_by_cookie(std::uint64_t cookie) {
  return std::erase_if(entries_, [cookie](const FlowEntry& e) {
    return e.cookie == cookie;
  });
}

const FlowEntry* FlowTable::match(const Packet& packet, Label state) const {
  for (const FlowEntry& e : entries_) {
    if (e.match.matches(packet, state)) return &e;
  }
  return nullptr;
}

}  // namespace openstate::pipeline
