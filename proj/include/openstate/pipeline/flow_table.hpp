// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "openstate/common.hpp"
#include "openstate/pipeline/packet.hpp"
#include "openstate/pipeline/state_table.hpp"

namespace openstate::pipeline {

struct Output {
  PortId port;
  bool operator==(const Output&) const = default;
};
struct PushTag {
  Label label;
  bool operator==(const PushTag&) const = default;
};
struct PopTag {
  bool operator==(const PopTag&) const = default;
};
struct ApplyGroup {
  GroupId group;
  bool operator==(const ApplyGroup&) const = default;
};
// Ends the action list.
struct Drop {
  bool operator==(const Drop&) const = default;
};
struct ToController {
  bool operator==(const ToController&) const = default;
};

using Action = std::variant<Output, PushTag, PopTag, SetState, ApplyGroup,
                            Drop, ToController>;
using ActionList = std::vector<Action>;

// Match fields are the header fields plus the synthetic state label.
struct MatchField {
  static MatchField header(HeaderField f) { return MatchField{f, false}; }
  static MatchField state() { return MatchField{HeaderField::kEthSrc, true}; }

  HeaderField field = HeaderField::kEthSrc;
  bool is_state = false;

  bool operator==(const MatchField&) const = default;
};

struct Condition {
  MatchField field;
  std::optional<FieldValue> value;  // nullopt is a wildcard

  bool operator==(const Condition&) const = default;
};

struct Match {
  int priority = 0;
  std::vector<Condition> conditions;

  Match& where(HeaderField field, FieldValue value);
  Match& where_state(Label label);

  bool matches(const Packet& packet, Label state) const;
  bool operator==(const Match&) const = default;
};

struct FlowEntry {
  Match match;
  ActionList actions;
  std::uint64_t cookie = 0;

  bool operator==(const FlowEntry&) const = default;
};

// Priority-descending list; equal priorities keep insertion order, so the
// earlier entry wins a tie.
class FlowTable {
 public:
  // Throws ConfigError when a match repeats a field.
  void add(FlowEntry entry);
  std::size_t remove_by_cookie(std::uint64_t cookie);

  const FlowEntry* match(const Packet& packet, Label state) const;
  const std::vector<FlowEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<FlowEntry> entries_;
};

}  // namespace openstate::pipeline
