// SPDX-License-Identifier: Apache-2.0

#include "openstate/pipeline/dump.hpp"

#include <sstream>

namespace openstate::pipeline {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::string opt(const std::optional<Duration>& d) {
  return d ? std::to_string(*d) : "-";
}

std::string format_key(const FlowKey& key) {
  std::string out;
  for (std::size_t i = 0; i < key.values.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(key.values[i]);
  }
  return out;
}

std::string format_group(const GroupEntry& g) {
  std::ostringstream os;
  os << "group\t" << g.id << '\t' << to_string(g.kind);
  if (g.kind == GroupKind::kSelectHash) {
    os << "(";
    for (std::size_t i = 0; i < g.hash_fields.size(); ++i) {
      os << (i ? "," : "") << to_string(g.hash_fields[i]);
    }
    os << ")";
  }
  os << '\t';
  for (std::size_t i = 0; i < g.buckets.size(); ++i) {
    const Bucket& b = g.buckets[i];
    if (i) os << ';';
    os << '[';
    if (b.watch_port) os << "watch=" << *b.watch_port << ' ';
    if (b.weight != 1) os << "weight=" << b.weight << ' ';
    os << format_actions(b.actions) << ']';
  }
  return os.str();
}

std::string format_flow(const FlowEntry& f) {
  std::ostringstream os;
  os << "flow\t" << f.match.priority << '\t' << format_match(f.match) << '\t'
     << format_actions(f.actions) << "\tcookie=" << f.cookie;
  return os.str();
}

}  // namespace

std::string format_action(const Action& action) {
  return std::visit(
      Overloaded{
          [](const Output& a) { return "output:" + std::to_string(a.port); },
          [](const PushTag& a) { return "push_tag:" + std::to_string(a.label); },
          [](const PopTag&) { return std::string("pop_tag"); },
          [](const SetState& a) {
            return "set_state:" + std::to_string(a.label) + "(idle=" +
                   opt(a.idle_timeout) + ",hard=" + opt(a.hard_timeout) +
                   ",idle_rb=" + std::to_string(a.idle_rollback) +
                   ",hard_rb=" + std::to_string(a.hard_rollback) + ")";
          },
          [](const ApplyGroup& a) { return "group:" + std::to_string(a.group); },
          [](const Drop&) { return std::string("drop"); },
          [](const ToController&) { return std::string("controller"); },
      },
      action);
}

std::string format_actions(const ActionList& actions) {
  if (actions.empty()) return "drop";
  std::string out;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    if (i) out += ',';
    out += format_action(actions[i]);
  }
  return out;
}

std::string format_match(const Match& match) {
  if (match.conditions.empty()) return "*";
  std::string out;
  for (std::size_t i = 0; i < match.conditions.size(); ++i) {
    const Condition& c = match.conditions[i];
    if (i) out += ',';
    out += c.field.is_state ? std::string("state")
                            : std::string(to_string(c.field.field));
    out += '=';
    out += c.value ? std::to_string(*c.value) : "*";
  }
  return out;
}

std::string dump_switch(const Switch& sw) {
  std::ostringstream os;
  if (const StateTable* st = sw.state_table()) {
    for (const StateEntry* e : st->sorted_entries()) {
      os << "state\t" << format_key(e->key) << '\t' << e->label
         << "\tidle=" << opt(e->idle_timeout) << "\thard="
         << opt(e->hard_timeout) << "\tidle_rb=" << e->idle_rollback
         << "\thard_rb=" << e->hard_rollback << '\n';
    }
  }
  for (const FlowEntry& f : sw.flow_table().entries()) {
    os << format_flow(f) << '\n';
  }
  for (const auto& [id, g] : sw.groups()) os << format_group(g) << '\n';
  return os.str();
}

std::string dump_config(const SwitchConfig& config) {
  Switch sw(0, config, 0);
  return dump_switch(sw);
}

}  // namespace openstate::pipeline
