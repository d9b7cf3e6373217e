// SPDX-License-Identifier: Apache-2.0

#include "openstate/apps/validate.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <variant>

#include "openstate/apps/tag_code.hpp"

namespace openstate::apps {

namespace {

using pipeline::HeaderField;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

using Knowns = std::map<HeaderField, FieldValue>;

struct WalkKey {
  NodeId node;
  PortId in_port;
  Label tag;
  Knowns knowns;
  auto operator<=>(const WalkKey&) const = default;
};

class Checker {
 public:
  Checker(const simnet::Topology& topo, const ConfigMap& configs)
      : topo_(topo), configs_(configs) {}

  std::vector<Diagnostic> run() {
    for (const auto& [node, config] : configs_) {
      if (!topo_.has_node(node) || !topo_.is_switch(node)) {
        report(node, "config for a node that is not a switch");
        continue;
      }
      check_ports_and_groups(node, config);
      check_conflicts(node, config);
      check_states(node, config);
    }
    for (const auto& [node, config] : configs_) {
      if (!topo_.has_node(node) || !topo_.is_switch(node)) continue;
      for (const auto& e : config.flows) {
        Knowns knowns;
        std::optional<Label> tag;
        for (const auto& c : e.match.conditions) {
          if (c.field.is_state || !c.value) continue;
          if (c.field.field == HeaderField::kTagLabel) {
            tag = *c.value;
          } else if (c.field.field != HeaderField::kInPort) {
            knowns[c.field.field] = *c.value;
          }
        }
        Cursor cur{tag, false};
        exec(node, config, e.actions, cur, knowns, 0);
      }
    }
    std::sort(out_.begin(), out_.end());
    out_.erase(std::unique(out_.begin(), out_.end()), out_.end());
    return out_;
  }

 private:
  struct Cursor {
    std::optional<Label> tag;
    bool tracked;  // tag pushed by a rule we are following
  };

  void report(NodeId node, std::string msg) {
    out_.push_back(Diagnostic{node, std::move(msg)});
  }

  const pipeline::GroupEntry* group(const pipeline::SwitchConfig& c,
                                    GroupId id) const {
    for (const auto& g : c.groups) {
      if (g.id == id) return &g;
    }
    return nullptr;
  }

  void check_actions(NodeId node, const pipeline::SwitchConfig& c,
                     const pipeline::ActionList& actions) {
    const auto ports = topo_.ports(node);
    for (const auto& a : actions) {
      if (const auto* o = std::get_if<pipeline::Output>(&a)) {
        if (std::find(ports.begin(), ports.end(), o->port) == ports.end()) {
          report(node, "output to unlinked port " + std::to_string(o->port));
        }
      } else if (const auto* g = std::get_if<pipeline::ApplyGroup>(&a)) {
        if (group(c, g->group) == nullptr) {
          report(node, "reference to undefined group " + std::to_string(g->group));
        }
      } else if (std::holds_alternative<pipeline::SetState>(a) &&
                 !c.state_table) {
        report(node, "set-state without a state table");
      }
    }
  }

  void check_ports_and_groups(NodeId node, const pipeline::SwitchConfig& c) {
    for (const auto& e : c.flows) check_actions(node, c, e.actions);
    for (const auto& g : c.groups) {
      if (g.buckets.empty()) {
        report(node, "group " + std::to_string(g.id) + " has no buckets");
      }
      for (const auto& b : g.buckets) check_actions(node, c, b.actions);
    }
  }

  void check_conflicts(NodeId node, const pipeline::SwitchConfig& c) {
    for (std::size_t i = 0; i < c.flows.size(); ++i) {
      for (std::size_t j = i + 1; j < c.flows.size(); ++j) {
        if (same_match(c.flows[i].match, c.flows[j].match) &&
            c.flows[i].actions != c.flows[j].actions) {
          report(node, "conflicting rules for match " +
                           describe(c.flows[i].match));
        }
      }
    }
  }

  static void collect_labels(const pipeline::ActionList& actions,
                             std::set<Label>& out) {
    for (const auto& a : actions) {
      if (const auto* s = std::get_if<pipeline::SetState>(&a)) {
        out.insert(s->label);
        if (s->idle_timeout) out.insert(s->idle_rollback);
        if (s->hard_timeout) out.insert(s->hard_rollback);
      }
    }
  }

  void check_states(NodeId node, const pipeline::SwitchConfig& c) {
    std::set<Label> producible{kDefaultState};
    for (const auto& e : c.flows) collect_labels(e.actions, producible);
    for (const auto& g : c.groups) {
      for (const auto& b : g.buckets) collect_labels(b.actions, producible);
    }
    for (const auto& e : c.flows) {
      for (const auto& cond : e.match.conditions) {
        if (!cond.field.is_state || !cond.value) continue;
        if (!c.state_table) {
          report(node, "state match without a state table");
        } else if (!producible.contains(*cond.value)) {
          report(node, "state " + std::to_string(*cond.value) +
                           " is matched but never set");
        }
      }
    }
  }

  static std::string describe(const pipeline::Match& m) {
    std::string s = "priority " + std::to_string(m.priority) + " {";
    bool first = true;
    for (const auto& c : m.conditions) {
      if (!first) s += ",";
      first = false;
      s += c.field.is_state ? std::string("state") : std::string(to_string(c.field.field));
      s += "=" + (c.value ? std::to_string(*c.value) : std::string("*"));
    }
    return s + "}";
  }

  void exec(NodeId node, const pipeline::SwitchConfig& c,
            const pipeline::ActionList& actions, Cursor cur,
            const Knowns& knowns, int depth) {
    if (depth > 8) return;
    for (const auto& a : actions) {
      bool stop = false;
      std::visit(
          Overloaded{
              [&](const pipeline::Output& o) {
                if (cur.tracked && cur.tag) forward(node, o.port, *cur.tag, knowns);
              },
              [&](const pipeline::PushTag& p) {
                if (cur.tag) {
                  report(node, "tag " + format_tag(p.label) +
                                   " pushed onto a packet tagged " +
                                   format_tag(*cur.tag));
                }
                cur.tag = p.label;
                cur.tracked = true;
              },
              [&](const pipeline::PopTag&) {
                cur.tag.reset();
                cur.tracked = false;
              },
              [&](const pipeline::SetState&) {},
              [&](const pipeline::ApplyGroup& g) {
                const auto* ge = group(c, g.group);
                if (ge == nullptr) return;
                for (const auto& b : ge->buckets) {
                  exec(node, c, b.actions, cur, knowns, depth + 1);
                }
              },
              [&](const pipeline::Drop&) { stop = true; },
              [&](const pipeline::ToController&) { stop = true; },
          },
          a);
      if (stop) return;
    }
  }

  void forward(NodeId node, PortId port, Label tag, const Knowns& knowns) {
    auto peer = topo_.peer({node, port});
    if (!peer) return;  // reported by the port check
    if (topo_.is_host(peer->node)) {
      report(node, "packet tagged " + format_tag(tag) + " delivered to host " +
                       std::to_string(peer->node));
      return;
    }
    WalkKey key{peer->node, peer->port, tag, knowns};
    if (!visited_.insert(key).second) return;
    auto it = configs_.find(peer->node);
    if (it == configs_.end()) {
      report(peer->node, "no rule for packets tagged " + format_tag(tag) +
                             " on port " + std::to_string(peer->port));
      return;
    }
    const pipeline::SwitchConfig& c = it->second;
    std::vector<const pipeline::FlowEntry*> order;
    for (const auto& e : c.flows) order.push_back(&e);
    std::stable_sort(order.begin(), order.end(), [](auto* x, auto* y) {
      return x->match.priority > y->match.priority;
    });
    bool any = false;
    for (const pipeline::FlowEntry* e : order) {
      bool possible = true;
      bool certain = true;
      for (const auto& cond : e->match.conditions) {
        if (!cond.value) continue;
        if (cond.field.is_state) {
          certain = false;
        } else if (cond.field.field == HeaderField::kTagLabel) {
          possible = possible && *cond.value == tag;
        } else if (cond.field.field == HeaderField::kInPort) {
          possible = possible && *cond.value == peer->port;
        } else {
          auto k = knowns.find(cond.field.field);
          if (k == knowns.end()) {
            certain = false;
          } else {
            possible = possible && k->second == *cond.value;
          }
        }
      }
      if (!possible) continue;
      any = true;
      exec(peer->node, c, e->actions, Cursor{tag, true}, knowns, 0);
      if (certain) break;
    }
    if (!any && c.miss_policy == pipeline::MissPolicy::kDrop) {
      report(peer->node, "no rule for packets tagged " + format_tag(tag) +
                             " on port " + std::to_string(peer->port));
    }
  }

  const simnet::Topology& topo_;
  const ConfigMap& configs_;
  std::set<WalkKey> visited_;
  std::vector<Diagnostic> out_;
};

}  // namespace

std::vector<Diagnostic> validate_config(const simnet::Topology& topo,
                                        const ConfigMap& configs) {
  return Checker(topo, configs).run();
}

std::string format_diagnostic(const Diagnostic& d) {
  return "switch " + std::to_string(d.node) + ": " + d.message;
}

}  // namespace openstate::apps
