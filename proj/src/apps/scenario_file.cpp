// SPDX-License-Identifier: Apache-2.0

#include "openstate/apps/scenario_file.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace openstate::apps {

namespace {

using json = nlohmann::json;
using pipeline::HeaderField;

constexpr NodeId kDefaultHostOffset = 1000;
constexpr FieldValue kAutoIpBase = 0x0A000000;       // 10.0.0.0
constexpr FieldValue kAutoEthBase = 0x020000000000;  // locally administered

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ConfigError(where + ": " + what);
}

void expect_keys(const json& obj, const std::string& where,
                 std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; })) {
      fail(where, "unknown key '" + key + "'");
    }
  }
}

template <class T>
T get(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) fail(where, std::string("missing '") + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(where + "." + key, e.what());
  }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  return get<T>(obj, key, where);
}

std::optional<std::int64_t> get_opt(const json& obj, const char* key,
                                    const std::string& where) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return get<std::int64_t>(obj, key, where);
}

FieldValue value_of(const json& v, const std::string& where) {
  if (v.is_number_unsigned() || v.is_number_integer()) {
    if (v.is_number_integer() && v.get<std::int64_t>() < 0) {
      fail(where, "negative field value");
    }
    return v.get<FieldValue>();
  }
  if (v.is_string()) {
    try {
      return parse_field_value(v.get<std::string>());
    } catch (const ConfigError& e) {
      fail(where, e.what());
    }
  }
  fail(where, "expected an integer or a dotted quad");
}

HeaderField field_of(const std::string& name, const std::string& where) {
  auto f = pipeline::parse_header_field(name);
  if (!f) fail(where, "unknown header field '" + name + "'");
  return *f;
}

pipeline::ScopeSpec scope_of(const json& arr, const std::string& where) {
  if (!arr.is_array()) fail(where, "expected a list of field names");
  pipeline::ScopeSpec s;
  for (const auto& f : arr) {
    if (!f.is_string()) fail(where, "expected a field name");
    s.push_back(field_of(f.get<std::string>(), where));
  }
  return s;
}

const simnet::Node& host_node(const simnet::Topology& topo, NodeId id,
                              const std::string& where) {
  if (!topo.has_node(id) || !topo.is_host(id)) {
    fail(where, "node " + std::to_string(id) + " is not a host");
  }
  return topo.node(id);
}

NodeId host_at(const simnet::Topology& topo, NodeId sw, const std::string& where) {
  if (!topo.has_node(sw) || !topo.is_switch(sw)) {
    fail(where, "node " + std::to_string(sw) + " is not a switch");
  }
  auto h = topo.host_of(sw);
  if (!h) fail(where, "switch " + std::to_string(sw) + " has no attached host");
  return *h;
}

void parse_topology(const json& t, const std::filesystem::path& base,
                    ScenarioDoc& doc) {
  const std::string where = "topology";
  expect_keys(t, where,
              {"switches", "hosts", "links", "default_delay_us", "sndlib",
               "auto_hosts", "host_id_offset", "host_delay_us"});
  const Duration def_delay =
      get_or<std::int64_t>(t, "default_delay_us", 1000, where);
  simnet::Topology& topo = doc.topology;
  if (t.contains("sndlib")) {
    const json& s = t.at("sndlib");
    expect_keys(s, where + ".sndlib", {"path", "delay_us"});
    const std::filesystem::path p = base / get<std::string>(s, "path", where + ".sndlib");
    std::ifstream in(p);
    if (!in) fail(where + ".sndlib", "cannot open " + p.string());
    topo = parse_sndlib(in, get_or<std::int64_t>(s, "delay_us", def_delay,
                                                 where + ".sndlib"));
  }
  if (t.contains("switches")) {
    for (const auto& s : t.at("switches")) {
      if (!s.is_number_unsigned()) fail(where + ".switches", "expected node ids");
      topo.add_switch(s.get<NodeId>());
    }
  }
  if (t.contains("links")) {
    std::size_t k = 0;
    for (const auto& l : t.at("links")) {
      const std::string lw = where + ".links[" + std::to_string(k++) + "]";
      expect_keys(l, lw, {"a", "b", "delay_us", "a_port", "b_port"});
      std::optional<PortId> ap, bp;
      if (l.contains("a_port")) ap = get<PortId>(l, "a_port", lw);
      if (l.contains("b_port")) bp = get<PortId>(l, "b_port", lw);
      try {
        topo.add_link(get<NodeId>(l, "a", lw), get<NodeId>(l, "b", lw),
                      get_or<std::int64_t>(l, "delay_us", def_delay, lw), ap, bp);
      } catch (const ConfigError& e) {
        fail(lw, e.what());
      }
    }
  }
  const Duration host_delay = get_or<std::int64_t>(t, "host_delay_us", 0, where);
  if (get_or<bool>(t, "auto_hosts", false, where)) {
    const NodeId offset =
        get_or<NodeId>(t, "host_id_offset", kDefaultHostOffset, where);
    std::vector<NodeId> switches;
    for (const auto& [id, n] : topo.nodes()) {
      if (n.kind == simnet::NodeKind::kSwitch) switches.push_back(id);
    }
    for (NodeId s : switches) {
      topo.add_host(offset + s, kAutoIpBase + s, kAutoEthBase + s);
      topo.add_link(offset + s, s, host_delay);
    }
  }
  if (t.contains("hosts")) {
    std::size_t k = 0;
    for (const auto& h : t.at("hosts")) {
      const std::string hw = where + ".hosts[" + std::to_string(k++) + "]";
      expect_keys(h, hw, {"id", "ip", "eth", "attach", "delay_us", "port"});
      const NodeId id = get<NodeId>(h, "id", hw);
      const FieldValue ip = value_of(h.at("ip"), hw + ".ip");
      const FieldValue eth =
          h.contains("eth") ? value_of(h.at("eth"), hw + ".eth") : kAutoEthBase + id;
      std::optional<PortId> port;
      if (h.contains("port")) port = get<PortId>(h, "port", hw);
      try {
        topo.add_host(id, ip, eth);
        topo.add_link(get<NodeId>(h, "attach", hw), id,
                      get_or<std::int64_t>(h, "delay_us", host_delay, hw), port);
      } catch (const ConfigError& e) {
        fail(hw, e.what());
      }
    }
  }
}

pipeline::GroupKind selection_of(const std::string& s, const std::string& where) {
  if (s == "random") return pipeline::GroupKind::kSelectRandom;
  if (s == "hash") return pipeline::GroupKind::kSelectHash;
  if (s == "round_robin") return pipeline::GroupKind::kSelectRoundRobin;
  fail(where, "selection must be random, hash or round_robin");
}

void parse_consistency(const json& j, const std::string& where, ScenarioDoc& doc) {
  expect_keys(j, where,
              {"type", "switch", "out_ports", "out_nodes", "lookup_scope",
               "delta_us", "selection", "hash_fields", "weights",
               "destinations", "priority"});
  ConsistencySpec spec;
  spec.node = get<NodeId>(j, "switch", where);
  if (!doc.topology.has_node(spec.node) || !doc.topology.is_switch(spec.node)) {
    fail(where, "switch " + std::to_string(spec.node) + " does not exist");
  }
  ConsistencyIntent& in = spec.intent;
  if (j.contains("out_ports")) {
    in.out_ports = get<std::vector<PortId>>(j, "out_ports", where);
  } else {
    for (NodeId n : get<std::vector<NodeId>>(j, "out_nodes", where)) {
      try {
        in.out_ports.push_back(doc.topology.port_toward(spec.node, n));
      } catch (const ConfigError& e) {
        fail(where + ".out_nodes", e.what());
      }
    }
  }
  if (j.contains("lookup_scope")) {
    in.lookup_scope = scope_of(j.at("lookup_scope"), where + ".lookup_scope");
  }
  in.delta = get_or<std::int64_t>(j, "delta_us", in.delta, where);
  in.selection = selection_of(get_or<std::string>(j, "selection", "random", where),
                              where + ".selection");
  if (j.contains("hash_fields")) {
    in.hash_fields = scope_of(j.at("hash_fields"), where + ".hash_fields");
  }
  if (j.contains("weights")) {
    in.weights = get<std::vector<std::uint32_t>>(j, "weights", where);
  }
  if (!j.contains("destinations")) fail(where, "missing 'destinations'");
  for (const auto& d : j.at("destinations")) {
    in.destinations.push_back(value_of(d, where + ".destinations"));
  }
  in.priority = get_or<int>(j, "priority", in.priority, where);
  doc.consistency.push_back(std::move(spec));
}

void parse_mac_learning(const json& j, const std::string& where, ScenarioDoc& doc) {
  expect_keys(j, where, {"type", "switch", "ports", "idle_timeout_us"});
  MacLearningSpec spec;
  spec.node = get<NodeId>(j, "switch", where);
  if (!doc.topology.has_node(spec.node) || !doc.topology.is_switch(spec.node)) {
    fail(where, "switch " + std::to_string(spec.node) + " does not exist");
  }
  spec.intent.ports = j.contains("ports")
                          ? get<std::vector<PortId>>(j, "ports", where)
                          : doc.topology.ports(spec.node);
  if (auto t = get_opt(j, "idle_timeout_us", where)) spec.intent.idle_timeout = *t;
  doc.mac_learning.push_back(std::move(spec));
}

FieldValue demand_field_value(const simnet::Node& src, const simnet::Node& dst,
                              HeaderField f, const std::string& where) {
  switch (f) {
    case HeaderField::kIpSrc: return src.ip;
    case HeaderField::kIpDst: return dst.ip;
    case HeaderField::kEthSrc: return src.eth;
    case HeaderField::kEthDst: return dst.eth;
    default:
      fail(where, "demand scope may only use ip/eth source and destination");
  }
}

void parse_recovery(const json& j, const std::string& where, ScenarioDoc& doc) {
  expect_keys(j, where, {"type", "delta_us", "demand_scope", "demands"});
  const Duration delta = get_or<std::int64_t>(j, "delta_us", kSecond, where);
  pipeline::ScopeSpec scope = {HeaderField::kIpDst};
  if (j.contains("demand_scope")) {
    scope = scope_of(j.at("demand_scope"), where + ".demand_scope");
  }
  if (!j.contains("demands") || !j.at("demands").is_array()) {
    fail(where, "missing 'demands' list");
  }
  std::size_t k = 0;
  for (const auto& d : j.at("demands")) {
    const std::string dw = where + ".demands[" + std::to_string(k++) + "]";
    expect_keys(d, dw, {"src", "dst", "primary", "plans"});
    ProtectedDemand pd;
    pd.src = get<NodeId>(d, "src", dw);
    pd.dst = get<NodeId>(d, "dst", dw);
    const auto primary = get<std::vector<NodeId>>(d, "primary", dw);
    if (primary.empty() || primary.front() != pd.src || primary.back() != pd.dst) {
      fail(dw, "primary path must run from src to dst");
    }
    const NodeId hs = host_at(doc.topology, pd.src, dw);
    const NodeId hd = host_at(doc.topology, pd.dst, dw);
    pd.primary_path.push_back(hs);
    pd.primary_path.insert(pd.primary_path.end(), primary.begin(), primary.end());
    pd.primary_path.push_back(hd);
    for (HeaderField f : scope) {
      pd.match.emplace_back(
          f, demand_field_value(doc.topology.node(hs), doc.topology.node(hd), f, dw));
    }
    std::size_t m = 0;
    for (const auto& p : d.value("plans", json::array())) {
      const std::string pw = dw + ".plans[" + std::to_string(m++) + "]";
      expect_keys(p, pw, {"failed", "reroute", "detour", "delta_us"});
      FailurePlan plan;
      plan.failed = get<NodeId>(p, "failed", pw);
      plan.reroute = get<NodeId>(p, "reroute", pw);
      plan.detour = get<std::vector<NodeId>>(p, "detour", pw);
      plan.delta = get_or<std::int64_t>(p, "delta_us", delta, pw);
      pd.plans.push_back(std::move(plan));
    }
    try {
      check_demand(doc.topology, pd);
      for (const auto& plan : pd.plans) resolve_plan(doc.topology, pd, plan);
    } catch (const ConfigError& e) {
      fail(dw, e.what());
    }
    doc.demands.push_back(std::move(pd));
  }
}

pipeline::Packet default_header(const simnet::Node& src, const simnet::Node& dst) {
  pipeline::Packet p;
  p.set(HeaderField::kEthSrc, src.eth);
  p.set(HeaderField::kEthDst, dst.eth);
  p.set(HeaderField::kIpSrc, src.ip);
  p.set(HeaderField::kIpDst, dst.ip);
  p.set(HeaderField::kIpProto, 6);
  p.set(HeaderField::kL4Src, 10000);
  p.set(HeaderField::kL4Dst, 80);
  return p;
}

void parse_traffic(const json& j, const std::string& where, ScenarioDoc& doc) {
  expect_keys(j, where,
              {"type", "src", "dst", "demand", "rate", "flows", "pkts_per_flow",
               "pkt_gap_us", "first_l4_src", "times_us", "start_us", "stop_us",
               "anchor_us", "phase_ppm", "align", "jitter_us", "header", "label"});
  const std::string type = get<std::string>(j, "type", where);
  simnet::TrafficGen gen;
  std::optional<std::size_t> demand;
  if (j.contains("demand")) {
    demand = get<std::size_t>(j, "demand", where);
    if (*demand >= doc.demands.size()) fail(where, "demand index out of range");
    const ProtectedDemand& d = doc.demands[*demand];
    gen.src = d.primary_path.front();
    gen.dst = d.primary_path.back();
  } else {
    gen.src = get<NodeId>(j, "src", where);
    gen.dst = get<NodeId>(j, "dst", where);
  }
  gen.header = default_header(host_node(doc.topology, gen.src, where + ".src"),
                              host_node(doc.topology, gen.dst, where + ".dst"));
  if (j.contains("header")) {
    const json& h = j.at("header");
    if (!h.is_object()) fail(where + ".header", "expected an object");
    for (const auto& [name, v] : h.items()) {
      const HeaderField f = field_of(name, where + ".header");
      if (f == HeaderField::kInPort) fail(where + ".header", "in_port is not a header");
      gen.header.set(f, value_of(v, where + ".header." + name));
    }
  }
  if (type == "tcp_flows") {
    simnet::TcpFlowArrivals k;
    k.rate = get<std::uint64_t>(j, "rate", where);
    k.flows = get<std::uint64_t>(j, "flows", where);
    k.pkts_per_flow = get_or<std::uint32_t>(j, "pkts_per_flow", 1, where);
    k.pkt_gap = get_or<std::int64_t>(j, "pkt_gap_us", 0, where);
    k.first_l4_src = get_or<FieldValue>(j, "first_l4_src", 10000, where);
    if (k.pkts_per_flow == 0) fail(where, "pkts_per_flow must be positive");
    if (k.pkt_gap < 0) fail(where, "negative pkt_gap_us");
    gen.kind = k;
  } else if (type == "cbr") {
    gen.kind = simnet::Cbr{get<std::uint64_t>(j, "rate", where)};
  } else if (type == "explicit") {
    auto times = get<std::vector<std::int64_t>>(j, "times_us", where);
    if (!std::is_sorted(times.begin(), times.end())) {
      fail(where, "times_us must be ascending");
    }
    gen.kind = simnet::Explicit{std::move(times)};
  } else {
    fail(where, "type must be tcp_flows, cbr or explicit");
  }
  gen.start = get_or<std::int64_t>(j, "start_us", 0, where);
  gen.stop = get_or<std::int64_t>(j, "stop_us", kNever, where);
  gen.anchor = get_or<std::int64_t>(j, "anchor_us", 0, where);
  gen.phase_ppm = get_or<std::uint32_t>(j, "phase_ppm", 0, where);
  if (gen.phase_ppm >= 1'000'000) fail(where, "phase_ppm must be below 1000000");
  if (j.contains("align")) {
    // Place the grid so that ticks reach `node` at at_us + k * gap.
    const json& a = j.at("align");
    expect_keys(a, where + ".align", {"node", "at_us"});
    if (!demand) fail(where + ".align", "alignment needs a demand");
    const NodeId node = get<NodeId>(a, "node", where + ".align");
    const auto& path = doc.demands[*demand].primary_path;
    auto it = std::find(path.begin(), path.end(), node);
    if (it == path.end()) fail(where + ".align", "node not on the demand's path");
    const std::vector<NodeId> prefix(path.begin(), it + 1);
    gen.anchor = get<std::int64_t>(a, "at_us", where + ".align") -
                 doc.topology.path_delay(prefix);
  }
  gen.jitter = get_or<std::int64_t>(j, "jitter_us", 0, where);
  if (gen.jitter < 0) fail(where, "jitter_us must be non-negative");
  gen.label = get_or<std::string>(j, "label", "", where);
  doc.traffic.push_back(std::move(gen));
  doc.traffic_demand.push_back(demand);
}

}  // namespace

FieldValue parse_field_value(const std::string& text) {
  if (text.find('.') == std::string::npos) {
    FieldValue v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
      throw ConfigError("bad field value '" + text + "'");
    }
    return v;
  }
  FieldValue out = 0;
  std::size_t parts = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t dot = std::min(text.find('.', pos), text.size());
    unsigned octet = 0;
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + dot, octet);
    if (ec != std::errc() || ptr != text.data() + dot || dot == pos || octet > 255) {
      throw ConfigError("bad dotted quad '" + text + "'");
    }
    out = (out << 8) | octet;
    ++parts;
    pos = dot + 1;
  }
  if (parts != 4) throw ConfigError("bad dotted quad '" + text + "'");
  return out;
}

ScenarioDoc parse_scenario(const std::string& json_text,
                           const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("scenario is not valid JSON: ") + e.what());
  }
  const std::string where = "scenario";
  expect_keys(root, where,
              {"schema_version", "id", "seed", "topology", "intents", "traffic",
               "failures", "detection_delay_us", "switch_latency_us",
               "controller", "eager_timers", "until_us", "description"});
  const int version = get<int>(root, "schema_version", where);
  if (version != kScenarioSchemaVersion) {
    fail(where, "unsupported schema_version " + std::to_string(version));
  }
  ScenarioDoc doc;
  doc.id = get<std::string>(root, "id", where);
  doc.seed = get_or<std::uint64_t>(root, "seed", 0, where);
  if (!root.contains("topology")) fail(where, "missing 'topology'");
  parse_topology(root.at("topology"), base_dir, doc);

  std::size_t k = 0;
  for (const auto& in : root.value("intents", json::array())) {
    const std::string iw = "intents[" + std::to_string(k++) + "]";
    const std::string type = get<std::string>(in, "type", iw);
    if (type == "consistency") {
      parse_consistency(in, iw, doc);
    } else if (type == "failure_recovery") {
      parse_recovery(in, iw, doc);
    } else if (type == "mac_learning") {
      parse_mac_learning(in, iw, doc);
    } else {
      fail(iw, "unknown intent type '" + type + "'");
    }
  }
  k = 0;
  for (const auto& t : root.value("traffic", json::array())) {
    parse_traffic(t, "traffic[" + std::to_string(k++) + "]", doc);
  }
  k = 0;
  for (const auto& f : root.value("failures", json::array())) {
    const std::string fw = "failures[" + std::to_string(k++) + "]";
    expect_keys(f, fw, {"link", "down_at_us", "up_at_us"});
    const auto link = get<std::vector<NodeId>>(f, "link", fw);
    if (link.size() != 2) fail(fw, "link must name two nodes");
    if (!doc.topology.link_between(link[0], link[1])) {
      fail(fw, "no link " + std::to_string(link[0]) + "-" + std::to_string(link[1]));
    }
    FailureSpec spec{link[0], link[1], get<std::int64_t>(f, "down_at_us", fw),
                     get_opt(f, "up_at_us", fw)};
    if (spec.up_at && *spec.up_at <= spec.down_at) {
      fail(fw, "up_at_us must follow down_at_us");
    }
    doc.failures.push_back(spec);
  }
  doc.detection_delay = get_or<std::int64_t>(root, "detection_delay_us", 0, where);
  doc.switch_latency = get_or<std::int64_t>(root, "switch_latency_us", 0, where);
  if (root.contains("controller")) {
    const json& c = root.at("controller");
    expect_keys(c, "controller", {"rtt_us", "proc_delay_us"});
    doc.controller.rtt = get_or<std::int64_t>(c, "rtt_us", 0, "controller");
    doc.controller.proc_delay =
        get_or<std::int64_t>(c, "proc_delay_us", kMillisecond, "controller");
  }
  doc.eager_timers = get_or<bool>(root, "eager_timers", false, where);
  doc.until = get<std::int64_t>(root, "until_us", where);
  if (doc.detection_delay < 0 || doc.switch_latency < 0 || doc.until < 0 ||
      doc.controller.rtt < 0 || doc.controller.proc_delay < 0) {
    fail(where, "durations must be non-negative");
  }
  return doc;
}

ScenarioDoc load_scenario_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_scenario(text.str(), path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

simnet::Topology parse_sndlib(std::istream& in, Duration link_delay,
                              std::vector<std::string>* names) {
  simnet::Topology topo;
  std::map<std::string, NodeId> ids;
  std::vector<std::string> order;
  enum class Section { kNone, kNodes, kLinks, kOther } section = Section::kNone;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (section == Section::kNone || section == Section::kOther) {
      std::string paren;
      if (first == "?SNDlib") continue;
      if (ls >> paren && paren == "(") {
        section = first == "NODES"   ? Section::kNodes
                  : first == "LINKS" ? Section::kLinks
                                     : Section::kOther;
        continue;
      }
      if (section == Section::kOther && first == ")") section = Section::kNone;
      continue;
    }
    if (first == ")") {
      section = Section::kNone;
      continue;
    }
    const std::string where = "sndlib line " + std::to_string(lineno);
    if (section == Section::kNodes) {
      if (ids.contains(first)) fail(where, "duplicate node " + first);
      const NodeId id = static_cast<NodeId>(order.size() + 1);
      ids[first] = id;
      order.push_back(first);
      topo.add_switch(id);
    } else {
      std::string paren, a, b;
      if (!(ls >> paren >> a >> b) || paren != "(") fail(where, "malformed link");
      if (!ids.contains(a) || !ids.contains(b)) fail(where, "link to unknown node");
      if (!topo.link_between(ids[a], ids[b])) {
        topo.add_link(ids[a], ids[b], link_delay);
      }
    }
  }
  if (order.empty()) throw ConfigError("sndlib input has no NODES section");
  if (names) *names = order;
  return topo;
}

ConfigMap build_stateful_configs(const ScenarioDoc& doc) {
  ConfigMap out;
  for (const ConsistencySpec& c : doc.consistency) {
    merge_configs(out, {{c.node, build_consistency(c.intent)}});
  }
  for (const MacLearningSpec& m : doc.mac_learning) {
    merge_configs(out, {{m.node, build_mac_learning(m.intent)}});
  }
  if (!doc.demands.empty()) {
    merge_configs(out, build_failure_recovery(doc.topology, doc.demands));
  }
  return out;
}

}  // namespace openstate::apps
