// SPDX-License-Identifier: Apache-2.0

// Prints one PASS/FAIL line per acceptance criterion and exits non-zero if
// any criterion fails.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "openstate/apps/tag_code.hpp"
#include "openstate/expcli/experiment.hpp"
#include "openstate/pipeline/state_table.hpp"
#include "openstate/simnet/simulator.hpp"

using namespace openstate;
using expcli::Mode;
using simnet::PacketRecord;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string str(const std::vector<std::uint64_t>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k]);
  return s;
}

// ---- consistency scenarios -------------------------------------------------

constexpr NodeId kBalancer = 1;

apps::ScenarioDoc tcp_doc(std::uint64_t flows, std::uint64_t flow_rate) {
  apps::ScenarioDoc doc = fixtures::consistency_1x3();
  auto& gen = std::get<simnet::TcpFlowArrivals>(doc.traffic.at(0).kind);
  gen.flows = flows;
  gen.rate = flow_rate;
  const Duration span = static_cast<Duration>(flows * kSecond / flow_rate) +
                        gen.pkts_per_flow * gen.pkt_gap;
  doc.until = span + kSecond;
  return doc;
}

// Out port at the balancer of every original packet, by flow, in creation order.
std::map<std::uint64_t, std::vector<std::pair<SimTime, PortId>>> balancer_ports(
    const simnet::MetricsLog& log) {
  std::map<std::uint64_t, std::vector<std::pair<SimTime, PortId>>> out;
  for (const PacketRecord& p : log.packets) {
    if (p.is_copy()) continue;
    for (const simnet::Hop& h : p.hops) {
      if (h.node == kBalancer && h.out_port) out[p.flow_id].emplace_back(h.arrive, *h.out_port);
    }
  }
  return out;
}

Outcome criterion1() {
  const apps::ScenarioDoc doc = tcp_doc(10'000, 1000);
  const Duration delta = doc.consistency.at(0).intent.delta;
  const auto log = expcli::run_once(doc, {});
  const auto ports = balancer_ports(log);
  std::uint64_t split = 0, packets = 0;
  Duration max_gap = 0;
  for (const auto& [flow, seen] : ports) {
    std::set<PortId> distinct;
    for (std::size_t k = 0; k < seen.size(); ++k) {
      distinct.insert(seen[k].second);
      if (k) max_gap = std::max(max_gap, seen[k].first - seen[k - 1].first);
    }
    split += distinct.size() > 1;
    packets += seen.size();
  }
  const bool pass = ports.size() == 10'000 && split == 0 && max_gap < delta &&
                    packets == log.generated();
  return {pass, std::to_string(ports.size()) + " flows, " + std::to_string(packets) +
                    " packets, max gap " + std::to_string(max_gap) + " us, " +
                    std::to_string(split) + " flows on more than one port"};
}

Outcome criterion2() {
  const apps::ScenarioDoc doc = tcp_doc(3000, 1000);
  bool pass = true;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    expcli::RunParams p;
    p.seed = seed;
    const auto ports = balancer_ports(expcli::run_once(doc, p));
    std::map<PortId, std::uint64_t> n;
    for (const auto& [flow, seen] : ports) ++n[seen.front().second];
    std::vector<std::uint64_t> counts;
    for (const auto& [port, c] : n) counts.push_back(c);
    pass &= counts.size() == 3 && ports.size() == 3000;
    for (auto c : counts) pass &= c >= 900 && c <= 1100;
    detail += (seed ? " " : "") + std::string("s") + std::to_string(seed) + "=" + str(counts);
  }
  return {pass, "per-port flows " + detail + " (bound 1000+-100)"};
}

Outcome criterion3() {
  apps::ScenarioDoc doc = fixtures::consistency_1x3();
  const Duration delta = doc.consistency.at(0).intent.delta;
  constexpr int kBursts = 12, kPerBurst = 20;
  constexpr Duration kGap = kMillisecond;
  simnet::Explicit times;
  SimTime t = 0;
  for (int b = 0; b < kBursts; ++b) {
    for (int k = 0; k < kPerBurst; ++k) {
      times.times.push_back(t);
      if (k + 1 < kPerBurst) t += kGap;
    }
    t += 5 * delta;
  }
  simnet::TrafficGen& g = doc.traffic.at(0);
  g.kind = times;
  doc.until = t;
  const auto log = expcli::run_once(doc, {});
  std::uint64_t selections = 0, mixed_bursts = 0;
  std::vector<std::set<PortId>> burst_ports(kBursts);
  std::size_t index = 0;
  for (const PacketRecord& p : log.packets) {
    if (p.is_copy()) continue;
    for (const simnet::Hop& h : p.hops) {
      if (h.node != kBalancer) continue;
      selections += h.groups_invoked;
      if (h.out_port) burst_ports.at(index / kPerBurst).insert(*h.out_port);
    }
    ++index;
  }
  std::set<PortId> used;
  for (const auto& s : burst_ports) {
    mixed_bursts += s.size() != 1;
    used.insert(s.begin(), s.end());
  }
  const bool pass = index == kBursts * kPerBurst && selections == kBursts && mixed_bursts == 0;
  return {pass, std::to_string(kBursts) + " bursts, " + std::to_string(selections) +
                    " selection events, " + std::to_string(mixed_bursts) +
                    " bursts split across ports, " + std::to_string(used.size()) +
                    " distinct ports used"};
}

// ---- failure scenarios -----------------------------------------------------

const std::vector<std::uint64_t> kRates = {20, 40, 60, 80, 100, 120, 140, 160, 180, 200};
const std::vector<Duration> kRtts = {0, 3 * kMillisecond, 6 * kMillisecond, 12 * kMillisecond};

const std::vector<expcli::FailureRow>& failure_rows() {
  static const auto rows = [] {
    expcli::SweepConfig sweep;
    sweep.rates = kRates;
    sweep.rtts = kRtts;
    return expcli::run_failure_sweep(fixtures::norway(), sweep);
  }();
  return rows;
}

const expcli::FailureRow& row(std::uint64_t rate, Mode mode, Duration rtt) {
  for (const auto& r : failure_rows()) {
    if (r.rate == rate && r.mode == mode && r.rtt == rtt) return r;
  }
  throw Error("sweep cell missing");
}

Outcome criterion4() {
  const auto& doc = fixtures::norway();
  bool pass = true;
  std::string detail;
  for (auto rate : kRates) {
    const auto& base = row(rate, Mode::kOpenState, 0);
    std::string base_csv;
    for (Duration rtt : kRtts) {
      const auto& r = row(rate, Mode::kOpenState, rtt);
      pass &= r.total_losses == base.total_losses && r.per_demand_losses == base.per_demand_losses;
      expcli::RunParams p;
      p.rate = rate;
      p.rtt = rtt;
      std::ostringstream csv;
      simnet::write_packet_csv(csv, expcli::run_once(doc, p));
      if (rtt == 0) {
        base_csv = csv.str();
      } else {
        pass &= csv.str() == base_csv;
      }
    }
    detail += (detail.empty() ? "" : " ") + std::to_string(rate) + ":" +
              std::to_string(base.total_losses);
  }
  return {pass, "OS losses per rate, identical loss columns and packet logs for RTT 0/3/6/12 ms: " +
                    detail};
}

// Loss count predicted from the traffic grid: a packet is lost when its
// arrival at the detect node falls in [t_f - d, t_f + hold), where d is the
// delay of the failed link and hold how long the detect node keeps
// forwarding onto it plus, in OF mode, how long the reroute node keeps
// sending toward it.
std::uint64_t oracle_losses(const apps::ScenarioDoc& doc, std::uint64_t rate, Mode mode,
                            Duration rtt, bool* edge) {
  const apps::FailureSpec& f = doc.failures.at(0);
  std::uint64_t total = 0;
  for (std::size_t g = 0; g < doc.traffic.size(); ++g) {
    const auto& gen = doc.traffic[g];
    const auto& demand = doc.demands.at(*doc.traffic_demand.at(g));
    const apps::ResolvedPlan plan = apps::resolve_plan(doc.topology, demand, demand.plans.at(0));
    const auto& path = demand.primary_path;
    const std::vector<NodeId> to_detect(path.begin(), path.begin() + plan.detect_index + 1);
    const std::vector<NodeId> reroute_to_detect(path.begin() + plan.reroute_index,
                                                path.begin() + plan.detect_index + 1);
    const Duration offset = doc.topology.path_delay(to_detect) +
                            static_cast<Duration>(plan.detect_index - 1) * doc.switch_latency;
    const Duration d = doc.topology.path_delay({f.a, f.b});
    Duration hold = doc.detection_delay;
    if (mode == Mode::kOpenFlow) {
      hold += 2 * (rtt / 2) + doc.controller.proc_delay +
              doc.topology.path_delay(reroute_to_detect);
    }
    const auto ticks = oracle::grid(rate, gen.anchor, gen.phase_ppm, 0, doc.until);
    total += oracle::count_in_window(ticks, offset, f.down_at - d, f.down_at + hold, edge);
  }
  return total;
}

Outcome criterion5() {
  const auto& doc = fixtures::norway();
  bool ordered = true, monotone = true, matches = true, edge = false;
  std::string detail;
  for (auto rate : kRates) {
    std::uint64_t prev = 0;
    for (Duration rtt : kRtts) {
      const auto os = row(rate, Mode::kOpenState, rtt).total_losses;
      const auto of = row(rate, Mode::kOpenFlow, rtt).total_losses;
      if (rtt > 0) ordered &= os < of;
      monotone &= of >= prev;
      prev = of;
      matches &= os == oracle_losses(doc, rate, Mode::kOpenState, rtt, &edge);
      matches &= of == oracle_losses(doc, rate, Mode::kOpenFlow, rtt, &edge);
    }
  }
  for (Duration rtt : kRtts) {
    detail += " of@" + std::to_string(rtt / kMillisecond) + "ms=" +
              std::to_string(row(200, Mode::kOpenFlow, rtt).total_losses);
  }
  return {ordered && monotone && matches && !edge,
          std::string("OS<OF ") + (ordered ? "holds" : "violated") + ", OF in RTT " +
              (monotone ? "non-decreasing" : "decreasing somewhere") + ", grid oracle " +
              (matches ? "matches" : "differs") + (edge ? " (arrival on a window edge)" : "") +
              "; at 200 pkt/s os=" + std::to_string(row(200, Mode::kOpenState, 0).total_losses) +
              detail};
}

Outcome criterion6() {
  const auto& doc = fixtures::norway();
  bool pass = true;
  std::uint64_t records = 0;
  for (auto rate : {std::uint64_t{20}, std::uint64_t{200}}) {
    for (Duration rtt : kRtts) {
      expcli::RunParams p;
      p.mode = Mode::kOpenFlow;
      p.rate = rate;
      p.rtt = rtt;
      const auto log = expcli::run_once(doc, p);
      const Duration expect = 2 * (rtt / 2) + doc.controller.proc_delay;
      pass &= !log.recoveries.empty();
      for (const auto& r : log.recoveries) {
        ++records;
        pass &= r.delay() == expect;
      }
      pass &= row(rate, Mode::kOpenFlow, rtt).recovery_delay == expect;
    }
  }
  for (const auto& r : failure_rows()) {
    if (r.mode == Mode::kOpenFlow) pass &= r.recovery_delay == 2 * (r.rtt / 2) + doc.controller.proc_delay;
  }
  return {pass, std::to_string(records) + " recovery records and " +
                    std::to_string(failure_rows().size() / 2) +
                    " OF sweep cells equal 2*one_way + proc"};
}

Outcome criterion7() {
  const auto& doc = fixtures::norway();
  const auto log = expcli::run_once(doc, {});
  const std::uint64_t flow = simnet::flow_id_for(0, 0);
  const std::string trace = expcli::emit_trace(log, flow);
  std::ifstream in(fixtures::source_dir() / "tests/golden/norway_trace_22_10.txt",
                   std::ios::binary);
  std::stringstream golden;
  golden << in.rdbuf();
  const bool stable = trace == expcli::emit_trace(expcli::run_once(doc, {}), flow);

  const Label f11 = apps::f_label(11);
  const std::vector<NodeId> expect = {22, 24, 25, 26, 25, 24, 16, 17, 13, 12, 10};
  bool bounced = false;
  for (const PacketRecord* p : fixtures::originals(log, flow)) {
    std::vector<NodeId> path;
    for (const auto& h : p->hops) path.push_back(h.node);
    if (path != expect) continue;
    bounced = p->status == simnet::PacketStatus::kDelivered && !p->tagged_on_delivery &&
              p->hops[3].tag_out == f11 && p->hops[9].tag_in == f11 && !p->hops[9].tag_out;
    break;
  }
  const bool pass = in && golden.str() == trace && stable && bounced;
  return {pass, std::string("bounced packet 26>25>24 then 24>16>17>13>12 with pop at 12: ") +
                    (bounced ? "yes" : "no") + ", golden " +
                    (in && golden.str() == trace ? "matches" : "differs") + ", rerun " +
                    (stable ? "byte-identical" : "differs")};
}

struct ReroutePoint {
  SimTime at;
  const simnet::Hop* hop;
  bool copy;
};

// Hops at each demand's reroute node, by demand, in arrival order.
std::vector<std::vector<ReroutePoint>> reroute_hops(const apps::ScenarioDoc& doc,
                                                    const simnet::MetricsLog& log) {
  std::vector<std::vector<ReroutePoint>> out(doc.demands.size());
  for (const PacketRecord& p : log.packets) {
    const auto d = doc.traffic_demand.at(p.generator);
    if (!d) continue;
    const NodeId r = doc.demands[*d].plans.at(0).reroute;
    for (const auto& h : p.hops) {
      if (h.node == r) out[*d].push_back({h.arrive, &h, p.is_copy()});
    }
  }
  for (auto& v : out) {
    std::stable_sort(v.begin(), v.end(),
                     [](const ReroutePoint& a, const ReroutePoint& b) { return a.at < b.at; });
  }
  return out;
}

struct ProbeStats {
  bool pass = true;
  std::uint64_t duplications = 0;
  Duration min_spacing = kNever;
  Duration max_spacing = 0;
  Duration worst_restore = 0;
  Duration restore_bound = 0;
};

// Persistent failure: every probe duplication at the reroute node follows the
// previous one by at least the probe period and at most one packet gap more.
void check_probe_spacing(std::uint64_t rate, std::optional<Duration> delta, ProbeStats& st) {
  const Duration gap = static_cast<Duration>((kSecond + rate - 1) / rate);
  apps::ScenarioDoc doc = fixtures::norway();
  doc.failures.at(0).up_at.reset();
  doc.until = 8 * kSecond;
  if (delta) {
    for (auto& d : doc.demands) d.plans.at(0).delta = *delta;
  }
  expcli::RunParams p;
  p.rate = rate;
  const auto hops = reroute_hops(doc, expcli::run_once(doc, p));
  for (std::size_t d = 0; d < hops.size(); ++d) {
    const auto& plan = doc.demands[d].plans.at(0);
    const Label probe = apps::p_label(plan.failed);
    std::vector<SimTime> dup;
    for (const auto& pt : hops[d]) {
      if (!pt.copy && pt.hop->state_before == probe && pt.hop->groups_invoked > 0) {
        dup.push_back(pt.at);
      }
    }
    st.pass &= dup.size() >= 5;
    st.duplications += dup.size();
    for (std::size_t k = 1; k < dup.size(); ++k) {
      const Duration s = dup[k] - dup[k - 1];
      st.min_spacing = std::min(st.min_spacing, s);
      st.max_spacing = std::max(st.max_spacing, s);
      st.pass &= s >= plan.delta && s <= plan.delta + gap;
    }
  }
}

// Repair at t_r with instant detection: each demand's reroute node returns to
// state 0 within delta + bounce-segment round trip + one packet gap, and
// untagged primary forwarding resumes.
void check_restore(std::uint64_t rate, SimTime t_r, ProbeStats& st) {
  const Duration gap = static_cast<Duration>((kSecond + rate - 1) / rate);
  apps::ScenarioDoc doc = fixtures::norway();
  doc.detection_delay = 0;
  doc.failures.at(0).up_at = t_r;
  doc.until = t_r + 3 * kSecond;
  expcli::RunParams p;
  p.rate = rate;
  const auto log = expcli::run_once(doc, p);
  const auto all = reroute_hops(doc, log);
  for (std::size_t d = 0; d < all.size(); ++d) {
    const auto& demand = doc.demands[d];
    const apps::ResolvedPlan plan = apps::resolve_plan(doc.topology, demand, demand.plans.at(0));
    const std::vector<NodeId> segment(demand.primary_path.begin() + plan.reroute_index,
                                      demand.primary_path.begin() + plan.detect_index + 1);
    const Duration bound = plan.delta + 2 * doc.topology.path_delay(segment) + gap;
    st.restore_bound = std::max(st.restore_bound, bound);
    std::optional<SimTime> restored;
    for (const auto& pt : all[d]) {
      if (pt.at >= t_r && pt.hop->tag_in == plan.p_tag && pt.hop->state_after == kDefaultState) {
        restored = pt.at;
        break;
      }
    }
    if (!restored) {
      st.pass = false;
      continue;
    }
    st.worst_restore = std::max(st.worst_restore, *restored - t_r);
    st.pass &= *restored - t_r <= bound;
    for (const auto& pt : all[d]) {
      if (pt.at <= *restored || pt.copy) continue;
      st.pass &= pt.hop->state_before == kDefaultState &&
                 pt.hop->state_after == kDefaultState && !pt.hop->tag_out;
    }
    const std::vector<NodeId> primary(demand.primary_path.begin() + 1,
                                      demand.primary_path.end() - 1);
    for (const PacketRecord& pkt : log.packets) {
      if (pkt.is_copy() || doc.traffic_demand.at(pkt.generator) != d) continue;
      if (pkt.hops.empty() || pkt.hops.front().arrive <= *restored) continue;
      std::vector<NodeId> path;
      for (const auto& h : pkt.hops) path.push_back(h.node);
      st.pass &= path == primary && pkt.status == simnet::PacketStatus::kDelivered &&
                 !pkt.tagged_on_delivery;
    }
  }
}

Outcome criterion8() {
  ProbeStats st;
  for (std::uint64_t rate : {std::uint64_t{20}, std::uint64_t{200}}) {
    // 1.03 s is not a multiple of either packet spacing, so the slack in the
    // bound is exercised too.
    check_probe_spacing(rate, std::nullopt, st);
    check_probe_spacing(rate, 1030 * kMillisecond, st);
    for (SimTime t_r : {2500 * kMillisecond, 2731 * kMillisecond, 3097 * kMillisecond}) {
      check_restore(rate, t_r, st);
    }
  }
  return {st.pass, std::to_string(st.duplications) + " probe duplications spaced " +
                       std::to_string(st.min_spacing) + ".." + std::to_string(st.max_spacing) +
                       " us; worst restore " + std::to_string(st.worst_restore) +
                       " us after repair (bound " + std::to_string(st.restore_bound) + " us)"};
}

Outcome criterion9() {
  using pipeline::HeaderField;
  std::uint64_t mismatches = 0, lookups = 0;
  for (std::uint64_t seed = 10'000; seed < 10'200; ++seed) {
    const auto steps = oracle::random_lifecycle(seed, 5, 20);
    pipeline::StateTable table({HeaderField::kL4Src}, {HeaderField::kL4Src});
    oracle::StateReplay ref;
    bool ok = true;
    for (const auto& s : steps) {
      const auto pkt = fixtures::tcp(1, 2, static_cast<FieldValue>(s.key));
      switch (s.kind) {
        case oracle::LifecycleStep::kSet:
          table.set_state(pkt, pipeline::SetState{s.label, s.idle, s.hard, s.idle_rb, s.hard_rb},
                          s.at);
          ref.set(s.key, s.label, s.idle, s.hard, s.idle_rb, s.hard_rb, s.at);
          break;
        case oracle::LifecycleStep::kLookup:
          ++lookups;
          ok &= table.lookup(pkt, s.at) == ref.lookup(s.key, s.at);
          break;
        case oracle::LifecycleStep::kSweep:
          table.expire_due(s.at);
          ref.sweep(s.at);
          ok &= table.size() == ref.entries().size();
          break;
      }
    }
    mismatches += !ok;
  }
  return {mismatches == 0, "200 lifecycles, " + std::to_string(lookups) + " lookups, " +
                               std::to_string(mismatches) + " lifecycles disagree"};
}

Outcome criterion10() {
  bool pass = true;
  std::uint64_t probes = 0, returned = 0, back_to_zero = 0;
  for (std::uint64_t rate : {std::uint64_t{20}, std::uint64_t{200}}) {
    apps::ScenarioDoc doc = fixtures::norway();
    doc.failures.at(0).up_at.reset();
    doc.until = 10 * kSecond;
    expcli::RunParams p;
    p.rate = rate;
    const auto log = expcli::run_once(doc, p);
    for (const PacketRecord& pkt : log.packets) probes += pkt.is_copy();
    const auto all = reroute_hops(doc, log);
    for (std::size_t d = 0; d < all.size(); ++d) {
      const Label probe = apps::p_label(doc.demands[d].plans.at(0).failed);
      bool left_zero = false;
      for (const auto& pt : all[d]) {
        returned += pt.hop->tag_in == probe;
        if (pt.hop->state_before != kDefaultState || pt.hop->state_after != kDefaultState) {
          if (left_zero && pt.hop->state_after == kDefaultState) ++back_to_zero;
          left_zero = true;
        }
      }
      pass &= left_zero;
    }
  }
  pass &= probes > 0 && returned == 0 && back_to_zero == 0;
  return {pass, std::to_string(probes) + " probes sent, " + std::to_string(returned) +
                    " returned to the reroute node, " + std::to_string(back_to_zero) +
                    " transitions back to state 0"};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria = {
      criterion1, criterion2, criterion3, criterion4, criterion5,
      criterion6, criterion7, criterion8, criterion9, criterion10};
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %zu: %s\n", o.pass ? "PASS" : "FAIL", k + 1, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
