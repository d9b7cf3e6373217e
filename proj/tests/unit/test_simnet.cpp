// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <set>
#include <sstream>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "openstate/simnet/simulator.hpp"

using namespace openstate;
using namespace openstate::simnet;
using pipeline::ActionList;
using pipeline::FlowEntry;
using pipeline::HeaderField;
using pipeline::Match;
using pipeline::Output;

namespace {

// h100 - s1 - s2 - h200 with plain port forwarding in both directions.
// Link delays: host links 100 us, s1-s2 2 ms.
Scenario line() {
  Scenario s;
  s.id = "line";
  s.topology.add_switch(1);
  s.topology.add_switch(2);
  s.topology.add_host(100, 0x0A000001, 0x100);
  s.topology.add_host(200, 0x0A000002, 0x200);
  s.topology.add_link(100, 1, 100);  // s1 port 1
  s.topology.add_link(1, 2, 2000);   // s1 port 2, s2 port 1
  s.topology.add_link(2, 200, 100);  // s2 port 2
  s.switch_configs[1].flows.push_back(
      FlowEntry{Match{1}.where(HeaderField::kInPort, 1), {Output{2}}, 0});
  s.switch_configs[1].flows.push_back(
      FlowEntry{Match{1}.where(HeaderField::kInPort, 2), {Output{1}}, 0});
  s.switch_configs[2].flows.push_back(
      FlowEntry{Match{1}.where(HeaderField::kInPort, 1), {Output{2}}, 0});
  s.switch_configs[2].flows.push_back(
      FlowEntry{Match{1}.where(HeaderField::kInPort, 2), {Output{1}}, 0});
  return s;
}

TrafficGen cbr(std::uint64_t rate, SimTime stop = kNever) {
  TrafficGen g;
  g.kind = Cbr{rate};
  g.src = 100;
  g.dst = 200;
  g.header = fixtures::tcp(0x0A000001, 0x0A000002, 10000);
  g.header.meta.ingress_port.reset();
  g.stop = stop;
  return g;
}

std::string csv(const MetricsLog& log) {
  std::ostringstream os;
  write_packet_csv(os, log);
  return os.str();
}

// Echoes every packet-in back out of a fixed port.
class Forwarder : public ControllerApp {
 public:
  explicit Forwarder(PortId port) : port_(port) {}
  std::vector<ControllerAction> on_packet_in(NodeId node, const pipeline::Packet& packet,
                                             SimTime) override {
    return {PacketOut{node, packet, port_}};
  }
  std::vector<ControllerAction> on_port_status(NodeId, PortId, bool, SimTime) override {
    return {};
  }

 private:
  PortId port_;
};

}  // namespace

TEST_SUITE("topology") {
  TEST_CASE("ports count from one and links are symmetric") {
    Topology t;
    t.add_switch(1);
    t.add_switch(2);
    t.add_switch(3);
    const LinkId l = t.add_link(1, 2, 5);
    t.add_link(1, 3, 7);
    CHECK(t.port_toward(1, 2) == 1);
    CHECK(t.port_toward(1, 3) == 2);
    CHECK(t.port_toward(2, 1) == 1);
    CHECK(t.link_between(2, 1) == l);
    CHECK(t.peer(Endpoint{1, 2})->node == 3);
    CHECK(t.path_delay({2, 1, 3}) == 12);
    CHECK_THROWS_AS(t.path_delay({2, 3}), ConfigError);
    CHECK_THROWS_AS(t.port_toward(2, 3), ConfigError);
  }

  TEST_CASE("structural errors") {
    Topology t;
    t.add_switch(1);
    t.add_switch(2);
    t.add_host(9, 1, 1);
    CHECK_THROWS_AS(t.add_switch(1), ConfigError);
    CHECK_THROWS_AS(t.add_link(1, 1, 0), ConfigError);
    CHECK_THROWS_AS(t.add_link(1, 7, 0), ConfigError);
    CHECK_THROWS_AS(t.add_link(1, 2, -1), ConfigError);
    t.add_link(1, 2, 0, 4, 4);
    CHECK_THROWS_AS(t.add_link(2, 1, 0), ConfigError);
    t.add_link(9, 1, 0);
    CHECK_THROWS_AS(t.add_link(9, 2, 0), ConfigError);
    CHECK(t.attachment(9) == 1u);
    CHECK(t.host_of(1) == 9u);
  }
}

TEST_SUITE("traffic grid") {
  TEST_CASE("ticks agree with the independent grid") {
    for (std::uint64_t rate : {1u, 3u, 20u, 77u, 200u, 999u}) {
      for (std::uint32_t phase : {0u, 1u, 333333u, 999999u}) {
        for (SimTime anchor : {SimTime{-12345}, SimTime{0}, SimTime{1'000'000}}) {
          const auto ref = oracle::grid(rate, anchor, phase, 0, 3 * kSecond);
          std::vector<SimTime> got;
          for (std::int64_t n = first_tick_at_or_after(rate, anchor, phase, 0);; ++n) {
            const SimTime t = grid_tick(rate, anchor, phase, n);
            if (t >= 3 * kSecond) break;
            got.push_back(t);
          }
          CHECK(got == ref);
        }
      }
    }
  }
}

TEST_SUITE("simulator") {
  TEST_CASE("empty traffic gives an empty log") {
    const MetricsLog log = run(line(), kSecond);
    CHECK(log.packets.empty());
    CHECK(log.ctrl.empty());
  }

  TEST_CASE("healthy path latency is the sum of link delays") {
    Scenario s = line();
    s.traffic.push_back(cbr(100, kSecond));
    const MetricsLog log = run(s, 2 * kSecond);
    REQUIRE(log.generated() == 100);
    CHECK(log.delivered() == 100);
    for (const auto& p : log.packets) {
      CHECK(p.terminal_at - p.created_at == 2200);
      CHECK(p.terminal_node == 200);
      CHECK(format_hop_list(p) == "1:1>2 2:1>2 @200");
    }
  }

  TEST_CASE("switch latency adds per hop") {
    Scenario s = line();
    s.switch_latency = 50;
    s.traffic.push_back(cbr(10, kSecond));
    const MetricsLog log = run(s, 2 * kSecond);
    for (const auto& p : log.packets) CHECK(p.terminal_at - p.created_at == 2300);
  }

  TEST_CASE("reruns are byte identical") {
    Scenario s = line();
    s.traffic.push_back(cbr(333, kSecond));
    s.link_changes.push_back({1, 2, false, 400 * kMillisecond});
    s.link_changes.push_back({1, 2, true, 600 * kMillisecond});
    CHECK(csv(run(s, 2 * kSecond)) == csv(run(s, 2 * kSecond)));
  }

  TEST_CASE("jitter stays within bounds, keeps order and follows the seed") {
    Scenario s = line();
    TrafficGen g = cbr(100, kSecond);
    g.jitter = 4000;
    s.traffic.push_back(g);
    const MetricsLog a = run(s, 2 * kSecond);
    REQUIRE(a.packets.size() == 100);
    std::set<Duration> offsets;
    for (std::size_t n = 0; n < a.packets.size(); ++n) {
      const Duration off = a.packets[n].created_at - grid_tick(100, 0, 0, static_cast<std::int64_t>(n));
      CHECK(off >= 0);
      CHECK(off <= 4000);
      offsets.insert(off);
      if (n) CHECK(a.packets[n].created_at > a.packets[n - 1].created_at);
    }
    CHECK(offsets.size() > 50);
    CHECK(csv(a) == csv(run(s, 2 * kSecond)));
    s.seed = 1;
    CHECK(csv(a) != csv(run(s, 2 * kSecond)));
    s.traffic[0].jitter = 10000;
    CHECK_THROWS_AS(Simulator{s}, ConfigError);
    s.traffic[0].jitter = -1;
    CHECK_THROWS_AS(Simulator{s}, ConfigError);
  }

  TEST_CASE("conservation and causality") {
    Scenario s = line();
    s.traffic.push_back(cbr(250, kSecond));
    TrafficGen back = cbr(90, kSecond);
    std::swap(back.src, back.dst);
    s.traffic.push_back(back);
    s.link_changes.push_back({1, 2, false, 300 * kMillisecond});
    s.link_changes.push_back({1, 2, true, 310 * kMillisecond});
    const MetricsLog log = run(s, 3 * kSecond);
    CHECK(log.generated() == log.delivered() + log.dropped());
    std::map<std::uint64_t, std::pair<int, int>> per_flow;
    for (const auto& p : log.packets) {
      CHECK(p.status != PacketStatus::kInFlight);
      for (std::size_t k = 1; k < p.hops.size(); ++k) {
        CHECK(p.hops[k].arrive >= p.hops[k - 1].arrive + 2000);
      }
      ++per_flow[p.flow_id].first;
      per_flow[p.flow_id].second += p.status != PacketStatus::kInFlight;
    }
    for (const auto& [flow, c] : per_flow) CHECK(c.first == c.second);
    CHECK(log.dropped() > 0);
  }

  TEST_CASE("losses on a failed link match the arrival grid") {
    Scenario s = line();
    const SimTime t_f = 500 * kMillisecond + 37;
    s.detection_delay = 3 * kMillisecond;
    s.traffic.push_back(cbr(1000, kSecond));
    s.link_changes.push_back({1, 2, false, t_f});
    const MetricsLog log = run(s, 2 * kSecond);
    // Departures from s1 in [t_f - 2 ms, t_f) die on the link; later ones
    // until detection hit a down link; after detection, the port is down
    // and the plain Output still fails.
    const auto ticks = oracle::grid(1000, 0, 0, 0, kSecond);
    bool edge = false;
    const auto in_flight = oracle::count_in_window(ticks, 100, t_f - 2000, t_f, &edge);
    const auto after = oracle::count_in_window(ticks, 100, t_f, kNever, &edge);
    CHECK_FALSE(edge);
    std::uint64_t on_link = 0, down = 0;
    for (const auto& p : log.packets) {
      on_link += p.reason == DropReason::kInFlightOnFailedLink;
      down += p.reason == DropReason::kLinkDown;
    }
    CHECK(on_link == in_flight);
    CHECK(down == after);
    CHECK(count_losses(log) == in_flight + after);
    CHECK(count_losses(log, 0, t_f - 2200 - 1) == 0);
  }

  TEST_CASE("link status changes are idempotent and logged once") {
    Scenario s = line();
    s.link_changes.push_back({1, 2, false, 100});
    s.link_changes.push_back({2, 1, false, 200});
    s.link_changes.push_back({1, 2, true, 300});
    const MetricsLog log = run(s, kSecond);
    REQUIRE(log.link_events.size() == 2);
    CHECK(log.link_events[0].at == 100);
    CHECK_FALSE(log.link_events[0].up);
    CHECK(log.link_events[1].up);
  }

  TEST_CASE("ports see the change after the detection delay") {
    Scenario s = line();
    s.detection_delay = 10 * kMillisecond;
    Simulator sim(s);
    sim.inject_link_status(1, 2, false, kSecond);
    sim.run(kSecond + 10 * kMillisecond);
    CHECK_FALSE(sim.switch_at(1).port_up(2));
    CHECK_FALSE(sim.switch_at(2).port_up(1));
    CHECK(sim.switch_at(1).port_up(1));

  }

  TEST_CASE("fast-failover reacts exactly at the detection instant") {
    Scenario s = line();
    const SimTime t_f = 200 * kMillisecond + 250;
    s.detection_delay = 7 * kMillisecond;
    auto& c = s.switch_configs[1];
    c.flows.clear();
    c.flows.push_back(FlowEntry{Match{1}.where(HeaderField::kInPort, 1), {pipeline::ApplyGroup{1}}, 0});
    c.groups.push_back(pipeline::GroupEntry{
        1, pipeline::GroupKind::kFastFailover, {},
        {pipeline::Bucket{2, 1, {Output{2}}}, pipeline::Bucket{std::nullopt, 1, {pipeline::Drop{}}}}});
    s.traffic.push_back(cbr(1000, 400 * kMillisecond));
    s.link_changes.push_back({1, 2, false, t_f});
    const MetricsLog log = run(s, kSecond);
    const auto ticks = oracle::grid(1000, 0, 0, 0, 400 * kMillisecond);
    bool edge = false;
    const auto undetected =
        oracle::count_in_window(ticks, 100, t_f, t_f + 7 * kMillisecond, &edge);
    const auto detected = oracle::count_in_window(ticks, 100, t_f + 7 * kMillisecond, kNever, &edge);
    CHECK_FALSE(edge);
    std::uint64_t link_down = 0, dropped = 0;
    for (const auto& p : log.packets) {
      link_down += p.reason == DropReason::kLinkDown;
      dropped += p.reason == DropReason::kDropAction;
    }
    CHECK(link_down == undetected);
    CHECK(dropped == detected);
  }

  TEST_CASE("injection errors") {
    Simulator sim(line());
    CHECK_THROWS_AS(sim.inject_link_status(1, 200, false, 0), UnknownLink);
    CHECK_THROWS_AS(sim.inject_link_status(1, 2, false, -1), ConfigError);
    CHECK_THROWS_AS(sim.switch_at(100), ConfigError);
    sim.run(10);
    CHECK_THROWS_AS(sim.run(20), Error);
  }

  TEST_CASE("scenario validation") {
    Scenario s = line();
    s.switch_configs[100] = {};
    CHECK_THROWS_AS(Simulator{s}, ConfigError);
    s = line();
    TrafficGen g = cbr(10);
    g.src = 1;
    s.traffic.push_back(g);
    CHECK_THROWS_AS(Simulator{s}, ConfigError);
    s = line();
    s.detection_delay = -1;
    CHECK_THROWS_AS(Simulator{s}, ConfigError);
  }

  TEST_CASE("forwarding loops end at the hop limit") {
    Scenario s = line();
    s.switch_configs[2].flows.clear();
    s.switch_configs[2].flows.push_back(FlowEntry{Match{1}, {Output{1}}, 0});
    s.switch_configs[1].flows.clear();
    s.switch_configs[1].flows.push_back(FlowEntry{Match{1}, {Output{2}}, 0});
    s.traffic.push_back(cbr(1, kSecond));
    const MetricsLog log = run(s, 2 * kSecond);
    REQUIRE(log.packets.size() == 1);
    CHECK(log.packets[0].reason == DropReason::kHopLimit);
    CHECK(log.packets[0].hops.size() == kMaxHops);
  }

  TEST_CASE("tcp flow arrivals use a fresh l4 source per flow") {
    Scenario s = line();
    TrafficGen g = cbr(1);
    g.kind = TcpFlowArrivals{100, 50, 3, 1000, 20000};
    s.traffic.push_back(g);
    const MetricsLog log = run(s, 10 * kSecond);
    CHECK(log.generated() == 150);
    std::map<std::uint64_t, std::set<SimTime>> flows;
    for (const auto& p : log.packets) flows[p.flow_id].insert(p.created_at);
    CHECK(flows.size() == 50);
    for (const auto& [id, times] : flows) {
      CHECK(times.size() == 3);
      CHECK(*times.rbegin() - *times.begin() == 2000);
    }
  }

  TEST_CASE("processing time through a controller") {
    for (Duration rtt : {Duration{0}, 3 * kMillisecond, 12 * kMillisecond}) {
      Scenario s = line();
      s.switch_configs[1].flows.clear();
      s.switch_configs[1].miss_policy = pipeline::MissPolicy::kToController;
      ControllerChannel ch;
      ch.one_way_delay = rtt / 2;
      ch.proc_delay = kMillisecond;
      ch.make_app = [](std::uint64_t) { return std::make_unique<Forwarder>(2); };
      s.controller = ch;
      s.traffic.push_back(cbr(10, kSecond));
      const MetricsLog log = run(s, 2 * kSecond);
      CHECK(log.delivered() == 10);
      CHECK(measure_processing_time(log, flow_id_for(0, 0)) == rtt + kMillisecond);
      CHECK_THROWS_AS(measure_processing_time(log, 42), UnknownFlow);
      CHECK(log.ctrl.size() == 20);
    }
  }

  TEST_CASE("packet-ins without a controller are dropped") {
    Scenario s = line();
    s.switch_configs[1].flows.clear();
    s.switch_configs[1].miss_policy = pipeline::MissPolicy::kToController;
    s.traffic.push_back(cbr(10, kSecond));
    const MetricsLog log = run(s, 2 * kSecond);
    CHECK(log.dropped() == 10);
    CHECK(log.packets[0].reason == DropReason::kNoController);
  }

  TEST_CASE("packet csv header") {
    Scenario s = line();
    s.traffic.push_back(cbr(1, kSecond));
    const std::string out = csv(run(s, kSecond));
    CHECK(out.rfind("flow_id,created_at,status,drop_reason,hop_list\n", 0) == 0);
    CHECK(out.find("delivered") != std::string::npos);
  }

  TEST_CASE("summary row") {
    std::ostringstream os;
    write_summary_header(os);
    write_summary_row(os, RunSummary{"x", 1, 20, 3000, 4, 4000});
    CHECK(os.str() == "scenario_id,seed,rate,rtt,losses,recovery_delay\nx,1,20,3000,4,4000\n");
  }
}
