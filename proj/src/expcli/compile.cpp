// SPDX-License-Identifier: Apache-2.0

#include <charconv>

#include "openstate/apps/validate.hpp"
#include "openstate/baseline/reactive.hpp"
#include "openstate/expcli/experiment.hpp"
#include "openstate/simnet/simulator.hpp"

namespace openstate::expcli {

std::string_view to_string(Mode mode) {
  return mode == Mode::kOpenState ? "os" : "of";
}

Mode parse_mode(std::string_view text) {
  if (text == "os") return Mode::kOpenState;
  if (text == "of") return Mode::kOpenFlow;
  throw ConfigError("mode must be 'os' or 'of', got '" + std::string(text) + "'");
}

std::vector<std::uint64_t> parse_rates(std::string_view text) {
  std::uint64_t v[3] = {0, 0, 0};
  std::size_t pos = 0;
  for (int k = 0; k < 3; ++k) {
    const std::size_t end = k < 2 ? text.find(':', pos) : text.size();
    if (end == std::string_view::npos) {
      throw ConfigError("rates must look like start:stop:step");
    }
    auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + end, v[k]);
    if (ec != std::errc() || ptr != text.data() + end || end == pos) {
      throw ConfigError("rates must look like start:stop:step");
    }
    pos = end + 1;
  }
  if (v[0] == 0 || v[2] == 0 || v[1] < v[0]) {
    throw ConfigError("rates need 0 < start <= stop and a positive step");
  }
  std::vector<std::uint64_t> out;
  for (std::uint64_t r = v[0]; r <= v[1]; r += v[2]) out.push_back(r);
  return out;
}

simnet::Scenario compile_scenario(const apps::ScenarioDoc& doc,
                                  const RunParams& params) {
  simnet::Scenario s;
  s.id = doc.id;
  s.seed = params.seed.value_or(doc.seed);
  s.topology = doc.topology;
  s.traffic = doc.traffic;
  if (params.rate) {
    for (auto& g : s.traffic) {
      if (auto* c = std::get_if<simnet::Cbr>(&g.kind)) c->rate = *params.rate;
      if (auto* t = std::get_if<simnet::TcpFlowArrivals>(&g.kind)) t->rate = *params.rate;
    }
  }
  for (const apps::FailureSpec& f : doc.failures) {
    s.link_changes.push_back({f.a, f.b, false, f.down_at});
    if (f.up_at) s.link_changes.push_back({f.a, f.b, true, *f.up_at});
  }
  s.detection_delay = params.detection_delay.value_or(doc.detection_delay);
  s.switch_latency = doc.switch_latency;
  s.eager_timers = doc.eager_timers;

  if (params.mode == Mode::kOpenState) {
    s.switch_configs = apps::build_stateful_configs(doc);
  } else {
    apps::ConfigMap configs;
    std::vector<baseline::ReactiveConsistencyIntent> balancers;
    for (const apps::ConsistencySpec& c : doc.consistency) {
      baseline::ReactiveConsistencyIntent in{c.node, c.intent.out_ports,
                                             c.intent.destinations};
      apps::merge_configs(configs, {{c.node, baseline::build_reactive_consistency(in)}});
      balancers.push_back(std::move(in));
    }
    for (const apps::MacLearningSpec& m : doc.mac_learning) {
      apps::merge_configs(configs, {{m.node, apps::build_mac_learning(m.intent)}});
    }
    if (!doc.demands.empty()) {
      apps::merge_configs(configs,
                          baseline::build_reactive_recovery(doc.topology, doc.demands));
    }
    s.switch_configs = std::move(configs);

    simnet::ControllerChannel ch;
    const Duration rtt = params.rtt.value_or(doc.controller.rtt);
    if (rtt < 0) throw ConfigError("negative RTT");
    ch.one_way_delay = rtt / 2;
    ch.proc_delay = params.proc_delay.value_or(doc.controller.proc_delay);
    const simnet::Topology topo = doc.topology;
    const std::vector<apps::ProtectedDemand> demands = doc.demands;
    ch.make_app = [balancers, topo, demands](std::uint64_t seed)
        -> std::unique_ptr<simnet::ControllerApp> {
      std::unique_ptr<simnet::ControllerApp> lb, rec;
      if (!balancers.empty()) {
        lb = std::make_unique<baseline::ReactiveConsistencyApp>(balancers, seed);
      }
      if (!demands.empty()) {
        rec = std::make_unique<baseline::ReactiveRecoveryApp>(topo, demands);
      }
      return std::make_unique<baseline::ControllerMux>(std::move(lb), std::move(rec));
    };
    s.controller = std::move(ch);
  }

  const auto diags = apps::validate_config(s.topology, s.switch_configs);
  if (!diags.empty()) {
    std::string msg = "scenario " + doc.id + " (" + std::string(to_string(params.mode)) +
                      ") fails validation:";
    for (const auto& d : diags) msg += "\n  " + apps::format_diagnostic(d);
    throw ConfigError(msg);
  }
  return s;
}

simnet::MetricsLog run_once(const apps::ScenarioDoc& doc, const RunParams& params) {
  simnet::Simulator sim(compile_scenario(doc, params));
  return sim.run(doc.until);
}

}  // namespace openstate::expcli
