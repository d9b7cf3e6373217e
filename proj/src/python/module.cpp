// SPDX-License-Identifier: Apache-2.0

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "openstate/apps/tag_code.hpp"
#include "openstate/apps/validate.hpp"
#include "openstate/baseline/reactive.hpp"
#include "openstate/expcli/experiment.hpp"
#include "openstate/pipeline/dump.hpp"
#include "openstate/simnet/simulator.hpp"

namespace py = pybind11;
using namespace openstate;

namespace {

Duration ms_to_us(double ms) { return static_cast<Duration>(std::llround(ms * 1000.0)); }

expcli::RunParams params(const std::string& mode, std::optional<double> rtt_ms,
                         std::optional<std::uint64_t> rate, std::optional<std::uint64_t> seed,
                         std::optional<double> proc_ms) {
  expcli::RunParams p;
  p.mode = expcli::parse_mode(mode);
  if (rtt_ms) p.rtt = ms_to_us(*rtt_ms);
  p.rate = rate;
  p.seed = seed;
  if (proc_ms) p.proc_delay = ms_to_us(*proc_ms);
  return p;
}

expcli::SweepConfig sweep_config(const std::vector<std::uint64_t>& rates,
                                 const std::vector<double>& rtts_ms,
                                 const std::vector<std::string>& modes, std::uint32_t reps,
                                 std::uint64_t seed, unsigned jobs) {
  expcli::SweepConfig s;
  s.rates = rates;
  s.rtts.clear();
  for (double r : rtts_ms) s.rtts.push_back(ms_to_us(r));
  s.modes.clear();
  for (const auto& m : modes) s.modes.push_back(expcli::parse_mode(m));
  s.reps = reps;
  s.seed = seed;
  s.jobs = jobs;
  return s;
}

py::dict packet_dict(const simnet::PacketRecord& p) {
  py::dict d;
  d["packet_id"] = p.packet_id;
  d["flow_id"] = p.flow_id;
  d["generator"] = p.generator;
  d["parent"] = p.parent;
  d["created_at"] = p.created_at;
  d["status"] = std::string(simnet::to_string(p.status));
  d["reason"] = std::string(simnet::to_string(p.reason));
  d["terminal_at"] = p.terminal_at;
  d["terminal_node"] = p.terminal_node;
  d["tagged_on_delivery"] = p.tagged_on_delivery;
  std::vector<NodeId> path;
  for (const auto& h : p.hops) path.push_back(h.node);
  d["path"] = path;
  return d;
}

// Keeps the document alongside the log so summaries can refer back to it.
struct Run {
  std::shared_ptr<apps::ScenarioDoc> doc;
  expcli::Mode mode;
  simnet::MetricsLog log;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stateful data-plane pipeline and discrete-event network simulator";

  // Translators registered later are tried first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<UnknownFlow>(m, "UnknownFlow", PyExc_KeyError);

  m.def("f_label", &apps::f_label, py::arg("element"));
  m.def("p_label", &apps::p_label, py::arg("element"));
  m.def("format_tag", &apps::format_tag, py::arg("label"));
  m.def("parse_rates", [](const std::string& text) { return expcli::parse_rates(text); },
        py::arg("text"));

  py::class_<apps::ScenarioDoc, std::shared_ptr<apps::ScenarioDoc>>(m, "Scenario")
      .def_static(
          "load",
          [](const std::filesystem::path& path) {
            return std::make_shared<apps::ScenarioDoc>(apps::load_scenario_file(path));
          },
          py::arg("path"))
      .def_static(
          "parse",
          [](const std::string& text, const std::filesystem::path& base_dir) {
            return std::make_shared<apps::ScenarioDoc>(apps::parse_scenario(text, base_dir));
          },
          py::arg("text"), py::arg("base_dir") = std::filesystem::path())
      .def_readonly("id", &apps::ScenarioDoc::id)
      .def_readonly("seed", &apps::ScenarioDoc::seed)
      .def_readonly("until_us", &apps::ScenarioDoc::until)
      .def_property_readonly("demand_count",
                             [](const apps::ScenarioDoc& d) { return d.demands.size(); })
      .def_property_readonly("generator_count",
                             [](const apps::ScenarioDoc& d) { return d.traffic.size(); })
      .def_property_readonly("switches",
                             [](const apps::ScenarioDoc& d) {
                               std::vector<NodeId> out;
                               for (const auto& [id, n] : d.topology.nodes()) {
                                 if (n.kind == simnet::NodeKind::kSwitch) out.push_back(id);
                               }
                               return out;
                             })
      .def(
          "config_dump",
          [](const apps::ScenarioDoc& d, const std::string& mode) {
            const auto s = expcli::compile_scenario(d, params(mode, 0.0, {}, {}, {}));
            std::map<NodeId, std::string> out;
            for (const auto& [node, c] : s.switch_configs) out[node] = pipeline::dump_config(c);
            return out;
          },
          py::arg("mode") = "os", "Tab-separated table dump per switch.")
      .def(
          "validate",
          [](const apps::ScenarioDoc& d) {
            std::vector<std::string> out;
            for (const auto& diag :
                 apps::validate_config(d.topology, apps::build_stateful_configs(d))) {
              out.push_back(apps::format_diagnostic(diag));
            }
            return out;
          },
          "Static diagnostics of the stateful configuration; empty when clean.");

  py::class_<Run>(m, "Run")
      .def_property_readonly("generated", [](const Run& r) { return r.log.generated(); })
      .def_property_readonly("delivered", [](const Run& r) { return r.log.delivered(); })
      .def_property_readonly("dropped", [](const Run& r) { return r.log.dropped(); })
      .def_property_readonly("losses", [](const Run& r) { return simnet::count_losses(r.log); })
      .def_property_readonly("ctrl_messages", [](const Run& r) { return r.log.ctrl.size(); })
      .def_property_readonly("notes", [](const Run& r) { return r.log.notes; })
      .def_property_readonly("recovery_delays",
                             [](const Run& r) {
                               std::vector<Duration> out;
                               for (const auto& rec : r.log.recoveries) out.push_back(rec.delay());
                               return out;
                             })
      .def("packets",
           [](const Run& r) {
             py::list out;
             for (const auto& p : r.log.packets) out.append(packet_dict(p));
             return out;
           })
      .def("packets_csv",
           [](const Run& r) {
             std::ostringstream os;
             simnet::write_packet_csv(os, r.log);
             return os.str();
           })
      .def(
          "trace",
          [](const Run& r, std::uint64_t flow_id) { return expcli::emit_trace(r.log, flow_id); },
          py::arg("flow_id"))
      .def("failure_summary", [](const Run& r) {
        const auto row = expcli::summarize_failure_run(*r.doc, r.mode, r.log);
        py::dict d;
        d["total_losses"] = row.total_losses;
        d["per_demand_losses"] = row.per_demand_losses;
        d["recovery_delay_us"] = row.recovery_delay;
        d["restored_at_us"] = row.restored_at;
        return d;
      });

  m.def(
      "run",
      [](std::shared_ptr<apps::ScenarioDoc> doc, const std::string& mode,
         std::optional<double> rtt_ms, std::optional<std::uint64_t> rate,
         std::optional<std::uint64_t> seed, std::optional<double> proc_ms) {
        const auto p = params(mode, rtt_ms, rate, seed, proc_ms);
        simnet::MetricsLog log;
        {
          py::gil_scoped_release release;
          log = expcli::run_once(*doc, p);
        }
        return Run{std::move(doc), p.mode, std::move(log)};
      },
      py::arg("scenario"), py::arg("mode") = "os", py::arg("rtt_ms") = py::none(),
      py::arg("rate") = py::none(), py::arg("seed") = py::none(),
      py::arg("proc_ms") = py::none());

  m.def(
      "failure_sweep",
      [](const apps::ScenarioDoc& doc, const std::vector<std::uint64_t>& rates,
         const std::vector<double>& rtts_ms, const std::vector<std::string>& modes,
         std::uint32_t reps, std::uint64_t seed, unsigned jobs) {
        const auto cfg = sweep_config(rates, rtts_ms, modes, reps, seed, jobs);
        std::vector<expcli::FailureRow> rows;
        {
          py::gil_scoped_release release;
          rows = expcli::run_failure_sweep(doc, cfg);
        }
        std::ostringstream os;
        expcli::write_failure_csv(os, rows);
        return os.str();
      },
      py::arg("scenario"), py::arg("rates"), py::arg("rtts_ms") = std::vector<double>{0, 3, 6, 12},
      py::arg("modes") = std::vector<std::string>{"os", "of"}, py::arg("reps") = 1,
      py::arg("seed") = 0, py::arg("jobs") = 0, "Runs the sweep and returns its CSV text.");

  m.def(
      "consistency_sweep",
      [](const apps::ScenarioDoc& doc, const std::vector<std::uint64_t>& rates,
         const std::vector<double>& rtts_ms, const std::vector<std::string>& modes,
         std::uint32_t reps, std::uint64_t seed, unsigned jobs) {
        const auto cfg = sweep_config(rates, rtts_ms, modes, reps, seed, jobs);
        std::vector<expcli::ConsistencyRow> rows;
        {
          py::gil_scoped_release release;
          rows = expcli::run_consistency_sweep(doc, cfg);
        }
        std::ostringstream os;
        expcli::write_consistency_csv(os, rows);
        return os.str();
      },
      py::arg("scenario"), py::arg("rates"), py::arg("rtts_ms") = std::vector<double>{0, 3, 6, 12},
      py::arg("modes") = std::vector<std::string>{"os", "of"}, py::arg("reps") = 1,
      py::arg("seed") = 0, py::arg("jobs") = 0, "Runs the sweep and returns its CSV text.");
}
