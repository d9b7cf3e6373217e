// SPDX-License-Identifier: Apache-2.0
//
// openstate-exp: runs consistency and failure-recovery sweeps over a scenario
// file and writes CSV, or prints a hop-by-hop trace of one flow.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "openstate/expcli/experiment.hpp"

namespace {

using namespace openstate;

std::vector<Duration> parse_rtts(const std::string& text) {
  std::vector<Duration> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double ms = 0;
    try {
      ms = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || ms < 0) {
      throw ConfigError("bad RTT '" + item + "' (expected milliseconds, e.g. 0,3,6,12)");
    }
    out.push_back(std::llround(ms * 1000.0));
  }
  if (out.empty()) throw ConfigError("empty RTT list");
  return out;
}

std::vector<std::uint64_t> rates_of(const std::string& text) {
  if (text.find(':') != std::string::npos) return expcli::parse_rates(text);
  const std::string one = text + ":" + text + ":1";
  return expcli::parse_rates(one);
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_.open(path);
    if (!file_) throw Error("cannot open " + path + " for writing");
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stateful data plane experiments on a discrete-event network simulator"};
  std::string scenario_path;
  std::string mode_text;
  std::string rtt_text;
  std::string rates_text;
  std::optional<std::uint64_t> seed;
  std::uint32_t reps = 1;
  std::string out_path;
  std::optional<std::uint64_t> trace_flow;
  std::string packets_path;
  std::string sweep_kind;
  std::optional<double> proc_ms;
  unsigned jobs = 0;

  app.add_option("--scenario", scenario_path, "Scenario JSON file")->required();
  app.add_option("--mode", mode_text, "os or of (default: both for sweeps, os otherwise)")
      ->check(CLI::IsMember({"os", "of"}));
  app.add_option("--rtt-ms", rtt_text, "Comma-separated switch-controller RTTs in ms");
  app.add_option("--rates", rates_text, "start:stop:step, or a single rate");
  app.add_option("--seed", seed, "Base seed (default: the scenario's)");
  app.add_option("--reps", reps, "Repetitions per cell")->check(CLI::PositiveNumber);
  app.add_option("--out", out_path, "Output path (default: stdout)");
  app.add_option("--trace", trace_flow, "Print the hop-by-hop trace of this flow id");
  app.add_option("--packets", packets_path, "Run once and write one CSV row per packet");
  app.add_option("--sweep", sweep_kind, "consistency or failure (default: inferred)")
      ->check(CLI::IsMember({"consistency", "failure"}));
  app.add_option("--proc-ms", proc_ms, "Controller processing delay in ms");
  app.add_option("--jobs", jobs, "Parallel sweep jobs (0: one per core)");
  CLI11_PARSE(app, argc, argv);

  try {
    const apps::ScenarioDoc doc = apps::load_scenario_file(scenario_path);
    std::optional<Duration> proc;
    if (proc_ms) {
      if (*proc_ms < 0) throw ConfigError("--proc-ms must not be negative");
      proc = std::llround(*proc_ms * 1000.0);
    }
    const std::vector<Duration> rtts =
        rtt_text.empty() ? std::vector<Duration>{} : parse_rtts(rtt_text);
    const std::vector<std::uint64_t> rates =
        rates_text.empty() ? std::vector<std::uint64_t>{} : rates_of(rates_text);

    if (trace_flow || !packets_path.empty()) {
      if (rtts.size() > 1 || rates.size() > 1) {
        throw ConfigError("--trace and --packets take a single RTT and rate");
      }
      expcli::RunParams p;
      p.mode = mode_text.empty() ? expcli::Mode::kOpenState : expcli::parse_mode(mode_text);
      if (!rtts.empty()) p.rtt = rtts.front();
      if (!rates.empty()) p.rate = rates.front();
      p.seed = seed;
      p.proc_delay = proc;
      const simnet::MetricsLog log = expcli::run_once(doc, p);
      if (!packets_path.empty()) {
        Output out(packets_path);
        simnet::write_packet_csv(out.stream(), log);
      }
      if (trace_flow) {
        Output out(out_path);
        out.stream() << expcli::emit_trace(log, *trace_flow);
      }
      return 0;
    }

    expcli::SweepConfig sweep;
    if (rates.empty()) throw ConfigError("--rates is required for a sweep");
    sweep.rates = rates;
    if (!mode_text.empty()) sweep.modes = {expcli::parse_mode(mode_text)};
    if (!rtts.empty()) sweep.rtts = rtts;
    sweep.reps = reps;
    sweep.seed = seed.value_or(doc.seed);
    sweep.proc_delay = proc;
    sweep.jobs = jobs;
    if (sweep_kind.empty()) {
      sweep_kind = doc.demands.empty() || doc.failures.empty() ? "consistency" : "failure";
    }
    Output out(out_path);
    if (sweep_kind == "failure") {
      expcli::write_failure_csv(out.stream(), expcli::run_failure_sweep(doc, sweep));
    } else {
      expcli::write_consistency_csv(out.stream(), expcli::run_consistency_sweep(doc, sweep));
    }
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
