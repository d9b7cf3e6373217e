// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "openstate/apps/scenario_file.hpp"
#include "openstate/simnet/metrics.hpp"
#include "openstate/simnet/scenario.hpp"

namespace openstate::expcli {

enum class Mode : std::uint8_t { kOpenState, kOpenFlow };

std::string_view to_string(Mode mode);  // "os" / "of"
Mode parse_mode(std::string_view text);

// Per-run overrides of the scenario file.
struct RunParams {
  Mode mode = Mode::kOpenState;
  std::optional<Duration> rtt;
  std::optional<std::uint64_t> rate;  // every cbr and tcp_flows generator
  std::optional<std::uint64_t> seed;
  std::optional<Duration> proc_delay;
  std::optional<Duration> detection_delay;
};

// OS mode: stateful configs, no controller. OF mode: reactive tables and a
// controller channel with one-way delay rtt / 2. Configs are validated and
// any diagnostic is a ConfigError.
simnet::Scenario compile_scenario(const apps::ScenarioDoc& doc,
                                  const RunParams& params);

simnet::MetricsLog run_once(const apps::ScenarioDoc& doc, const RunParams& params);

struct SweepConfig {
  std::vector<std::uint64_t> rates;
  std::vector<Mode> modes = {Mode::kOpenState, Mode::kOpenFlow};
  std::vector<Duration> rtts = {0, 3 * kMillisecond, 6 * kMillisecond,
                                12 * kMillisecond};
  std::uint32_t reps = 1;
  std::uint64_t seed = 0;  // repetition r runs with seed + r
  std::optional<Duration> proc_delay;
  unsigned jobs = 0;  // 0: hardware concurrency
};

// Rates as "start:stop:step" (inclusive).
std::vector<std::uint64_t> parse_rates(std::string_view text);

struct ConsistencyRow {
  std::uint64_t rate = 0;
  Mode mode = Mode::kOpenState;
  Duration rtt = 0;
  std::uint32_t reps = 0;
  std::uint64_t flows = 0;
  double mean_processing_us = 0;
  double p95_processing_us = 0;
  std::uint64_t losses = 0;
};

struct FailureRow {
  std::uint64_t rate = 0;
  Mode mode = Mode::kOpenState;
  Duration rtt = 0;
  std::uint32_t reps = 0;
  std::uint64_t total_losses = 0;
  std::vector<std::uint64_t> per_demand_losses;
  std::optional<Duration> recovery_delay;
  std::optional<SimTime> restored_at;
};

// One row per (rate, mode, rtt), ordered by rate, then mode (os first), then
// rtt. Cells run in parallel; a cell that fails aborts the sweep.
std::vector<ConsistencyRow> run_consistency_sweep(const apps::ScenarioDoc& doc,
                                                  const SweepConfig& sweep);
std::vector<FailureRow> run_failure_sweep(const apps::ScenarioDoc& doc,
                                          const SweepConfig& sweep);

void write_consistency_csv(std::ostream& os, const std::vector<ConsistencyRow>& rows);
void write_failure_csv(std::ostream& os, const std::vector<FailureRow>& rows);

// Per-cell metrics used by the failure sweep, exposed for tests.
FailureRow summarize_failure_run(const apps::ScenarioDoc& doc, Mode mode,
                                 const simnet::MetricsLog& log);
// First-packet processing times of every TCP flow in the log.
std::vector<Duration> processing_times(const apps::ScenarioDoc& doc,
                                       const simnet::MetricsLog& log);

// Hop-by-hop text for every packet of the flow; consecutive packets that took
// the same path with the same tags and states are folded together. Throws
// UnknownFlow.
std::string emit_trace(const simnet::MetricsLog& log, std::uint64_t flow_id,
                       const std::function<std::string(Label)>& format_label = {});

}  // namespace openstate::expcli
