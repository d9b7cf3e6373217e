// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "openstate/apps/tag_code.hpp"
#include "openstate/expcli/experiment.hpp"

namespace openstate::expcli {

namespace {

struct Cell {
  std::uint64_t rate;
  Mode mode;
  Duration rtt;
};

std::vector<Cell> cells_of(const SweepConfig& sweep) {
  if (sweep.rates.empty()) throw ConfigError("sweep needs at least one rate");
  if (sweep.modes.empty()) throw ConfigError("sweep needs at least one mode");
  if (sweep.rtts.empty()) throw ConfigError("sweep needs at least one RTT");
  if (sweep.reps == 0) throw ConfigError("repetitions must be at least 1");
  for (auto r : sweep.rates) {
    if (r == 0) throw ConfigError("rates must be positive");
  }
  std::vector<Mode> modes = sweep.modes;
  std::sort(modes.begin(), modes.end());
  modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
  std::vector<std::uint64_t> rates = sweep.rates;
  std::sort(rates.begin(), rates.end());
  rates.erase(std::unique(rates.begin(), rates.end()), rates.end());
  std::vector<Duration> rtts = sweep.rtts;
  std::sort(rtts.begin(), rtts.end());
  rtts.erase(std::unique(rtts.begin(), rtts.end()), rtts.end());
  std::vector<Cell> cells;
  for (auto rate : rates) {
    for (Mode m : modes) {
      for (Duration rtt : rtts) cells.push_back({rate, m, rtt});
    }
  }
  return cells;
}

// Runs fn over every cell on a small worker pool and returns results in cell
// order. The first exception wins; a cell left without a result is an error.
template <class Row, class Fn>
std::vector<Row> run_cells(const std::vector<Cell>& cells, unsigned jobs, Fn fn) {
  std::vector<std::optional<Row>> results(cells.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= cells.size()) return;
      try {
        results[k] = fn(cells[k]);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(cells.size()));
  std::vector<std::thread> pool;
  for (unsigned k = 1; k < jobs; ++k) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  std::vector<Row> rows;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (!results[k]) {
      throw Error("sweep cell " + std::to_string(k) + " produced no result");
    }
    rows.push_back(std::move(*results[k]));
  }
  return rows;
}

RunParams params_for(const Cell& c, const SweepConfig& sweep, std::uint32_t rep) {
  RunParams p;
  p.mode = c.mode;
  p.rtt = c.rtt;
  p.rate = c.rate;
  p.seed = sweep.seed + rep;
  p.proc_delay = sweep.proc_delay;
  return p;
}

std::string fixed3(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << v;
  return os.str();
}

}  // namespace

std::vector<Duration> processing_times(const apps::ScenarioDoc& doc,
                                       const simnet::MetricsLog& log) {
  std::map<std::uint64_t, Duration> first;
  for (const simnet::PacketRecord& p : log.packets) {
    if (p.is_copy() || first.contains(p.flow_id)) continue;
    if (!std::holds_alternative<simnet::TcpFlowArrivals>(doc.traffic[p.generator].kind)) {
      continue;
    }
    if (p.hops.empty() || p.hops.front().depart < 0) continue;
    first[p.flow_id] = p.hops.front().depart - p.hops.front().arrive;
  }
  std::vector<Duration> out;
  out.reserve(first.size());
  for (const auto& [flow, t] : first) out.push_back(t);
  return out;
}

std::vector<ConsistencyRow> run_consistency_sweep(const apps::ScenarioDoc& doc,
                                                  const SweepConfig& sweep) {
  const auto cells = cells_of(sweep);
  return run_cells<ConsistencyRow>(cells, sweep.jobs, [&](const Cell& c) {
    ConsistencyRow row{c.rate, c.mode, c.rtt, sweep.reps, 0, 0.0, 0.0, 0};
    std::vector<Duration> all;
    for (std::uint32_t rep = 0; rep < sweep.reps; ++rep) {
      const simnet::MetricsLog log = run_once(doc, params_for(c, sweep, rep));
      const auto times = processing_times(doc, log);
      all.insert(all.end(), times.begin(), times.end());
      row.losses += simnet::count_losses(log);
    }
    row.flows = all.size();
    if (!all.empty()) {
      std::sort(all.begin(), all.end());
      double sum = 0;
      for (Duration t : all) sum += static_cast<double>(t);
      row.mean_processing_us = sum / static_cast<double>(all.size());
      const std::size_t rank = static_cast<std::size_t>(
          std::ceil(0.95 * static_cast<double>(all.size())));
      row.p95_processing_us = static_cast<double>(all[std::max<std::size_t>(rank, 1) - 1]);
    }
    return row;
  });
}

FailureRow summarize_failure_run(const apps::ScenarioDoc& doc, Mode mode,
                                 const simnet::MetricsLog& log) {
  FailureRow row;
  row.mode = mode;
  row.per_demand_losses.assign(doc.demands.size(), 0);
  for (const simnet::PacketRecord& p : log.packets) {
    if (p.is_copy() || p.status != simnet::PacketStatus::kDropped) continue;
    ++row.total_losses;
    const auto& d = doc.traffic_demand.at(p.generator);
    if (d) ++row.per_demand_losses[*d];
  }

  std::optional<SimTime> repaired;
  for (const apps::FailureSpec& f : doc.failures) {
    if (f.up_at) repaired = std::max(repaired.value_or(*f.up_at), *f.up_at);
  }
  if (mode == Mode::kOpenState) {
    // The controller plays no part, so recovery is immediate by convention.
    row.recovery_delay = 0;
    if (repaired) {
      std::map<std::size_t, SimTime> restored;
      for (const simnet::PacketRecord& p : log.packets) {
        const auto& d = doc.traffic_demand.at(p.generator);
        if (!d) continue;
        for (const apps::FailurePlan& plan : doc.demands[*d].plans) {
          const Label probe = apps::p_label(plan.failed);
          for (const simnet::Hop& h : p.hops) {
            if (h.node == plan.reroute && h.arrive >= *repaired &&
                h.tag_in == probe && h.state_after == kDefaultState) {
              auto [it, fresh] = restored.try_emplace(*d, h.arrive);
              if (!fresh) it->second = std::min(it->second, h.arrive);
            }
          }
        }
      }
      for (const auto& [d, t] : restored) {
        row.restored_at = std::max(row.restored_at.value_or(t), t);
      }
    }
  } else {
    for (const simnet::RecoveryRecord& r : log.recoveries) {
      if (!r.port_up) {
        row.recovery_delay = std::max(row.recovery_delay.value_or(r.delay()), r.delay());
      } else {
        row.restored_at =
            std::max(row.restored_at.value_or(r.installed_at), r.installed_at);
      }
    }
  }
  return row;
}

std::vector<FailureRow> run_failure_sweep(const apps::ScenarioDoc& doc,
                                          const SweepConfig& sweep) {
  if (doc.demands.empty() || doc.failures.empty()) {
    throw ConfigError("failure sweep needs protected demands and a failure schedule");
  }
  const auto cells = cells_of(sweep);
  return run_cells<FailureRow>(cells, sweep.jobs, [&](const Cell& c) {
    FailureRow row;
    row.rate = c.rate;
    row.mode = c.mode;
    row.rtt = c.rtt;
    row.reps = sweep.reps;
    row.per_demand_losses.assign(doc.demands.size(), 0);
    for (std::uint32_t rep = 0; rep < sweep.reps; ++rep) {
      const FailureRow one =
          summarize_failure_run(doc, c.mode, run_once(doc, params_for(c, sweep, rep)));
      row.total_losses += one.total_losses;
      for (std::size_t k = 0; k < one.per_demand_losses.size(); ++k) {
        row.per_demand_losses[k] += one.per_demand_losses[k];
      }
      if (one.recovery_delay) {
        row.recovery_delay =
            std::max(row.recovery_delay.value_or(*one.recovery_delay), *one.recovery_delay);
      }
      if (one.restored_at) {
        row.restored_at = std::max(row.restored_at.value_or(*one.restored_at), *one.restored_at);
      }
    }
    return row;
  });
}

void write_consistency_csv(std::ostream& os, const std::vector<ConsistencyRow>& rows) {
  os << "rate,mode,rtt_us,reps,flows,mean_processing_time_us,"
        "p95_processing_time_us,losses\n";
  for (const auto& r : rows) {
    os << r.rate << ',' << to_string(r.mode) << ',' << r.rtt << ',' << r.reps << ','
       << r.flows << ',' << fixed3(r.mean_processing_us) << ','
       << fixed3(r.p95_processing_us) << ',' << r.losses << '\n';
  }
  os << "# processing time is modeled as switch latency plus RTT plus controller "
        "processing; the controller has no queue\n";
  os << "# of mode: packets of a flow arriving before its pinning rule are "
        "released by the controller on the already chosen port\n";
}

void write_failure_csv(std::ostream& os, const std::vector<FailureRow>& rows) {
  os << "rate,mode,rtt_us,reps,total_losses,per_demand_losses,"
        "recovery_delay_us,restored_at_us\n";
  for (const auto& r : rows) {
    os << r.rate << ',' << to_string(r.mode) << ',' << r.rtt << ',' << r.reps << ','
       << r.total_losses << ',';
    for (std::size_t k = 0; k < r.per_demand_losses.size(); ++k) {
      if (k) os << ';';
      os << r.per_demand_losses[k];
    }
    os << ',';
    if (r.recovery_delay) os << *r.recovery_delay;
    os << ',';
    if (r.restored_at) os << *r.restored_at;
    os << '\n';
  }
}

}  // namespace openstate::expcli
