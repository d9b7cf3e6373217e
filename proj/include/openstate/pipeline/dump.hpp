// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>

#include "openstate/pipeline/switch.hpp"

namespace openstate::pipeline {

std::string format_action(const Action& action);
std::string format_actions(const ActionList& actions);
std::string format_match(const Match& match);

// Diagnostic dump, one line per entry, tab-separated:
//
//   state <key> <label> idle=<us|-> hard=<us|-> idle_rb=<l> hard_rb=<l>
//   flow  <priority> <match> <actions> cookie=<n>
//   group <id> <kind> <bucket>;<bucket>...
//
// State lines are sorted by key, flow lines follow table order and group
// lines are sorted by id, so the output is stable across runs.
std::string dump_switch(const Switch& sw);
std::string dump_config(const SwitchConfig& config);

}  // namespace openstate::pipeline
