// SPDX-License-Identifier: Apache-2.0

#include "openstate/simnet/traffic.hpp"

namespace openstate::simnet {

namespace {

constexpr std::int64_t kPpm = 1'000'000;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

std::int64_t ceil_div(std::int64_t a, std::int64_t b) {
  return -floor_div(-a, b);
}

}  // namespace

SimTime grid_tick(std::uint64_t rate, SimTime anchor, std::uint32_t phase_ppm,
                  std::int64_t n) {
  if (rate == 0) throw ConfigError("grid rate must be positive");
  return anchor + floor_div(n * kPpm + static_cast<std::int64_t>(phase_ppm),
                            static_cast<std::int64_t>(rate));
}

std::int64_t first_tick_at_or_after(std::uint64_t rate, SimTime anchor,
                                    std::uint32_t phase_ppm, SimTime t) {
  if (rate == 0) throw ConfigError("grid rate must be positive");
  // floor((n*1e6 + p) / r) >= t - anchor  <=>  n*1e6 + p >= (t - anchor) * r
  const std::int64_t need = (t - anchor) * static_cast<std::int64_t>(rate) -
                            static_cast<std::int64_t>(phase_ppm);
  return ceil_div(need, kPpm);
}

}  // namespace openstate::simnet
