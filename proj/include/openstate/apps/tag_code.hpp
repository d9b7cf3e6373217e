// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "openstate/common.hpp"

namespace openstate::apps {

// F: element unreachable, detour in use. P: probe for the element.
enum class TagKind : std::uint8_t { kF, kP };

// Labels are 2 * element_id + kind bit, so F_i and P_i are adjacent and no
// two (kind, element) pairs share a label. Element 0 is rejected because F_0
// would collide with the default state.
struct TagCode {
  static Label encode(TagKind kind, std::uint64_t element_id);
  static std::pair<TagKind, std::uint64_t> decode(Label label);
};

inline Label f_label(std::uint64_t element) {
  return TagCode::encode(TagKind::kF, element);
}
inline Label p_label(std::uint64_t element) {
  return TagCode::encode(TagKind::kP, element);
}

// "F11", "P11"; label 0 prints as "0".
std::string format_tag(Label label);

}  // namespace openstate::apps
