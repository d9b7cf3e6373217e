// SPDX-License-Identifier: Apache-2.0

#include "openstate/apps/tag_code.hpp"

namespace openstate::apps {

Label TagCode::encode(TagKind kind, std::uint64_t element_id) {
  if (element_id == 0) throw ConfigError("tag element id 0 is reserved");
  if (element_id > (std::numeric_limits<Label>::max() - 1) / 2) {
    throw ConfigError("tag element id out of range");
  }
  return 2 * element_id + (kind == TagKind::kP ? 1 : 0);
}

std::pair<TagKind, std::uint64_t> TagCode::decode(Label label) {
  return {(label & 1) != 0 ? TagKind::kP : TagKind::kF, label / 2};
}

std::string format_tag(Label label) {
  if (label == 0) return "0";
  auto [kind, id] = TagCode::decode(label);
  return (kind == TagKind::kF ? "F" : "P") + std::to_string(id);
}

}  // namespace openstate::apps
