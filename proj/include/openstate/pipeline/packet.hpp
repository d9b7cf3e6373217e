// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "openstate/common.hpp"

namespace openstate::pipeline {

// Header fields a scope or a match may refer to. Values are opaque
// fixed-width integers; no real protocol parsing happens anywhere.
enum class HeaderField : std::uint8_t {
  kEthSrc,
  kEthDst,
  kIpSrc,
  kIpDst,
  kIpProto,
  kL4Src,
  kL4Dst,
  kTagLabel,
  kInPort,
};

constexpr std::size_t kHeaderFieldCount = 9;

std::string_view to_string(HeaderField field);
std::optional<HeaderField> parse_header_field(std::string_view name);

struct PacketMeta {
  std::optional<PortId> ingress_port;
  SimTime created_at = 0;
  std::uint64_t flow_id = 0;
  std::uint64_t packet_id = 0;
};

class Packet {
 public:
  Packet() = default;

  // kInPort reads meta.ingress_port; kTagLabel reads the single-level tag.
  std::optional<FieldValue> get(HeaderField field) const;
  void set(HeaderField field, FieldValue value);
  void clear(HeaderField field);

  bool has_tag() const { return fields_[tag_index()].has_value(); }
  std::optional<Label> tag() const { return fields_[tag_index()]; }
  // Throws MalformedAction when a tag is already present.
  void push_tag(Label label);
  // Throws MalformedAction on an untagged packet.
  void pop_tag();

  bool operator==(const Packet&) const = default;

  PacketMeta meta;

 private:
  static constexpr std::size_t tag_index() {
    return static_cast<std::size_t>(HeaderField::kTagLabel);
  }
  // All fields except kInPort, which lives in meta.
  std::array<std::optional<FieldValue>, kHeaderFieldCount - 1> fields_{};
};

}  // namespace openstate::pipeline
