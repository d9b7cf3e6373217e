// SPDX-License-Identifier: Apache-2.0

#include "openstate/pipeline/packet.hpp"

#include <string>

namespace openstate::pipeline {

namespace {

constexpr std::array<std::string_view, kHeaderFieldCount> kFieldNames = {
    "eth_src", "eth_dst", "ip_src",    "ip_dst", "ip_proto",
    "l4_src",  "l4_dst",  "tag_label", "in_port",
};

}  // namespace

std::string_view to_string(HeaderField field) {
  return kFieldNames[static_cast<std::size_t>(field)];
}

std::optional<HeaderField> parse_header_field(std::string_view name) {
  for (std::size_t i = 0; i < kFieldNames.size(); ++i) {
    if (kFieldNames[i] == name) return static_cast<HeaderField>(i);
  }
  return std::nullopt;
}

std::optional<FieldValue> Packet::get(HeaderField field) const {
  if (field == HeaderField::kInPort) {
    if (!meta.ingress_port) return std::nullopt;
    return static_cast<FieldValue>(*meta.ingress_port);
  }
  return fields_[static_cast<std::size_t>(field)];
}

void Packet::set(HeaderField field, FieldValue value) {
  if (field == HeaderField::kInPort) {
    meta.ingress_port = static_cast<PortId>(value);
    return;
  }
  fields_[static_cast<std::size_t>(field)] = value;
}

void Packet::clear(HeaderField field) {
  if (field == HeaderField::kInPort) {
    meta.ingress_port.reset();
    return;
  }
  fields_[static_cast<std::size_t>(field)].reset();
}

void Packet::push_tag(Label label) {
  if (has_tag()) {
    throw MalformedAction("push_tag on a packet already tagged with " +
                          std::to_string(*tag()));
  }
  fields_[tag_index()] = label;
}

void Packet::pop_tag() {
  if (!has_tag()) throw MalformedAction("pop_tag on an untagged packet");
  fields_[tag_index()].reset();
}

}  // namespace openstate::pipeline
