// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace openstate {

using NodeId = std::uint32_t;
using PortId = std::uint32_t;
using GroupId = std::uint32_t;
using LinkId = std::uint32_t;
using Label = std::uint64_t;
using FieldValue = std::uint64_t;

// Simulation time and durations are integral microseconds.
using SimTime = std::int64_t;
using Duration = std::int64_t;

constexpr Label kDefaultState = 0;
constexpr SimTime kNever = std::numeric_limits<SimTime>::max();

constexpr Duration kMillisecond = 1000;
constexpr Duration kSecond = 1000 * kMillisecond;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A scoped header field is absent from the packet.
class MissingField : public Error {
 public:
  using Error::Error;
};

// Action list cannot be applied to the packet (e.g. PopTag on untagged).
class MalformedAction : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class UnknownGroup : public Error {
 public:
  using Error::Error;
};

class EmptyGroup : public Error {
 public:
  using Error::Error;
};

class UnknownLink : public Error {
 public:
  using Error::Error;
};

class UnknownFlow : public Error {
 public:
  using Error::Error;
};

}  // namespace openstate
