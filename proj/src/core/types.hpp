#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace entropart {

using NodeId = std::uint32_t;
using EdgeIndex = std::uint64_t;
using ClassId = std::uint32_t;
using PartId = std::uint32_t;

// Thrown for semantically invalid inputs (bad config values, inconsistent
// datasets, out-of-range ids). Maps to exit code 2 at the CLI.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Thrown for filesystem and serialization failures. Maps to exit code 3.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace entropart
