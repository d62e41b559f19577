#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace entropart {

std::vector<std::uint8_t> read_file_bytes(const std::string& path);

// Writes via a temp file in the same directory followed by an atomic rename,
// so interrupted runs never leave truncated outputs.
void write_file_atomic(const std::string& path, const void* data,
                       std::size_t size);
void write_file_atomic(const std::string& path, const std::string& text);

} // namespace entropart
