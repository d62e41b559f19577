#include "core/io_util.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "core/types.hpp"

namespace entropart {

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(size));
  if (size > 0 &&
      !in.read(reinterpret_cast<char*>(bytes.data()), size))
    throw IoError("failed to read file: " + path);
  return bytes;
}

void write_file_atomic(const std::string& path, const void* data,
                       std::size_t size) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path parent = target.parent_path();
  if (!parent.empty() && !fs::exists(parent))
    throw IoError("directory does not exist: " + parent.string());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open file for writing: " + tmp.string());
    if (size > 0) out.write(static_cast<const char*>(data), size);
    if (!out) throw IoError("failed to write file: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("failed to finalize file: " + path);
  }
}

void write_file_atomic(const std::string& path, const std::string& text) {
  write_file_atomic(path, text.data(), text.size());
}

} // namespace entropart
