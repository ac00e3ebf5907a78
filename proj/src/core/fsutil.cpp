// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#include "fsutil.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <system_error>

#include "error.hpp"

namespace lehopp {

void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) {
    ensure_directory(path.parent_path());
  }
  // Temporary must live on the same filesystem for rename to be atomic.
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(out.good(), Errc::io, "cannot open for writing: " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    require(out.good(), Errc::io, "write failed: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(Errc::io, "rename failed for " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), Errc::io, "cannot open: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  require(!in.bad(), Errc::io, "read failed: " + path.string());
  return bytes;
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec && std::filesystem::is_directory(dir), Errc::io,
          "cannot create directory: " + dir.string());
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

std::string format_double_fixed(double value, int precision) {
  char buf[512];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::fixed, precision);
  if (res.ec != std::errc{}) {
    return format_double(value);
  }
  return std::string(buf, res.ptr);
}

} // namespace lehopp
