// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <unistd.h>

#include <filesystem>
#include <string>

#include "rng.hpp"
#include "scenegen.hpp"

namespace lehopp::test {

/// Fresh directory under the system temp root, removed on destruction.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("lehopp_" + tag + "_" + std::to_string(++counter) + "_" +
             std::to_string(static_cast<long long>(::getpid())));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

/// Deterministic RGB noise image in [0, 1], quantized to 8 bits so PPM
/// round-trips are byte-exact.
inline Image noise_image(int width, int height, uint64_t seed) {
  SplitMix64 rng(seed);
  Image img = Image::filled(width, height, 0.0f);
  for (float& v : img.data) {
    v = static_cast<float>(rng.next_below(256)) / 255.0f;
  }
  return img;
}

inline NormImage noise_norm_image(int width, int height, uint64_t seed, float scale = 1.0f) {
  SplitMix64 rng(seed);
  NormImage img = NormImage::filled(width, height, 0.0f);
  for (float& v : img.data) {
    v = scale * (static_cast<float>(rng.next_double()) * 2.0f - 1.0f);
  }
  return img;
}

} // namespace lehopp::test
