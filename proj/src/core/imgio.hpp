// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <variant>
#include <vector>

#include "error.hpp"

namespace lehopp {

/// Storage-domain RGB raster: row-major, interleaved, values in [0, 1].
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> data; // width * height * 3

  static Image filled(int width, int height, float value);

  float at(int x, int y, int c) const {
    return data[(static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x)) * 3 +
                static_cast<size_t>(c)];
  }
  float& at(int x, int y, int c) {
    return data[(static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x)) * 3 +
                static_cast<size_t>(c)];
  }
  size_t pixel_count() const { return static_cast<size_t>(width) * static_cast<size_t>(height); }
};

/// Standardized RGB raster: same layout as Image, values unbounded.
struct NormImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  static NormImage filled(int width, int height, float value);

  float at(int x, int y, int c) const {
    return data[(static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x)) * 3 +
                static_cast<size_t>(c)];
  }
  float& at(int x, int y, int c) {
    return data[(static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x)) * 3 +
                static_cast<size_t>(c)];
  }
  size_t pixel_count() const { return static_cast<size_t>(width) * static_cast<size_t>(height); }
};

/// Single-channel float raster (importance maps, depth maps).
struct ScalarMap {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  static ScalarMap filled(int width, int height, float value);

  float at(int x, int y) const {
    return data[static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x)];
  }
  float& at(int x, int y) {
    return data[static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x)];
  }
};

/// Binary raster; 1 = keep, 0 = prune.
struct BitMask {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> bits;

  static BitMask filled(int width, int height, uint8_t value);

  uint8_t at(int x, int y) const {
    return bits[static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x)];
  }
  uint8_t& at(int x, int y) {
    return bits[static_cast<size_t>(y) * static_cast<size_t>(width) + static_cast<size_t>(x)];
  }
  size_t kept_count() const;
  size_t pruned_count() const { return bits.size() - kept_count(); }
};

/// Per-channel standardization constants in the [0, 1] storage domain.
struct NormParams {
  std::array<float, 3> mean{0.485f, 0.456f, 0.406f};
  std::array<float, 3> stddev{0.229f, 0.224f, 0.225f};
};

NormImage preprocess(const Image& image, const NormParams& params);

/// Exact inverse of preprocess, clamped back into the [0, 1] storage domain.
Image depreprocess(const NormImage& image, const NormParams& params);

// --- netpbm codecs -------------------------------------------------------
//
// PPM: binary "P6", maxval 255, value = byte / 255.
// PFM: "Pf" (1 channel) / "PF" (3 channels), scale -1.0 (little endian),
//      scanlines stored bottom-up.
// PGM: binary "P5", maxval 255; byte 0 = prune, byte 255 = keep, anything
//      else is rejected as ambiguous.

Image read_ppm(const std::filesystem::path& path);
void write_ppm(const Image& image, const std::filesystem::path& path);

using PfmData = std::variant<ScalarMap, NormImage>;
PfmData read_pfm(const std::filesystem::path& path);
ScalarMap read_pfm_map(const std::filesystem::path& path);
void write_pfm(const ScalarMap& map, const std::filesystem::path& path);
void write_pfm(const NormImage& image, const std::filesystem::path& path);

BitMask read_pgm(const std::filesystem::path& path);
void write_pgm(const BitMask& mask, const std::filesystem::path& path);

} // namespace lehopp
