// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "imgio.hpp"

namespace lehopp {

/// Block-random pruning baseline. The raster is tiled into block x block
/// cells (border cells truncated); cells are pruned in a seeded random
/// order, the last one partially (row-major), so exactly
/// round(gamma * W * H) pixels are pruned.
BitMask random_block_mask(int width, int height, int block, double gamma, uint64_t seed);

/// 10 * log10(peak^2 / MSE) over all pixels and channels; returns +inf for
/// identical images.
double psnr(const Image& a, const Image& b, double peak = 1.0);

/// Mean local SSIM on the channel-mean luma, 11x11 Gaussian window
/// (sigma 1.5), evaluated where the window fits entirely.
double ssim(const Image& a, const Image& b, int window = 11, double k1 = 0.01, double k2 = 0.03,
            double peak = 1.0);

struct PixelRateReport {
  int views = 0;
  int width = 0;
  int height = 0;
  double fps = 0.0;
  double gamma = 0.0;
  double raw_mpx_s = 0.0;
  double pruned_mpx_s = 0.0;
  double limit_mpx_s = 0.0; // 32 Mpx/s at 30 fps, scaled linearly in fps
  bool within_limit = false;
};

PixelRateReport pixel_rate(int views, int width, int height, double fps, double gamma);

struct RDPoint {
  double rate_kbps = 0.0;
  double psnr_db = 0.0;
};

/// Bjontegaard delta rate in percent: cubic fit of log10(rate) over
/// quality, integrated over the overlapping quality interval.
double bd_rate(std::vector<RDPoint> anchor, std::vector<RDPoint> test);

/// Parses "label,rate_kbps,psnr_db" CSV; one curve per label.
std::map<std::string, std::vector<RDPoint>> read_rd_csv(const std::filesystem::path& path);

/// Convenience wrapper: each file must carry exactly one labeled curve.
double bd_rate_from_files(const std::filesystem::path& anchor_csv,
                          const std::filesystem::path& test_csv);

} // namespace lehopp
