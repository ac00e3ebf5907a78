// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "geometry.hpp"
#include "imgio.hpp"

namespace lehopp {

struct RenderConfig {
  int n_src = 9;
  double angle_weight = 1.0;    // alpha
  double distance_weight = 1.0; // beta
  double visibility_tol = 0.01; // relative depth tolerance tau
};

struct ViewSelection {
  int target_id = -1;
  std::vector<int> source_ids; // ordered by distance, nearest first
};

/// The n_src candidates nearest to the target by camera-center distance,
/// ties broken by ascending view id. Fewer candidates than n_src is fine.
ViewSelection select_sources(int target_id, const std::vector<Camera>& all, int n_src);

/// One source view in the normalized color domain.
struct SourceView {
  int view_id = -1;
  const NormImage* image = nullptr;
  const ScalarMap* depth = nullptr;
  Camera camera;
};

struct TargetGeometry {
  Camera camera;
  const ScalarMap* depth = nullptr; // ground-truth depth of the target view
  int width = 0;
  int height = 0;
};

/// One source's contribution to one target pixel: four bilinear taps into
/// the source raster plus the normalized geometric blend weight.
struct BlendTap {
  int source_index = 0; // index into the sources vector
  int pixel[4] = {0, 0, 0, 0};
  float tap_weight[4] = {0.f, 0.f, 0.f, 0.f};
  float blend_weight = 0.f;
};

struct RenderResult {
  NormImage image;
  BitMask hole_mask; // 1 where at least one visible source contributed
  std::vector<int> source_ids;
  std::vector<std::pair<int, int>> source_dims;
  std::vector<uint32_t> cache_offsets; // per target pixel, into cache_taps
  std::vector<BlendTap> cache_taps;
};

/// Depth-guided reprojection blend. The output color is linear in the
/// source pixel values: blend weights depend only on geometry.
RenderResult forward_render(const std::vector<SourceView>& sources, const TargetGeometry& target,
                            const RenderConfig& cfg);

/// Mean squared error over pixels where mask = 1, all three channels.
double mse_loss(const NormImage& rendered, const NormImage& reference, const BitMask& mask);

/// Exact gradient of mse_loss(forward_render(...), reference) with respect
/// to every source pixel channel. Index [k][c] is d loss / d source_k
/// channel c. Accumulation order is fixed (target pixels row-major), so
/// results are bit-reproducible.
std::vector<std::array<ScalarMap, 3>> backward_render(const RenderResult& result,
                                                      const NormImage& reference);

} // namespace lehopp
