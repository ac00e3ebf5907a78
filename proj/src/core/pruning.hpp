// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "imgio.hpp"
#include "inpaint.hpp"
#include "render.hpp"

namespace lehopp {

enum class MaskScope { per_view, global };
enum class FillPolicy { inpaint, hold_value };

struct PruneConfig {
  double gamma = 0.0; // fraction of pixels to prune, in [0, 1]
  MaskScope scope = MaskScope::per_view;
  int intra_period = 16; // frames sharing one mask
  FillPolicy fill = FillPolicy::inpaint;
};

/// Cheap stand-in for inpainting during importance computation: each pixel
/// becomes the mean of its 8 neighbors (replicate padding at borders).
NormImage inpaint_proxy(const NormImage& image);

/// Per-pixel importance: sum over channels of
/// |d loss / d pixel| * |pixel - inpaint_proxy(pixel)|.
ScalarMap importance_single(const std::array<ScalarMap, 3>& grad_abs, const NormImage& image,
                            const NormImage& proxy);

/// Running per-view sums of |gradient| across target renders. A view's
/// divisor is the number of renders it participated in, not the global
/// target count.
class AccumState {
public:
  void add_render(int view_id, const std::array<ScalarMap, 3>& grads);

  /// Per-view mean absolute gradient maps.
  std::map<int, std::array<ScalarMap, 3>> finalize() const;

  int render_count(int view_id) const;

private:
  struct PerView {
    int width = 0;
    int height = 0;
    std::array<std::vector<double>, 3> sum_abs;
    int renders = 0;
  };
  std::map<int, PerView> views_;
};

/// Element-wise sum of the per-frame maps of one intra-period. The addends
/// are combined in a value-sorted order per pixel, so the result is exactly
/// invariant under permutations of the frame list.
ScalarMap accumulate_frames(const std::vector<ScalarMap>& frame_maps, int intra_period);

/// Prunes exactly round(gamma * W * H) pixels: the ones of smallest
/// importance, ties broken by ascending (row, column).
BitMask build_mask(const ScalarMap& importance, double gamma);

/// Global variant: round(gamma * total pixels) smallest across all views
/// jointly, ties broken by (view index, row, column).
std::vector<BitMask> build_mask_global(const std::vector<ScalarMap>& importance, double gamma);

/// Kept pixels are untouched; pruned pixels are filled per policy
/// (hold_value writes the mid-gray constant 0.5).
Image apply_mask(const Image& image, const BitMask& mask, FillPolicy fill,
                 const InpaintConfig& cfg = {});

/// Eq-style first-order loss-change estimate at one pixel; numerically
/// identical to the importance value there.
double first_order_estimate(const std::array<ScalarMap, 3>& grad_abs, const NormImage& image,
                            const NormImage& proxy, int x, int y);

/// Spearman rank correlation with average ranks on ties. Errors on length
/// mismatch and on constant inputs (undefined statistic).
double rank_correlation(std::span<const double> a, std::span<const double> b);

/// One frame of a scene in the normalized domain, ready to render.
struct RenderSet {
  std::vector<NormImage> images;
  std::vector<ScalarMap> depths;
  std::vector<Camera> cameras;
  int width = 0;
  int height = 0;
};

/// Brute-force loss change: replaces pixel (x, y) of `view_id` with its
/// 8-neighbor proxy value, re-renders every listed target, and returns the
/// exact mean of (loss_after - loss_before).
double oracle_delta_loss(const RenderSet& set, int view_id, int x, int y,
                         const std::vector<int>& targets, const RenderConfig& cfg);

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  uint64_t count = 0;
};

/// 64 log-spaced bins over the positive importance range; zeros fall into
/// the first bin.
std::vector<HistogramBin> importance_histogram(const std::vector<ScalarMap>& maps, int bins = 64);

} // namespace lehopp
