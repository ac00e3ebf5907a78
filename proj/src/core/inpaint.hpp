// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "imgio.hpp"

namespace lehopp {

struct InpaintConfig {
  int radius = 3;        // fast-marching weighting neighborhood
  int max_iters = 10000; // diffusion reference
  double tol = 1e-6;     // diffusion reference
};

/// Grid distance from every pruned pixel to the nearest kept pixel,
/// marched over the 4-connected grid in increasing order (unit steps).
/// Kept pixels have distance 0.
ScalarMap fmm_distance(const BitMask& mask);

/// Fast-marching inpainter: pruned pixels are filled in increasing
/// distance order as a normalized weighted average of already-known pixels
/// within `radius`, with direction/distance/level-set weight factors.
/// Kept pixels pass through bit-identically.
Image telea_inpaint(const Image& image, const BitMask& mask, const InpaintConfig& cfg = {});

/// Reference inpainter: pruned pixels solve the discrete Laplace equation
/// with kept pixels as Dirichlet data, via Jacobi iteration.
Image diffusion_inpaint(const Image& image, const BitMask& mask, const InpaintConfig& cfg = {});

} // namespace lehopp
