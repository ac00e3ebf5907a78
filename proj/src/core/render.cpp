// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#include "render.hpp"

#include <algorithm>
#include <cmath>

namespace lehopp {

ViewSelection select_sources(int target_id, const std::vector<Camera>& all, int n_src) {
  require(target_id >= 0 && target_id < static_cast<int>(all.size()), Errc::invalid_argument,
          "target id out of range");
  require(all.size() >= 2, Errc::empty_selection, "no source candidates besides the target");
  require(n_src >= 1, Errc::invalid_argument, "n_src must be positive");

  const Vec3 target_center = all[static_cast<size_t>(target_id)].center();
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(all.size() - 1);
  for (int id = 0; id < static_cast<int>(all.size()); ++id) {
    if (id == target_id) {
      continue;
    }
    ranked.emplace_back(norm(all[static_cast<size_t>(id)].center() - target_center), id);
  }
  std::sort(ranked.begin(), ranked.end());

  ViewSelection sel;
  sel.target_id = target_id;
  const size_t take = std::min(ranked.size(), static_cast<size_t>(n_src));
  for (size_t i = 0; i < take; ++i) {
    sel.source_ids.push_back(ranked[i].second);
  }
  return sel;
}

namespace {

struct Taps {
  int px[4];
  double w[4];
};

// Bilinear footprint at continuous pixel position (u, v); taps are clamped
// to the raster so border samples replicate edge pixels.
Taps bilinear_taps(double u, double v, int width, int height) {
  const double xf = u - 0.5;
  const double yf = v - 0.5;
  const double x_floor = std::floor(xf);
  const double y_floor = std::floor(yf);
  const double ax = xf - x_floor;
  const double ay = yf - y_floor;
  const int x0 = std::clamp(static_cast<int>(x_floor), 0, width - 1);
  const int y0 = std::clamp(static_cast<int>(y_floor), 0, height - 1);
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  Taps t;
  t.px[0] = y0 * width + x0;
  t.px[1] = y0 * width + x1;
  t.px[2] = y1 * width + x0;
  t.px[3] = y1 * width + x1;
  t.w[0] = (1.0 - ax) * (1.0 - ay);
  t.w[1] = ax * (1.0 - ay);
  t.w[2] = (1.0 - ax) * ay;
  t.w[3] = ax * ay;
  return t;
}

} // namespace

RenderResult forward_render(const std::vector<SourceView>& sources, const TargetGeometry& target,
                            const RenderConfig& cfg) {
  require(!sources.empty(), Errc::empty_selection, "forward_render needs at least one source");
  require(target.depth != nullptr && target.depth->width == target.width &&
              target.depth->height == target.height,
          Errc::shape_mismatch, "target depth does not match the target raster");
  for (const SourceView& s : sources) {
    require(s.image != nullptr && s.depth != nullptr, Errc::invalid_argument,
            "source view missing image or depth");
    require(s.image->width == s.depth->width && s.image->height == s.depth->height,
            Errc::shape_mismatch, "source image and depth disagree on dimensions");
  }

  RenderResult out;
  out.image = NormImage::filled(target.width, target.height, 0.0f);
  out.hole_mask = BitMask::filled(target.width, target.height, 0);
  out.source_ids.reserve(sources.size());
  for (const SourceView& s : sources) {
    out.source_ids.push_back(s.view_id);
    out.source_dims.emplace_back(s.image->width, s.image->height);
  }
  out.cache_offsets.assign(static_cast<size_t>(target.width) * target.height + 1, 0);

  const Vec3 target_center = target.camera.center();

  struct Contribution {
    int source_index;
    Taps taps;
    double raw_weight;
  };
  std::vector<Contribution> contribs;
  contribs.reserve(sources.size());

  for (int y = 0; y < target.height; ++y) {
    for (int x = 0; x < target.width; ++x) {
      const size_t pixel = static_cast<size_t>(y) * target.width + static_cast<size_t>(x);
      out.cache_offsets[pixel] = static_cast<uint32_t>(out.cache_taps.size());

      const double depth = target.depth->at(x, y);
      if (!(depth > 0.0)) {
        continue; // no geometry under this target pixel
      }
      const Vec3 world = target.camera.unproject(x + 0.5, y + 0.5, depth);

      contribs.clear();
      double weight_sum = 0.0;
      for (size_t k = 0; k < sources.size(); ++k) {
        const SourceView& src = sources[k];
        double u;
        double v;
        double z;
        if (!src.camera.project(world, u, v, z)) {
          continue;
        }
        const int sw = src.image->width;
        const int sh = src.image->height;
        if (u < 0.5 || u > sw - 0.5 || v < 0.5 || v > sh - 0.5) {
          continue; // footprint would leave the source raster
        }
        const Taps taps = bilinear_taps(u, v, sw, sh);
        double sampled_depth = 0.0;
        bool depth_valid = true;
        for (int i = 0; i < 4; ++i) {
          const float d = src.depth->data[static_cast<size_t>(taps.px[i])];
          if (!(d > 0.0f)) {
            depth_valid = false; // footprint touches a no-hit sentinel
            break;
          }
          sampled_depth += taps.w[i] * d;
        }
        if (!depth_valid || std::abs(z - sampled_depth) > cfg.visibility_tol * z) {
          continue; // occluded in this source
        }
        const Vec3 src_center = src.camera.center();
        const Vec3 ray_t = world - target_center;
        const Vec3 ray_s = world - src_center;
        const double angle = std::atan2(norm(cross(ray_t, ray_s)), dot(ray_t, ray_s));
        const double distance = norm(src_center - target_center);
        const double w =
            std::exp(-cfg.angle_weight * angle - cfg.distance_weight * distance);
        contribs.push_back({static_cast<int>(k), taps, w});
        weight_sum += w;
      }

      if (contribs.empty() || weight_sum <= 0.0) {
        continue;
      }
      out.hole_mask.bits[pixel] = 1;

      double color[3] = {0.0, 0.0, 0.0};
      for (const Contribution& c : contribs) {
        const double w = c.raw_weight / weight_sum;
        const SourceView& src = sources[static_cast<size_t>(c.source_index)];
        for (int i = 0; i < 4; ++i) {
          const size_t base = static_cast<size_t>(c.taps.px[i]) * 3;
          const double tw = w * c.taps.w[i];
          color[0] += tw * src.image->data[base + 0];
          color[1] += tw * src.image->data[base + 1];
          color[2] += tw * src.image->data[base + 2];
        }
        BlendTap tap;
        tap.source_index = c.source_index;
        for (int i = 0; i < 4; ++i) {
          tap.pixel[i] = c.taps.px[i];
          tap.tap_weight[i] = static_cast<float>(c.taps.w[i]);
        }
        tap.blend_weight = static_cast<float>(w);
        out.cache_taps.push_back(tap);
      }
      out.image.data[pixel * 3 + 0] = static_cast<float>(color[0]);
      out.image.data[pixel * 3 + 1] = static_cast<float>(color[1]);
      out.image.data[pixel * 3 + 2] = static_cast<float>(color[2]);
    }
  }
  out.cache_offsets.back() = static_cast<uint32_t>(out.cache_taps.size());
  return out;
}

double mse_loss(const NormImage& rendered, const NormImage& reference, const BitMask& mask) {
  require(rendered.width == reference.width && rendered.height == reference.height,
          Errc::shape_mismatch, "loss operands disagree on dimensions");
  require(rendered.width == mask.width && rendered.height == mask.height, Errc::shape_mismatch,
          "loss mask disagrees on dimensions");
  double sum = 0.0;
  size_t masked = 0;
  for (size_t pixel = 0; pixel < mask.bits.size(); ++pixel) {
    if (!mask.bits[pixel]) {
      continue;
    }
    ++masked;
    for (size_t c = 0; c < 3; ++c) {
      const double d = static_cast<double>(rendered.data[pixel * 3 + c]) -
                       static_cast<double>(reference.data[pixel * 3 + c]);
      sum += d * d;
    }
  }
  require(masked > 0, Errc::empty_selection, "loss mask is empty");
  return sum / (3.0 * static_cast<double>(masked));
}

std::vector<std::array<ScalarMap, 3>> backward_render(const RenderResult& result,
                                                      const NormImage& reference) {
  require(result.image.width == reference.width && result.image.height == reference.height,
          Errc::shape_mismatch, "reference does not match the cached render");
  require(result.cache_offsets.size() ==
              static_cast<size_t>(result.image.width) * result.image.height + 1,
          Errc::invalid_argument, "render result carries no blend cache");

  const size_t masked = result.hole_mask.kept_count();
  require(masked > 0, Errc::empty_selection, "cannot differentiate an all-hole render");
  const double inv_m = 1.0 / (3.0 * static_cast<double>(masked));

  // Per-source double accumulators; converted to float maps at the end.
  const size_t n_sources = result.source_ids.size();
  const size_t pixels = static_cast<size_t>(result.image.width) * result.image.height;
  std::vector<std::array<std::vector<double>, 3>> acc(n_sources);
  for (size_t k = 0; k < n_sources; ++k) {
    const size_t src_pixels = static_cast<size_t>(result.source_dims[k].first) *
                              static_cast<size_t>(result.source_dims[k].second);
    for (auto& buf : acc[k]) {
      buf.assign(src_pixels, 0.0);
    }
  }

  for (size_t pixel = 0; pixel < pixels; ++pixel) {
    if (!result.hole_mask.bits[pixel]) {
      continue;
    }
    double upstream[3];
    for (size_t c = 0; c < 3; ++c) {
      upstream[c] = 2.0 * inv_m *
                    (static_cast<double>(result.image.data[pixel * 3 + c]) -
                     static_cast<double>(reference.data[pixel * 3 + c]));
    }
    const uint32_t begin = result.cache_offsets[pixel];
    const uint32_t end = result.cache_offsets[pixel + 1];
    for (uint32_t i = begin; i < end; ++i) {
      const BlendTap& tap = result.cache_taps[i];
      auto& channels = acc[static_cast<size_t>(tap.source_index)];
      for (int t = 0; t < 4; ++t) {
        const double w = static_cast<double>(tap.blend_weight) *
                         static_cast<double>(tap.tap_weight[t]);
        if (w == 0.0) {
          continue;
        }
        const size_t px = static_cast<size_t>(tap.pixel[t]);
        channels[0][px] += upstream[0] * w;
        channels[1][px] += upstream[1] * w;
        channels[2][px] += upstream[2] * w;
      }
    }
  }

  std::vector<std::array<ScalarMap, 3>> grads(n_sources);
  for (size_t k = 0; k < n_sources; ++k) {
    for (size_t c = 0; c < 3; ++c) {
      ScalarMap map =
          ScalarMap::filled(result.source_dims[k].first, result.source_dims[k].second, 0.0f);
      for (size_t px = 0; px < map.data.size(); ++px) {
        map.data[px] = static_cast<float>(acc[k][c][px]);
      }
      grads[k][c] = std::move(map);
    }
  }
  return grads;
}

} // namespace lehopp
