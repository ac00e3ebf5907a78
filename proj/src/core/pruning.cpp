// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#include "pruning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lehopp {

NormImage inpaint_proxy(const NormImage& image) {
  const int w = image.width;
  const int h = image.height;
  NormImage out;
  out.width = w;
  out.height = h;
  out.data.resize(image.data.size());

  auto clamped = [&](int x, int y, int c) {
    x = std::clamp(x, 0, w - 1);
    y = std::clamp(y, 0, h - 1);
    return static_cast<double>(image.at(x, y, c));
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            sum += clamped(x + dx, y + dy, c);
          }
        }
        sum -= clamped(x, y, c); // 3x3 sum minus the center: the 8 neighbors
        out.at(x, y, c) = static_cast<float>(sum / 8.0);
      }
    }
  }
  return out;
}

namespace {

void check_same_shape(int w1, int h1, int w2, int h2, const char* what) {
  require(w1 == w2 && h1 == h2, Errc::shape_mismatch, what);
}

} // namespace

ScalarMap importance_single(const std::array<ScalarMap, 3>& grad_abs, const NormImage& image,
                            const NormImage& proxy) {
  check_same_shape(image.width, image.height, proxy.width, proxy.height,
                   "image and proxy disagree on dimensions");
  for (const ScalarMap& g : grad_abs) {
    check_same_shape(image.width, image.height, g.width, g.height,
                     "gradient map disagrees with the image dimensions");
  }
  ScalarMap out = ScalarMap::filled(image.width, image.height, 0.0f);
  for (size_t px = 0; px < out.data.size(); ++px) {
    double v = 0.0;
    for (size_t c = 0; c < 3; ++c) {
      v += std::abs(static_cast<double>(grad_abs[c].data[px])) *
           std::abs(static_cast<double>(image.data[px * 3 + c]) -
                    static_cast<double>(proxy.data[px * 3 + c]));
    }
    out.data[px] = static_cast<float>(v);
  }
  return out;
}

void AccumState::add_render(int view_id, const std::array<ScalarMap, 3>& grads) {
  PerView& pv = views_[view_id];
  if (pv.renders == 0) {
    pv.width = grads[0].width;
    pv.height = grads[0].height;
    for (auto& buf : pv.sum_abs) {
      buf.assign(grads[0].data.size(), 0.0);
    }
  }
  for (size_t c = 0; c < 3; ++c) {
    check_same_shape(pv.width, pv.height, grads[c].width, grads[c].height,
                     "gradient shape changed between renders of one view");
    for (size_t px = 0; px < pv.sum_abs[c].size(); ++px) {
      pv.sum_abs[c][px] += std::abs(static_cast<double>(grads[c].data[px]));
    }
  }
  ++pv.renders;
}

std::map<int, std::array<ScalarMap, 3>> AccumState::finalize() const {
  require(!views_.empty(), Errc::empty_selection, "no renders were accumulated");
  std::map<int, std::array<ScalarMap, 3>> out;
  for (const auto& [view_id, pv] : views_) {
    std::array<ScalarMap, 3> maps;
    for (size_t c = 0; c < 3; ++c) {
      maps[c] = ScalarMap::filled(pv.width, pv.height, 0.0f);
      for (size_t px = 0; px < pv.sum_abs[c].size(); ++px) {
        maps[c].data[px] = static_cast<float>(pv.sum_abs[c][px] / pv.renders);
      }
    }
    out.emplace(view_id, std::move(maps));
  }
  return out;
}

int AccumState::render_count(int view_id) const {
  const auto it = views_.find(view_id);
  return it == views_.end() ? 0 : it->second.renders;
}

ScalarMap accumulate_frames(const std::vector<ScalarMap>& frame_maps, int intra_period) {
  require(!frame_maps.empty(), Errc::empty_selection, "no frame maps to accumulate");
  require(intra_period >= 1, Errc::invalid_argument, "intra period must be >= 1");
  require(static_cast<int>(frame_maps.size()) <= intra_period, Errc::invalid_argument,
          "more frames than the intra period");
  const int w = frame_maps[0].width;
  const int h = frame_maps[0].height;
  for (const ScalarMap& m : frame_maps) {
    check_same_shape(w, h, m.width, m.height, "frame maps disagree on dimensions");
  }

  ScalarMap out = ScalarMap::filled(w, h, 0.0f);
  std::vector<float> addends(frame_maps.size());
  for (size_t px = 0; px < out.data.size(); ++px) {
    for (size_t f = 0; f < frame_maps.size(); ++f) {
      addends[f] = frame_maps[f].data[px];
    }
    // Value-sorted summation: the result does not depend on frame order.
    std::sort(addends.begin(), addends.end());
    double sum = 0.0;
    for (float a : addends) {
      sum += a;
    }
    out.data[px] = static_cast<float>(sum);
  }
  return out;
}

namespace {

size_t prune_count(double gamma, size_t pixels) {
  require(gamma >= 0.0 && gamma <= 1.0, Errc::invalid_argument, "gamma must lie in [0, 1]");
  return static_cast<size_t>(std::llround(gamma * static_cast<double>(pixels)));
}

} // namespace

BitMask build_mask(const ScalarMap& importance, double gamma) {
  const size_t pixels = importance.data.size();
  const size_t k = prune_count(gamma, pixels);

  std::vector<uint32_t> order(pixels);
  std::iota(order.begin(), order.end(), 0u);
  // Ascending (value, row, column); the row-major index encodes the
  // (row, column) tie-break directly.
  std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    const float va = importance.data[a];
    const float vb = importance.data[b];
    return va != vb ? va < vb : a < b;
  });

  BitMask mask = BitMask::filled(importance.width, importance.height, 1);
  for (size_t i = 0; i < k; ++i) {
    mask.bits[order[i]] = 0;
  }
  return mask;
}

std::vector<BitMask> build_mask_global(const std::vector<ScalarMap>& importance, double gamma) {
  require(!importance.empty(), Errc::empty_selection, "no importance maps");
  size_t total = 0;
  for (const ScalarMap& m : importance) {
    total += m.data.size();
  }
  const size_t k = prune_count(gamma, total);

  struct Entry {
    float value;
    uint32_t view;
    uint32_t pixel;
  };
  std::vector<Entry> order;
  order.reserve(total);
  for (uint32_t v = 0; v < importance.size(); ++v) {
    for (uint32_t px = 0; px < importance[v].data.size(); ++px) {
      order.push_back({importance[v].data[px], v, px});
    }
  }
  std::sort(order.begin(), order.end(), [](const Entry& a, const Entry& b) {
    if (a.value != b.value) {
      return a.value < b.value;
    }
    return std::pair(a.view, a.pixel) < std::pair(b.view, b.pixel);
  });

  std::vector<BitMask> masks;
  masks.reserve(importance.size());
  for (const ScalarMap& m : importance) {
    masks.push_back(BitMask::filled(m.width, m.height, 1));
  }
  for (size_t i = 0; i < k; ++i) {
    masks[order[i].view].bits[order[i].pixel] = 0;
  }
  return masks;
}

Image apply_mask(const Image& image, const BitMask& mask, FillPolicy fill,
                 const InpaintConfig& cfg) {
  check_same_shape(image.width, image.height, mask.width, mask.height,
                   "image and mask disagree on dimensions");
  if (fill == FillPolicy::inpaint) {
    return telea_inpaint(image, mask, cfg);
  }
  Image out = image;
  for (size_t px = 0; px < mask.bits.size(); ++px) {
    if (!mask.bits[px]) {
      out.data[px * 3 + 0] = 0.5f;
      out.data[px * 3 + 1] = 0.5f;
      out.data[px * 3 + 2] = 0.5f;
    }
  }
  return out;
}

double first_order_estimate(const std::array<ScalarMap, 3>& grad_abs, const NormImage& image,
                            const NormImage& proxy, int x, int y) {
  double v = 0.0;
  for (int c = 0; c < 3; ++c) {
    v += std::abs(static_cast<double>(grad_abs[static_cast<size_t>(c)].at(x, y))) *
         std::abs(static_cast<double>(image.at(x, y, c)) - static_cast<double>(proxy.at(x, y, c)));
  }
  return v;
}

namespace {

std::vector<double> average_ranks(std::span<const double> values) {
  const size_t n = values.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(n, 0.0);
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) {
      ++j;
    }
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (size_t k = i; k <= j; ++k) {
      ranks[order[k]] = avg;
    }
    i = j + 1;
  }
  return ranks;
}

} // namespace

double rank_correlation(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), Errc::invalid_argument, "rank correlation needs equal lengths");
  require(a.size() >= 2, Errc::invalid_argument, "rank correlation needs at least two samples");

  const std::vector<double> ra = average_ranks(a);
  const std::vector<double> rb = average_ranks(b);
  const double n = static_cast<double>(a.size());
  const double mean = (n + 1.0) / 2.0;

  double cov = 0.0;
  double var_a = 0.0;
  double var_b = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double da = ra[i] - mean;
    const double db = rb[i] - mean;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  require(var_a > 0.0 && var_b > 0.0, Errc::undefined_statistic,
          "rank correlation undefined for a constant sequence");
  return cov / std::sqrt(var_a * var_b);
}

double oracle_delta_loss(const RenderSet& set, int view_id, int x, int y,
                         const std::vector<int>& targets, const RenderConfig& cfg) {
  require(view_id >= 0 && view_id < static_cast<int>(set.images.size()), Errc::invalid_argument,
          "oracle view id out of range");
  require(!targets.empty(), Errc::empty_selection, "oracle needs at least one target");

  const NormImage proxy = inpaint_proxy(set.images[static_cast<size_t>(view_id)]);
  NormImage perturbed = set.images[static_cast<size_t>(view_id)];
  for (int c = 0; c < 3; ++c) {
    perturbed.at(x, y, c) = proxy.at(x, y, c);
  }

  auto render_loss = [&](int target, bool use_perturbed) {
    const ViewSelection sel = select_sources(target, set.cameras, cfg.n_src);
    std::vector<SourceView> sources;
    sources.reserve(sel.source_ids.size());
    for (int sid : sel.source_ids) {
      SourceView sv;
      sv.view_id = sid;
      sv.image = (use_perturbed && sid == view_id) ? &perturbed
                                                   : &set.images[static_cast<size_t>(sid)];
      sv.depth = &set.depths[static_cast<size_t>(sid)];
      sv.camera = set.cameras[static_cast<size_t>(sid)];
      sources.push_back(sv);
    }
    TargetGeometry geom;
    geom.camera = set.cameras[static_cast<size_t>(target)];
    geom.depth = &set.depths[static_cast<size_t>(target)];
    geom.width = set.width;
    geom.height = set.height;
    const RenderResult res = forward_render(sources, geom, cfg);
    return mse_loss(res.image, set.images[static_cast<size_t>(target)], res.hole_mask);
  };

  double delta = 0.0;
  for (int target : targets) {
    delta += render_loss(target, true) - render_loss(target, false);
  }
  return delta / static_cast<double>(targets.size());
}

std::vector<HistogramBin> importance_histogram(const std::vector<ScalarMap>& maps, int bins) {
  require(bins >= 1, Errc::invalid_argument, "histogram needs at least one bin");
  require(!maps.empty(), Errc::empty_selection, "histogram needs at least one map");

  double min_positive = std::numeric_limits<double>::infinity();
  double max_value = 0.0;
  for (const ScalarMap& m : maps) {
    for (float v : m.data) {
      if (v > 0.0f) {
        min_positive = std::min(min_positive, static_cast<double>(v));
        max_value = std::max(max_value, static_cast<double>(v));
      }
    }
  }

  std::vector<HistogramBin> out(static_cast<size_t>(bins));
  if (max_value <= 0.0) { // completely flat content: everything is zero
    for (const ScalarMap& m : maps) {
      out[0].count += m.data.size();
    }
    return out;
  }
  if (min_positive == max_value) {
    min_positive = max_value * 0.5; // degenerate single-value range
  }

  const double log_lo = std::log10(min_positive);
  const double log_hi = std::log10(max_value);
  const double step = (log_hi - log_lo) / bins;
  for (int b = 0; b < bins; ++b) {
    out[static_cast<size_t>(b)].lower = std::pow(10.0, log_lo + step * b);
    out[static_cast<size_t>(b)].upper = std::pow(10.0, log_lo + step * (b + 1));
  }
  out[0].lower = 0.0; // zeros are counted in the first bin

  for (const ScalarMap& m : maps) {
    for (float v : m.data) {
      int b = 0;
      if (v > 0.0f) {
        b = static_cast<int>(std::floor((std::log10(static_cast<double>(v)) - log_lo) / step));
        b = std::clamp(b, 0, bins - 1);
      }
      ++out[static_cast<size_t>(b)].count;
    }
  }
  return out;
}

} // namespace lehopp
