// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "render.hpp"
#include "scenegen.hpp"
#include "test_support.hpp"

using namespace lehopp;

namespace {

struct FrameData {
  std::vector<NormImage> images;
  std::vector<ScalarMap> depths;
  std::vector<Camera> cameras;
  int width;
  int height;
};

FrameData desk_frame(uint64_t seed, int width, int height, int n_views) {
  const SceneSpec spec = make_desk_spec(seed, width, height, n_views, 1);
  const auto views = generate_scene(spec);
  FrameData data;
  data.width = width;
  data.height = height;
  for (const GroundTruthView& v : views) {
    data.images.push_back(preprocess(v.image, spec.norm_params));
    data.depths.push_back(v.depth);
    data.cameras.push_back(v.camera);
  }
  return data;
}

std::vector<SourceView> sources_of(const FrameData& data, const std::vector<int>& ids) {
  std::vector<SourceView> out;
  for (int id : ids) {
    out.push_back({id, &data.images[static_cast<size_t>(id)],
                   &data.depths[static_cast<size_t>(id)],
                   data.cameras[static_cast<size_t>(id)]});
  }
  return out;
}

TargetGeometry target_of(const FrameData& data, int id) {
  TargetGeometry t;
  t.camera = data.cameras[static_cast<size_t>(id)];
  t.depth = &data.depths[static_cast<size_t>(id)];
  t.width = data.width;
  t.height = data.height;
  return t;
}

} // namespace

TEST_CASE("select_sources: nearest-first ordering, ties and clamping") {
  // Three collinear cameras along x.
  std::vector<Camera> cams;
  for (double x : {0.0, 1.0, 2.0}) {
    cams.push_back(look_at_camera({x, 0.0, 5.0}, {x, 0.0, 0.0}, 10.0, 10.0, 5.0, 5.0));
  }
  const ViewSelection sel = select_sources(1, cams, 2);
  REQUIRE(sel.source_ids.size() == 2);
  // Both neighbors, equidistant: the lower id comes first.
  CHECK(sel.source_ids[0] == 0);
  CHECK(sel.source_ids[1] == 2);

  CHECK(select_sources(0, cams, 9).source_ids.size() == 2); // clamped, no error
  CHECK(select_sources(0, cams, 1).source_ids == std::vector<int>{1});

  CHECK_THROWS_AS(select_sources(0, std::vector<Camera>{cams[0]}, 2), Error);
}

TEST_CASE("forward_render: rendering a view from itself reproduces it exactly") {
  const FrameData data = desk_frame(51, 24, 18, 3);
  const RenderResult res = forward_render(sources_of(data, {0}), target_of(data, 0), {});
  REQUIRE(res.hole_mask.kept_count() == data.images[0].pixel_count());
  for (size_t i = 0; i < res.image.data.size(); ++i) {
    CHECK(std::abs(res.image.data[i] - data.images[0].data[i]) <= 1e-6f);
  }
}

TEST_CASE("forward_render: two sources with identical images blend to that image") {
  FrameData data = desk_frame(52, 24, 18, 3);
  // Give views 0 and 1 the same pixels; the geometry stays distinct, so a
  // convex combination of equal values must return the value.
  FrameData flat = data;
  for (NormImage& img : flat.images) {
    img = NormImage::filled(img.width, img.height, 0.25f);
  }
  const RenderResult res = forward_render(sources_of(flat, {0, 1}), target_of(flat, 2), {});
  const size_t pixels = static_cast<size_t>(flat.width) * flat.height;
  size_t covered = 0;
  for (size_t px = 0; px < pixels; ++px) {
    if (!res.hole_mask.bits[px]) {
      continue;
    }
    ++covered;
    for (int c = 0; c < 3; ++c) {
      CHECK(std::abs(res.image.data[px * 3 + c] - 0.25f) <= 1e-6f);
    }
  }
  CHECK(covered > pixels / 2);
}

TEST_CASE("forward_render: output is linear in source colors") {
  FrameData data = desk_frame(53, 24, 18, 3);
  FrameData data2 = data;
  for (NormImage& img : data2.images) {
    img = lehopp::test::noise_norm_image(img.width, img.height, 77, 1.0f);
  }

  const double a = 0.7;
  const double b = -0.4;
  FrameData mixed = data;
  for (size_t v = 0; v < mixed.images.size(); ++v) {
    for (size_t i = 0; i < mixed.images[v].data.size(); ++i) {
      mixed.images[v].data[i] = static_cast<float>(a * data.images[v].data[i] +
                                                   b * data2.images[v].data[i]);
    }
  }

  const RenderResult ra = forward_render(sources_of(data, {0, 1}), target_of(data, 2), {});
  const RenderResult rb = forward_render(sources_of(data2, {0, 1}), target_of(data2, 2), {});
  const RenderResult rm = forward_render(sources_of(mixed, {0, 1}), target_of(mixed, 2), {});
  for (size_t i = 0; i < rm.image.data.size(); ++i) {
    const double expected = a * ra.image.data[i] + b * rb.image.data[i];
    CHECK(std::abs(rm.image.data[i] - expected) <= 1e-6);
  }
}

TEST_CASE("forward_render: blend weights sum to one on covered pixels") {
  const FrameData data = desk_frame(54, 32, 24, 4);
  const RenderResult res = forward_render(sources_of(data, {0, 1, 3}), target_of(data, 2), {});
  const size_t pixels = static_cast<size_t>(data.width) * data.height;
  for (size_t px = 0; px < pixels; ++px) {
    if (!res.hole_mask.bits[px]) {
      CHECK(res.cache_offsets[px] == res.cache_offsets[px + 1]);
      continue;
    }
    double sum = 0.0;
    for (uint32_t i = res.cache_offsets[px]; i < res.cache_offsets[px + 1]; ++i) {
      sum += res.cache_taps[i].blend_weight;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("mse_loss: fixtures and empty-mask error") {
  NormImage y = NormImage::filled(4, 4, 0.5f);
  NormImage t = NormImage::filled(4, 4, 0.0f);
  const BitMask full = BitMask::filled(4, 4, 1);
  CHECK(mse_loss(y, y, full) == 0.0);
  CHECK(mse_loss(y, t, full) == doctest::Approx(0.25).epsilon(1e-12));

  // Mask covering half the image, difference 1 there and 0 elsewhere:
  // the mean runs over masked pixels only.
  NormImage y2 = NormImage::filled(4, 4, 0.0f);
  NormImage t2 = NormImage::filled(4, 4, 0.0f);
  BitMask half = BitMask::filled(4, 4, 0);
  for (int x = 0; x < 4; ++x) {
    for (int row = 0; row < 2; ++row) {
      half.at(x, row) = 1;
      for (int c = 0; c < 3; ++c) {
        y2.at(x, row, c) = 1.0f;
      }
    }
  }
  CHECK(mse_loss(y2, t2, half) == doctest::Approx(1.0).epsilon(1e-12));

  const BitMask empty = BitMask::filled(4, 4, 0);
  CHECK_THROWS_AS(mse_loss(y, t, empty), Error);
}

TEST_CASE("backward_render: zero residual and unsampled pixels give zero gradients") {
  const FrameData data = desk_frame(55, 24, 18, 3);
  const RenderResult res = forward_render(sources_of(data, {0, 1}), target_of(data, 2), {});

  // Reference equal to the render: all gradients vanish.
  const auto grads = backward_render(res, res.image);
  for (const auto& per_source : grads) {
    for (const ScalarMap& g : per_source) {
      for (float v : g.data) {
        CHECK(v == 0.0f);
      }
    }
  }

  // A source pixel never sampled by any cached tap has an exactly-zero
  // gradient even with a nonzero residual.
  std::vector<uint8_t> sampled(data.images[0].pixel_count(), 0);
  for (const BlendTap& tap : res.cache_taps) {
    if (tap.source_index == 0) {
      for (int i = 0; i < 4; ++i) {
        if (tap.tap_weight[i] > 0.0f) {
          sampled[static_cast<size_t>(tap.pixel[i])] = 1;
        }
      }
    }
  }
  const auto grads2 = backward_render(res, data.images[2]);
  size_t unsampled = 0;
  for (size_t px = 0; px < sampled.size(); ++px) {
    if (!sampled[px]) {
      ++unsampled;
      for (int c = 0; c < 3; ++c) {
        CHECK(grads2[0][static_cast<size_t>(c)].data[px] == 0.0f);
      }
    }
  }
  CHECK(unsampled > 0); // the scene must actually exercise this path
}

TEST_CASE("backward_render: matches central finite differences on a random scene") {
  // Independent oracle: perturb single source pixels by +-h and difference
  // the losses. The renderer is linear in colors and the loss quadratic,
  // so central differences are exact up to floating-point noise.
  const int width = 64;
  const int height = 64;
  FrameData data = desk_frame(56, width, height, 3);

  const std::vector<int> source_ids{0, 1};
  const int target = 2;
  const RenderResult res = forward_render(sources_of(data, source_ids), target_of(data, target),
                                          {});
  const NormImage& reference = data.images[static_cast<size_t>(target)];
  const auto grads = backward_render(res, reference);

  const double h = 1e-3;
  SplitMix64 rng(999);
  double max_rel_err = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const size_t src_idx = rng.next_below(source_ids.size());
    const int view = source_ids[src_idx];
    const int x = static_cast<int>(rng.next_below(static_cast<uint64_t>(width)));
    const int y = static_cast<int>(rng.next_below(static_cast<uint64_t>(height)));
    const int c = static_cast<int>(rng.next_below(3));

    NormImage& img = data.images[static_cast<size_t>(view)];
    const float original = img.at(x, y, c);

    img.at(x, y, c) = static_cast<float>(original + h);
    const RenderResult plus = forward_render(sources_of(data, source_ids),
                                             target_of(data, target), {});
    const double loss_plus = mse_loss(plus.image, reference, plus.hole_mask);

    img.at(x, y, c) = static_cast<float>(original - h);
    const RenderResult minus = forward_render(sources_of(data, source_ids),
                                              target_of(data, target), {});
    const double loss_minus = mse_loss(minus.image, reference, minus.hole_mask);
    img.at(x, y, c) = original;

    const double fd = (loss_plus - loss_minus) / (2.0 * h);
    const double analytic = grads[src_idx][static_cast<size_t>(c)].at(x, y);
    const double rel = std::abs(analytic - fd) / std::max(std::abs(fd), 1e-8);
    max_rel_err = std::max(max_rel_err, rel);
  }
  CHECK(max_rel_err <= 1e-4);
}

TEST_CASE("backward_render rejects mismatched references") {
  const FrameData data = desk_frame(57, 16, 12, 3);
  const RenderResult res = forward_render(sources_of(data, {0}), target_of(data, 1), {});
  const NormImage wrong = NormImage::filled(8, 8, 0.0f);
  CHECK_THROWS_AS(backward_render(res, wrong), Error);
}
