// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "fsutil.hpp"
#include "scenegen.hpp"
#include "test_support.hpp"

using namespace lehopp;
using lehopp::test::TempDir;

namespace {

SceneSpec tiny_spec(uint64_t seed, int frames = 1) {
  return make_desk_spec(seed, 32, 24, 3, frames);
}

} // namespace

TEST_CASE("camera_arc: endpoint symmetry, orthonormality, aiming") {
  const Vec3 lookat{0.0, 0.4, 0.0};
  const auto two = camera_arc(2, 3.0, lookat, 1.0, 30.0, 30.0, 16.0, 12.0);
  REQUIRE(two.size() == 2);
  // The two endpoint cameras mirror each other across the arc bisector.
  const Vec3 c0 = two[0].center() - lookat;
  const Vec3 c1 = two[1].center() - lookat;
  CHECK(c0.x == doctest::Approx(-c1.x).epsilon(1e-12));
  CHECK(c0.y == doctest::Approx(c1.y).epsilon(1e-12));
  CHECK(c0.z == doctest::Approx(c1.z).epsilon(1e-12));

  for (const Camera& cam : camera_arc(7, 2.5, lookat, 1.3, 40.0, 40.0, 20.0, 20.0)) {
    CHECK(orthonormality_defect(cam.rotation) < 1e-6);
    // Look direction: the camera-frame z of (lookat - center) is positive.
    const Vec3 in_cam = cam.rotation * (lookat - cam.center());
    CHECK(in_cam.z > 0.0);
    // All cameras aim straight at lookat: x and y components vanish.
    CHECK(std::abs(in_cam.x) < 1e-9);
    CHECK(std::abs(in_cam.y) < 1e-9);
  }

  CHECK_THROWS_AS(camera_arc(1, 1.0, lookat, 0.0, 1.0, 1.0, 0.0, 0.0), Error);
}

TEST_CASE("raycast: fronto-parallel plane gives a constant depth map") {
  Camera cam = look_at_camera({0.0, 0.0, 2.0}, {0.0, 0.0, 0.0}, 20.0, 20.0, 8.0, 8.0);
  Primitive plane;
  plane.kind = Primitive::Kind::plane;
  plane.point = {0.0, 0.0, 0.0};
  plane.normal = {0.0, 0.0, 1.0};
  const RaycastResult rc = raycast(cam, {plane}, 16, 16);
  for (float d : rc.depth.data) {
    CHECK(d == doctest::Approx(2.0).epsilon(1e-6));
  }
}

TEST_CASE("raycast: empty scene yields mid-gray and depth sentinels") {
  Camera cam = look_at_camera({0.0, 0.0, 2.0}, {0.0, 0.0, 0.0}, 20.0, 20.0, 8.0, 8.0);
  const RaycastResult rc = raycast(cam, {}, 8, 8);
  for (float v : rc.image.data) {
    CHECK(v == 0.5f);
  }
  for (float d : rc.depth.data) {
    CHECK(d == 0.0f);
  }
}

TEST_CASE("raycast: on-axis sphere depth is minimal at the principal point and symmetric") {
  Camera cam = look_at_camera({0.0, 0.0, 3.0}, {0.0, 0.0, 0.0}, 32.0, 32.0, 8.0, 8.0);
  Primitive sphere;
  sphere.kind = Primitive::Kind::sphere;
  sphere.center = {0.0, 0.0, 0.0};
  sphere.radius = 1.0;
  const RaycastResult rc = raycast(cam, {sphere}, 16, 16);

  // The principal point (8, 8) sits on the corner of four pixels; they see
  // the sphere symmetrically.
  const float d77 = rc.depth.at(7, 7);
  CHECK(d77 > 0.0f);
  CHECK(rc.depth.at(8, 8) == doctest::Approx(d77).epsilon(1e-6));
  CHECK(rc.depth.at(8, 7) == doctest::Approx(d77).epsilon(1e-6));
  CHECK(rc.depth.at(7, 8) == doctest::Approx(d77).epsilon(1e-6));

  float min_depth = 1e9f;
  for (float d : rc.depth.data) {
    if (d > 0.0f) {
      min_depth = std::min(min_depth, d);
    }
  }
  CHECK(d77 == doctest::Approx(min_depth).epsilon(1e-6));
  CHECK(d77 == doctest::Approx(2.0).epsilon(1e-2)); // camera at 3, radius 1
}

TEST_CASE("texture_eval: checker definition and noise determinism") {
  Texture checker;
  checker.kind = TextureKind::checker;
  checker.scale = 1.0;
  checker.color_a = {1.0f, 0.0f, 0.0f};
  checker.color_b = {0.0f, 1.0f, 0.0f};
  CHECK(texture_eval(checker, 0.1, 0.1) == checker.color_a);
  CHECK(texture_eval(checker, 1.1, 0.1) == checker.color_b);
  CHECK(texture_eval(checker, -0.1, 0.1) == checker.color_b); // floor, not trunc

  Texture noise;
  noise.kind = TextureKind::value_noise;
  noise.scale = 4.0;
  noise.seed = 99;
  CHECK(texture_eval(noise, 0.37, 1.42) == texture_eval(noise, 0.37, 1.42));
}

TEST_CASE("texture_eval: value noise stays inside the unit cube over 1e5 samples") {
  Texture noise;
  noise.kind = TextureKind::value_noise;
  noise.scale = 3.7;
  noise.seed = 1234;
  SplitMix64 rng(5);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.next_double() * 200.0 - 100.0;
    const double v = rng.next_double() * 200.0 - 100.0;
    const auto rgb = texture_eval(noise, u, v);
    for (float c : rgb) {
      CHECK(c >= 0.0f);
      CHECK(c <= 1.0f);
    }
  }
}

TEST_CASE("generate_scene: byte-identical across runs; zero animation repeats frames") {
  TempDir dir("scene");
  const SceneSpec spec = tiny_spec(21);
  write_scene(spec, dir / "a");
  write_scene(spec, dir / "b");
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file()) {
      continue;
    }
    const auto rel = std::filesystem::relative(entry.path(), dir / "a");
    CHECK(read_file(entry.path()) == read_file(dir / "b" / rel));
  }

  SceneSpec still = tiny_spec(22, 2);
  still.animation.velocity = {0.0, 0.0, 0.0};
  const auto views = generate_scene(still);
  REQUIRE(views.size() == 6); // 3 cameras x 2 frames
  for (size_t v = 0; v < 3; ++v) {
    CHECK(views[2 * v].image.data == views[2 * v + 1].image.data);
    CHECK(views[2 * v].depth.data == views[2 * v + 1].depth.data);
  }

  SceneSpec moving = tiny_spec(22, 2);
  const auto moved = generate_scene(moving);
  CHECK(moved[0].image.data != moved[1].image.data); // the sphere drifted
}

TEST_CASE("depth validity: own-pixel reprojection lands on the pixel center") {
  const SceneSpec spec = tiny_spec(31);
  const auto views = generate_scene(spec);
  for (const GroundTruthView& view : views) {
    for (int y = 0; y < spec.height; y += 3) {
      for (int x = 0; x < spec.width; x += 3) {
        const float d = view.depth.at(x, y);
        if (!(d > 0.0f)) {
          continue;
        }
        const Vec3 world = view.camera.unproject(x + 0.5, y + 0.5, d);
        double u;
        double v;
        double z;
        REQUIRE(view.camera.project(world, u, v, z));
        CHECK(std::abs(u - (x + 0.5)) < 1e-6);
        CHECK(std::abs(v - (y + 0.5)) < 1e-6);
      }
    }
  }
}

TEST_CASE("reprojection consistency: a -> b -> a returns to the source pixel") {
  // Geometric roundtrip: unproject in view a with its depth, project into
  // view b; where b's depth map agrees (mutual visibility), unproject at
  // the projected position/depth and project back into a.
  const SceneSpec spec = tiny_spec(37);
  const auto views = generate_scene(spec);
  const GroundTruthView& a = views[0];
  const GroundTruthView& b = views[static_cast<size_t>(spec.frames)]; // next view, same frame

  int checked = 0;
  for (int y = 0; y < spec.height; y += 2) {
    for (int x = 0; x < spec.width; x += 2) {
      const float depth_a = a.depth.at(x, y);
      if (!(depth_a > 0.0f)) {
        continue;
      }
      const Vec3 world = a.camera.unproject(x + 0.5, y + 0.5, depth_a);
      double ub;
      double vb;
      double zb;
      if (!b.camera.project(world, ub, vb, zb)) {
        continue;
      }
      const int bx = static_cast<int>(std::floor(ub));
      const int by = static_cast<int>(std::floor(vb));
      if (bx < 0 || bx >= spec.width || by < 0 || by >= spec.height) {
        continue;
      }
      const float depth_b = b.depth.at(bx, by);
      if (!(depth_b > 0.0f) || std::abs(zb - depth_b) > 0.01 * zb) {
        continue; // occluded or at a depth edge: not mutually visible
      }
      const Vec3 world_back = b.camera.unproject(ub, vb, zb);
      double ua;
      double va;
      double za;
      REQUIRE(a.camera.project(world_back, ua, va, za));
      CHECK(std::abs(ua - (x + 0.5)) < 1e-3);
      CHECK(std::abs(va - (y + 0.5)) < 1e-3);
      ++checked;
    }
  }
  CHECK(checked > 50); // the views overlap substantially
}

TEST_CASE("desk scenes carry high-frequency content") {
  // At least 10% of pixels differ from their 8-neighbor mean by > 0.1 in
  // some channel; the importance residual needs texture to bite on.
  const auto views = generate_scene(make_desk_spec(3, 64, 48, 3, 1));
  for (const GroundTruthView& view : views) {
    const Image& img = view.image;
    int busy = 0;
    for (int y = 1; y < img.height - 1; ++y) {
      for (int x = 1; x < img.width - 1; ++x) {
        for (int c = 0; c < 3; ++c) {
          double mean = 0.0;
          for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
              mean += img.at(x + dx, y + dy, c);
            }
          }
          mean = (mean - img.at(x, y, c)) / 8.0;
          if (std::abs(mean - img.at(x, y, c)) > 0.1) {
            ++busy;
            break;
          }
        }
      }
    }
    const double fraction =
        static_cast<double>(busy) / (static_cast<double>(img.width - 2) * (img.height - 2));
    CHECK(fraction >= 0.10);
  }
}

TEST_CASE("scene spec json roundtrip and manifest loading") {
  TempDir dir("manifest");
  const SceneSpec spec = tiny_spec(41, 2);
  const SceneSpec back = spec_from_json(spec_to_json(spec));
  CHECK(back.width == spec.width);
  CHECK(back.cameras.size() == spec.cameras.size());
  CHECK(back.primitives.size() == spec.primitives.size());
  CHECK(back.animation.primitive_index == spec.animation.primitive_index);

  write_scene(spec, dir.path());
  const Scene scene = load_manifest(dir / "manifest.json");
  CHECK(scene.width == spec.width);
  CHECK(scene.view_count == 3);
  CHECK(scene.frame_count == 2);
  const GroundTruthView v = load_view(scene, 1, 1);
  CHECK(v.image.width == spec.width);
  CHECK(v.depth.height == spec.height);
  CHECK(orthonormality_defect(v.camera.rotation) < 1e-6);

  // Arc-form camera specs expand to full cameras.
  nlohmann::json arc_spec = spec_to_json(spec);
  arc_spec["cameras"] = {{"arc", {{"count", 4}, {"radius", 3.0}, {"lookat", {0.0, 0.4, 0.0}}}}};
  CHECK(spec_from_json(arc_spec).cameras.size() == 4);
}
