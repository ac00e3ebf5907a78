// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "geometry.hpp"
#include "imgio.hpp"

namespace lehopp {

enum class TextureKind { checker, value_noise };

struct Texture {
  TextureKind kind = TextureKind::checker;
  double scale = 1.0;
  std::array<float, 3> color_a{0.9f, 0.9f, 0.9f};
  std::array<float, 3> color_b{0.1f, 0.1f, 0.1f};
  uint64_t seed = 0; // value noise only
};

struct Primitive {
  enum class Kind { plane, sphere, box };
  Kind kind = Kind::plane;
  // plane
  Vec3 point{};
  Vec3 normal{0.0, 1.0, 0.0};
  // sphere
  Vec3 center{};
  double radius = 1.0;
  // box
  Vec3 box_min{};
  Vec3 box_max{};
  Texture texture;
};

/// Rigid per-frame motion of one primitive: at frame f its geometry is
/// translated by velocity * f. primitive_index < 0 disables animation.
struct Animation {
  int primitive_index = -1;
  Vec3 velocity{};
};

struct SceneSpec {
  uint64_t seed = 0;
  int width = 64;
  int height = 64;
  int frames = 1;
  std::vector<Camera> cameras;
  std::vector<Primitive> primitives;
  Animation animation;
  NormParams norm_params;
};

/// One rendered ground-truth view: texture, metric depth along camera z
/// (0 marks rays that hit nothing), and the generating camera.
struct GroundTruthView {
  int view_id = 0;
  int frame_id = 0;
  Image image;
  ScalarMap depth;
  Camera camera;
};

/// n cameras evenly spaced on a 60-degree horizontal arc of the given
/// radius around `lookat`, raised by `height`, all aimed at `lookat`.
/// All n share the supplied intrinsics.
std::vector<Camera> camera_arc(int n, double radius, const Vec3& lookat, double height, double fx,
                               double fy, double cx, double cy);

std::array<float, 3> texture_eval(const Texture& texture, double u, double v);

struct RaycastResult {
  Image image;
  ScalarMap depth;
};

RaycastResult raycast(const Camera& camera, const std::vector<Primitive>& primitives, int width,
                      int height);

std::vector<GroundTruthView> generate_scene(const SceneSpec& spec);

/// Built-in desk-scale scene family: checkered ground and back wall that
/// cover every camera ray, plus noise/checker objects jittered by seed.
SceneSpec make_desk_spec(uint64_t seed, int width, int height, int n_views, int n_frames);

nlohmann::json spec_to_json(const SceneSpec& spec);
SceneSpec spec_from_json(const nlohmann::json& j);
SceneSpec load_spec(const std::filesystem::path& path);

// --- scene manifest ------------------------------------------------------
//
// manifest.json lists every (view, frame) with its PPM/PFM paths and
// camera, plus the standardization constants and an echo of the generating
// spec. It is the single entry point for all downstream stages.

struct SceneViewEntry {
  int view_id = 0;
  int frame_id = 0;
  std::filesystem::path image_path;
  std::filesystem::path depth_path;
  Camera camera;
};

struct Scene {
  int width = 0;
  int height = 0;
  int view_count = 0;
  int frame_count = 0;
  std::vector<SceneViewEntry> views; // ordered by (view_id, frame_id)
  NormParams norm_params;
  nlohmann::json spec_echo;
  std::filesystem::path root; // directory holding the manifest

  const SceneViewEntry& entry(int view_id, int frame_id) const;
};

/// Renders the spec and writes images/, depth/ and manifest.json under
/// out_dir. Byte-identical for equal specs.
void write_scene(const SceneSpec& spec, const std::filesystem::path& out_dir);

Scene load_manifest(const std::filesystem::path& manifest_path);

GroundTruthView load_view(const Scene& scene, int view_id, int frame_id);

} // namespace lehopp
