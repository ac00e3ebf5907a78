// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#include "scenegen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fsutil.hpp"
#include "rng.hpp"

namespace lehopp {

std::vector<Camera> camera_arc(int n, double radius, const Vec3& lookat, double height, double fx,
                               double fy, double cx, double cy) {
  require(n >= 2, Errc::invalid_argument, "camera arc needs at least 2 cameras");
  require(radius > 0.0, Errc::invalid_argument, "camera arc radius must be positive");

  constexpr double kArcSpan = M_PI / 3.0; // 60 degrees
  std::vector<Camera> cameras;
  cameras.reserve(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double phi = -kArcSpan / 2.0 + kArcSpan * static_cast<double>(i) /
                                             static_cast<double>(n - 1);
    const Vec3 eye = lookat + Vec3{radius * std::sin(phi), height, radius * std::cos(phi)};
    cameras.push_back(look_at_camera(eye, lookat, fx, fy, cx, cy));
  }
  return cameras;
}

namespace {

double fade(double t) { return t * t * (3.0 - 2.0 * t); }

double value_noise(uint64_t seed, double u, double v, uint64_t channel) {
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const auto iu = static_cast<int64_t>(fu);
  const auto iv = static_cast<int64_t>(fv);
  const double tu = fade(u - fu);
  const double tv = fade(v - fv);

  auto corner = [&](int64_t du, int64_t dv) {
    return hash_to_unit(seed, static_cast<uint64_t>(iu + du), static_cast<uint64_t>(iv + dv),
                        channel);
  };
  const double top = corner(0, 0) + (corner(1, 0) - corner(0, 0)) * tu;
  const double bot = corner(0, 1) + (corner(1, 1) - corner(0, 1)) * tu;
  return top + (bot - top) * tv;
}

} // namespace

std::array<float, 3> texture_eval(const Texture& texture, double u, double v) {
  if (texture.kind == TextureKind::checker) {
    const auto iu = static_cast<int64_t>(std::floor(u * texture.scale));
    const auto iv = static_cast<int64_t>(std::floor(v * texture.scale));
    return ((iu + iv) % 2 + 2) % 2 == 0 ? texture.color_a : texture.color_b;
  }
  const double su = u * texture.scale;
  const double sv = v * texture.scale;
  return {static_cast<float>(value_noise(texture.seed, su, sv, 0)),
          static_cast<float>(value_noise(texture.seed, su, sv, 1)),
          static_cast<float>(value_noise(texture.seed, su, sv, 2))};
}

namespace {

constexpr double kRayMin = 1e-9;
constexpr float kBackground = 0.5f;

struct Hit {
  double t = std::numeric_limits<double>::infinity();
  double u = 0.0;
  double v = 0.0;
  const Primitive* primitive = nullptr;
};

// Stable tangent frame on a plane, shared by intersection and uv mapping.
void plane_frame(const Vec3& n_unit, Vec3& u_axis, Vec3& v_axis) {
  const Vec3 helper = std::abs(n_unit.y) < 0.9 ? Vec3{0.0, 1.0, 0.0} : Vec3{1.0, 0.0, 0.0};
  u_axis = normalized(cross(helper, n_unit));
  v_axis = cross(n_unit, u_axis);
}

void intersect_plane(const Primitive& p, const Vec3& origin, const Vec3& dir, Hit& hit) {
  const Vec3 n = normalized(p.normal);
  const double denom = dot(dir, n);
  if (std::abs(denom) < 1e-12) {
    return;
  }
  const double t = dot(p.point - origin, n) / denom;
  if (t <= kRayMin || t >= hit.t) {
    return;
  }
  const Vec3 x = origin + dir * t;
  Vec3 u_axis;
  Vec3 v_axis;
  plane_frame(n, u_axis, v_axis);
  hit.t = t;
  hit.u = dot(x - p.point, u_axis);
  hit.v = dot(x - p.point, v_axis);
  hit.primitive = &p;
}

void intersect_sphere(const Primitive& p, const Vec3& origin, const Vec3& dir, Hit& hit) {
  const Vec3 oc = origin - p.center;
  const double a = dot(dir, dir);
  const double b = 2.0 * dot(dir, oc);
  const double c = dot(oc, oc) - p.radius * p.radius;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) {
    return;
  }
  const double sq = std::sqrt(disc);
  double t = (-b - sq) / (2.0 * a);
  if (t <= kRayMin) {
    t = (-b + sq) / (2.0 * a);
  }
  if (t <= kRayMin || t >= hit.t) {
    return;
  }
  const Vec3 d = normalized(origin + dir * t - p.center);
  hit.t = t;
  hit.u = 0.5 + std::atan2(d.z, d.x) / (2.0 * M_PI);
  hit.v = std::acos(std::clamp(d.y, -1.0, 1.0)) / M_PI;
  hit.primitive = &p;
}

void intersect_box(const Primitive& p, const Vec3& origin, const Vec3& dir, Hit& hit) {
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int near_axis = 0;
  const double o[3] = {origin.x, origin.y, origin.z};
  const double d[3] = {dir.x, dir.y, dir.z};
  const double lo[3] = {p.box_min.x, p.box_min.y, p.box_min.z};
  const double hi[3] = {p.box_max.x, p.box_max.y, p.box_max.z};
  for (int axis = 0; axis < 3; ++axis) {
    const double inv = 1.0 / d[axis]; // +-inf for axis-parallel rays
    double t0 = (lo[axis] - o[axis]) * inv;
    double t1 = (hi[axis] - o[axis]) * inv;
    if (t0 > t1) {
      std::swap(t0, t1);
    }
    if (t0 > t_near) {
      t_near = t0;
      near_axis = axis;
    }
    t_far = std::min(t_far, t1);
    if (t_near > t_far) {
      return;
    }
  }
  double t = t_near;
  if (t <= kRayMin) {
    t = t_far; // origin inside the box
    if (t <= kRayMin) {
      return;
    }
    // entry face unknown from inside; keep the near axis for uv purposes
  }
  if (t >= hit.t) {
    return;
  }
  const Vec3 x = origin + dir * t;
  const double h[3] = {x.x, x.y, x.z};
  const int ua = (near_axis + 1) % 3;
  const int va = (near_axis + 2) % 3;
  hit.t = t;
  hit.u = h[ua];
  hit.v = h[va];
  hit.primitive = &p;
}

void validate_primitive(const Primitive& p) {
  switch (p.kind) {
  case Primitive::Kind::plane:
    require(norm(p.normal) > 0.0, Errc::invalid_argument, "plane normal must be nonzero");
    break;
  case Primitive::Kind::sphere:
    require(p.radius > 0.0, Errc::invalid_argument, "sphere radius must be positive");
    break;
  case Primitive::Kind::box:
    require(p.box_min.x < p.box_max.x && p.box_min.y < p.box_max.y && p.box_min.z < p.box_max.z,
            Errc::invalid_argument, "box min must be strictly below max");
    break;
  }
}

} // namespace

RaycastResult raycast(const Camera& camera, const std::vector<Primitive>& primitives, int width,
                      int height) {
  for (const Primitive& p : primitives) {
    validate_primitive(p);
  }
  RaycastResult out;
  out.image = Image::filled(width, height, kBackground);
  out.depth = ScalarMap::filled(width, height, 0.0f);

  const Vec3 origin = camera.center();
  const Mat3 cam_to_world = camera.rotation.transposed();
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      // Direction scaled so that the ray parameter equals camera-space z.
      const Vec3 dir_cam{(x + 0.5 - camera.cx) / camera.fx, (y + 0.5 - camera.cy) / camera.fy, 1.0};
      const Vec3 dir = cam_to_world * dir_cam;

      Hit hit;
      for (const Primitive& p : primitives) {
        switch (p.kind) {
        case Primitive::Kind::plane:
          intersect_plane(p, origin, dir, hit);
          break;
        case Primitive::Kind::sphere:
          intersect_sphere(p, origin, dir, hit);
          break;
        case Primitive::Kind::box:
          intersect_box(p, origin, dir, hit);
          break;
        }
      }
      if (hit.primitive != nullptr) {
        const std::array<float, 3> rgb = texture_eval(hit.primitive->texture, hit.u, hit.v);
        out.image.at(x, y, 0) = rgb[0];
        out.image.at(x, y, 1) = rgb[1];
        out.image.at(x, y, 2) = rgb[2];
        out.depth.at(x, y) = static_cast<float>(hit.t);
      }
    }
  }
  return out;
}

namespace {

Primitive animated(const Primitive& p, const Vec3& offset) {
  Primitive out = p;
  out.point = out.point + offset;
  out.center = out.center + offset;
  out.box_min = out.box_min + offset;
  out.box_max = out.box_max + offset;
  return out;
}

} // namespace

std::vector<GroundTruthView> generate_scene(const SceneSpec& spec) {
  require(spec.frames >= 1, Errc::invalid_argument, "scene needs at least one frame");
  require(spec.cameras.size() >= 2, Errc::invalid_argument, "scene needs at least two cameras");

  std::vector<GroundTruthView> views;
  views.reserve(spec.cameras.size() * static_cast<size_t>(spec.frames));
  for (size_t view_id = 0; view_id < spec.cameras.size(); ++view_id) {
    for (int frame = 0; frame < spec.frames; ++frame) {
      std::vector<Primitive> primitives = spec.primitives;
      if (spec.animation.primitive_index >= 0 &&
          spec.animation.primitive_index < static_cast<int>(primitives.size())) {
        const Vec3 offset = spec.animation.velocity * static_cast<double>(frame);
        primitives[static_cast<size_t>(spec.animation.primitive_index)] =
            animated(primitives[static_cast<size_t>(spec.animation.primitive_index)], offset);
      }
      RaycastResult rc = raycast(spec.cameras[view_id], primitives, spec.width, spec.height);
      GroundTruthView v;
      v.view_id = static_cast<int>(view_id);
      v.frame_id = frame;
      v.image = std::move(rc.image);
      v.depth = std::move(rc.depth);
      v.camera = spec.cameras[view_id];
      views.push_back(std::move(v));
    }
  }
  return views;
}

SceneSpec make_desk_spec(uint64_t seed, int width, int height, int n_views, int n_frames) {
  SplitMix64 rng(seed * 0x51ab5f1ull + 17);
  auto jitter = [&](double lo, double hi) { return lo + (hi - lo) * rng.next_double(); };

  SceneSpec spec;
  spec.seed = seed;
  spec.width = width;
  spec.height = height;
  spec.frames = n_frames;

  const Vec3 lookat{0.0, 0.45, 0.0};
  const double focal = 0.9 * static_cast<double>(width);
  spec.cameras = camera_arc(n_views, jitter(3.0, 3.4), lookat, jitter(1.1, 1.4), focal, focal,
                            width / 2.0, height / 2.0);

  auto color = [&](double base) -> std::array<float, 3> {
    return {static_cast<float>(base + jitter(-0.08, 0.08)),
            static_cast<float>(base + jitter(-0.08, 0.08)),
            static_cast<float>(base + jitter(-0.08, 0.08))};
  };

  Primitive ground;
  ground.kind = Primitive::Kind::plane;
  ground.point = {0.0, 0.0, 0.0};
  ground.normal = {0.0, 1.0, 0.0};
  ground.texture = {TextureKind::checker, jitter(2.2, 2.8), color(0.82), color(0.28), 0};
  spec.primitives.push_back(ground);

  Primitive wall;
  wall.kind = Primitive::Kind::plane;
  wall.point = {0.0, 0.0, -1.7};
  wall.normal = {0.0, 0.0, 1.0};
  wall.texture = {TextureKind::checker, jitter(1.4, 1.9), color(0.72), color(0.2), 0};
  spec.primitives.push_back(wall);

  Primitive ball;
  ball.kind = Primitive::Kind::sphere;
  ball.center = {jitter(-0.6, -0.35), 0.35, jitter(-0.3, -0.05)};
  ball.radius = jitter(0.3, 0.4);
  ball.texture = {TextureKind::value_noise, jitter(5.0, 7.0), {}, {}, seed * 7 + 1};
  spec.primitives.push_back(ball);

  Primitive crate;
  crate.kind = Primitive::Kind::box;
  const Vec3 cmin{jitter(0.1, 0.25), 0.0, jitter(-0.55, -0.4)};
  crate.box_min = cmin;
  crate.box_max = cmin + Vec3{jitter(0.5, 0.7), jitter(0.45, 0.6), jitter(0.4, 0.5)};
  crate.texture = {TextureKind::checker, jitter(7.0, 9.0), color(0.88), color(0.35), 0};
  spec.primitives.push_back(crate);

  spec.animation.primitive_index = 2; // the sphere drifts between frames
  spec.animation.velocity = {0.015, 0.0, 0.008};
  return spec;
}

// --- JSON ----------------------------------------------------------------

namespace {

nlohmann::json vec_to_json(const Vec3& v) { return nlohmann::json::array({v.x, v.y, v.z}); }

Vec3 vec_from_json(const nlohmann::json& j) {
  require(j.is_array() && j.size() == 3, Errc::malformed_header, "expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

nlohmann::json color_to_json(const std::array<float, 3>& c) {
  return nlohmann::json::array({c[0], c[1], c[2]});
}

std::array<float, 3> color_from_json(const nlohmann::json& j) {
  require(j.is_array() && j.size() == 3, Errc::malformed_header, "expected an rgb triple");
  return {j[0].get<float>(), j[1].get<float>(), j[2].get<float>()};
}

nlohmann::json camera_to_json(const Camera& cam) {
  nlohmann::json j;
  j["fx"] = cam.fx;
  j["fy"] = cam.fy;
  j["cx"] = cam.cx;
  j["cy"] = cam.cy;
  j["R"] = cam.rotation.m;
  j["t"] = vec_to_json(cam.translation);
  return j;
}

Camera camera_from_json(const nlohmann::json& j) {
  Camera cam;
  cam.fx = j.at("fx").get<double>();
  cam.fy = j.at("fy").get<double>();
  cam.cx = j.at("cx").get<double>();
  cam.cy = j.at("cy").get<double>();
  const auto& r = j.at("R");
  require(r.is_array() && r.size() == 9, Errc::malformed_header, "camera R must have 9 entries");
  for (size_t i = 0; i < 9; ++i) {
    cam.rotation.m[i] = r[i].get<double>();
  }
  cam.translation = vec_from_json(j.at("t"));
  require(cam.fx > 0.0 && cam.fy > 0.0, Errc::invalid_argument, "focal lengths must be positive");
  require(orthonormality_defect(cam.rotation) < 1e-6, Errc::invalid_argument,
          "camera rotation is not orthonormal");
  return cam;
}

nlohmann::json texture_to_json(const Texture& t) {
  nlohmann::json j;
  j["type"] = t.kind == TextureKind::checker ? "checker" : "value_noise";
  j["scale"] = t.scale;
  if (t.kind == TextureKind::checker) {
    j["color_a"] = color_to_json(t.color_a);
    j["color_b"] = color_to_json(t.color_b);
  } else {
    j["seed"] = t.seed;
  }
  return j;
}

Texture texture_from_json(const nlohmann::json& j) {
  Texture t;
  const std::string type = j.at("type").get<std::string>();
  if (type == "checker") {
    t.kind = TextureKind::checker;
    t.color_a = color_from_json(j.at("color_a"));
    t.color_b = color_from_json(j.at("color_b"));
  } else if (type == "value_noise") {
    t.kind = TextureKind::value_noise;
    t.seed = j.at("seed").get<uint64_t>();
  } else {
    fail(Errc::malformed_header, "unknown texture type '" + type + "'");
  }
  t.scale = j.value("scale", 1.0);
  return t;
}

nlohmann::json primitive_to_json(const Primitive& p) {
  nlohmann::json j;
  switch (p.kind) {
  case Primitive::Kind::plane:
    j["kind"] = "plane";
    j["point"] = vec_to_json(p.point);
    j["normal"] = vec_to_json(p.normal);
    break;
  case Primitive::Kind::sphere:
    j["kind"] = "sphere";
    j["center"] = vec_to_json(p.center);
    j["radius"] = p.radius;
    break;
  case Primitive::Kind::box:
    j["kind"] = "box";
    j["min"] = vec_to_json(p.box_min);
    j["max"] = vec_to_json(p.box_max);
    break;
  }
  j["texture"] = texture_to_json(p.texture);
  return j;
}

Primitive primitive_from_json(const nlohmann::json& j) {
  Primitive p;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "plane") {
    p.kind = Primitive::Kind::plane;
    p.point = vec_from_json(j.at("point"));
    p.normal = vec_from_json(j.at("normal"));
  } else if (kind == "sphere") {
    p.kind = Primitive::Kind::sphere;
    p.center = vec_from_json(j.at("center"));
    p.radius = j.at("radius").get<double>();
  } else if (kind == "box") {
    p.kind = Primitive::Kind::box;
    p.box_min = vec_from_json(j.at("min"));
    p.box_max = vec_from_json(j.at("max"));
  } else {
    fail(Errc::malformed_header, "unknown primitive kind '" + kind + "'");
  }
  p.texture = texture_from_json(j.at("texture"));
  return p;
}

nlohmann::json norm_params_to_json(const NormParams& p) {
  nlohmann::json j;
  j["mean"] = color_to_json(p.mean);
  j["std"] = color_to_json(p.stddev);
  return j;
}

NormParams norm_params_from_json(const nlohmann::json& j) {
  NormParams p;
  p.mean = color_from_json(j.at("mean"));
  p.stddev = color_from_json(j.at("std"));
  for (float s : p.stddev) {
    require(s > 0.0f, Errc::invalid_argument, "standardization std must be positive");
  }
  return p;
}

} // namespace

nlohmann::json spec_to_json(const SceneSpec& spec) {
  nlohmann::json j;
  j["seed"] = spec.seed;
  j["width"] = spec.width;
  j["height"] = spec.height;
  j["frames"] = spec.frames;
  nlohmann::json cams = nlohmann::json::array();
  for (const Camera& c : spec.cameras) {
    cams.push_back(camera_to_json(c));
  }
  j["cameras"] = cams;
  nlohmann::json prims = nlohmann::json::array();
  for (const Primitive& p : spec.primitives) {
    prims.push_back(primitive_to_json(p));
  }
  j["primitives"] = prims;
  if (spec.animation.primitive_index >= 0) {
    j["animation"] = {{"primitive", spec.animation.primitive_index},
                      {"velocity", vec_to_json(spec.animation.velocity)}};
  }
  j["norm_params"] = norm_params_to_json(spec.norm_params);
  return j;
}

SceneSpec spec_from_json(const nlohmann::json& j) {
  SceneSpec spec;
  spec.seed = j.value("seed", uint64_t{0});
  spec.width = j.at("width").get<int>();
  spec.height = j.at("height").get<int>();
  spec.frames = j.value("frames", 1);
  require(spec.width > 0 && spec.height > 0, Errc::invalid_argument, "bad scene dimensions");

  const auto& cams = j.at("cameras");
  if (cams.is_object() && cams.contains("arc")) {
    const auto& arc = cams.at("arc");
    const double focal = arc.value("focal", 0.9 * spec.width);
    spec.cameras = camera_arc(arc.at("count").get<int>(), arc.at("radius").get<double>(),
                              vec_from_json(arc.at("lookat")), arc.value("height", 1.2), focal,
                              focal, spec.width / 2.0, spec.height / 2.0);
  } else if (cams.is_array()) {
    for (const auto& c : cams) {
      spec.cameras.push_back(camera_from_json(c));
    }
  } else {
    fail(Errc::malformed_header, "cameras must be a list or {\"arc\": ...}");
  }

  for (const auto& p : j.at("primitives")) {
    spec.primitives.push_back(primitive_from_json(p));
  }
  if (j.contains("animation")) {
    spec.animation.primitive_index = j["animation"].at("primitive").get<int>();
    spec.animation.velocity = vec_from_json(j["animation"].at("velocity"));
  }
  if (j.contains("norm_params")) {
    spec.norm_params = norm_params_from_json(j["norm_params"]);
  }
  return spec;
}

SceneSpec load_spec(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::malformed_header, "cannot parse scene spec " + path.string() + ": " + e.what());
  }
  return spec_from_json(j);
}

// --- manifest ------------------------------------------------------------

namespace {

std::string view_stem(int view_id, int frame_id) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "v%03d_f%03d", view_id, frame_id);
  return buf;
}

} // namespace

void write_scene(const SceneSpec& spec, const std::filesystem::path& out_dir) {
  const std::vector<GroundTruthView> views = generate_scene(spec);
  ensure_directory(out_dir / "images");
  ensure_directory(out_dir / "depth");

  nlohmann::json manifest;
  manifest["width"] = spec.width;
  manifest["height"] = spec.height;
  manifest["view_count"] = spec.cameras.size();
  manifest["frame_count"] = spec.frames;
  manifest["norm_params"] = norm_params_to_json(spec.norm_params);
  manifest["spec"] = spec_to_json(spec);

  nlohmann::json entries = nlohmann::json::array();
  for (const GroundTruthView& v : views) {
    const std::string stem = view_stem(v.view_id, v.frame_id);
    const std::string image_rel = "images/" + stem + ".ppm";
    const std::string depth_rel = "depth/" + stem + ".pfm";
    write_ppm(v.image, out_dir / image_rel);
    write_pfm(v.depth, out_dir / depth_rel);
    nlohmann::json e;
    e["view_id"] = v.view_id;
    e["frame_id"] = v.frame_id;
    e["image"] = image_rel;
    e["depth"] = depth_rel;
    e["camera"] = camera_to_json(v.camera);
    entries.push_back(e);
  }
  manifest["views"] = entries;
  atomic_write(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

Scene load_manifest(const std::filesystem::path& manifest_path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(manifest_path));
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::malformed_header,
         "cannot parse manifest " + manifest_path.string() + ": " + e.what());
  }
  Scene scene;
  scene.root = manifest_path.parent_path();
  scene.width = j.at("width").get<int>();
  scene.height = j.at("height").get<int>();
  scene.view_count = j.at("view_count").get<int>();
  scene.frame_count = j.at("frame_count").get<int>();
  scene.norm_params = norm_params_from_json(j.at("norm_params"));
  scene.spec_echo = j.value("spec", nlohmann::json::object());
  for (const auto& e : j.at("views")) {
    SceneViewEntry entry;
    entry.view_id = e.at("view_id").get<int>();
    entry.frame_id = e.at("frame_id").get<int>();
    entry.image_path = scene.root / e.at("image").get<std::string>();
    entry.depth_path = scene.root / e.at("depth").get<std::string>();
    entry.camera = camera_from_json(e.at("camera"));
    scene.views.push_back(entry);
  }
  std::sort(scene.views.begin(), scene.views.end(), [](const auto& a, const auto& b) {
    return std::pair(a.view_id, a.frame_id) < std::pair(b.view_id, b.frame_id);
  });
  require(static_cast<int>(scene.views.size()) == scene.view_count * scene.frame_count,
          Errc::malformed_header, "manifest view list is inconsistent with its counts");
  return scene;
}

const SceneViewEntry& Scene::entry(int view_id, int frame_id) const {
  for (const SceneViewEntry& e : views) {
    if (e.view_id == view_id && e.frame_id == frame_id) {
      return e;
    }
  }
  fail(Errc::invalid_argument, "no view " + std::to_string(view_id) + " frame " +
                                   std::to_string(frame_id) + " in manifest");
}

GroundTruthView load_view(const Scene& scene, int view_id, int frame_id) {
  const SceneViewEntry& e = scene.entry(view_id, frame_id);
  GroundTruthView v;
  v.view_id = view_id;
  v.frame_id = frame_id;
  v.image = read_ppm(e.image_path);
  v.depth = read_pfm_map(e.depth_path);
  v.camera = e.camera;
  return v;
}

} // namespace lehopp
