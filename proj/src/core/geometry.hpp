// Copyright Contributors to the lehopp Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cmath>

#include "error.hpp"

namespace lehopp {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }

inline Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  require(n > 0.0, Errc::invalid_argument, "cannot normalize a zero vector");
  return v * (1.0 / n);
}

/// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  double operator()(int r, int c) const { return m[static_cast<size_t>(3 * r + c)]; }
  double& operator()(int r, int c) { return m[static_cast<size_t>(3 * r + c)]; }

  Vec3 operator*(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }

  Mat3 transposed() const {
    Mat3 t;
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        t(r, c) = (*this)(c, r);
      }
    }
    return t;
  }

  static Mat3 from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2) {
    Mat3 out;
    out.m = {r0.x, r0.y, r0.z, r1.x, r1.y, r1.z, r2.x, r2.y, r2.z};
    return out;
  }
};

/// Largest absolute entry of R^T R - I; zero for a perfectly orthonormal R.
inline double orthonormality_defect(const Mat3& r) {
  double worst = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) {
        s += r(k, i) * r(k, j);
      }
      worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
    }
  }
  return worst;
}

/// Pinhole camera with a world-to-camera rigid pose: x_cam = R * x_world + t.
/// Camera axes follow the computer-vision convention (x right, y down,
/// z forward); pixel (x, y) is sampled at its center (x + 0.5, y + 0.5).
struct Camera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  Mat3 rotation;    // world-to-camera
  Vec3 translation; // world-to-camera

  Vec3 center() const { return rotation.transposed() * (-translation); }

  Vec3 to_camera(const Vec3& world) const { return rotation * world + translation; }

  /// World point of the ray through continuous pixel position (u, v) at
  /// camera-space depth z (depth measured along the camera z axis).
  Vec3 unproject(double u, double v, double depth) const {
    const Vec3 cam{(u - cx) / fx * depth, (v - cy) / fy * depth, depth};
    return rotation.transposed() * (cam - translation);
  }

  /// Projects a world point; returns false when it lies at or behind the
  /// camera plane. On success (u, v) are continuous pixel coordinates and
  /// depth is the camera-space z.
  bool project(const Vec3& world, double& u, double& v, double& depth) const {
    const Vec3 cam = to_camera(world);
    if (cam.z <= 1e-12) {
      return false;
    }
    u = fx * cam.x / cam.z + cx;
    v = fy * cam.y / cam.z + cy;
    depth = cam.z;
    return true;
  }
};

/// Builds a world-to-camera pose at `eye` aimed at `target`.
inline Camera look_at_camera(const Vec3& eye, const Vec3& target, double fx, double fy, double cx,
                             double cy) {
  const Vec3 forward = normalized(target - eye);
  Vec3 up{0.0, 1.0, 0.0};
  if (std::abs(dot(forward, up)) > 0.999) {
    up = {0.0, 0.0, 1.0}; // looking straight up or down
  }
  const Vec3 right = normalized(cross(forward, up));
  const Vec3 down = cross(forward, right);

  Camera cam;
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = cx;
  cam.cy = cy;
  cam.rotation = Mat3::from_rows(right, down, forward);
  cam.translation = cam.rotation * (-eye);
  return cam;
}

} // namespace lehopp
