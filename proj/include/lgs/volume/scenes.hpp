#pragma once

#include "lgs/volume/cameras.hpp"
#include "lgs/volume/volume.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lgs {

enum class SceneId { two_layer, three_layer, transparency, anatomy_analog };

inline SceneId parse_scene_id(std::string_view name) {
  if (name == "two_layer") return SceneId::two_layer;
  if (name == "three_layer") return SceneId::three_layer;
  if (name == "transparency") return SceneId::transparency;
  if (name == "anatomy_analog") return SceneId::anatomy_analog;
  throw std::invalid_argument("unknown scene: " + std::string(name));
}

inline const char* scene_name(SceneId id) {
  switch (id) {
    case SceneId::two_layer: return "two_layer";
    case SceneId::three_layer: return "three_layer";
    case SceneId::transparency: return "transparency";
    case SceneId::anatomy_analog: return "anatomy_analog";
  }
  return "?";
}

/// A procedural volume with one transfer function per layer. Layer k's
/// transfer function shows everything layer k-1 shows plus more material.
struct Scene {
  SceneId id = SceneId::two_layer;
  VoxelVolume volume;
  std::vector<TransferFunction> layers;
  Vec3d center = Vec3d::Zero();
  double object_radius = 1.0;
  double camera_distance = 3.0;

  int layer_count() const { return static_cast<int>(layers.size()); }

  /// Focal length that frames the object with a small margin.
  Intrinsics intrinsics(int size) const {
    const double tan_half = 1.15 * object_radius / camera_distance;
    return Intrinsics{0.5 * size / tan_half, size, size, 0.01};
  }
};

namespace detail {

struct TfPoint {
  double d, r, g, b, a;
};

inline TransferFunction make_tf(std::initializer_list<TfPoint> pts) {
  TransferFunction tf;
  for (const auto& p : pts) tf.points.push_back({p.d, Vec4<double>(p.r, p.g, p.b, p.a)});
  tf.validate();
  return tf;
}

inline VoxelVolume cube_grid(double half_extent, int voxels_per_axis) {
  const double s = 2.0 * half_extent / (voxels_per_axis - 1);
  return VoxelVolume({voxels_per_axis, voxels_per_axis, voxels_per_axis}, Vec3d::Constant(s),
                     Vec3d::Constant(-half_extent));
}

inline int parity(double v, double cell) { return static_cast<int>(std::floor(v / cell + 1e-9)) & 1; }

// Inner plain white cube, outer cube 5% larger with a white/blue checker.
inline Scene two_layer_scene() {
  constexpr double inner = 0.5, outer = 0.525;
  Scene s;
  s.id = SceneId::two_layer;
  s.volume = cube_grid(0.6, 97);
  s.volume.fill([&](const Vec3d& p) {
    const double m = p.cwiseAbs().maxCoeff();
    if (m <= inner + 1e-9) return 1.0;
    if (m <= outer + 1e-9) {
      const double cell = 2.0 * outer / 4.0;
      const int par = parity(p.x() + outer, cell) ^ parity(p.y() + outer, cell) ^
                      parity(p.z() + outer, cell);
      return par ? 0.3 : 0.5;
    }
    return 0.0;
  });
  const TfPoint blue0{0.15, 0.15, 0.3, 0.85, 0.0};
  s.layers.push_back(make_tf({{0, 0, 0, 0, 0}, {0.75, 1, 1, 1, 0}, {0.85, 1, 1, 1, 1}, {1, 1, 1, 1, 1}}));
  s.layers.push_back(make_tf({{0, 0, 0, 0, 0},
                              blue0,
                              {0.25, 0.15, 0.3, 0.85, 1},
                              {0.35, 0.15, 0.3, 0.85, 1},
                              {0.45, 1, 1, 1, 1},
                              {1, 1, 1, 1, 1}}));
  s.object_radius = outer * std::sqrt(3.0);
  s.camera_distance = 2.6;
  return s;
}

// Checkered sphere, red/black cube outline around it, two translucent rings.
inline Scene three_layer_scene() {
  constexpr double sphere_r = 0.32, frame = 0.62, bar = 0.045, ring_R = 0.72, ring_r = 0.06;
  Scene s;
  s.id = SceneId::three_layer;
  s.volume = cube_grid(1.0, 97);
  s.volume.fill([&](const Vec3d& p) {
    double d = 0.0;
    if (p.norm() <= sphere_r) {
      const double cell = 0.16;
      const int par = parity(p.x() + 1, cell) ^ parity(p.y() + 1, cell) ^ parity(p.z() + 1, cell);
      d = par ? 0.95 : 0.85;
    }
    const Vec3d a = p.cwiseAbs();
    int near_faces = 0;
    for (int i = 0; i < 3; ++i)
      if (std::abs(a[i] - frame) <= bar) ++near_faces;
    if (near_faces >= 2 && a.maxCoeff() <= frame + bar) {
      const int par = parity(p.x() + p.y() + p.z() + 3.0, 0.31);
      d = std::max(d, par ? 0.65 : 0.55);
    }
    const double ta = std::hypot(std::hypot(p.x(), p.y()) - ring_R, p.z());
    const double tb = std::hypot(std::hypot(p.x(), p.z()) - ring_R, p.y());
    if (ta <= ring_r || tb <= ring_r) d = std::max(d, 0.3);
    return d;
  });
  s.layers.push_back(make_tf({{0, 0, 0, 0, 0},
                              {0.8, 0.02, 0.02, 0.02, 0},
                              {0.85, 0.02, 0.02, 0.02, 1},
                              {0.95, 0.1, 0.75, 0.2, 1},
                              {1, 0.1, 0.75, 0.2, 1}}));
  s.layers.push_back(make_tf({{0, 0, 0, 0, 0},
                              {0.5, 0.02, 0.02, 0.02, 0},
                              {0.55, 0.02, 0.02, 0.02, 1},
                              {0.65, 0.85, 0.1, 0.1, 1},
                              {0.75, 0.85, 0.1, 0.1, 1},
                              {0.85, 0.02, 0.02, 0.02, 1},
                              {0.95, 0.1, 0.75, 0.2, 1},
                              {1, 0.1, 0.75, 0.2, 1}}));
  s.layers.push_back(make_tf({{0, 0, 0, 0, 0},
                              {0.2, 0.3, 0.9, 0.4, 0},
                              {0.3, 0.3, 0.9, 0.4, 0.25},
                              {0.4, 0.3, 0.9, 0.4, 0.25},
                              {0.5, 0.02, 0.02, 0.02, 0},
                              {0.55, 0.02, 0.02, 0.02, 1},
                              {0.65, 0.85, 0.1, 0.1, 1},
                              {0.75, 0.85, 0.1, 0.1, 1},
                              {0.85, 0.02, 0.02, 0.02, 1},
                              {0.95, 0.1, 0.75, 0.2, 1},
                              {1, 0.1, 0.75, 0.2, 1}}));
  s.object_radius = (frame + bar) * std::sqrt(3.0);
  s.camera_distance = 3.4;
  return s;
}

// Two cubes with face-on net opacity 0.25 (green) and 0.375 (blue).
inline Scene transparency_scene() {
  constexpr double half = 0.22, cx = 0.33;
  Scene s;
  s.id = SceneId::transparency;
  s.volume = cube_grid(0.8, 97);
  const double sp = s.volume.spacing.x();
  s.volume.fill([&](const Vec3d& p) {
    const Vec3d g = (p - Vec3d(-cx, 0, 0)).cwiseAbs();
    const Vec3d b = (p - Vec3d(cx, 0, 0)).cwiseAbs();
    if (g.maxCoeff() <= half + 1e-9) return 0.4;
    if (b.maxCoeff() <= half + 1e-9) return 0.8;
    return 0.0;
  });
  // Per-voxel alpha so that the voxel count across a cube (plus the two
  // half-voxel ramps) integrates to the target net opacity.
  int inside = 0;
  for (int i = 0; i < s.volume.dims[0]; ++i)
    if (std::abs(s.volume.origin.x() + i * sp + cx) <= half + 1e-9) ++inside;
  const double a_green = 1.0 - std::pow(1.0 - 0.25, 1.0 / inside);
  const double a_blue = 1.0 - std::pow(1.0 - 0.375, 1.0 / inside);
  s.layers.push_back(make_tf({{0, 0.6, 1.0, 0.6, 0},
                              {0.4, 0.6, 1.0, 0.6, a_green},
                              {0.8, 0.6, 0.8, 1.0, a_blue},
                              {1, 0.6, 0.8, 1.0, a_blue}}));
  s.object_radius = Vec3d(cx + half, half, half).norm();
  s.camera_distance = 2.2;
  return s;
}

// Nested cylinders: bone rod with end knobs, striated muscle, skin.
inline Scene anatomy_scene() {
  Scene s;
  s.id = SceneId::anatomy_analog;
  s.volume = cube_grid(1.0, 97);
  s.volume.fill([&](const Vec3d& p) {
    const double r = std::hypot(p.x(), p.y());
    const double az = std::abs(p.z());
    const bool bone = (r <= 0.12 && az <= 0.75) || (p - Vec3d(0, 0, 0.75)).norm() <= 0.17 ||
                      (p - Vec3d(0, 0, -0.75)).norm() <= 0.17;
    if (bone) return 1.0;
    if (r <= 0.3 && az <= 0.62) {
      const double stripe = 0.5 + 0.5 * std::sin(10.0 * std::atan2(p.y(), p.x()) + 6.0 * p.z());
      return 0.55 + 0.1 * stripe;
    }
    if (r <= 0.38 && az <= 0.56) return 0.3;
    return 0.0;
  });
  s.layers.push_back(make_tf({{0, 0, 0, 0, 0},
                              {0.8, 0.93, 0.9, 0.8, 0},
                              {0.9, 0.93, 0.9, 0.8, 1},
                              {1, 0.93, 0.9, 0.8, 1}}));
  s.layers.push_back(make_tf({{0, 0, 0, 0, 0},
                              {0.45, 0.45, 0.05, 0.05, 0},
                              {0.55, 0.45, 0.05, 0.05, 1},
                              {0.65, 0.9, 0.25, 0.2, 1},
                              {0.8, 0.9, 0.25, 0.2, 1},
                              {0.9, 0.93, 0.9, 0.8, 1},
                              {1, 0.93, 0.9, 0.8, 1}}));
  s.layers.push_back(make_tf({{0, 0, 0, 0, 0},
                              {0.15, 0.95, 0.75, 0.6, 0},
                              {0.25, 0.95, 0.75, 0.6, 0.12},
                              {0.35, 0.95, 0.75, 0.6, 0.12},
                              {0.45, 0.45, 0.05, 0.05, 0.5},
                              {0.55, 0.45, 0.05, 0.05, 1},
                              {0.65, 0.9, 0.25, 0.2, 1},
                              {0.8, 0.9, 0.25, 0.2, 1},
                              {0.9, 0.93, 0.9, 0.8, 1},
                              {1, 0.93, 0.9, 0.8, 1}}));
  s.object_radius = std::hypot(0.38, 0.92);
  s.camera_distance = 3.0;
  return s;
}

}  // namespace detail

inline Scene build_scene(SceneId id) {
  switch (id) {
    case SceneId::two_layer: return detail::two_layer_scene();
    case SceneId::three_layer: return detail::three_layer_scene();
    case SceneId::transparency: return detail::transparency_scene();
    case SceneId::anatomy_analog: return detail::anatomy_scene();
  }
  throw std::invalid_argument("unknown scene id");
}

}  // namespace lgs
