#pragma once

#include "lgs/core/math.hpp"

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgs {

/// Scalar density grid. Voxel (i, j, k) has its center at
/// origin + (i, j, k) * spacing; values lie in [0, 1].
struct VoxelVolume {
  std::array<int, 3> dims{0, 0, 0};
  Vec3d spacing = Vec3d::Ones();
  Vec3d origin = Vec3d::Zero();
  std::vector<float> data;

  VoxelVolume() = default;
  VoxelVolume(std::array<int, 3> d, Vec3d s, Vec3d o)
      : dims(d), spacing(s), origin(o),
        data(static_cast<std::size_t>(d[0]) * d[1] * d[2], 0.0f) {}

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * dims[1] + j) * dims[0] + i;
  }
  float& at(int i, int j, int k) { return data[index(i, j, k)]; }
  float at(int i, int j, int k) const { return data[index(i, j, k)]; }

  /// Value with zero padding outside the grid.
  float fetch(int i, int j, int k) const {
    if (i < 0 || j < 0 || k < 0 || i >= dims[0] || j >= dims[1] || k >= dims[2]) return 0.0f;
    return data[index(i, j, k)];
  }

  Vec3d voxel_center(int i, int j, int k) const {
    return origin + Vec3d(i, j, k).cwiseProduct(spacing);
  }

  /// Region where sampling can be non-zero: voxel-center hull grown by one
  /// spacing on every side (the zero padding ramps down over that band).
  Vec3d bounds_min() const { return origin - spacing; }
  Vec3d bounds_max() const {
    return origin + Vec3d(dims[0], dims[1], dims[2]).cwiseProduct(spacing);
  }
  Vec3d center() const {
    return origin + 0.5 * Vec3d(dims[0] - 1, dims[1] - 1, dims[2] - 1).cwiseProduct(spacing);
  }
  double reference_step() const { return spacing.minCoeff(); }

  void validate() const {
    for (int a = 0; a < 3; ++a) {
      if (dims[a] <= 0) throw std::invalid_argument("volume dims must be positive");
      if (!(spacing[a] > 0.0)) throw std::invalid_argument("volume spacing must be positive");
    }
    if (data.size() != static_cast<std::size_t>(dims[0]) * dims[1] * dims[2])
      throw std::invalid_argument("volume data length does not match dims");
    for (float v : data)
      if (!std::isfinite(v) || v < 0.0f || v > 1.0f)
        throw std::invalid_argument("volume values must be finite and within [0,1]");
  }

  /// Fills every voxel from a function of its center position.
  template <class Fn> void fill(Fn&& density_at) {
    for (int k = 0; k < dims[2]; ++k)
      for (int j = 0; j < dims[1]; ++j)
        for (int i = 0; i < dims[0]; ++i) at(i, j, k) = static_cast<float>(density_at(voxel_center(i, j, k)));
  }
};

/// Trilinear reconstruction; zero outside the volume.
inline double sample_trilinear(const VoxelVolume& vol, const Vec3d& p) {
  const Vec3d u = (p - vol.origin).cwiseQuotient(vol.spacing);
  if (u.x() <= -1.0 || u.y() <= -1.0 || u.z() <= -1.0 || u.x() >= vol.dims[0] ||
      u.y() >= vol.dims[1] || u.z() >= vol.dims[2])
    return 0.0;
  const int i0 = static_cast<int>(std::floor(u.x()));
  const int j0 = static_cast<int>(std::floor(u.y()));
  const int k0 = static_cast<int>(std::floor(u.z()));
  const double fx = u.x() - i0, fy = u.y() - j0, fz = u.z() - k0;
  const double c000 = vol.fetch(i0, j0, k0), c100 = vol.fetch(i0 + 1, j0, k0);
  const double c010 = vol.fetch(i0, j0 + 1, k0), c110 = vol.fetch(i0 + 1, j0 + 1, k0);
  const double c001 = vol.fetch(i0, j0, k0 + 1), c101 = vol.fetch(i0 + 1, j0, k0 + 1);
  const double c011 = vol.fetch(i0, j0 + 1, k0 + 1), c111 = vol.fetch(i0 + 1, j0 + 1, k0 + 1);
  const double c00 = c000 + (c100 - c000) * fx, c10 = c010 + (c110 - c010) * fx;
  const double c01 = c001 + (c101 - c001) * fx, c11 = c011 + (c111 - c011) * fx;
  const double c0 = c00 + (c10 - c00) * fy, c1 = c01 + (c11 - c01) * fy;
  return c0 + (c1 - c0) * fz;
}

/// Piecewise-linear density -> RGBA map.
struct TransferFunction {
  struct Breakpoint {
    double density;
    Vec4<double> rgba;
  };
  std::vector<Breakpoint> points;

  void validate() const {
    if (points.size() < 2) throw std::invalid_argument("transfer function needs two breakpoints");
    if (points.front().density != 0.0 || points.back().density != 1.0)
      throw std::invalid_argument("transfer function must span densities 0 to 1");
    for (std::size_t i = 1; i < points.size(); ++i)
      if (!(points[i].density > points[i - 1].density))
        throw std::invalid_argument("transfer function densities must increase strictly");
    for (const auto& b : points)
      for (int c = 0; c < 4; ++c)
        if (!(b.rgba[c] >= 0.0 && b.rgba[c] <= 1.0))
          throw std::invalid_argument("transfer function colors must be within [0,1]");
  }
};

inline Vec4<double> apply_transfer(const TransferFunction& tf, double d) {
  const auto& pts = tf.points;
  if (d <= pts.front().density) return pts.front().rgba;
  if (d >= pts.back().density) return pts.back().rgba;
  std::size_t hi = 1;
  while (pts[hi].density < d) ++hi;
  const auto& a = pts[hi - 1];
  const auto& b = pts[hi];
  if (d == b.density) return b.rgba;
  const double t = (d - a.density) / (b.density - a.density);
  return a.rgba + t * (b.rgba - a.rgba);
}

/// A volume classified voxel by voxel before interpolation. Each voxel keeps
/// its opacity-weighted color and alpha, so a sample between two materials
/// blends those two and never shows the transfer colors of the densities in
/// between. Outside the grid the value is the classification of density 0.
struct ClassifiedVolume {
  std::array<int, 3> dims{0, 0, 0};
  Vec3d spacing = Vec3d::Ones();
  Vec3d origin = Vec3d::Zero();
  std::vector<Vec4<double>> voxels;  // (r * a, g * a, b * a, a)
  Vec4<double> padding = Vec4<double>::Zero();

  ClassifiedVolume(const VoxelVolume& vol, const TransferFunction& tf)
      : dims(vol.dims), spacing(vol.spacing), origin(vol.origin), voxels(vol.data.size()) {
    tf.validate();
    auto classify = [&](double d) {
      const Vec4<double> c = apply_transfer(tf, d);
      return Vec4<double>(c[0] * c[3], c[1] * c[3], c[2] * c[3], c[3]);
    };
    for (std::size_t i = 0; i < voxels.size(); ++i) voxels[i] = classify(vol.data[i]);
    padding = classify(0.0);
  }

  const Vec4<double>& fetch(int i, int j, int k) const {
    if (i < 0 || j < 0 || k < 0 || i >= dims[0] || j >= dims[1] || k >= dims[2]) return padding;
    return voxels[(static_cast<std::size_t>(k) * dims[1] + j) * dims[0] + i];
  }

  Vec3d bounds_min() const { return origin - spacing; }
  Vec3d bounds_max() const { return origin + Vec3d(dims[0], dims[1], dims[2]).cwiseProduct(spacing); }
  double reference_step() const { return spacing.minCoeff(); }

  /// Trilinear sample as straight color and alpha.
  Vec4<double> sample(const Vec3d& p) const {
    const Vec3d u = (p - origin).cwiseQuotient(spacing);
    Vec4<double> acc;
    if (u.x() <= -1.0 || u.y() <= -1.0 || u.z() <= -1.0 || u.x() >= dims[0] || u.y() >= dims[1] ||
        u.z() >= dims[2]) {
      acc = padding;
    } else {
      const int i0 = static_cast<int>(std::floor(u.x()));
      const int j0 = static_cast<int>(std::floor(u.y()));
      const int k0 = static_cast<int>(std::floor(u.z()));
      const double f[3] = {u.x() - i0, u.y() - j0, u.z() - k0};
      acc = Vec4<double>::Zero();
      for (int c = 0; c < 8; ++c) {
        const int dx = c & 1, dy = (c >> 1) & 1, dz = c >> 2;
        const double w = (dx ? f[0] : 1.0 - f[0]) * (dy ? f[1] : 1.0 - f[1]) * (dz ? f[2] : 1.0 - f[2]);
        if (w != 0.0) acc += w * fetch(i0 + dx, j0 + dy, k0 + dz);
      }
    }
    if (!(acc[3] > 0.0)) return Vec4<double>::Zero();
    return Vec4<double>(acc[0] / acc[3], acc[1] / acc[3], acc[2] / acc[3], std::min(acc[3], 1.0));
  }
};

/// Parameter interval [t0, t1] where the ray hits the box; false on a miss.
inline bool intersect_box(const Vec3d& o, const Vec3d& d, const Vec3d& lo, const Vec3d& hi,
                          double& t0, double& t1) {
  t0 = -std::numeric_limits<double>::infinity();
  t1 = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (std::abs(d[a]) < 1e-300) {
      if (o[a] < lo[a] || o[a] > hi[a]) return false;
      continue;
    }
    double ta = (lo[a] - o[a]) / d[a];
    double tb = (hi[a] - o[a]) / d[a];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  return t1 >= t0;
}

}  // namespace lgs
