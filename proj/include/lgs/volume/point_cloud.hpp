#pragma once

#include "lgs/volume/raymarch.hpp"
#include "lgs/volume/volume.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace lgs {

struct ColoredPoint {
  Vec3d position = Vec3d::Zero();
  Vec3d color = Vec3d::Zero();
  int layer = 0;
};

/// Surface approximation of what `tf` makes visible: rays start on a sphere
/// enclosing the volume, aim at uniform points inside its bounds, and emit a
/// point at the first sample where the opacity accumulated along the ray
/// reaches `alpha_threshold`. Semi-transparent material thus seeds points just
/// inside its surface instead of none.
inline std::vector<ColoredPoint> init_point_cloud(const VoxelVolume& vol, const TransferFunction& tf,
                                                  int ray_budget, double alpha_threshold,
                                                  std::uint64_t seed, int layer = 0) {
  if (!(alpha_threshold > 0.0 && alpha_threshold <= 1.0))
    throw std::invalid_argument("init_point_cloud: alpha_threshold must be in (0,1]");
  const ClassifiedVolume classified(vol, tf);
  const Vec3d lo = vol.bounds_min(), hi = vol.bounds_max();
  const Vec3d mid = 0.5 * (lo + hi);
  const double radius = 0.5 * (hi - lo).norm() * 1.01;
  const double step = 0.5 * vol.reference_step();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<ColoredPoint> points;
  for (int r = 0; r < ray_budget; ++r) {
    const double z = 2.0 * unit(rng) - 1.0;
    const double phi = 2.0 * std::numbers::pi * unit(rng);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Vec3d origin = mid + radius * Vec3d(s * std::cos(phi), s * std::sin(phi), z);
    const Vec3d target(lo.x() + (hi.x() - lo.x()) * unit(rng), lo.y() + (hi.y() - lo.y()) * unit(rng),
                       lo.z() + (hi.z() - lo.z()) * unit(rng));
    const Vec3d dir = (target - origin).normalized();
    double t0 = 0.0, t1 = 0.0;
    if (!intersect_box(origin, dir, lo, hi, t0, t1)) continue;
    double transmittance = 1.0;
    for (double t = std::max(t0, 0.0) + 0.5 * step; t < t1; t += step) {
      const Vec3d p = origin + t * dir;
      const Vec4<double> rgba = classified.sample(p);
      if (rgba[3] <= 0.0) continue;
      transmittance *= std::pow(1.0 - rgba[3], step / vol.reference_step());
      if (1.0 - transmittance >= alpha_threshold) {
        points.push_back({p, rgba.head<3>(), layer});
        break;
      }
    }
  }
  return points;
}

}  // namespace lgs
