#pragma once

#include "lgs/core/camera.hpp"
#include "lgs/core/image.hpp"
#include "lgs/volume/volume.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace lgs {

/// Emission-absorption compositing state for one ray (premultiplied color).
struct RaySample {
  Vec3d color = Vec3d::Zero();
  double alpha = 0.0;
};

inline constexpr double kRayTerminationTransmittance = 1e-4;

/// Marches one ray front to back with a fixed step. The transfer alpha is
/// defined per reference step (one voxel) and corrected for the actual step.
/// When `alpha_trace` is given it receives the accumulated alpha after every
/// sample.
inline RaySample march_ray(const ClassifiedVolume& vol, const Vec3d& origin, const Vec3d& dir, double step,
                           std::vector<double>* alpha_trace = nullptr) {
  RaySample out;
  double t0 = 0.0, t1 = 0.0;
  if (!intersect_box(origin, dir, vol.bounds_min(), vol.bounds_max(), t0, t1)) return out;
  t0 = std::max(t0, 0.0);
  const double exponent = step / vol.reference_step();
  double transmittance = 1.0;
  for (double t = t0 + 0.5 * step; t < t1; t += step) {
    const Vec4<double> rgba = vol.sample(origin + t * dir);
    if (rgba[3] == 0.0) {
      if (alpha_trace) alpha_trace->push_back(out.alpha);
      continue;
    }
    const double a = 1.0 - std::pow(1.0 - rgba[3], exponent);
    const double w = transmittance * a;
    out.color += w * rgba.head<3>();
    out.alpha += w;
    transmittance *= 1.0 - a;
    if (alpha_trace) alpha_trace->push_back(out.alpha);
    if (transmittance < kRayTerminationTransmittance) break;
  }
  return out;
}

/// Renders a straight-alpha RGBA image over a transparent background. With
/// `supersample` = n each pixel averages an n x n grid of sub-pixel rays in
/// premultiplied space, which antialiases silhouettes.
inline Image<float> raymarch(const ClassifiedVolume& vol, const Camera& cam, double step, int supersample = 1) {
  if (!(step > 0.0)) throw std::invalid_argument("raymarch step must be positive");
  if (supersample < 1) throw std::invalid_argument("raymarch supersample must be >= 1");
  cam.validate();
  Image<float> img(cam.width, cam.height, 4);
  const double inv_n = 1.0 / supersample;
#pragma omp parallel for schedule(dynamic, 4)
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      Vec3d color = Vec3d::Zero();
      double alpha = 0.0;
      for (int sy = 0; sy < supersample; ++sy)
        for (int sx = 0; sx < supersample; ++sx) {
          const Vec3d dir = cam.ray_direction(x + (sx + 0.5) * inv_n, y + (sy + 0.5) * inv_n);
          const RaySample s = march_ray(vol, cam.position, dir, step);
          color += s.color;
          alpha += s.alpha;
        }
      color *= inv_n * inv_n;
      alpha *= inv_n * inv_n;
      float* px = &img.at(x, y, 0);
      if (alpha > 0.0) {
        const Vec3d straight = color / alpha;
        for (int c = 0; c < 3; ++c) px[c] = static_cast<float>(std::clamp(straight[c], 0.0, 1.0));
      }
      px[3] = static_cast<float>(std::clamp(alpha, 0.0, 1.0));
    }
  }
  return img;
}

inline Image<float> raymarch(const VoxelVolume& vol, const TransferFunction& tf, const Camera& cam, double step,
                             int supersample = 1) {
  if (!(step > 0.0)) throw std::invalid_argument("raymarch step must be positive");
  return raymarch(ClassifiedVolume(vol, tf), cam, step, supersample);
}

}  // namespace lgs
