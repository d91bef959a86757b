#pragma once

#include "lgs/core/camera.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace lgs {

struct Intrinsics {
  double focal = 64.0;
  int width = 64;
  int height = 64;
  double near = 0.01;
};

/// Poses on a spherical band around `center` (z is up). Azimuths follow the
/// golden-angle spiral starting at 0; elevations are evenly stratified over
/// the band. A non-zero seed rotates the whole spiral by a seeded azimuth.
inline std::vector<Camera> generate_cameras(int n, const Vec3d& center, double radius,
                                            double elevation_min, double elevation_max,
                                            std::uint64_t seed, const Intrinsics& intr) {
  if (n < 1) throw std::invalid_argument("generate_cameras: need at least one camera");
  if (!(radius > 0.0)) throw std::invalid_argument("generate_cameras: radius must be positive");
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  double phase = 0.0;
  if (seed != 0) {
    std::mt19937_64 rng(seed);
    phase = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
  }
  std::vector<Camera> cams;
  cams.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double azimuth = std::fmod(phase + golden * i, 2.0 * std::numbers::pi);
    const double elevation = elevation_min + (elevation_max - elevation_min) * (i + 0.5) / n;
    const Vec3d offset(std::cos(elevation) * std::cos(azimuth),
                       std::cos(elevation) * std::sin(azimuth), std::sin(elevation));
    cams.push_back(Camera::look_at(center + radius * offset, center, Vec3d::UnitZ(), intr.focal,
                                   intr.width, intr.height, intr.near));
  }
  return cams;
}

}  // namespace lgs
