#pragma once

#include "lgs/volume/cameras.hpp"
#include "lgs/volume/dataset.hpp"
#include "lgs/volume/point_cloud.hpp"
#include "lgs/volume/scenes.hpp"

#include <cstdint>
#include <stdexcept>

namespace lgs {

struct GenerateOptions {
  int views = 64;
  int size = 64;
  std::uint64_t seed = 0;
  int holdout_every = 8;
  int ray_budget = 5000;  // initial point rays per layer
  double alpha_threshold = 0.05;
  double elevation_min = -0.35, elevation_max = 0.9;
  double step_factor = 0.5;  // raymarch step relative to the voxel spacing
  int supersample = 3;       // sub-pixel rays per axis
};

/// Renders a scene's multi-layer dataset and its per-layer initial points.
inline DatasetSplit generate_dataset(const Scene& scene, const GenerateOptions& opt) {
  if (opt.views < 1) throw std::invalid_argument("generate_dataset: views must be >= 1");
  if (opt.size < 1) throw std::invalid_argument("generate_dataset: size must be >= 1");
  const auto cams = generate_cameras(opt.views, scene.center, scene.camera_distance, opt.elevation_min,
                                     opt.elevation_max, opt.seed, scene.intrinsics(opt.size));
  auto ds = render_dataset(scene.volume, scene.layers, cams, scene.volume.reference_step() * opt.step_factor,
                           opt.holdout_every, opt.supersample);
  for (int k = 0; k < scene.layer_count(); ++k)
    for (const auto& p : init_point_cloud(scene.volume, scene.layers[static_cast<std::size_t>(k)], opt.ray_budget,
                                          opt.alpha_threshold, opt.seed * 1000 + static_cast<std::uint64_t>(k) + 1, k))
      ds.train.init_points.push_back(p);
  return ds;
}

}  // namespace lgs
