#pragma once

#include "lgs/splat/gaussian.hpp"
#include "lgs/splat/sh.hpp"
#include "lgs/volume/point_cloud.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace lgs {

/// Mean distance from each point to its k nearest other points, using a
/// uniform grid. Points with no neighbours get `fallback`.
inline std::vector<double> knn_mean_distance(const std::vector<Vec3d>& pts, int k = 3, double fallback = 0.01) {
  const std::size_t n = pts.size();
  std::vector<double> out(n, fallback);
  if (n < 2) return out;
  Vec3d lo = pts[0], hi = pts[0];
  for (const auto& p : pts) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const Vec3d ext = (hi - lo).cwiseMax(Vec3d::Constant(1e-9));
  // About two points per cell.
  const double cell = std::max(std::cbrt(ext.prod() * 2.0 / static_cast<double>(n)), ext.maxCoeff() / 256.0);
  std::array<int, 3> dims;
  for (int a = 0; a < 3; ++a) dims[a] = std::max(1, static_cast<int>(std::ceil(ext[a] / cell)));
  auto cell_of = [&](const Vec3d& p) {
    std::array<int, 3> c;
    for (int a = 0; a < 3; ++a) c[a] = std::clamp(static_cast<int>((p[a] - lo[a]) / cell), 0, dims[a] - 1);
    return c;
  };
  const std::size_t n_cells = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  auto flat = [&](int x, int y, int z) { return (static_cast<std::size_t>(z) * dims[1] + y) * dims[0] + x; };
  std::vector<std::uint32_t> start(n_cells + 1, 0), items(n);
  std::vector<std::size_t> cell_idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = cell_of(pts[i]);
    cell_idx[i] = flat(c[0], c[1], c[2]);
    ++start[cell_idx[i] + 1];
  }
  for (std::size_t c = 0; c < n_cells; ++c) start[c + 1] += start[c];
  std::vector<std::uint32_t> cursor(start.begin(), start.end() - 1);
  for (std::size_t i = 0; i < n; ++i) items[cursor[cell_idx[i]]++] = static_cast<std::uint32_t>(i);

  const int max_ring = std::max({dims[0], dims[1], dims[2]});
#pragma omp parallel for schedule(dynamic, 256)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    const auto c = cell_of(pts[i]);
    std::vector<double> best;  // sorted squared distances, at most k
    for (int ring = 0; ring <= max_ring; ++ring) {
      for (int z = c[2] - ring; z <= c[2] + ring; ++z) {
        if (z < 0 || z >= dims[2]) continue;
        for (int y = c[1] - ring; y <= c[1] + ring; ++y) {
          if (y < 0 || y >= dims[1]) continue;
          for (int x = c[0] - ring; x <= c[0] + ring; ++x) {
            if (x < 0 || x >= dims[0]) continue;
            if (std::max({std::abs(x - c[0]), std::abs(y - c[1]), std::abs(z - c[2])}) != ring) continue;
            const std::size_t f = flat(x, y, z);
            for (std::uint32_t s = start[f]; s < start[f + 1]; ++s) {
              const std::uint32_t j = items[s];
              if (j == i) continue;
              const double d2 = (pts[j] - pts[i]).squaredNorm();
              if (static_cast<int>(best.size()) < k || d2 < best.back()) {
                best.insert(std::upper_bound(best.begin(), best.end(), d2), d2);
                if (static_cast<int>(best.size()) > k) best.pop_back();
              }
            }
          }
        }
      }
      // Anything beyond this ring is at least ring * cell away.
      if (static_cast<int>(best.size()) == k && best.back() <= (ring * cell) * (ring * cell)) break;
    }
    if (!best.empty()) {
      double s = 0.0;
      for (double d2 : best) s += std::sqrt(d2);
      out[i] = s / static_cast<double>(best.size());
    }
  }
  return out;
}

/// New Gaussians for `layer` from its initial points: DC color from the
/// point color, isotropic scale from the 3-NN mean distance, identity
/// rotation, opacity `init_opacity`.
inline std::vector<Gaussian<float>> init_gaussians(const std::vector<ColoredPoint>& points, int layer,
                                                   double init_opacity = 0.1) {
  if (points.empty()) throw std::invalid_argument("no initial points for layer " + std::to_string(layer));
  std::vector<Vec3d> pos;
  pos.reserve(points.size());
  for (const auto& p : points) pos.push_back(p.position);
  const auto dist = knn_mean_distance(pos);
  std::vector<Gaussian<float>> out;
  out.reserve(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    Gaussian<float> g;
    g.position = points[i].position.cast<float>();
    g.log_scale.setConstant(static_cast<float>(std::log(std::max(dist[i], 1e-7))));
    g.opacity_logit = inverse_sigmoid(static_cast<float>(init_opacity));
    for (int c = 0; c < 3; ++c) g.sh_at(0, c) = rgb_to_sh_dc(static_cast<float>(points[i].color[c]));
    g.layer = layer;
    out.push_back(g);
  }
  return out;
}

}  // namespace lgs
