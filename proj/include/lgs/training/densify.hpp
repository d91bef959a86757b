#pragma once

#include "lgs/splat/gaussian.hpp"
#include "lgs/splat/rasterizer.hpp"
#include "lgs/training/state.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace lgs {

inline constexpr double kSplitScaleDivisor = 1.6;

/// Screen-space gradient statistics gathered between densification events.
template <class T> struct DensifyStats {
  std::vector<double> grad_sum;  // sum of NDC positional gradient norms
  std::vector<int> visible;      // views in which the Gaussian was rendered
  std::vector<Vec3<T>> world_grad_sum;

  void resize(std::size_t n) {
    grad_sum.resize(n, 0.0);
    visible.resize(n, 0);
    world_grad_sum.resize(n, Vec3<T>::Zero());
  }
  void remap(const Remap& r) {
    apply_remap(grad_sum, r);
    apply_remap(visible, r);
    apply_remap(world_grad_sum, r, Vec3<T>(Vec3<T>::Zero()));
  }
  void reset() {
    std::fill(grad_sum.begin(), grad_sum.end(), 0.0);
    std::fill(visible.begin(), visible.end(), 0);
    std::fill(world_grad_sum.begin(), world_grad_sum.end(), Vec3<T>::Zero());
  }
  void accumulate(const CloudGradients<T>& g) {
    for (std::size_t i = 0; i < grad_sum.size(); ++i) {
      if (!g.visible[i]) continue;
      grad_sum[i] += static_cast<double>(g.screen_grad_norm[i]);
      visible[i] += 1;
      world_grad_sum[i] += g.grads[i].position;
    }
  }
  double average(std::size_t i) const { return visible[i] > 0 ? grad_sum[i] / visible[i] : 0.0; }
};

struct DensifyCounts {
  std::size_t cloned = 0;
  std::size_t split = 0;
  std::size_t pruned = 0;
};

/// Adaptive density control. Unfrozen Gaussians whose average NDC gradient
/// reaches `grad_threshold` are cloned when small (max scale <=
/// percent_dense * extent) or split into two children when large; then
/// unfrozen Gaussians with opacity below `min_opacity` are removed. Output
/// order: surviving originals, clones, split children.
template <class T>
Remap densify_and_prune(GaussianCloud<T>& cloud, const DensifyStats<T>& stats, double grad_threshold,
                        double percent_dense, double extent, double min_opacity, std::mt19937_64& rng,
                        DensifyCounts* counts = nullptr) {
  const std::size_t n = cloud.size();
  const double limit = percent_dense * extent;
  std::vector<Gaussian<T>> out;
  Remap r;
  out.reserve(n);
  std::vector<std::size_t> clone, split;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& g = cloud.gaussians[i];
    const bool hot = !g.frozen && stats.average(i) >= grad_threshold;
    const double max_scale = std::exp(static_cast<double>(g.log_scale.maxCoeff()));
    if (hot && max_scale > limit) {
      split.push_back(i);
      continue;
    }
    if (hot) clone.push_back(i);
    out.push_back(g);
    r.source.push_back(static_cast<std::int64_t>(i));
  }
  for (std::size_t i : clone) {
    Gaussian<T> c = cloud.gaussians[i];
    // Step the copy downhill by one standard deviation.
    const Vec3<T> dir = stats.world_grad_sum[i];
    if (dir.norm() > T(0)) c.position -= dir.normalized() * std::exp(c.log_scale.maxCoeff());
    out.push_back(c);
    r.source.push_back(-1);
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i : split) {
    const auto& g = cloud.gaussians[i];
    const Mat3<T> rot = quat_to_matrix(g.rotation);
    const Vec3<T> s = g.scale();
    for (int child = 0; child < 2; ++child) {
      Gaussian<T> c = g;
      Vec3<T> z;
      for (int a = 0; a < 3; ++a) z[a] = static_cast<T>(normal(rng)) * s[a];
      c.position = g.position + rot * z;
      c.log_scale = g.log_scale.array() - static_cast<T>(std::log(kSplitScaleDivisor));
      out.push_back(c);
      r.source.push_back(-1);
    }
  }
  Remap pruned;
  std::vector<Gaussian<T>> kept;
  kept.reserve(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!out[i].frozen && static_cast<double>(out[i].opacity()) < min_opacity) continue;
    kept.push_back(out[i]);
    pruned.source.push_back(r.source[i]);
  }
  if (counts) {
    counts->cloned += clone.size();
    counts->split += split.size();
    counts->pruned += out.size() - kept.size();
  }
  cloud.gaussians.swap(kept);
  return pruned;
}

/// Caps the opacity of every unfrozen Gaussian at `cap`; returns the indices
/// that were touched.
template <class T> std::vector<std::size_t> reset_opacity(GaussianCloud<T>& cloud, double cap = 0.01) {
  const T cap_logit = inverse_sigmoid(static_cast<T>(cap));
  std::vector<std::size_t> touched;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    auto& g = cloud.gaussians[i];
    if (g.frozen) continue;
    g.opacity_logit = std::min(g.opacity_logit, cap_logit);
    touched.push_back(i);
  }
  return touched;
}

}  // namespace lgs
