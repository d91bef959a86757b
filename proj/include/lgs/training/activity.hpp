#pragma once

#include "lgs/splat/gaussian.hpp"
#include "lgs/training/state.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lgs {

/// Per-Gaussian activity over one densification window of dR steps:
/// AvgSample = (1/dR) * sum(w_p * p + w_c * c + w_s * s).
struct ActivityTracker {
  std::vector<double> position_sum;
  std::vector<double> color_sum;
  std::vector<double> scale_sum;
  int samples = 0;
  int window = 100;  // dR
  double initial_threshold = 0.015;
  double threshold = 0.015;  // initial_threshold * decay^rounds
  double decay = 0.975;
  double w_position = 2.0, w_color = 0.1, w_scale = 0.1;
  int rounds = 0;

  void resize(std::size_t n) {
    position_sum.resize(n, 0.0);
    color_sum.resize(n, 0.0);
    scale_sum.resize(n, 0.0);
  }
  std::size_t size() const { return position_sum.size(); }

  void remap(const Remap& r) {
    apply_remap(position_sum, r);
    apply_remap(color_sum, r);
    apply_remap(scale_sum, r);
  }

  void reset() {
    std::fill(position_sum.begin(), position_sum.end(), 0.0);
    std::fill(color_sum.begin(), color_sum.end(), 0.0);
    std::fill(scale_sum.begin(), scale_sum.end(), 0.0);
    samples = 0;
  }

  /// Adds one step of update norms; frozen Gaussians are not tracked.
  template <class T>
  void update(const GaussianCloud<T>& cloud, const std::vector<double>& p, const std::vector<double>& c,
              const std::vector<double>& s) {
    if (p.size() != size() || c.size() != size() || s.size() != size() || cloud.size() != size())
      throw std::invalid_argument("activity update size mismatch");
    for (std::size_t i = 0; i < size(); ++i) {
      if (cloud.gaussians[i].frozen) continue;
      position_sum[i] += p[i];
      color_sum[i] += c[i];
      scale_sum[i] += s[i];
    }
    ++samples;
  }

  double avg_sample(std::size_t i) const {
    return (w_position * position_sum[i] + w_color * color_sum[i] + w_scale * scale_sum[i]) / window;
  }

  /// Keep mask for inactive pruning: unfrozen Gaussians with AvgSample <= T
  /// are dropped.
  template <class T> std::vector<std::uint8_t> keep_mask(const GaussianCloud<T>& cloud) const {
    std::vector<std::uint8_t> keep(cloud.size(), 1);
    for (std::size_t i = 0; i < cloud.size(); ++i)
      if (!cloud.gaussians[i].frozen && avg_sample(i) <= threshold) keep[i] = 0;
    return keep;
  }

  /// Ends a pruning round: decays the threshold and clears the window.
  void finish_round() {
    ++rounds;
    threshold = initial_threshold * std::pow(decay, rounds);
    reset();
  }
};

/// Removes inactive Gaussians and advances the tracker; returns the remap
/// that was applied to the cloud and the tracker.
template <class T> Remap inactive_prune(GaussianCloud<T>& cloud, ActivityTracker& tracker) {
  const Remap r = Remap::keep(tracker.keep_mask(cloud));
  apply_remap(cloud.gaussians, r);
  tracker.remap(r);
  tracker.finish_round();
  return r;
}

}  // namespace lgs
