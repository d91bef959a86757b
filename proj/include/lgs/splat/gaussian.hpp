#pragma once

#include "lgs/core/layers.hpp"
#include "lgs/core/math.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace lgs {

inline constexpr int kMaxShDegree = 3;
inline constexpr int kMaxShCoeffs = (kMaxShDegree + 1) * (kMaxShDegree + 1);

constexpr int sh_coeff_count(int degree) { return (degree + 1) * (degree + 1); }

/// One splat. SH coefficients are stored coefficient-major with interleaved
/// channels: sh[k * 3 + c] is coefficient k of channel c; k = 0 is the DC term.
template <class T> struct Gaussian {
  Vec3<T> position = Vec3<T>::Zero();
  Vec4<T> rotation = Vec4<T>(1, 0, 0, 0);  // (w, x, y, z), normalized on use
  Vec3<T> log_scale = Vec3<T>::Zero();
  T opacity_logit = T(0);
  std::array<T, kMaxShCoeffs * 3> sh{};
  int layer = 0;
  bool frozen = false;

  T opacity() const { return sigmoid(opacity_logit); }
  Vec3<T> scale() const { return log_scale.array().exp().matrix(); }
  T& sh_at(int k, int c) { return sh[static_cast<std::size_t>(k * 3 + c)]; }
  T sh_at(int k, int c) const { return sh[static_cast<std::size_t>(k * 3 + c)]; }

  friend bool operator==(const Gaussian& a, const Gaussian& b) {
    return a.position == b.position && a.rotation == b.rotation && a.log_scale == b.log_scale &&
           a.opacity_logit == b.opacity_logit && a.sh == b.sh && a.layer == b.layer &&
           a.frozen == b.frozen;
  }
};

template <class T> struct GaussianCloud {
  std::vector<Gaussian<T>> gaussians;
  int layer_count = 1;
  int sh_degree = kMaxShDegree;

  std::size_t size() const { return gaussians.size(); }
  bool empty() const { return gaussians.empty(); }

  std::size_t count_in_layer(int layer) const {
    return static_cast<std::size_t>(std::count_if(gaussians.begin(), gaussians.end(),
                                                  [&](const Gaussian<T>& g) { return g.layer == layer; }));
  }

  /// Gaussians that pass `filter`, in their original order.
  GaussianCloud filtered(const SplatFilter& filter) const {
    GaussianCloud out;
    out.layer_count = layer_count;
    out.sh_degree = sh_degree;
    for (const auto& g : gaussians)
      if (filter.keeps(g.position.template cast<double>(), g.layer)) out.gaussians.push_back(g);
    return out;
  }

  void validate() const {
    if (layer_count < 1 || layer_count > kMaxLayers) throw std::invalid_argument("layer_count out of range");
    if (sh_degree < 0 || sh_degree > kMaxShDegree) throw std::invalid_argument("sh_degree out of range");
    for (const auto& g : gaussians) {
      if (g.layer < 0 || g.layer >= layer_count) throw std::invalid_argument("gaussian layer out of range");
      if (!(g.rotation.norm() > T(0))) throw std::invalid_argument("gaussian rotation is zero");
    }
  }

  template <class U> GaussianCloud<U> cast() const {
    GaussianCloud<U> out;
    out.layer_count = layer_count;
    out.sh_degree = sh_degree;
    out.gaussians.reserve(gaussians.size());
    for (const auto& g : gaussians) {
      Gaussian<U> h;
      h.position = g.position.template cast<U>();
      h.rotation = g.rotation.template cast<U>();
      h.log_scale = g.log_scale.template cast<U>();
      h.opacity_logit = static_cast<U>(g.opacity_logit);
      for (std::size_t i = 0; i < g.sh.size(); ++i) h.sh[i] = static_cast<U>(g.sh[i]);
      h.layer = g.layer;
      h.frozen = g.frozen;
      out.gaussians.push_back(h);
    }
    return out;
  }

  friend bool operator==(const GaussianCloud& a, const GaussianCloud& b) {
    return a.layer_count == b.layer_count && a.sh_degree == b.sh_degree && a.gaussians == b.gaussians;
  }
};

/// Sigma = R S S^T R^T with S = diag(exp(log_scale)).
template <class T> Mat3<T> compute_cov3d(const Vec3<T>& log_scale, const Vec4<T>& rotation) {
  const Mat3<T> r = quat_to_matrix(rotation);
  const Vec3<T> s = log_scale.array().exp().matrix();
  const Mat3<T> m = r * s.asDiagonal();
  return m * m.transpose();
}

}  // namespace lgs
