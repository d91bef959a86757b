#pragma once

#include "lgs/splat/gaussian.hpp"
#include "lgs/splat/projection.hpp"
#include "lgs/training/state.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace lgs {

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsPosition = 1e-15;
inline constexpr double kAdamEps = 1e-8;

struct LearningRates {
  double position = 1.6e-4;
  double sh_dc = 2.5e-3;
  double sh_rest = 2.5e-3 / 20.0;
  double opacity = 5e-2;
  double scale = 5e-3;
  double rotation = 1e-3;
};

/// First and second moments per Gaussian plus one step counter shared by all
/// parameters. Entries for new Gaussians start at zero.
template <class T> struct AdamState {
  std::vector<GaussianGrad<T>> m;
  std::vector<GaussianGrad<T>> v;
  long step = 0;

  void resize(std::size_t n) {
    m.resize(n);
    v.resize(n);
  }
  void remap(const Remap& r) {
    apply_remap(m, r);
    apply_remap(v, r);
  }
};

/// L2 norms of the update applied to each Gaussian this step.
struct UpdateNorms {
  std::vector<double> position;
  std::vector<double> color;  // SH DC band
  std::vector<double> scale;  // log_scale
};

namespace detail {

template <class T> struct AdamCoeffs {
  T b1, b2, bc1, bc2_sqrt;
};

template <class T> inline T adam_update(T& p, T g, T& m, T& v, T lr, T eps, const AdamCoeffs<T>& k) {
  m = k.b1 * m + (T(1) - k.b1) * g;
  v = k.b2 * v + (T(1) - k.b2) * g * g;
  const T delta = -lr / k.bc1 * m / (std::sqrt(v) / k.bc2_sqrt + eps);
  p += delta;
  return delta;
}

}  // namespace detail

/// One Adam step (beta1 0.9, beta2 0.999; eps 1e-15 for positions, 1e-8
/// elsewhere) on every unfrozen Gaussian. Frozen Gaussians and their moments
/// are left untouched.
template <class T>
void adam_step(GaussianCloud<T>& cloud, const std::vector<GaussianGrad<T>>& grads, AdamState<T>& state,
               const LearningRates& lr, UpdateNorms* norms = nullptr) {
  const std::size_t n = cloud.size();
  if (grads.size() != n || state.m.size() != n || state.v.size() != n)
    throw std::invalid_argument("adam_step: parameter, gradient and state sizes differ");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const detail::AdamCoeffs<T> k{T(kAdamBeta1), T(kAdamBeta2), static_cast<T>(1.0 - std::pow(kAdamBeta1, t)),
                                static_cast<T>(std::sqrt(1.0 - std::pow(kAdamBeta2, t)))};
  if (norms) {
    norms->position.assign(n, 0.0);
    norms->color.assign(n, 0.0);
    norms->scale.assign(n, 0.0);
  }
  const T lr_pos = static_cast<T>(lr.position), lr_dc = static_cast<T>(lr.sh_dc), lr_rest = static_cast<T>(lr.sh_rest);
  const T lr_op = static_cast<T>(lr.opacity), lr_sc = static_cast<T>(lr.scale), lr_rot = static_cast<T>(lr.rotation);
  const T eps_pos = static_cast<T>(kAdamEpsPosition), eps = static_cast<T>(kAdamEps);
  const int n_coeff = sh_coeff_count(cloud.sh_degree);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < static_cast<std::ptrdiff_t>(n); ++ii) {
    const std::size_t i = static_cast<std::size_t>(ii);
    Gaussian<T>& g = cloud.gaussians[i];
    if (g.frozen) continue;
    const GaussianGrad<T>& gr = grads[i];
    GaussianGrad<T>& m = state.m[i];
    GaussianGrad<T>& v = state.v[i];
    double dp = 0, dc = 0, ds = 0;
    for (int a = 0; a < 3; ++a) {
      const T d = detail::adam_update(g.position[a], gr.position[a], m.position[a], v.position[a], lr_pos, eps_pos, k);
      dp += static_cast<double>(d) * d;
    }
    for (int a = 0; a < 4; ++a) detail::adam_update(g.rotation[a], gr.rotation[a], m.rotation[a], v.rotation[a], lr_rot, eps, k);
    for (int a = 0; a < 3; ++a) {
      const T d = detail::adam_update(g.log_scale[a], gr.log_scale[a], m.log_scale[a], v.log_scale[a], lr_sc, eps, k);
      ds += static_cast<double>(d) * d;
    }
    detail::adam_update(g.opacity_logit, gr.opacity_logit, m.opacity_logit, v.opacity_logit, lr_op, eps, k);
    for (int c = 0; c < 3; ++c) {
      const T d = detail::adam_update(g.sh[static_cast<std::size_t>(c)], gr.sh[static_cast<std::size_t>(c)],
                                      m.sh[static_cast<std::size_t>(c)], v.sh[static_cast<std::size_t>(c)], lr_dc, eps, k);
      dc += static_cast<double>(d) * d;
    }
    for (std::size_t j = 3; j < static_cast<std::size_t>(n_coeff * 3); ++j)
      detail::adam_update(g.sh[j], gr.sh[j], m.sh[j], v.sh[j], lr_rest, eps, k);
    if (norms) {
      norms->position[i] = std::sqrt(dp);
      norms->color[i] = std::sqrt(dc);
      norms->scale[i] = std::sqrt(ds);
    }
  }
}

}  // namespace lgs
