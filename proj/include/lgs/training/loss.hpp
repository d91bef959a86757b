#pragma once

#include "lgs/core/image.hpp"
#include "lgs/core/math.hpp"
#include "lgs/metrics/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace lgs {

/// Blends a straight-alpha RGBA image over a uniform background.
template <class T> Image<T> composite_over(const Image<T>& rgba, const Vec3<T>& background) {
  if (rgba.channels != 4) throw std::invalid_argument("composite_over expects an RGBA image");
  Image<T> out(rgba.width, rgba.height, 3);
  for (std::size_t p = 0; p < rgba.pixel_count(); ++p) {
    const T a = rgba.data[p * 4 + 3];
    for (int c = 0; c < 3; ++c) out.data[p * 3 + static_cast<std::size_t>(c)] = rgba.data[p * 4 + static_cast<std::size_t>(c)] * a + background[c] * (T(1) - a);
  }
  return out;
}

template <class T> struct LossResult {
  double value = 0.0;
  double l1 = 0.0;
  double ssim = 0.0;
  double alpha_l1 = 0.0;
  Image<T> grad_rgb;
  Image<T> grad_alpha;
};

/// (1 - ld) * L1(rgb, target) + ld * (1 - SSIM(rgb, target))
///   + la * L1(alpha, target_alpha), with gradients for rgb and alpha.
template <class T>
LossResult<T> compute_loss(const Image<T>& rgb, const Image<T>& alpha, const Image<T>& target_rgb,
                           const Image<T>& target_alpha, double lambda_dssim, double lambda_alpha) {
  if (!rgb.same_shape(target_rgb) || rgb.channels != 3) throw std::invalid_argument("loss: rgb shapes differ");
  if (!alpha.same_shape(target_alpha) || alpha.channels != 1 || alpha.width != rgb.width || alpha.height != rgb.height)
    throw std::invalid_argument("loss: alpha shapes differ");
  LossResult<T> r;
  r.grad_rgb = Image<T>(rgb.width, rgb.height, 3);
  r.grad_alpha = Image<T>(rgb.width, rgb.height, 1);

  auto sign = [](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); };
  const double n_rgb = static_cast<double>(rgb.data.size());
  double l1 = 0.0;
  for (std::size_t i = 0; i < rgb.data.size(); ++i) {
    const double d = static_cast<double>(rgb.data[i]) - static_cast<double>(target_rgb.data[i]);
    l1 += std::abs(d);
    r.grad_rgb.data[i] = static_cast<T>((1.0 - lambda_dssim) * sign(d) / n_rgb);
  }
  r.l1 = l1 / n_rgb;

  if (lambda_dssim > 0.0) {
    Image<T> gs;
    r.ssim = ssim(rgb, target_rgb, &gs);
    for (std::size_t i = 0; i < rgb.data.size(); ++i) r.grad_rgb.data[i] -= static_cast<T>(lambda_dssim) * gs.data[i];
  } else {
    r.ssim = ssim(rgb, target_rgb);
  }

  const double n_a = static_cast<double>(alpha.data.size());
  double la = 0.0;
  for (std::size_t i = 0; i < alpha.data.size(); ++i) {
    const double d = static_cast<double>(alpha.data[i]) - static_cast<double>(target_alpha.data[i]);
    la += std::abs(d);
    r.grad_alpha.data[i] = static_cast<T>(lambda_alpha * sign(d) / n_a);
  }
  r.alpha_l1 = la / n_a;
  r.value = (1.0 - lambda_dssim) * r.l1 + lambda_dssim * (1.0 - r.ssim) + lambda_alpha * r.alpha_l1;
  return r;
}

}  // namespace lgs
