#pragma once

#include "lgs/core/math.hpp"
#include "lgs/splat/gaussian.hpp"

#include <algorithm>
#include <array>

namespace lgs {

namespace sh_const {
inline constexpr double c0 = 0.28209479177387814;
inline constexpr double c1 = 0.4886025119029199;
inline constexpr double c2[5] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                                 -1.0925484305920792, 0.5462742152960396};
inline constexpr double c3[7] = {-0.5900435899266435, 2.890611442640554, -0.4570457994644658,
                                 0.3731763325901154, -0.4570457994644658, 1.445305721320277,
                                 -0.5900435899266435};
}  // namespace sh_const

/// Real SH basis values for a unit direction, degree 0..3 (3DGS ordering).
template <class T> void sh_basis(const Vec3<T>& d, int degree, std::array<T, kMaxShCoeffs>& y) {
  using namespace sh_const;
  const T x = d.x(), yy = d.y(), z = d.z();
  y[0] = T(c0);
  if (degree < 1) return;
  y[1] = T(-c1) * yy;
  y[2] = T(c1) * z;
  y[3] = T(-c1) * x;
  if (degree < 2) return;
  const T xx = x * x, y2 = yy * yy, zz = z * z;
  y[4] = T(c2[0]) * x * yy;
  y[5] = T(c2[1]) * yy * z;
  y[6] = T(c2[2]) * (T(2) * zz - xx - y2);
  y[7] = T(c2[3]) * x * z;
  y[8] = T(c2[4]) * (xx - y2);
  if (degree < 3) return;
  y[9] = T(c3[0]) * yy * (T(3) * xx - y2);
  y[10] = T(c3[1]) * x * yy * z;
  y[11] = T(c3[2]) * yy * (T(4) * zz - xx - y2);
  y[12] = T(c3[3]) * z * (T(2) * zz - T(3) * xx - T(3) * y2);
  y[13] = T(c3[4]) * x * (T(4) * zz - xx - y2);
  y[14] = T(c3[5]) * z * (xx - y2);
  y[15] = T(c3[6]) * x * (xx - T(3) * y2);
}

/// Partial derivatives of each basis polynomial w.r.t. (x, y, z), treating
/// the components as independent.
template <class T>
void sh_basis_gradient(const Vec3<T>& d, int degree, std::array<Vec3<T>, kMaxShCoeffs>& g) {
  using namespace sh_const;
  const T x = d.x(), y = d.y(), z = d.z();
  g[0].setZero();
  if (degree < 1) return;
  g[1] = Vec3<T>(0, T(-c1), 0);
  g[2] = Vec3<T>(0, 0, T(c1));
  g[3] = Vec3<T>(T(-c1), 0, 0);
  if (degree < 2) return;
  const T xx = x * x, yy = y * y, zz = z * z;
  g[4] = T(c2[0]) * Vec3<T>(y, x, 0);
  g[5] = T(c2[1]) * Vec3<T>(0, z, y);
  g[6] = T(c2[2]) * Vec3<T>(T(-2) * x, T(-2) * y, T(4) * z);
  g[7] = T(c2[3]) * Vec3<T>(z, 0, x);
  g[8] = T(c2[4]) * Vec3<T>(T(2) * x, T(-2) * y, 0);
  if (degree < 3) return;
  g[9] = T(c3[0]) * Vec3<T>(T(6) * x * y, T(3) * xx - T(3) * yy, 0);
  g[10] = T(c3[1]) * Vec3<T>(y * z, x * z, x * y);
  g[11] = T(c3[2]) * Vec3<T>(T(-2) * x * y, T(4) * zz - xx - T(3) * yy, T(8) * y * z);
  g[12] = T(c3[3]) * Vec3<T>(T(-6) * x * z, T(-6) * y * z, T(6) * zz - T(3) * xx - T(3) * yy);
  g[13] = T(c3[4]) * Vec3<T>(T(4) * zz - T(3) * xx - yy, T(-2) * x * y, T(8) * x * z);
  g[14] = T(c3[5]) * Vec3<T>(T(2) * x * z, T(-2) * y * z, xx - yy);
  g[15] = T(c3[6]) * Vec3<T>(T(3) * xx - T(3) * yy, T(-6) * x * y, 0);
}

/// Raw SH color (before the +0.5 offset and clamp).
template <class T>
Vec3<T> sh_raw(const std::array<T, kMaxShCoeffs * 3>& coeffs, const Vec3<T>& dir, int degree) {
  std::array<T, kMaxShCoeffs> y{};
  sh_basis(dir, degree, y);
  Vec3<T> rgb = Vec3<T>::Zero();
  const int n = sh_coeff_count(degree);
  for (int k = 0; k < n; ++k)
    for (int c = 0; c < 3; ++c) rgb[c] += y[static_cast<std::size_t>(k)] * coeffs[static_cast<std::size_t>(k * 3 + c)];
  return rgb;
}

/// 3DGS color convention: SH value + 0.5, clamped below at 0.
template <class T>
Vec3<T> sh_eval(const std::array<T, kMaxShCoeffs * 3>& coeffs, const Vec3<T>& dir, int degree) {
  Vec3<T> rgb = sh_raw(coeffs, dir, degree);
  for (int c = 0; c < 3; ++c) rgb[c] = std::max(rgb[c] + T(0.5), T(0));
  return rgb;
}

/// DC coefficient that reproduces `rgb` for every view direction.
template <class T> T rgb_to_sh_dc(T v) { return (v - T(0.5)) / T(sh_const::c0); }

}  // namespace lgs
