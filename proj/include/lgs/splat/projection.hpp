#pragma once

#include "lgs/core/camera.hpp"
#include "lgs/core/math.hpp"
#include "lgs/splat/gaussian.hpp"
#include "lgs/splat/sh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>

namespace lgs {

inline constexpr int kTileSize = 16;
inline constexpr double kCovDilation = 0.3;
inline constexpr double kMinAlpha = 1.0 / 255.0;
inline constexpr double kTransmittanceCutoff = 1e-4;

/// Camera quantities in the working scalar type.
template <class T> struct CameraParams {
  Mat3<T> w;  // world-to-camera rotation
  Vec3<T> position;
  T focal, cx, cy, near;
  int width, height;

  explicit CameraParams(const Camera& cam)
      : w(cam.world_to_camera().cast<T>()),
        position(cam.position.cast<T>()),
        focal(static_cast<T>(cam.focal)),
        cx(static_cast<T>(cam.cx())),
        cy(static_cast<T>(cam.cy())),
        near(static_cast<T>(cam.near)),
        width(cam.width),
        height(cam.height) {}
};

/// Screen-space splat produced by projecting one Gaussian.
template <class T> struct ProjectedSplat {
  std::uint32_t index = 0;  // position in the source cloud
  Vec3<T> p_cam;
  Vec2<T> mean;
  T cov[3];    // 2D covariance (xx, xy, yy), dilated
  T conic[3];  // inverse covariance (xx, xy, yy)
  T opacity;
  Vec3<T> color;
  std::array<bool, 3> clamped;  // channel was clamped at zero
  Vec3<T> dir;                  // unit view direction, camera to center
  T dir_len;
  T extent[2];      // half-size of the pixel box that can reach 1/255
  int tile_min[2] = {0, 0};
  int tile_max[2] = {0, 0};  // exclusive
};

/// Projects one Gaussian to screen space and evaluates its color, without
/// tile bounds. Returns false when it is behind the near plane, degenerate,
/// or too transparent to ever reach the 1/255 cutoff.
template <class T>
bool project_splat(const Gaussian<T>& g, std::uint32_t index, const CameraParams<T>& cp, int sh_degree,
                   ProjectedSplat<T>& out) {
  const Vec3<T> pc = cp.w * (g.position - cp.position);
  if (!(pc.z() > cp.near)) return false;
  const T o = g.opacity();
  if (!(o >= T(kMinAlpha))) return false;

  const T iz = T(1) / pc.z();
  const T iz2 = iz * iz;
  Eigen::Matrix<T, 2, 3> j;
  j << cp.focal * iz, T(0), -cp.focal * pc.x() * iz2, T(0), cp.focal * iz, -cp.focal * pc.y() * iz2;
  const Eigen::Matrix<T, 2, 3> tm = j * cp.w;
  const Mat3<T> sigma = compute_cov3d(g.log_scale, g.rotation);
  Mat2<T> cov = tm * sigma * tm.transpose();
  cov(0, 0) += T(kCovDilation);
  cov(1, 1) += T(kCovDilation);
  const T a = cov(0, 0), b = T(0.5) * (cov(0, 1) + cov(1, 0)), c = cov(1, 1);
  const T det = a * c - b * b;
  if (!(det > T(1e-12))) return false;

  out.index = index;
  out.p_cam = pc;
  out.mean = Vec2<T>(cp.focal * pc.x() * iz + cp.cx, cp.focal * pc.y() * iz + cp.cy);
  out.cov[0] = a;
  out.cov[1] = b;
  out.cov[2] = c;
  const T id = T(1) / det;
  out.conic[0] = c * id;
  out.conic[1] = -b * id;
  out.conic[2] = a * id;
  out.opacity = o;

  const Vec3<T> d = g.position - cp.position;
  out.dir_len = d.norm();
  out.dir = out.dir_len > T(0) ? Vec3<T>(d / out.dir_len) : Vec3<T>(T(0), T(0), T(1));
  const Vec3<T> raw = sh_raw(g.sh, out.dir, sh_degree);
  for (int ch = 0; ch < 3; ++ch) {
    const T v = raw[ch] + T(0.5);
    out.clamped[static_cast<std::size_t>(ch)] = v < T(0);
    out.color[ch] = std::max(v, T(0));
  }
  return true;
}

/// Tiles the splat can touch. Returns false when that set is empty.
template <class T> bool compute_tile_bounds(const CameraParams<T>& cp, ProjectedSplat<T>& out) {
  const T o = out.opacity, a = out.cov[0], c = out.cov[2];
  // Pixels where alpha can reach 1/255 satisfy the Mahalanobis bound
  // q <= 2 ln(255 o); their bounding box is +-sqrt(m2 * var) per axis.
  const T m2 = T(2) * std::log(T(255) * o);
  const T ex = std::sqrt(std::max(m2, T(0)) * a) + T(1);
  const T ey = std::sqrt(std::max(m2, T(0)) * c) + T(1);
  out.extent[0] = ex;
  out.extent[1] = ey;
  const T tiles_x = static_cast<T>((cp.width + kTileSize - 1) / kTileSize);
  const T tiles_y = static_cast<T>((cp.height + kTileSize - 1) / kTileSize);
  // Pixel i has its center at i + 0.5, so it is inside when |i + 0.5 - mean| <= e.
  const T x0 = std::floor((out.mean.x() - ex - T(0.5)) / T(kTileSize));
  const T x1 = std::floor((out.mean.x() + ex - T(0.5)) / T(kTileSize)) + T(1);
  const T y0 = std::floor((out.mean.y() - ey - T(0.5)) / T(kTileSize));
  const T y1 = std::floor((out.mean.y() + ey - T(0.5)) / T(kTileSize)) + T(1);
  const T cx0 = std::clamp(x0, T(0), tiles_x), cx1 = std::clamp(x1, T(0), tiles_x);
  const T cy0 = std::clamp(y0, T(0), tiles_y), cy1 = std::clamp(y1, T(0), tiles_y);
  if (!(cx1 > cx0) || !(cy1 > cy0)) return false;
  out.tile_min[0] = static_cast<int>(cx0);
  out.tile_max[0] = static_cast<int>(cx1);
  out.tile_min[1] = static_cast<int>(cy0);
  out.tile_max[1] = static_cast<int>(cy1);
  return true;
}

template <class T>
bool project_gaussian(const Gaussian<T>& g, std::uint32_t index, const CameraParams<T>& cp, int sh_degree,
                      ProjectedSplat<T>& out) {
  return project_splat(g, index, cp, sh_degree, out) && compute_tile_bounds(cp, out);
}

/// True when the pixel center lies outside the splat's 1/255 box, so its
/// alpha is certainly below the cutoff. Requires compute_tile_bounds.
template <class T> inline bool outside_extent(const ProjectedSplat<T>& s, T px, T py) {
  return std::abs(px - s.mean.x()) > s.extent[0] || std::abs(py - s.mean.y()) > s.extent[1];
}

/// Opacity of a splat at pixel center (px, py) before the 1/255 cutoff. G
/// receives the unscaled Gaussian falloff.
template <class T> inline T splat_alpha(const ProjectedSplat<T>& s, T px, T py, T& gauss) {
  const T dx = px - s.mean.x();
  const T dy = py - s.mean.y();
  const T power = T(-0.5) * (s.conic[0] * dx * dx + s.conic[2] * dy * dy) - s.conic[1] * dx * dy;
  gauss = power > T(0) ? T(0) : std::exp(power);
  return s.opacity * gauss;
}

/// Screen-space gradient of one projected splat.
template <class T> struct SplatGrad2D {
  Vec2<T> mean = Vec2<T>::Zero();
  T conic[3] = {0, 0, 0};
  T opacity = 0;
  Vec3<T> color = Vec3<T>::Zero();

  void add(const SplatGrad2D& o) {
    mean += o.mean;
    for (int i = 0; i < 3; ++i) conic[i] += o.conic[i];
    opacity += o.opacity;
    color += o.color;
  }
};

/// Gradient w.r.t. one Gaussian's parameters.
template <class T> struct GaussianGrad {
  Vec3<T> position = Vec3<T>::Zero();
  Vec4<T> rotation = Vec4<T>::Zero();
  Vec3<T> log_scale = Vec3<T>::Zero();
  T opacity_logit = 0;
  std::array<T, kMaxShCoeffs * 3> sh{};
};

/// Chains a screen-space gradient back to the Gaussian parameters.
template <class T>
void project_backward(const Gaussian<T>& g, const ProjectedSplat<T>& s, const CameraParams<T>& cp,
                      int sh_degree, const SplatGrad2D<T>& g2, GaussianGrad<T>& out) {
  // Color -> SH coefficients and view direction.
  Vec3<T> gc = g2.color;
  for (int ch = 0; ch < 3; ++ch)
    if (s.clamped[static_cast<std::size_t>(ch)]) gc[ch] = T(0);
  std::array<T, kMaxShCoeffs> y{};
  sh_basis(s.dir, sh_degree, y);
  const int nc = sh_coeff_count(sh_degree);
  for (int k = 0; k < nc; ++k)
    for (int ch = 0; ch < 3; ++ch)
      out.sh[static_cast<std::size_t>(k * 3 + ch)] += y[static_cast<std::size_t>(k)] * gc[ch];
  if (sh_degree > 0 && s.dir_len > T(0)) {
    std::array<Vec3<T>, kMaxShCoeffs> gy;
    sh_basis_gradient(s.dir, sh_degree, gy);
    Vec3<T> gdir = Vec3<T>::Zero();
    for (int k = 1; k < nc; ++k) {
      T w = T(0);
      for (int ch = 0; ch < 3; ++ch) w += gc[ch] * g.sh[static_cast<std::size_t>(k * 3 + ch)];
      gdir += w * gy[static_cast<std::size_t>(k)];
    }
    out.position += (gdir - s.dir * s.dir.dot(gdir)) / s.dir_len;
  }

  out.opacity_logit += g2.opacity * s.opacity * (T(1) - s.opacity);

  // Conic -> 2D covariance: dL/dSigma = -Q G Q for Q = Sigma^-1.
  Mat2<T> q;
  q << s.conic[0], s.conic[1], s.conic[1], s.conic[2];
  Mat2<T> gq;
  gq << g2.conic[0], T(0.5) * g2.conic[1], T(0.5) * g2.conic[1], g2.conic[2];
  const Mat2<T> gcov = -q * gq * q;

  const Vec3<T>& pc = s.p_cam;
  const T f = cp.focal;
  const T iz = T(1) / pc.z();
  const T iz2 = iz * iz;
  const T iz3 = iz2 * iz;
  Eigen::Matrix<T, 2, 3> j;
  j << f * iz, T(0), -f * pc.x() * iz2, T(0), f * iz, -f * pc.y() * iz2;
  const Eigen::Matrix<T, 2, 3> tm = j * cp.w;
  const Mat3<T> r = quat_to_matrix(g.rotation);
  const Vec3<T> sc = g.log_scale.array().exp().matrix();
  const Mat3<T> m = r * sc.asDiagonal();
  const Mat3<T> sigma = m * m.transpose();

  // Sigma2 = Tm Sigma Tm^T + dilation.
  const Mat3<T> gsigma = tm.transpose() * gcov * tm;
  const Eigen::Matrix<T, 2, 3> gtm = T(2) * gcov * tm * sigma;
  const Eigen::Matrix<T, 2, 3> gj = gtm * cp.w.transpose();

  Vec3<T> gpc = Vec3<T>::Zero();
  gpc.x() += gj(0, 2) * (-f * iz2);
  gpc.y() += gj(1, 2) * (-f * iz2);
  gpc.z() += (gj(0, 0) + gj(1, 1)) * (-f * iz2) + gj(0, 2) * (T(2) * f * pc.x() * iz3) +
             gj(1, 2) * (T(2) * f * pc.y() * iz3);
  // Mean = f * (x, y) / z + c.
  gpc.x() += g2.mean.x() * f * iz;
  gpc.y() += g2.mean.y() * f * iz;
  gpc.z() -= (g2.mean.x() * pc.x() + g2.mean.y() * pc.y()) * f * iz2;
  out.position += cp.w.transpose() * gpc;

  // Sigma = M M^T with M = R diag(s).
  const Mat3<T> gm = T(2) * gsigma * m;
  Mat3<T> gr;
  for (int col = 0; col < 3; ++col) gr.col(col) = gm.col(col) * sc[col];
  for (int col = 0; col < 3; ++col) out.log_scale[col] += gm.col(col).dot(r.col(col)) * sc[col];
  out.rotation += quat_to_matrix_backward(g.rotation, gr);
}

}  // namespace lgs
