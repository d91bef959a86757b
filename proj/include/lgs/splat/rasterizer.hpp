#pragma once

#include "lgs/core/camera.hpp"
#include "lgs/core/image.hpp"
#include "lgs/core/layers.hpp"
#include "lgs/core/radix_sort.hpp"
#include "lgs/splat/gaussian.hpp"
#include "lgs/splat/projection.hpp"

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <type_traits>
#include <vector>

namespace lgs {

template <class T> struct RasterSettings {
  Vec3<T> background = Vec3<T>::Zero();
  SplatFilter filter;
  int sh_degree = -1;  // active SH degree; negative uses the cloud's degree
};

template <class T> struct RenderOutput {
  Image<T> rgb;
  Image<T> alpha;
  std::vector<std::uint32_t> contributors;  // per pixel
};

/// Wall-clock split of one forward render, in milliseconds.
struct RasterTiming {
  double filter_ms = 0;
  double sort_ms = 0;
  double project_ms = 0;
  double composite_ms = 0;
};

namespace detail {
using Clock = std::chrono::steady_clock;
inline double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}
}  // namespace detail

/// Indices of Gaussians that pass `filter`, in cloud order.
template <class T>
std::vector<std::uint32_t> filter_indices(const GaussianCloud<T>& cloud, const SplatFilter& filter) {
  std::vector<std::uint32_t> out;
  out.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& g = cloud.gaussians[i];
    if (filter.keeps(g.position.template cast<double>(), g.layer)) out.push_back(static_cast<std::uint32_t>(i));
  }
  return out;
}

/// Sorts `indices` front to back by view-space depth along the camera's
/// forward axis. Ties keep their incoming order.
template <class T>
void sort_by_depth(const GaussianCloud<T>& cloud, const Camera& cam, std::vector<std::uint32_t>& indices) {
  const Mat3<T> w = cam.world_to_camera().cast<T>();
  const Vec3<T> fwd = w.row(2).transpose();
  const Vec3<T> pos = cam.position.cast<T>();
  std::vector<T> depth(cloud.size());
  for (std::uint32_t i : indices) depth[i] = fwd.dot(cloud.gaussians[i].position - pos);
  radix_sort_indices<T>(std::span<const T>(depth), indices);
}

/// Per-view state shared by the forward and backward passes: visible splats
/// in depth order plus a CSR table of splats overlapping each 16x16 tile.
template <class T> struct RasterPlan {
  int width = 0, height = 0;
  int tiles_x = 0, tiles_y = 0;
  int sh_degree = 0;
  Vec3<T> background = Vec3<T>::Zero();
  std::vector<ProjectedSplat<T>> splats;
  std::vector<std::uint32_t> tile_offsets;  // tiles_x * tiles_y + 1
  std::vector<std::uint32_t> tile_entries;  // positions in `splats`

  int tile_count() const { return tiles_x * tiles_y; }
};

/// Builds the plan. When `order` is given it is used as the front-to-back
/// order (indices into the cloud, already filtered); otherwise the filter is
/// applied and a depth sort is done for this camera.
template <class T>
RasterPlan<T> build_plan(const GaussianCloud<T>& cloud, const Camera& cam, const RasterSettings<T>& settings,
                         const std::vector<std::uint32_t>* order = nullptr, RasterTiming* timing = nullptr) {
  cam.validate();
  RasterPlan<T> plan;
  plan.width = cam.width;
  plan.height = cam.height;
  plan.tiles_x = (cam.width + kTileSize - 1) / kTileSize;
  plan.tiles_y = (cam.height + kTileSize - 1) / kTileSize;
  plan.sh_degree = settings.sh_degree < 0 ? cloud.sh_degree : std::min(settings.sh_degree, cloud.sh_degree);
  plan.background = settings.background;

  std::vector<std::uint32_t> sorted;
  if (order) {
    sorted = *order;
  } else {
    auto t0 = detail::Clock::now();
    sorted = filter_indices(cloud, settings.filter);
    if (timing) timing->filter_ms += detail::ms_since(t0);
    t0 = detail::Clock::now();
    sort_by_depth(cloud, cam, sorted);
    if (timing) timing->sort_ms += detail::ms_since(t0);
  }

  auto t0 = detail::Clock::now();
  const CameraParams<T> cp(cam);
  plan.splats.resize(sorted.size());
  std::vector<std::uint8_t> ok(sorted.size(), 0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(sorted.size()); ++i) {
    const std::uint32_t gi = sorted[static_cast<std::size_t>(i)];
    ok[static_cast<std::size_t>(i)] =
        project_gaussian(cloud.gaussians[gi], gi, cp, plan.sh_degree, plan.splats[static_cast<std::size_t>(i)]);
  }
  std::size_t kept = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i)
    if (ok[i]) {
      if (kept != i) plan.splats[kept] = plan.splats[i];
      ++kept;
    }
  plan.splats.resize(kept);

  // Binning in depth order keeps every tile list front to back.
  const int nt = plan.tile_count();
  plan.tile_offsets.assign(static_cast<std::size_t>(nt) + 1, 0);
  for (const auto& s : plan.splats)
    for (int ty = s.tile_min[1]; ty < s.tile_max[1]; ++ty)
      for (int tx = s.tile_min[0]; tx < s.tile_max[0]; ++tx) ++plan.tile_offsets[static_cast<std::size_t>(ty * plan.tiles_x + tx) + 1];
  for (int t = 0; t < nt; ++t) plan.tile_offsets[static_cast<std::size_t>(t) + 1] += plan.tile_offsets[static_cast<std::size_t>(t)];
  plan.tile_entries.resize(plan.tile_offsets.back());
  std::vector<std::uint32_t> cursor(plan.tile_offsets.begin(), plan.tile_offsets.end() - 1);
  for (std::size_t si = 0; si < plan.splats.size(); ++si) {
    const auto& s = plan.splats[si];
    for (int ty = s.tile_min[1]; ty < s.tile_max[1]; ++ty)
      for (int tx = s.tile_min[0]; tx < s.tile_max[0]; ++tx)
        plan.tile_entries[cursor[static_cast<std::size_t>(ty * plan.tiles_x + tx)]++] = static_cast<std::uint32_t>(si);
  }
  if (timing) timing->project_ms += detail::ms_since(t0);
  return plan;
}

namespace detail {
// Entries of tile range [b, e) whose 1/255 box spans pixel row `py`, in order.
template <class T>
void row_entries(const RasterPlan<T>& plan, std::uint32_t b, std::uint32_t e, T py, std::vector<std::uint32_t>& row) {
  row.clear();
  for (std::uint32_t k = b; k < e; ++k) {
    const auto& s = plan.splats[plan.tile_entries[k]];
    if (!(std::abs(py - s.mean.y()) > s.extent[1])) row.push_back(k);
  }
}

// Tile-local pixel range [lo, hi] covering [c - r, c + r] plus one pixel of
// slack on each side; empty when lo > hi.
template <class T> void pixel_span(T c, T r, int origin, int size, int& lo, int& hi) {
  const T a = std::floor(c - r) - static_cast<T>(origin + 1);
  const T b = std::floor(c + r) - static_cast<T>(origin - 1);
  lo = a > T(0) ? (a < static_cast<T>(size) ? static_cast<int>(a) : size) : 0;
  hi = b < static_cast<T>(size - 1) ? (b > T(-1) ? static_cast<int>(b) : -1) : size - 1;
}
}  // namespace detail

/// Front-to-back alpha compositing over the plan's tiles. Each splat visits
/// only the tile pixels inside its 1/255 box; a pixel stops accumulating once
/// its transmittance drops below the cutoff, and a tile stops when all of its
/// pixels have.
template <class T> RenderOutput<T> composite(const RasterPlan<T>& plan, RasterTiming* timing = nullptr) {
  const auto t0 = detail::Clock::now();
  RenderOutput<T> out;
  out.rgb = Image<T>(plan.width, plan.height, 3);
  out.alpha = Image<T>(plan.width, plan.height, 1);
  out.contributors.assign(static_cast<std::size_t>(plan.width) * static_cast<std::size_t>(plan.height), 0);
  const int nt = plan.tile_count();
#pragma omp parallel for schedule(dynamic, 1)
  for (int t = 0; t < nt; ++t) {
    const int x0 = (t % plan.tiles_x) * kTileSize, y0 = (t / plan.tiles_x) * kTileSize;
    const int w = std::min(kTileSize, plan.width - x0), h = std::min(kTileSize, plan.height - y0);
    constexpr int kPixels = kTileSize * kTileSize;
    T trans[kPixels], alpha_acc[kPixels];
    Vec3<T> color[kPixels];
    std::uint32_t count[kPixels];
    bool done[kPixels];
    for (int i = 0; i < kPixels; ++i) {
      trans[i] = T(1);
      alpha_acc[i] = T(0);
      color[i] = Vec3<T>::Zero();
      count[i] = 0;
      done[i] = false;
    }
    int remaining = w * h;
    const std::uint32_t b = plan.tile_offsets[static_cast<std::size_t>(t)];
    const std::uint32_t e = plan.tile_offsets[static_cast<std::size_t>(t) + 1];
    for (std::uint32_t k = b; k < e && remaining > 0; ++k) {
      const auto& s = plan.splats[plan.tile_entries[k]];
      // The span is one pixel wider than the box; outside_extent decides exactly.
      int lx, hx, ly, hy;
      detail::pixel_span(s.mean.x(), s.extent[0], x0, w, lx, hx);
      detail::pixel_span(s.mean.y(), s.extent[1], y0, h, ly, hy);
      for (int y = ly; y <= hy; ++y) {
        const T py = static_cast<T>(y0 + y) + T(0.5);
        for (int x = lx; x <= hx; ++x) {
          const int i = y * kTileSize + x;
          if (done[i]) continue;
          const T px = static_cast<T>(x0 + x) + T(0.5);
          if (outside_extent(s, px, py)) continue;
          T gauss;
          const T alpha = splat_alpha(s, px, py, gauss);
          if (alpha < T(kMinAlpha)) continue;
          const T wgt = trans[i] * alpha;
          color[i] += wgt * s.color;
          alpha_acc[i] += wgt;
          trans[i] *= T(1) - alpha;
          ++count[i];
          if (trans[i] < T(kTransmittanceCutoff)) {
            done[i] = true;
            --remaining;
          }
        }
      }
    }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const int i = y * kTileSize + x;
        const Vec3<T> c = color[i] + trans[i] * plan.background;
        for (int ch = 0; ch < 3; ++ch) out.rgb.at(x0 + x, y0 + y, ch) = c[ch];
        out.alpha.at(x0 + x, y0 + y, 0) = alpha_acc[i];
        out.contributors[static_cast<std::size_t>(y0 + y) * static_cast<std::size_t>(plan.width) +
                         static_cast<std::size_t>(x0 + x)] = count[i];
      }
  }
  if (timing) timing->composite_ms += detail::ms_since(t0);
  return out;
}

template <class T>
RenderOutput<T> rasterize(const GaussianCloud<T>& cloud, const Camera& cam, const RasterSettings<T>& settings,
                          RasterTiming* timing = nullptr) {
  return composite(build_plan(cloud, cam, settings, nullptr, timing), timing);
}

template <class T>
RenderOutput<T> rasterize(const GaussianCloud<T>& cloud, const Camera& cam, const Vec3<T>& background,
                          const LayerMask& layers, const std::optional<CutPlane>& cut = std::nullopt) {
  RasterSettings<T> s;
  s.background = background;
  s.filter.layers = layers;
  s.filter.cut = cut;
  return rasterize(cloud, cam, s);
}

template <class T> struct CloudGradients {
  std::vector<GaussianGrad<T>> grads;
  std::vector<T> screen_grad_norm;    // |dL/d mean| in NDC units
  std::vector<std::uint8_t> visible;  // projected onto at least one tile

  void reset(std::size_t n) {
    grads.assign(n, GaussianGrad<T>{});
    screen_grad_norm.assign(n, T(0));
    visible.assign(n, 0);
  }
};

/// Backward pass for a plan. `grad_rgb` and `grad_alpha` are dL/d(output).
/// The reduction over tiles runs in a fixed order, so the result does not
/// depend on the worker count. Frozen Gaussians receive zero gradient.
template <class T>
void rasterize_backward(const GaussianCloud<T>& cloud, const Camera& cam, const RasterPlan<T>& plan,
                        const Image<T>& grad_rgb, std::type_identity_t<const Image<T>*> grad_alpha,
                        CloudGradients<T>& out) {
  if (grad_rgb.width != plan.width || grad_rgb.height != plan.height || grad_rgb.channels != 3)
    throw std::invalid_argument("grad_rgb shape does not match the render");
  if (grad_alpha && (grad_alpha->width != plan.width || grad_alpha->height != plan.height || grad_alpha->channels != 1))
    throw std::invalid_argument("grad_alpha shape does not match the render");
  out.reset(cloud.size());

  std::vector<SplatGrad2D<T>> entry_grads(plan.tile_entries.size());
  const int nt = plan.tile_count();
#pragma omp parallel for schedule(dynamic, 1)
  for (int t = 0; t < nt; ++t) {
    const int tx = t % plan.tiles_x, ty = t / plan.tiles_x;
    const std::uint32_t b = plan.tile_offsets[static_cast<std::size_t>(t)];
    const std::uint32_t e = plan.tile_offsets[static_cast<std::size_t>(t) + 1];
    if (b == e) continue;
    struct Contrib {
      std::uint32_t slot;
      T alpha, gauss, trans;
    };
    std::vector<Contrib> list;
    list.reserve(e - b);
    std::vector<std::uint32_t> row;
    for (int y = ty * kTileSize; y < std::min((ty + 1) * kTileSize, plan.height); ++y) {
      detail::row_entries(plan, b, e, static_cast<T>(y) + T(0.5), row);
      for (int x = tx * kTileSize; x < std::min((tx + 1) * kTileSize, plan.width); ++x) {
        const T px = static_cast<T>(x) + T(0.5), py = static_cast<T>(y) + T(0.5);
        list.clear();
        T trans = T(1);
        for (const std::uint32_t k : row) {
          const auto& s = plan.splats[plan.tile_entries[k]];
          if (outside_extent(s, px, py)) continue;
          T gauss;
          const T alpha = splat_alpha(s, px, py, gauss);
          if (alpha < T(kMinAlpha)) continue;
          list.push_back({k, alpha, gauss, trans});
          trans *= T(1) - alpha;
          if (trans < T(kTransmittanceCutoff)) break;
        }
        const Vec3<T> gc(grad_rgb.at(x, y, 0), grad_rgb.at(x, y, 1), grad_rgb.at(x, y, 2));
        const T ga = grad_alpha ? grad_alpha->at(x, y, 0) : T(0);
        // Suffix composites behind the current splat.
        Vec3<T> rest = plan.background;
        T rest_a = T(0);
        for (std::size_t j = list.size(); j-- > 0;) {
          const Contrib& ct = list[j];
          const auto& s = plan.splats[plan.tile_entries[ct.slot]];
          SplatGrad2D<T>& g = entry_grads[ct.slot];
          g.color += (ct.trans * ct.alpha) * gc;
          const T dalpha = ct.trans * (gc.dot(s.color - rest) + ga * (T(1) - rest_a));
          rest = ct.alpha * s.color + (T(1) - ct.alpha) * rest;
          rest_a = ct.alpha + (T(1) - ct.alpha) * rest_a;
          g.opacity += dalpha * ct.gauss;
          const T gp = dalpha * ct.alpha;
          const T dx = px - s.mean.x(), dy = py - s.mean.y();
          g.conic[0] += T(-0.5) * dx * dx * gp;
          g.conic[1] += -dx * dy * gp;
          g.conic[2] += T(-0.5) * dy * dy * gp;
          g.mean.x() += gp * (s.conic[0] * dx + s.conic[1] * dy);
          g.mean.y() += gp * (s.conic[1] * dx + s.conic[2] * dy);
        }
      }
    }
  }

  std::vector<SplatGrad2D<T>> splat_grads(plan.splats.size());
  for (std::size_t k = 0; k < plan.tile_entries.size(); ++k) splat_grads[plan.tile_entries[k]].add(entry_grads[k]);

  const CameraParams<T> cp(cam);
  const T half_w = T(0.5) * static_cast<T>(plan.width), half_h = T(0.5) * static_cast<T>(plan.height);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t si = 0; si < static_cast<std::ptrdiff_t>(plan.splats.size()); ++si) {
    const auto& s = plan.splats[static_cast<std::size_t>(si)];
    const auto& g = cloud.gaussians[s.index];
    if (g.frozen) continue;
    const auto& g2 = splat_grads[static_cast<std::size_t>(si)];
    out.visible[s.index] = 1;
    out.screen_grad_norm[s.index] = Vec2<T>(g2.mean.x() * half_w, g2.mean.y() * half_h).norm();
    project_backward(g, s, cp, plan.sh_degree, g2, out.grads[s.index]);
  }
}

}  // namespace lgs
