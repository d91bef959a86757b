#pragma once

#include "lgs/format/quantize.hpp"
#include "lgs/splat/rasterizer.hpp"

#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgs {

struct ViewRequest {
  Camera camera;
  LayerMask layers = LayerMask::all(kMaxLayers);
  std::optional<CutPlane> cut;
  Vec3f background = Vec3f::Zero();

  void validate() const {
    camera.validate();
    if (!layers.any()) throw std::invalid_argument("view request has no active layer");
    if (cut) cut->validate();
  }

  SplatFilter filter() const { return SplatFilter{layers, cut}; }
};

/// Two eyes offset by +-offset/2 along the center camera's right axis. With
/// convergence 0 the eyes look parallel to the center camera; otherwise both
/// turn inward to meet at that distance on the center axis.
struct StereoRequest {
  ViewRequest center;
  double offset = 0.0;
  double convergence = 0.0;
  bool shared_sort = false;

  void validate() const {
    center.validate();
    if (!(offset >= 0.0)) throw std::invalid_argument("stereo offset must be >= 0");
    if (!(convergence >= 0.0)) throw std::invalid_argument("stereo convergence must be >= 0");
  }

  Camera eye(int side) const {  // side -1 left, +1 right
    Camera cam = center.camera;
    if (offset == 0.0) return cam;
    cam.position += (0.5 * offset * side) * center.camera.right();
    if (convergence > 0.0) {
      const double angle = std::atan2(0.5 * offset, convergence) * -side;
      cam.rotation = (Eigen::Quaterniond(Eigen::AngleAxisd(angle, Vec3d::UnitY())).conjugate() * cam.rotation).normalized();
    }
    return cam;
  }
};

struct ViewTiming {
  std::size_t splats = 0;  // after layer and cut filtering
  double sort_ms = 0;
  double raster_ms = 0;
  double total_ms = 0;
};

/// Survivors of `filter`, front to back by view-space depth of `eye`; ties
/// keep index order.
template <class T>
std::vector<std::uint32_t> sort_indices(const GaussianCloud<T>& cloud, const Camera& eye, const SplatFilter& filter) {
  auto order = filter_indices(cloud, filter);
  sort_by_depth(cloud, eye, order);
  return order;
}

namespace render_detail {

inline RenderOutput<float> raster_with_order(const GaussianCloud<float>& cloud, const Camera& cam,
                                             const ViewRequest& req, const std::vector<std::uint32_t>& order) {
  RasterSettings<float> s;
  s.background = req.background;
  s.filter = req.filter();
  return composite(build_plan(cloud, cam, s, &order));
}

}  // namespace render_detail

inline RenderOutput<float> render_view(const GaussianCloud<float>& cloud, const ViewRequest& req,
                                       ViewTiming* timing = nullptr) {
  req.validate();
  const auto t0 = detail::Clock::now();
  const auto order = sort_indices(cloud, req.camera, req.filter());
  const double sort_ms = detail::ms_since(t0);
  const auto t1 = detail::Clock::now();
  auto out = render_detail::raster_with_order(cloud, req.camera, req, order);
  if (timing) *timing = ViewTiming{order.size(), sort_ms, detail::ms_since(t1), detail::ms_since(t0)};
  return out;
}

/// Dequantizes only the active layers, then renders.
inline RenderOutput<float> render_view(const CompressedCloud& cloud, const ViewRequest& req,
                                       ViewTiming* timing = nullptr) {
  req.validate();
  const auto t0 = detail::Clock::now();
  auto dense = decompress(cloud);
  std::erase_if(dense.gaussians, [&](const Gaussian<float>& g) { return !req.layers.test(g.layer); });
  ViewTiming inner;
  auto out = render_view(dense, req, &inner);
  inner.total_ms = detail::ms_since(t0);
  if (timing) *timing = inner;
  return out;
}

struct StereoOutput {
  RenderOutput<float> left, right;
  ViewTiming left_timing, right_timing;

  double sort_ms() const { return left_timing.sort_ms + right_timing.sort_ms; }
};

inline StereoOutput render_stereo(const GaussianCloud<float>& cloud, const StereoRequest& req) {
  req.validate();
  StereoOutput out;
  const Camera left = req.eye(-1), right = req.eye(+1);
  const SplatFilter filter = req.center.filter();
  auto render_eye = [&](const Camera& cam, const std::vector<std::uint32_t>& order, double sort_ms,
                        detail::Clock::time_point t0, ViewTiming& timing) {
    const auto t1 = detail::Clock::now();
    auto img = render_detail::raster_with_order(cloud, cam, req.center, order);
    timing = ViewTiming{order.size(), sort_ms, detail::ms_since(t1), detail::ms_since(t0)};
    return img;
  };
  if (req.shared_sort) {
    const auto t0 = detail::Clock::now();
    const auto order = sort_indices(cloud, req.center.camera, filter);
    const double sort_ms = detail::ms_since(t0);
    out.left = render_eye(left, order, sort_ms, t0, out.left_timing);
    out.right = render_eye(right, order, 0.0, detail::Clock::now(), out.right_timing);
  } else {
    for (int side : {-1, 1}) {
      const Camera& cam = side < 0 ? left : right;
      const auto t0 = detail::Clock::now();
      const auto order = sort_indices(cloud, cam, filter);
      const double sort_ms = detail::ms_since(t0);
      if (side < 0) out.left = render_eye(cam, order, sort_ms, t0, out.left_timing);
      else out.right = render_eye(cam, order, sort_ms, t0, out.right_timing);
    }
  }
  return out;
}

struct TimingRow {
  std::string view;
  ViewTiming timing;
};

inline void write_timing_csv(const std::filesystem::path& path, const std::vector<TimingRow>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << "view,splats,sort_ms,raster_ms\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%zu,%.4f,%.4f\n", r.timing.splats, r.timing.sort_ms, r.timing.raster_ms);
    f << r.view << buf;
  }
}

}  // namespace lgs
