#pragma once

#include "lgs/core/camera.hpp"
#include "lgs/metrics/metrics.hpp"
#include "lgs/splat/rasterizer.hpp"
#include "lgs/training/activity.hpp"
#include "lgs/training/adam.hpp"
#include "lgs/training/config.hpp"
#include "lgs/training/densify.hpp"
#include "lgs/training/init.hpp"
#include "lgs/training/loss.hpp"
#include "lgs/volume/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace lgs {

struct TrainLogRow {
  int layer = 0;
  int iteration = 0;
  double loss = 0.0;  // mean over the logging interval
  double psnr = 0.0;  // mean training-view PSNR over the interval
  std::size_t count = 0;
  double threshold = 0.0;
};

struct LayerReport {
  int layer = 0;
  std::size_t initial_count = 0;
  std::size_t final_count = 0;  // Gaussians belonging to this layer
  std::size_t cloned = 0;
  std::size_t split = 0;
  std::size_t opacity_pruned = 0;
  std::size_t inactive_pruned = 0;
  int inactive_rounds = 0;
  double final_threshold = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  GaussianCloud<float> cloud;
  std::vector<TrainLogRow> log;
  std::vector<LayerReport> layers;
};

/// Camera extent used to scale position learning rates and densification
/// limits: 1.1 times the largest camera distance from the camera centroid.
inline double camera_extent(const std::vector<const View*>& views) {
  if (views.empty()) return 1.0;
  Vec3d c = Vec3d::Zero();
  for (const View* v : views) c += v->camera.position;
  c /= static_cast<double>(views.size());
  double r = 0.0;
  for (const View* v : views) r = std::max(r, (v->camera.position - c).norm());
  return 1.1 * (r > 0.0 ? r : 1.0);
}

/// Exponential interpolation from lr_init to lr_final over `steps`.
inline double position_lr(const TrainConfig& cfg, int iteration) {
  const double t = std::clamp(static_cast<double>(iteration) / cfg.iterations, 0.0, 1.0);
  return std::exp(std::log(cfg.lr_position_init) * (1.0 - t) + std::log(cfg.lr_position_final) * t);
}

inline void write_train_log(const std::filesystem::path& path, const std::vector<TrainLogRow>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << "layer,iteration,loss,psnr,count,threshold\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.6f,%.4f,%zu,%.9g\n", r.layer, r.iteration, r.loss, r.psnr, r.count,
                  r.threshold);
    f << buf;
  }
}

/// Called after every iteration with (iteration, cloud).
using TrainObserver = std::function<void(int, const GaussianCloud<float>&)>;

/// Optimizes layer `layer` on top of `base`. Every Gaussian in `base` must
/// belong to a lower layer; they are frozen and come back bit-identical.
/// New Gaussians are seeded from the dataset's initial points for `layer`.
inline TrainResult train_layer(const Dataset& train, int layer, GaussianCloud<float> base, const TrainConfig& cfg,
                               const TrainObserver& observer = {}) {
  cfg.validate();
  const auto t_start = std::chrono::steady_clock::now();
  for (const auto& g : base.gaussians)
    if (g.layer >= layer) throw std::invalid_argument("train_layer: base cloud contains layer >= the trained layer");
  const auto views = train.layer_views(layer);
  if (views.empty()) throw std::invalid_argument("train_layer: no training views for layer " + std::to_string(layer));

  GaussianCloud<float> cloud = std::move(base);
  cloud.layer_count = std::max(cloud.layer_count, layer + 1);
  cloud.sh_degree = cfg.sh_degree;
  for (auto& g : cloud.gaussians) g.frozen = true;
  for (auto& g : init_gaussians(train.layer_points(layer), layer, cfg.init_opacity)) cloud.gaussians.push_back(g);

  LayerReport report;
  report.layer = layer;
  report.initial_count = cloud.count_in_layer(layer);

  const double extent = camera_extent(views);
  LearningRates lr;
  lr.sh_dc = cfg.lr_sh_dc;
  lr.sh_rest = cfg.lr_sh_rest();
  lr.opacity = cfg.lr_opacity;
  lr.scale = cfg.lr_scale;
  lr.rotation = cfg.lr_rotation;
  // Update norms are measured in units of each group's base learning rate.
  const double p_unit = cfg.lr_position_init * extent, c_unit = cfg.lr_sh_dc, s_unit = cfg.lr_scale;

  AdamState<float> adam;
  adam.resize(cloud.size());
  ActivityTracker tracker;
  tracker.window = cfg.densify_interval;
  tracker.initial_threshold = tracker.threshold = cfg.activity_T0;
  tracker.decay = cfg.activity_decay;
  tracker.w_position = cfg.activity_w_position;
  tracker.w_color = cfg.activity_w_color;
  tracker.w_scale = cfg.activity_w_scale;
  tracker.resize(cloud.size());
  DensifyStats<float> stats;
  stats.resize(cloud.size());

  std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(layer) + 1);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  std::vector<std::size_t> order;
  std::size_t cursor = 0;

  RasterSettings<float> settings;
  settings.filter.layers = LayerMask::up_to(layer);
  int active_degree = 0;
  CloudGradients<float> grads;
  UpdateNorms norms;
  TrainResult result;
  double loss_acc = 0.0, psnr_acc = 0.0;
  int acc_n = 0;
  const int densify_end = cfg.densify_end();

  auto remap_all = [&](const Remap& r) {
    adam.remap(r);
    tracker.remap(r);
    stats.remap(r);
  };

  for (int it = 1; it <= cfg.iterations; ++it) {
    lr.position = position_lr(cfg, it) * extent;
    if (cfg.sh_degree_interval > 0 && it % cfg.sh_degree_interval == 0) active_degree = std::min(active_degree + 1, cfg.sh_degree);
    settings.sh_degree = active_degree;

    if (cursor == order.size()) {
      order.resize(views.size());
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const View& view = *views[order[cursor++]];
    Vec3f bg = cfg.background.cast<float>();
    if (cfg.background_mode == BackgroundMode::random) bg = Vec3f(unit(rng), unit(rng), unit(rng));
    settings.background = bg;

    const Image<float> target = composite_over(view.image, bg);
    const Image<float> target_alpha = extract_channels(view.image, 3, 1);
    const auto plan = build_plan(cloud, view.camera, settings);
    const auto out = composite(plan);
    const auto loss = compute_loss(out.rgb, out.alpha, target, target_alpha, cfg.lambda_dssim, cfg.lambda_alpha);
    rasterize_backward(cloud, view.camera, plan, loss.grad_rgb, &loss.grad_alpha, grads);
    if (it <= densify_end) stats.accumulate(grads);
    adam_step(cloud, grads.grads, adam, lr, &norms);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      norms.position[i] /= p_unit;
      norms.color[i] /= c_unit;
      norms.scale[i] /= s_unit;
    }
    tracker.update(cloud, norms.position, norms.color, norms.scale);

    loss_acc += loss.value;
    psnr_acc += std::min(psnr(out.rgb, target), kPsnrCap);
    ++acc_n;

    if (it % cfg.densify_interval == 0) {
      if (cfg.inactive_pruning && it >= cfg.activity_from && it < cfg.iterations) {
        const std::size_t before = cloud.size();
        remap_all(inactive_prune(cloud, tracker));
        report.inactive_pruned += before - cloud.size();
      }
      if (it >= cfg.densify_from && it <= densify_end) {
        DensifyCounts dc;
        remap_all(densify_and_prune(cloud, stats, cfg.densify_grad_threshold, cfg.percent_dense, extent,
                                    cfg.opacity_prune_threshold, rng, &dc));
        report.cloned += dc.cloned;
        report.split += dc.split;
        report.opacity_pruned += dc.pruned;
        stats.reset();
      }
      tracker.reset();
    }
    // Opacity reset only happens while densification is still running.
    if (cfg.opacity_reset && cfg.opacity_reset_interval > 0 && it % cfg.opacity_reset_interval == 0 &&
        it < densify_end) {
      for (std::size_t i : reset_opacity(cloud)) {
        adam.m[i].opacity_logit = 0.0f;
        adam.v[i].opacity_logit = 0.0f;
      }
    }

    if (observer) observer(it, cloud);
    if ((cfg.log_interval > 0 && it % cfg.log_interval == 0) || it == cfg.iterations) {
      result.log.push_back({layer, it, loss_acc / acc_n, psnr_acc / acc_n, cloud.size(), tracker.threshold});
      loss_acc = psnr_acc = 0.0;
      acc_n = 0;
    }
  }

  report.final_count = cloud.count_in_layer(layer);
  report.inactive_rounds = tracker.rounds;
  report.final_threshold = tracker.threshold;
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  result.layers.push_back(report);
  result.cloud = std::move(cloud);
  return result;
}

/// Trains layers 0..L-1 in order, each on top of the frozen result of the
/// previous ones. `max_layers` limits training to the first layers. The
/// returned cloud has its frozen flags cleared.
inline TrainResult train_layered(const Dataset& train, const TrainConfig& cfg, int max_layers = -1,
                                 const TrainObserver& observer = {}) {
  const int n = max_layers < 0 ? train.layer_count : std::min(max_layers, train.layer_count);
  if (n < 1) throw std::invalid_argument("train_layered: need at least one layer");
  TrainResult total;
  GaussianCloud<float> cloud;
  cloud.layer_count = n;
  cloud.sh_degree = cfg.sh_degree;
  for (int k = 0; k < n; ++k) {
    auto r = train_layer(train, k, std::move(cloud), cfg, observer);
    cloud = std::move(r.cloud);
    total.log.insert(total.log.end(), r.log.begin(), r.log.end());
    total.layers.insert(total.layers.end(), r.layers.begin(), r.layers.end());
  }
  for (auto& g : cloud.gaussians) g.frozen = false;
  cloud.layer_count = n;
  total.cloud = std::move(cloud);
  return total;
}

/// Trains layer `layer` from scratch with no lower layers, as a single-layer
/// cloud (layer index 0).
inline TrainResult train_standalone(const Dataset& train, int layer, const TrainConfig& cfg) {
  Dataset one;
  one.layer_count = 1;
  for (const View* v : train.layer_views(layer)) {
    View c = *v;
    c.layer = 0;
    one.views.push_back(std::move(c));
  }
  for (auto p : train.layer_points(layer)) {
    p.layer = 0;
    one.init_points.push_back(p);
  }
  auto r = train_layered(one, cfg);
  for (auto& l : r.layers) l.layer = layer;
  for (auto& row : r.log) row.layer = layer;
  return r;
}

/// Metrics for `layer` on held-out views, rendering every layer <= `layer`
/// and compositing ground truth over the same fixed background.
inline MetricReport evaluate_layer(const GaussianCloud<float>& cloud, const Dataset& test, int layer,
                                   const Vec3f& background = Vec3f::Zero()) {
  MetricReport rep;
  RasterSettings<float> s;
  s.background = background;
  s.filter.layers = LayerMask::up_to(layer);
  for (const View* v : test.layer_views(layer)) {
    const auto out = rasterize(cloud, v->camera, s);
    const auto gt = composite_over(v->image, background);
    rep.rows.push_back({"layer" + std::to_string(layer) + "_" + std::to_string(v->index), psnr(out.rgb, gt),
                        ssim(out.rgb, gt)});
  }
  return rep;
}

}  // namespace lgs
