#pragma once

#include "lgs/core/math.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lgs {

enum class BackgroundMode { random, fixed };

struct TrainConfig {
  int iterations = 3000;  // per layer
  int sh_degree = 3;
  int sh_degree_interval = 1000;

  double lr_position_init = 1.6e-4;
  double lr_position_final = 1.6e-6;
  double lr_sh_dc = 2.5e-3;
  double lr_sh_rest_divisor = 20.0;
  double lr_opacity = 5e-2;
  double lr_scale = 5e-3;
  double lr_rotation = 1e-3;

  double lambda_dssim = 0.2;
  double lambda_alpha = 0.2;

  int densify_interval = 100;  // dR
  int densify_from = 300;
  int densify_until = -1;  // negative: iterations / 2
  double densify_grad_threshold = 2e-4;
  double percent_dense = 0.01;
  double opacity_prune_threshold = 0.005;

  bool opacity_reset = true;
  int opacity_reset_interval = 3000;

  bool inactive_pruning = true;
  int activity_from = 300;
  double activity_T0 = 0.015;
  double activity_decay = 0.975;
  double activity_w_position = 2.0;
  double activity_w_color = 0.1;
  double activity_w_scale = 0.1;

  BackgroundMode background_mode = BackgroundMode::random;
  Vec3d background = Vec3d::Zero();  // used when background_mode is fixed

  double init_opacity = 0.1;
  int log_interval = 100;
  std::uint64_t seed = 0;

  int densify_end() const { return densify_until < 0 ? iterations / 2 : densify_until; }
  double lr_sh_rest() const { return lr_sh_dc / lr_sh_rest_divisor; }

  void validate() const {
    if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
    if (sh_degree < 0 || sh_degree > 3) throw std::invalid_argument("sh_degree must be in 0..3");
    for (double lr : {lr_position_init, lr_position_final, lr_sh_dc, lr_sh_rest_divisor, lr_opacity, lr_scale,
                      lr_rotation})
      if (!(lr > 0.0)) throw std::invalid_argument("learning rates must be positive");
    if (!(lambda_dssim >= 0.0 && lambda_dssim <= 1.0)) throw std::invalid_argument("lambda_dssim must be in [0,1]");
    if (!(lambda_alpha >= 0.0 && lambda_alpha <= 1.0)) throw std::invalid_argument("lambda_alpha must be in [0,1]");
    if (densify_interval < 1) throw std::invalid_argument("densify_interval must be >= 1");
    if (!(activity_decay > 0.0 && activity_decay < 1.0)) throw std::invalid_argument("activity_decay must be in (0,1)");
    if (!(activity_T0 >= 0.0)) throw std::invalid_argument("activity_T0 must be non-negative");
    if (!(init_opacity > 0.0 && init_opacity < 1.0)) throw std::invalid_argument("init_opacity must be in (0,1)");
    for (int c = 0; c < 3; ++c)
      if (!(background[c] >= 0.0 && background[c] <= 1.0)) throw std::invalid_argument("background must be in [0,1]");
  }

  /// "default" keeps the settings above; "hq" lowers the densification
  /// gradient threshold and percent_dense, which grows more Gaussians.
  static TrainConfig preset(std::string_view name) {
    TrainConfig c;
    if (name == "default") return c;
    if (name == "hq") {
      c.densify_grad_threshold = 1e-4;
      c.percent_dense = 0.005;
      return c;
    }
    throw std::invalid_argument("unknown preset: " + std::string(name));
  }
};

}  // namespace lgs
