#pragma once

#include "lgs/core/math.hpp"

#include <cmath>
#include <stdexcept>

namespace lgs {

/// Pinhole camera. Camera space is x right, y down, z forward; the principal
/// point sits at the image center and pixel (i, j) has its center at
/// (i + 0.5, j + 0.5).
struct Camera {
  Vec3d position = Vec3d::Zero();
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();  // world-to-camera
  double focal = 1.0;
  int width = 1;
  int height = 1;
  double near = 0.01;

  double cx() const { return 0.5 * width; }
  double cy() const { return 0.5 * height; }

  Mat3<double> world_to_camera() const { return rotation.toRotationMatrix(); }

  Vec3d to_camera(const Vec3d& p) const { return rotation * (p - position); }

  Vec3d forward() const { return rotation.conjugate() * Vec3d(0, 0, 1); }
  Vec3d right() const { return rotation.conjugate() * Vec3d(1, 0, 0); }

  /// Unit world-space direction through the pixel-space point (u, v).
  Vec3d ray_direction(double u, double v) const {
    const Vec3d d((u - cx()) / focal, (v - cy()) / focal, 1.0);
    return (rotation.conjugate() * d).normalized();
  }

  void validate() const {
    if (std::abs(rotation.norm() - 1.0) > 1e-6)
      throw std::invalid_argument("camera rotation must be a unit quaternion");
    if (!(focal > 0.0)) throw std::invalid_argument("camera focal must be positive");
    if (width <= 0 || height <= 0) throw std::invalid_argument("camera size must be positive");
    if (!(near > 0.0)) throw std::invalid_argument("camera near must be positive");
  }

  /// Camera at `eye` looking at `target`; `up` is the world up direction.
  static Camera look_at(const Vec3d& eye, const Vec3d& target, const Vec3d& up, double focal,
                        int width, int height, double near = 0.01) {
    const Vec3d f = (target - eye).normalized();
    Vec3d r = f.cross(up);
    if (r.norm() < 1e-12) r = f.cross(Vec3d::UnitX());
    r.normalize();
    const Vec3d d = f.cross(r);
    Mat3<double> rot;
    rot.row(0) = r.transpose();
    rot.row(1) = d.transpose();
    rot.row(2) = f.transpose();
    Camera cam;
    cam.position = eye;
    cam.rotation = Eigen::Quaterniond(rot).normalized();
    cam.focal = focal;
    cam.width = width;
    cam.height = height;
    cam.near = near;
    return cam;
  }
};

}  // namespace lgs
