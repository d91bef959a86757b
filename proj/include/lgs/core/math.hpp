#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstdint>

namespace lgs {

template <class T> using Vec2 = Eigen::Matrix<T, 2, 1>;
template <class T> using Vec3 = Eigen::Matrix<T, 3, 1>;
template <class T> using Vec4 = Eigen::Matrix<T, 4, 1>;
template <class T> using Mat2 = Eigen::Matrix<T, 2, 2>;
template <class T> using Mat3 = Eigen::Matrix<T, 3, 3>;

using Vec3d = Vec3<double>;
using Vec3f = Vec3<float>;

template <class T> inline T sigmoid(T x) { return T(1) / (T(1) + std::exp(-x)); }

template <class T> inline T inverse_sigmoid(T p) { return std::log(p / (T(1) - p)); }

/// Rotation matrix of the quaternion (w, x, y, z) after normalization.
template <class T> Mat3<T> quat_to_matrix(const Vec4<T>& q_raw) {
  const Vec4<T> q = q_raw / q_raw.norm();
  const T w = q[0], x = q[1], y = q[2], z = q[3];
  Mat3<T> r;
  r << T(1) - T(2) * (y * y + z * z), T(2) * (x * y - w * z), T(2) * (x * z + w * y),
      T(2) * (x * y + w * z), T(1) - T(2) * (x * x + z * z), T(2) * (y * z - w * x),
      T(2) * (x * z - w * y), T(2) * (y * z + w * x), T(1) - T(2) * (x * x + y * y);
  return r;
}

/// Backpropagates dL/dR through quat_to_matrix, including the normalization.
template <class T> Vec4<T> quat_to_matrix_backward(const Vec4<T>& q_raw, const Mat3<T>& g) {
  const T n = q_raw.norm();
  const Vec4<T> q = q_raw / n;
  const T w = q[0], x = q[1], y = q[2], z = q[3];
  Vec4<T> gq;
  gq[0] = T(2) * (x * (g(2, 1) - g(1, 2)) + y * (g(0, 2) - g(2, 0)) + z * (g(1, 0) - g(0, 1)));
  gq[1] = T(2) * (-T(2) * x * (g(1, 1) + g(2, 2)) + y * (g(1, 0) + g(0, 1)) +
                  z * (g(2, 0) + g(0, 2)) + w * (g(2, 1) - g(1, 2)));
  gq[2] = T(2) * (x * (g(1, 0) + g(0, 1)) - T(2) * y * (g(0, 0) + g(2, 2)) +
                  z * (g(2, 1) + g(1, 2)) + w * (g(0, 2) - g(2, 0)));
  gq[3] = T(2) * (x * (g(2, 0) + g(0, 2)) + y * (g(2, 1) + g(1, 2)) -
                  T(2) * z * (g(0, 0) + g(1, 1)) + w * (g(1, 0) - g(0, 1)));
  // d(q/|q|)/dq = (I - q q^T) / |q|
  return (gq - q * q.dot(gq)) / n;
}

}  // namespace lgs
