#include "lgs/core/camera.hpp"
#include "lgs/core/image.hpp"
#include "lgs/core/layers.hpp"
#include "lgs/core/math.hpp"
#include "lgs/core/radix_sort.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

using namespace lgs;

TEST(Math, SigmoidInverse) {
  for (double p : {0.005, 0.1, 0.5, 0.9, 0.995}) EXPECT_NEAR(sigmoid(inverse_sigmoid(p)), p, 1e-15);
  EXPECT_EQ(sigmoid(0.0), 0.5);
}

TEST(Math, QuaternionMatchesEigen) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n(0, 1);
  for (int i = 0; i < 50; ++i) {
    const Vec4<double> q(n(rng), n(rng), n(rng), n(rng));
    const Eigen::Quaterniond e(q[0], q[1], q[2], q[3]);
    EXPECT_LT((quat_to_matrix(q) - e.normalized().toRotationMatrix()).norm(), 1e-12);
  }
}

TEST(Math, QuaternionBackwardMatchesFiniteDifferences) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n(0, 1);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec4<double> q(n(rng), n(rng), n(rng), n(rng));
    Mat3<double> g;
    for (int i = 0; i < 9; ++i) g.data()[i] = n(rng);
    const Vec4<double> analytic = quat_to_matrix_backward(q, g);
    for (int a = 0; a < 4; ++a) {
      Vec4<double> qp = q, qm = q;
      qp[a] += 1e-6;
      qm[a] -= 1e-6;
      const double numeric = ((quat_to_matrix(qp) - quat_to_matrix(qm)).cwiseProduct(g)).sum() / 2e-6;
      EXPECT_NEAR(analytic[a], numeric, 1e-7 * std::max(1.0, std::abs(numeric)));
    }
  }
}

TEST(Camera, LookAtCentersTarget) {
  const Camera cam = Camera::look_at(Vec3d(3, 1, 2), Vec3d(0.1, 0.2, 0.3), Vec3d::UnitZ(), 50, 64, 48);
  const Vec3d c = cam.to_camera(Vec3d(0.1, 0.2, 0.3));
  EXPECT_NEAR(c.x(), 0.0, 1e-12);
  EXPECT_NEAR(c.y(), 0.0, 1e-12);
  EXPECT_NEAR(c.z(), (Vec3d(3, 1, 2) - Vec3d(0.1, 0.2, 0.3)).norm(), 1e-12);
  // Image y points down, so world up lands at negative camera y.
  EXPECT_LT(cam.to_camera(Vec3d(0.1, 0.2, 1.3)).y(), 0.0);
  EXPECT_NO_THROW(cam.validate());
}

TEST(Camera, RayDirectionInvertsProjection) {
  const Camera cam = Camera::look_at(Vec3d(0, -4, 1), Vec3d::Zero(), Vec3d::UnitZ(), 70, 80, 60);
  const Vec3d d = cam.ray_direction(12.5, 40.25);
  const Vec3d c = cam.to_camera(cam.position + 3.0 * d);
  EXPECT_NEAR(cam.focal * c.x() / c.z() + cam.cx(), 12.5, 1e-9);
  EXPECT_NEAR(cam.focal * c.y() / c.z() + cam.cy(), 40.25, 1e-9);
}

TEST(Camera, ValidateRejectsBadFields) {
  Camera cam;
  cam.focal = 0;
  EXPECT_THROW(cam.validate(), std::invalid_argument);
  cam.focal = 1;
  cam.rotation = Eigen::Quaterniond(2, 0, 0, 0);
  EXPECT_THROW(cam.validate(), std::invalid_argument);
}

TEST(Layers, MaskBasics) {
  const LayerMask m = LayerMask::up_to(2);
  EXPECT_TRUE(m.test(0) && m.test(2));
  EXPECT_FALSE(m.test(3));
  EXPECT_EQ(m.count(), 3);
  EXPECT_FALSE(LayerMask().any());
  EXPECT_FALSE(m.test(-1));
  EXPECT_THROW(LayerMask().set(kMaxLayers), std::out_of_range);
}

TEST(Layers, CutOnlyRemovesListedLayers) {
  CutPlane cut{Vec3d::UnitX(), 0.25, LayerMask::only(1)};
  EXPECT_TRUE(cut.removes(Vec3d(0.3, 0, 0), 1));
  EXPECT_FALSE(cut.removes(Vec3d(0.3, 0, 0), 0));
  EXPECT_FALSE(cut.removes(Vec3d(0.25, 0, 0), 1));
  SplatFilter f{LayerMask::all(2), cut};
  EXPECT_TRUE(f.keeps(Vec3d(0.3, 0, 0), 0));
  EXPECT_FALSE(f.keeps(Vec3d(0.3, 0, 0), 1));
  EXPECT_THROW((CutPlane{Vec3d(1, 1, 0), 0, {}}.validate()), std::invalid_argument);
}

TEST(RadixSort, MatchesStableSortOnRandomKeys) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = rng() % 3000;
    std::vector<float> keys(n);
    for (auto& k : keys) {
      const int kind = static_cast<int>(rng() % 5);
      if (kind == 0) k = static_cast<float>(rng() % 7);  // many ties
      else if (kind == 1) k = -0.0f;
      else k = std::uniform_real_distribution<float>(-1e4f, 1e4f)(rng);
    }
    std::vector<std::uint32_t> idx(n), expect(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::iota(expect.begin(), expect.end(), 0);
    radix_sort_indices<float>(keys, idx);
    std::stable_sort(expect.begin(), expect.end(), [&](auto a, auto b) { return keys[a] < keys[b]; });
    // std::stable_sort treats -0 == +0 while the radix order puts -0 first;
    // compare by key sequence plus the tie-break among bit-identical keys.
    for (std::size_t i = 0; i < n; ++i) EXPECT_EQ(keys[idx[i]], keys[expect[i]]);
    for (std::size_t i = 1; i < n; ++i)
      if (std::bit_cast<std::uint32_t>(keys[idx[i]]) == std::bit_cast<std::uint32_t>(keys[idx[i - 1]]))
        EXPECT_LT(idx[i - 1], idx[i]);
  }
}

TEST(RadixSort, DoubleKeysAndSubsets) {
  std::vector<double> keys{3.0, -1.0, 2.0, -1.0, std::numeric_limits<double>::infinity(), 0.5};
  std::vector<std::uint32_t> idx{5, 4, 3, 1, 0};
  radix_sort_indices<double>(keys, idx);
  EXPECT_EQ(idx, (std::vector<std::uint32_t>{3, 1, 5, 0, 4}));
}

TEST(Image, ShapeAndAccess) {
  Image<float> a(3, 2, 4);
  a.at(2, 1, 3) = 0.5f;
  EXPECT_EQ(a.data[(1 * 3 + 2) * 4 + 3], 0.5f);
  EXPECT_EQ(a.pixel_count(), 6u);
  EXPECT_FALSE(a.same_shape(Image<float>(3, 2, 3)));
  EXPECT_NO_THROW(require_same_shape(a, Image<float>(3, 2, 3), "test"));
  EXPECT_THROW(require_same_shape(a, Image<float>(2, 2, 4), "test"), std::invalid_argument);
}
