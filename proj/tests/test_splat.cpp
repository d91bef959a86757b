#include "lgs/splat/gaussian.hpp"
#include "lgs/splat/projection.hpp"
#include "lgs/splat/sh.hpp"
#include "test_support.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace lgs;
using lgs::test::Rng;
using lgs::test::uniform;

namespace {

Vec3d random_unit(Rng& rng) {
  Vec3d d;
  do {
    d = Vec3d(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
  } while (d.norm() < 0.1 || d.norm() > 1.0);
  return d.normalized();
}

}  // namespace

TEST(Covariance, IdentityRotationUnitScale) {
  const Mat3<double> c = compute_cov3d<double>(Vec3d::Zero(), Vec4<double>(1, 0, 0, 0));
  EXPECT_TRUE(c.isApprox(Mat3<double>::Identity(), 1e-12));
}

TEST(Covariance, AxisAlignedScaling) {
  const Mat3<double> c = compute_cov3d<double>(Vec3d(std::log(2.0), 0, 0), Vec4<double>(1, 0, 0, 0));
  EXPECT_NEAR((c - Vec3d(4, 1, 1).asDiagonal().toDenseMatrix()).norm(), 0.0, 1e-12);
}

TEST(Covariance, QuarterTurnAboutZSwapsAxes) {
  const double h = std::sqrt(0.5);
  const Mat3<double> c = compute_cov3d<double>(Vec3d(std::log(2.0), 0, 0), Vec4<double>(h, 0, 0, h));
  EXPECT_NEAR((c - Vec3d(1, 4, 1).asDiagonal().toDenseMatrix()).norm(), 0.0, 1e-9);
}

TEST(Covariance, SymmetricPositiveDefiniteProperty) {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const Vec3d ls(uniform(rng, -3, 1), uniform(rng, -3, 1), uniform(rng, -3, 1));
    const Vec4<double> q(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    const Mat3<double> c = compute_cov3d<double>(ls, q);
    EXPECT_NEAR((c - c.transpose()).norm(), 0.0, 1e-12);
    Eigen::SelfAdjointEigenSolver<Mat3<double>> es(c);
    // Eigenvalues are the squared scales regardless of rotation.
    std::array<double, 3> want{std::exp(2 * ls[0]), std::exp(2 * ls[1]), std::exp(2 * ls[2])};
    std::sort(want.begin(), want.end());
    for (int a = 0; a < 3; ++a) EXPECT_NEAR(es.eigenvalues()[a], want[static_cast<std::size_t>(a)], 1e-9 * want[2]);
  }
}

TEST(Projection, OnAxisGaussianMapsToImageCenter) {
  const double d = 5.0, focal = 80.0, sigma = 0.1;
  const Camera cam = Camera::look_at(Vec3d(0, 0, -d), Vec3d::Zero(), Vec3d::UnitY(), focal, 64, 48);
  Gaussian<double> g;
  g.log_scale = Vec3d::Constant(std::log(sigma));
  g.opacity_logit = 3.0;
  ProjectedSplat<double> s;
  ASSERT_TRUE(project_gaussian(g, 0, CameraParams<double>(cam), 0, s));
  EXPECT_NEAR(s.mean.x(), 32.0, 1e-9);
  EXPECT_NEAR(s.mean.y(), 24.0, 1e-9);
  EXPECT_NEAR(s.p_cam.z(), d, 1e-12);
  // The stored covariance carries the fixed screen-space dilation.
  EXPECT_NEAR(std::sqrt(s.cov[0] - kCovDilation), sigma * focal / d, 1e-6);
  EXPECT_NEAR(std::sqrt(s.cov[2] - kCovDilation), sigma * focal / d, 1e-6);
  EXPECT_NEAR(s.cov[1], 0.0, 1e-12);
}

TEST(Projection, BehindCameraIsCulled) {
  const Camera cam = Camera::look_at(Vec3d(0, 0, -5), Vec3d::Zero(), Vec3d::UnitY(), 80, 64, 64);
  Gaussian<double> g;
  g.position = Vec3d(0, 0, -6);
  g.opacity_logit = 3.0;
  ProjectedSplat<double> s;
  EXPECT_FALSE(project_gaussian(g, 0, CameraParams<double>(cam), 0, s));
}

TEST(Projection, TransparentSplatIsCulled) {
  const Camera cam = Camera::look_at(Vec3d(0, 0, -5), Vec3d::Zero(), Vec3d::UnitY(), 80, 64, 64);
  Gaussian<double> g;
  g.opacity_logit = inverse_sigmoid(0.5 / 255.0);
  ProjectedSplat<double> s;
  EXPECT_FALSE(project_gaussian(g, 0, CameraParams<double>(cam), 0, s));
}

TEST(Projection, TileBoxContainsEveryVisiblePixel) {
  Rng rng(5);
  const Camera cam = lgs::test::orbit_camera(48, 40);
  const CameraParams<double> cp(cam);
  for (int i = 0; i < 100; ++i) {
    auto cloud = lgs::test::random_cloud<double>(rng, 1);
    ProjectedSplat<double> s;
    const bool kept = project_gaussian(cloud.gaussians[0], 0, cp, 3, s);
    for (int y = 0; y < cam.height; ++y)
      for (int x = 0; x < cam.width; ++x) {
        ProjectedSplat<double> p;
        if (!project_splat(cloud.gaussians[0], 0, cp, 3, p)) continue;
        double gauss;
        if (splat_alpha(p, x + 0.5, y + 0.5, gauss) < kMinAlpha) continue;
        ASSERT_TRUE(kept);
        EXPECT_FALSE(outside_extent(s, x + 0.5, y + 0.5));
        EXPECT_GE(x / kTileSize, s.tile_min[0]);
        EXPECT_LT(x / kTileSize, s.tile_max[0]);
        EXPECT_GE(y / kTileSize, s.tile_min[1]);
        EXPECT_LT(y / kTileSize, s.tile_max[1]);
      }
  }
}

TEST(SphericalHarmonics, DegreeZeroIsConstantTerm) {
  std::array<double, 48> sh{};
  sh[0] = 0.7;
  sh[1] = -0.2;
  sh[2] = 1.5;
  const Vec3d rgb = sh_eval(sh, Vec3d(0.3, -0.4, std::sqrt(0.75)), 0);
  EXPECT_NEAR(rgb[0], 0.7 * 0.28209479177 + 0.5, 1e-10);
  EXPECT_NEAR(rgb[1], 0.0 * 0 + std::max(-0.2 * 0.28209479177 + 0.5, 0.0), 1e-10);
  EXPECT_NEAR(rgb[2], 1.5 * 0.28209479177 + 0.5, 1e-10);
}

TEST(SphericalHarmonics, ZeroCoefficientsGiveMidGray) {
  const std::array<double, 48> sh{};
  Rng rng(2);
  for (int deg = 0; deg <= 3; ++deg) {
    const Vec3d rgb = sh_eval(sh, random_unit(rng), deg);
    EXPECT_EQ(rgb, Vec3d(0.5, 0.5, 0.5));
  }
}

TEST(SphericalHarmonics, NegativeValuesClampToZero) {
  std::array<double, 48> sh{};
  sh[0] = sh[1] = sh[2] = -10.0;
  EXPECT_EQ(sh_eval(sh, Vec3d(0, 0, 1), 0), Vec3d::Zero());
}

TEST(SphericalHarmonics, DcRoundTrip) {
  for (double v : {0.0, 0.25, 0.5, 1.0}) {
    std::array<double, 48> sh{};
    sh[0] = rgb_to_sh_dc(v);
    EXPECT_NEAR(sh_eval(sh, Vec3d(1, 0, 0), 3)[0], v, 1e-12);
  }
}

// Quadrature over a fine latitude/longitude grid: the 16 basis functions are
// orthonormal on the unit sphere.
TEST(SphericalHarmonics, BasisIsOrthonormal) {
  const int nt = 200, np = 400;
  Eigen::Matrix<double, 16, 16> gram = Eigen::Matrix<double, 16, 16>::Zero();
  for (int i = 0; i < nt; ++i) {
    const double theta = (i + 0.5) * std::numbers::pi / nt;
    const double w = std::sin(theta) * (std::numbers::pi / nt) * (2 * std::numbers::pi / np);
    for (int j = 0; j < np; ++j) {
      const double phi = (j + 0.5) * 2 * std::numbers::pi / np;
      const Vec3d d(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta));
      std::array<double, 16> y{};
      sh_basis(d, 3, y);
      for (int a = 0; a < 16; ++a)
        for (int b = 0; b < 16; ++b) gram(a, b) += w * y[static_cast<std::size_t>(a)] * y[static_cast<std::size_t>(b)];
    }
  }
  EXPECT_NEAR((gram - Eigen::Matrix<double, 16, 16>::Identity()).cwiseAbs().maxCoeff(), 0.0, 1e-3);
}

TEST(SphericalHarmonics, BasisGradientMatchesFiniteDifferences) {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3d d = random_unit(rng);
    std::array<Vec3d, 16> g;
    sh_basis_gradient(d, 3, g);
    for (int a = 0; a < 3; ++a) {
      const double h = 1e-6;
      Vec3d dp = d, dm = d;
      dp[a] += h;
      dm[a] -= h;
      std::array<double, 16> yp{}, ym{};
      sh_basis(dp, 3, yp);
      sh_basis(dm, 3, ym);
      for (int k = 0; k < 16; ++k)
        EXPECT_NEAR(g[static_cast<std::size_t>(k)][a], (yp[static_cast<std::size_t>(k)] - ym[static_cast<std::size_t>(k)]) / (2 * h), 1e-7);
    }
  }
}

TEST(Cloud, ValidateRejectsBadLayers) {
  GaussianCloud<float> c;
  c.layer_count = 2;
  c.gaussians.resize(3);
  c.gaussians[2].layer = 1;
  EXPECT_NO_THROW(c.validate());
  c.gaussians[1].layer = 2;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.gaussians[1].layer = 0;
  c.sh_degree = 4;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Cloud, CastRoundTripIsExactForFloat) {
  Rng rng(4);
  const auto f = lgs::test::random_cloud<float>(rng, 30, 3);
  EXPECT_EQ(f.cast<double>().cast<float>(), f);
  EXPECT_EQ(f.count_in_layer(0) + f.count_in_layer(1) + f.count_in_layer(2), f.size());
}
