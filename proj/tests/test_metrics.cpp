#include "lgs/metrics/metrics.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace lgs;
using lgs::test::Rng;
using lgs::test::uniform;

namespace {

Image<double> random_image(Rng& rng, int w, int h, int c) {
  Image<double> im(w, h, c);
  for (auto& v : im.data) v = uniform(rng, 0, 1);
  return im;
}

// Direct SSIM: a full 2D Gaussian window evaluated at every valid position
// with its own sums, no separable filtering.
double brute_force_ssim(const Image<double>& a, const Image<double>& b) {
  const int n = 11, r = 5;
  double win[n][n], sum = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      win[i][j] = std::exp(-((i - r) * (i - r) + (j - r) * (j - r)) / (2 * 1.5 * 1.5));
      sum += win[i][j];
    }
  for (auto& row : win)
    for (double& v : row) v /= sum;
  const double c1 = 0.0001, c2 = 0.0009;
  double total = 0;
  for (int c = 0; c < a.channels; ++c) {
    double acc = 0;
    int count = 0;
    for (int y = 0; y + n <= a.height; ++y)
      for (int x = 0; x + n <= a.width; ++x) {
        double mx = 0, my = 0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            mx += win[i][j] * a.at(x + j, y + i, c);
            my += win[i][j] * b.at(x + j, y + i, c);
          }
        double vx = 0, vy = 0, cxy = 0;
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < n; ++j) {
            const double dx = a.at(x + j, y + i, c) - mx, dy = b.at(x + j, y + i, c) - my;
            vx += win[i][j] * dx * dx;
            vy += win[i][j] * dy * dy;
            cxy += win[i][j] * dx * dy;
          }
        acc += (2 * mx * my + c1) * (2 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
        ++count;
      }
    total += acc / count;
  }
  return total / a.channels;
}

}  // namespace

TEST(Psnr, IdenticalImagesAreInfinite) {
  Image<float> a(4, 4, 3, 0.3f);
  EXPECT_TRUE(std::isinf(psnr(a, a)));
  EXPECT_EQ(MetricReport::capped(psnr(a, a)), 100.0);
}

TEST(Psnr, UniformOffsetOfTenthIsTwentyDb) {
  Image<double> a(8, 8, 3, 0.0), b(8, 8, 3, 0.1);
  EXPECT_NEAR(psnr(a, b), 20.0, 1e-9);
}

TEST(Psnr, MatchesScalarOracle) {
  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    const auto a = random_image(rng, 13, 7, 3), b = random_image(rng, 13, 7, 3);
    double se = 0;
    for (int y = 0; y < 7; ++y)
      for (int x = 0; x < 13; ++x)
        for (int c = 0; c < 3; ++c) se += std::pow(a.at(x, y, c) - b.at(x, y, c), 2);
    const double want = -10.0 * std::log10(se / (13 * 7 * 3));
    EXPECT_NEAR(psnr(a, b), want, 1e-9);
  }
}

TEST(Psnr, RejectsShapeMismatch) {
  EXPECT_THROW(psnr(Image<float>(4, 4, 3), Image<float>(4, 5, 3)), std::invalid_argument);
}

TEST(Ssim, IdenticalIsOne) {
  Rng rng(2);
  const auto a = random_image(rng, 20, 16, 3);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
}

TEST(Ssim, NegativeImageIsAnticorrelated) {
  Image<double> a(24, 24, 3), b(24, 24, 3);
  for (int y = 0; y < 24; ++y)
    for (int x = 0; x < 24; ++x)
      for (int c = 0; c < 3; ++c) {
        const double s = ((x / 3 + y / 3) % 2) ? 0.5 : -0.5;
        a.at(x, y, c) = 0.5 + s;
        b.at(x, y, c) = 0.5 - s;
      }
  EXPECT_LT(ssim(a, b), 0.0);
}

TEST(Ssim, MatchesBruteForceWindowOn32x32) {
  Rng rng(3);
  const auto a = random_image(rng, 32, 32, 3);
  auto b = a;
  for (auto& v : b.data) v = std::clamp(v + uniform(rng, -0.2, 0.2), 0.0, 1.0);
  EXPECT_NEAR(ssim(a, b), brute_force_ssim(a, b), 1e-6);
}

TEST(Ssim, SymmetricAndDecreasingWithNoise) {
  Rng rng(4);
  const auto a = random_image(rng, 32, 24, 3);
  double prev = 1.0;
  for (double amp : {0.02, 0.05, 0.1, 0.2, 0.4}) {
    Rng noise(17);
    auto b = a;
    for (auto& v : b.data) v += amp * uniform(noise, -1, 1);
    const double s = ssim(a, b);
    EXPECT_NEAR(s, ssim(b, a), 1e-12);
    EXPECT_LT(s, prev);
    prev = s;
  }
}

TEST(Ssim, SmallImagesUseShrunkenOddWindow) {
  EXPECT_EQ(ssim_detail::window_for(64, 64).size(), 11u);
  EXPECT_EQ(ssim_detail::window_for(8, 20).size(), 7u);
  EXPECT_EQ(ssim_detail::window_for(5, 5).size(), 5u);
  Rng rng(5);
  const auto a = random_image(rng, 6, 6, 1);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
}

TEST(Ssim, GradientMatchesFiniteDifferences) {
  Rng rng(6);
  const auto a = random_image(rng, 16, 14, 3), b = random_image(rng, 16, 14, 3);
  Image<double> grad;
  ssim(a, b, &grad);
  for (int t = 0; t < 60; ++t) {
    const std::size_t i = rng() % a.data.size();
    auto ap = a, am = a;
    const double h = 1e-6;
    ap.data[i] += h;
    am.data[i] -= h;
    EXPECT_NEAR(grad.data[i], (ssim(ap, b) - ssim(am, b)) / (2 * h), 1e-7);
  }
}

TEST(MetricReport, CsvHasRowsMeanAndPopulationStd) {
  MetricReport r;
  r.rows = {{"a", 20.0, 0.5}, {"b", 30.0, 0.7}, {"c", std::numeric_limits<double>::infinity(), 1.0}};
  EXPECT_NEAR(r.mean_psnr(), 50.0, 1e-12);
  EXPECT_NEAR(r.std_psnr(), std::sqrt((900.0 + 400.0 + 2500.0) / 3.0), 1e-9);
  EXPECT_NEAR(r.mean_ssim(), 0.7333333333333333, 1e-12);
  const auto path = std::filesystem::temp_directory_path() / "lgs_metric_report.csv";
  r.write_csv(path);
  std::ifstream f(path);
  std::vector<std::string> lines;
  for (std::string l; std::getline(f, l);) lines.push_back(l);
  ASSERT_EQ(lines.size(), 6u);
  EXPECT_EQ(lines[0], "image,psnr,ssim");
  EXPECT_EQ(lines[1], "a,20.000000,0.500000");
  EXPECT_EQ(lines[3], "c,100.000000,1.000000");
  EXPECT_EQ(lines[4].rfind("mean,50.000000,", 0), 0u);
  EXPECT_EQ(lines[5].rfind("std,", 0), 0u);
  std::filesystem::remove(path);
}
