#pragma once

#include "lgs/core/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgs {

inline constexpr double kPsnrCap = 100.0;

/// PSNR over every channel for images in [0, 1]. Identical images give +inf.
template <class T> double psnr(const Image<T>& a, const Image<T>& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("psnr: image shapes differ");
  if (a.data.empty()) throw std::invalid_argument("psnr: empty image");
  double se = 0.0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const double d = static_cast<double>(a.data[i]) - static_cast<double>(b.data[i]);
    se += d * d;
  }
  const double mse = se / static_cast<double>(a.data.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

namespace ssim_detail {

inline constexpr double kC1 = 0.01 * 0.01;
inline constexpr double kC2 = 0.03 * 0.03;

/// Normalized 1D Gaussian window (sigma 1.5). The nominal size is 11; images
/// smaller than that use the largest odd size that fits.
inline std::vector<double> window_for(int width, int height) {
  int size = std::min({11, width, height});
  if (size % 2 == 0) --size;
  if (size < 1) throw std::invalid_argument("ssim: empty image");
  std::vector<double> w(static_cast<std::size_t>(size));
  const int r = size / 2;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    w[static_cast<std::size_t>(i)] = std::exp(-double((i - r) * (i - r)) / (2.0 * 1.5 * 1.5));
    sum += w[static_cast<std::size_t>(i)];
  }
  for (double& v : w) v /= sum;
  return w;
}

/// "Valid" separable correlation of a w x h plane: output is
/// (w - n + 1) x (h - n + 1).
inline std::vector<double> filter_valid(const std::vector<double>& src, int w, int h, const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int ow = w - n + 1, oh = h - n + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += k[static_cast<std::size_t>(i)] * src[static_cast<std::size_t>(y * w + x + i)];
      tmp[static_cast<std::size_t>(y * ow + x)] = s;
    }
  std::vector<double> out(static_cast<std::size_t>(ow) * static_cast<std::size_t>(oh));
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += k[static_cast<std::size_t>(i)] * tmp[static_cast<std::size_t>((y + i) * ow + x)];
      out[static_cast<std::size_t>(y * ow + x)] = s;
    }
  return out;
}

/// Adjoint of filter_valid: spreads an (ow x oh) plane back to (w x h).
inline std::vector<double> filter_adjoint(const std::vector<double>& src, int w, int h, const std::vector<double>& k) {
  const int n = static_cast<int>(k.size());
  const int ow = w - n + 1, oh = h - n + 1;
  std::vector<double> tmp(static_cast<std::size_t>(ow) * static_cast<std::size_t>(h), 0.0);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      const double v = src[static_cast<std::size_t>(y * ow + x)];
      for (int i = 0; i < n; ++i) tmp[static_cast<std::size_t>((y + i) * ow + x)] += k[static_cast<std::size_t>(i)] * v;
    }
  std::vector<double> out(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < ow; ++x) {
      const double v = tmp[static_cast<std::size_t>(y * ow + x)];
      for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(y * w + x + i)] += k[static_cast<std::size_t>(i)] * v;
    }
  return out;
}

}  // namespace ssim_detail

/// Mean SSIM (Gaussian window 11, sigma 1.5, K1 0.01, K2 0.03, L 1) over
/// valid window positions, averaged per channel and then across channels.
/// When `grad_a` is given it receives d(SSIM)/d(a).
template <class T> double ssim(const Image<T>& a, const Image<T>& b, Image<T>* grad_a = nullptr) {
  using namespace ssim_detail;
  if (!a.same_shape(b)) throw std::invalid_argument("ssim: image shapes differ");
  const int w = a.width, h = a.height, nc = a.channels;
  const auto k = window_for(w, h);
  const int n = static_cast<int>(k.size());
  const int ow = w - n + 1, oh = h - n + 1;
  const std::size_t np = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  const std::size_t no = static_cast<std::size_t>(ow) * static_cast<std::size_t>(oh);
  if (grad_a) *grad_a = Image<T>(w, h, nc);

  double total = 0.0;
  std::vector<double> x(np), y(np), xx(np), yy(np), xy(np);
  for (int c = 0; c < nc; ++c) {
    for (std::size_t p = 0; p < np; ++p) {
      x[p] = static_cast<double>(a.data[p * static_cast<std::size_t>(nc) + static_cast<std::size_t>(c)]);
      y[p] = static_cast<double>(b.data[p * static_cast<std::size_t>(nc) + static_cast<std::size_t>(c)]);
      xx[p] = x[p] * x[p];
      yy[p] = y[p] * y[p];
      xy[p] = x[p] * y[p];
    }
    const auto mx = filter_valid(x, w, h, k), my = filter_valid(y, w, h, k);
    const auto exx = filter_valid(xx, w, h, k), eyy = filter_valid(yy, w, h, k), exy = filter_valid(xy, w, h, k);
    std::vector<double> d_mu, d_exx, d_exy;
    if (grad_a) {
      d_mu.resize(no);
      d_exx.resize(no);
      d_exy.resize(no);
    }
    double sum = 0.0;
    for (std::size_t p = 0; p < no; ++p) {
      const double sxx = exx[p] - mx[p] * mx[p];
      const double syy = eyy[p] - my[p] * my[p];
      const double sxy = exy[p] - mx[p] * my[p];
      const double a1 = 2.0 * mx[p] * my[p] + kC1, a2 = 2.0 * sxy + kC2;
      const double b1 = mx[p] * mx[p] + my[p] * my[p] + kC1, b2 = sxx + syy + kC2;
      const double den = b1 * b2;
      const double s = a1 * a2 / den;
      sum += s;
      if (grad_a) {
        const double dnum = 2.0 * my[p] * a2 - 2.0 * my[p] * a1;
        const double dden = 2.0 * mx[p] * b2 - 2.0 * mx[p] * b1;
        d_mu[p] = (dnum - s * dden) / den;
        d_exx[p] = -s / b2;
        d_exy[p] = 2.0 * a1 / den;
      }
    }
    total += sum / static_cast<double>(no);
    if (grad_a) {
      const double scale = 1.0 / (static_cast<double>(no) * nc);
      const auto g_mu = filter_adjoint(d_mu, w, h, k);
      const auto g_xx = filter_adjoint(d_exx, w, h, k);
      const auto g_xy = filter_adjoint(d_exy, w, h, k);
      for (std::size_t p = 0; p < np; ++p)
        grad_a->data[p * static_cast<std::size_t>(nc) + static_cast<std::size_t>(c)] =
            static_cast<T>(scale * (g_mu[p] + 2.0 * x[p] * g_xx[p] + y[p] * g_xy[p]));
    }
  }
  return total / nc;
}

struct MetricRow {
  std::string id;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct MetricReport {
  std::vector<MetricRow> rows;

  static double capped(double v) { return std::min(v, kPsnrCap); }

  double mean_psnr() const { return mean([](const MetricRow& r) { return capped(r.psnr); }); }
  double mean_ssim() const { return mean([](const MetricRow& r) { return r.ssim; }); }
  double std_psnr() const { return stddev([](const MetricRow& r) { return capped(r.psnr); }); }
  double std_ssim() const { return stddev([](const MetricRow& r) { return r.ssim; }); }

  /// `id,psnr,ssim` rows followed by `mean` and `std` rows. PSNR is capped at
  /// 100 dB; std is the population standard deviation.
  void write_csv(const std::filesystem::path& path) const {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << "image,psnr,ssim\n";
    char buf[256];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f\n", r.id.c_str(), capped(r.psnr), r.ssim);
      f << buf;
    }
    std::snprintf(buf, sizeof buf, "mean,%.6f,%.6f\nstd,%.6f,%.6f\n", mean_psnr(), mean_ssim(), std_psnr(), std_ssim());
    f << buf;
  }

 private:
  template <class F> double mean(F f) const {
    if (rows.empty()) return 0.0;
    double s = 0.0;
    for (const auto& r : rows) s += f(r);
    return s / static_cast<double>(rows.size());
  }
  template <class F> double stddev(F f) const {
    if (rows.empty()) return 0.0;
    const double m = mean(f);
    double s = 0.0;
    for (const auto& r : rows) s += (f(r) - m) * (f(r) - m);
    return std::sqrt(s / static_cast<double>(rows.size()));
  }
};

}  // namespace lgs
