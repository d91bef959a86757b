#pragma once

#include "lgs/format/kmeans.hpp"
#include "lgs/splat/gaussian.hpp"

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgs {

enum class QuantProfile : std::uint32_t { low = 0, clustered = 1 };

inline QuantProfile parse_quant_profile(const std::string& s) {
  if (s == "low") return QuantProfile::low;
  if (s == "clustered") return QuantProfile::clustered;
  throw std::invalid_argument("unknown quantization profile: " + s);
}

inline const char* to_string(QuantProfile p) { return p == QuantProfile::low ? "low" : "clustered"; }

struct QuantRange {
  float min = 0.0f, max = 0.0f;
  friend bool operator==(const QuantRange&, const QuantRange&) = default;
};

inline constexpr int kShRestCoeffs = (kMaxShCoeffs - 1) * 3;

/// Quantized cloud. Splats are stored layer by layer, so layer k occupies
/// the records after the first layer_counts[0] + ... + layer_counts[k-1].
/// SH rest values are coefficient-major with interleaved channels, index
/// (k - 1) * 3 + c, and only degree-active coefficients are kept.
struct CompressedCloud {
  QuantProfile profile = QuantProfile::low;
  int sh_degree = kMaxShDegree;
  int layer_count = 1;
  std::vector<std::uint32_t> layer_counts;
  std::array<QuantRange, 3> dc_range{};
  std::array<QuantRange, kShRestCoeffs> rest_range{};  // low profile only

  std::vector<std::uint16_t> position;  // 3 half floats per splat
  std::vector<std::uint16_t> scale;     // 3 half floats (log scale)
  std::vector<std::uint16_t> rotation;  // 4 half floats
  std::vector<std::uint16_t> opacity;   // 1 half float (logit)
  std::vector<std::uint32_t> sh_dc;     // packed 11/10/11 triplet
  std::vector<std::uint32_t> sh_rest;   // low: rest_per_splat() triplets per splat
  std::vector<std::uint16_t> sh_index;  // clustered: codebook row per splat
  std::vector<std::uint16_t> codebook;  // clustered: rows of rest_width() half floats

  std::size_t size() const { return opacity.size(); }
  int rest_per_splat() const { return sh_coeff_count(sh_degree) - 1; }
  int rest_width() const { return 3 * rest_per_splat(); }
  std::size_t codebook_size() const {
    return rest_width() == 0 ? 0 : codebook.size() / static_cast<std::size_t>(rest_width());
  }

  friend bool operator==(const CompressedCloud&, const CompressedCloud&) = default;
};

struct CompressOptions {
  QuantProfile profile = QuantProfile::low;
  int codebook_size = 0;  // 0 picks min(16384, ceil(n / 8))
  int kmeans_iterations = 10;
  std::uint64_t seed = 0;
};

inline int auto_codebook_size(std::size_t n) {
  return static_cast<int>(std::max<std::size_t>(1, std::min<std::size_t>(16384, (n + 7) / 8)));
}

namespace quant_detail {

inline std::uint16_t to_half(float v) { return Eigen::numext::bit_cast<std::uint16_t>(Eigen::half(v)); }
inline float from_half(std::uint16_t b) { return static_cast<float>(Eigen::numext::bit_cast<Eigen::half>(b)); }

inline constexpr std::uint32_t kLevels[3] = {2047, 1023, 2047};
inline constexpr int kShift[3] = {0, 11, 21};

inline std::uint32_t level(float v, QuantRange r, std::uint32_t levels) {
  if (!(r.max > r.min)) return 0;
  const double t = (static_cast<double>(v) - r.min) / (static_cast<double>(r.max) - r.min);
  return static_cast<std::uint32_t>(std::clamp(std::lround(t * levels), 0L, static_cast<long>(levels)));
}

// Level 0 and the top level reproduce min and max exactly.
inline float unlevel(std::uint32_t q, QuantRange r, std::uint32_t levels) {
  if (!(r.max > r.min)) return r.min;
  return static_cast<float>(r.min + (static_cast<double>(r.max) - r.min) * q / levels);
}

inline std::uint32_t pack(const float v[3], const QuantRange* r) {
  std::uint32_t out = 0;
  for (int c = 0; c < 3; ++c) out |= level(v[c], r[c], kLevels[c]) << kShift[c];
  return out;
}

inline void unpack(std::uint32_t p, const QuantRange* r, float v[3]) {
  for (int c = 0; c < 3; ++c) v[c] = unlevel((p >> kShift[c]) & kLevels[c], r[c], kLevels[c]);
}

}  // namespace quant_detail

inline CompressedCloud compress(const GaussianCloud<float>& cloud, const CompressOptions& opt = {}) {
  using namespace quant_detail;
  cloud.validate();
  CompressedCloud out;
  out.profile = opt.profile;
  out.sh_degree = cloud.sh_degree;
  out.layer_count = cloud.layer_count;
  out.layer_counts.assign(static_cast<std::size_t>(cloud.layer_count), 0);

  std::vector<const Gaussian<float>*> order;
  order.reserve(cloud.size());
  for (int l = 0; l < cloud.layer_count; ++l)
    for (const auto& g : cloud.gaussians)
      if (g.layer == l) {
        order.push_back(&g);
        ++out.layer_counts[static_cast<std::size_t>(l)];
      }
  const std::size_t n = order.size();
  const int m = out.rest_per_splat(), w = out.rest_width();

  auto range_of = [&](int idx) {
    QuantRange r{std::numeric_limits<float>::infinity(), -std::numeric_limits<float>::infinity()};
    for (const auto* g : order) {
      r.min = std::min(r.min, g->sh[static_cast<std::size_t>(idx)]);
      r.max = std::max(r.max, g->sh[static_cast<std::size_t>(idx)]);
    }
    return n == 0 ? QuantRange{} : r;
  };
  for (int c = 0; c < 3; ++c) out.dc_range[static_cast<std::size_t>(c)] = range_of(c);
  if (opt.profile == QuantProfile::low)
    for (int i = 0; i < w; ++i) out.rest_range[static_cast<std::size_t>(i)] = range_of(3 + i);

  out.position.reserve(3 * n);
  out.scale.reserve(3 * n);
  out.rotation.reserve(4 * n);
  out.opacity.reserve(n);
  out.sh_dc.reserve(n);
  for (const auto* g : order) {
    for (int a = 0; a < 3; ++a) out.position.push_back(to_half(g->position[a]));
    for (int a = 0; a < 3; ++a) out.scale.push_back(to_half(g->log_scale[a]));
    for (int a = 0; a < 4; ++a) out.rotation.push_back(to_half(g->rotation[a]));
    out.opacity.push_back(to_half(g->opacity_logit));
    out.sh_dc.push_back(pack(&g->sh[0], out.dc_range.data()));
    if (opt.profile == QuantProfile::low)
      for (int k = 1; k <= m; ++k)
        out.sh_rest.push_back(pack(&g->sh[static_cast<std::size_t>(3 * k)], &out.rest_range[static_cast<std::size_t>(3 * (k - 1))]));
  }

  if (opt.profile == QuantProfile::clustered && w > 0 && n > 0) {
    RowMatrixf x(static_cast<Eigen::Index>(n), w);
    for (std::size_t i = 0; i < n; ++i)
      for (int j = 0; j < w; ++j) x(static_cast<Eigen::Index>(i), j) = order[i]->sh[static_cast<std::size_t>(3 + j)];
    const int k = opt.codebook_size > 0 ? opt.codebook_size : auto_codebook_size(n);
    if (k > 65536) throw std::invalid_argument("codebook size exceeds 65536");
    const KMeansResult km = kmeans(x, k, opt.seed, opt.kmeans_iterations);

    // Keep used rows only, rounded to half floats, deduplicated and sorted so
    // that the codebook is canonical.
    RowMatrixf rounded(km.centroids.rows(), w);
    for (Eigen::Index r = 0; r < rounded.rows(); ++r)
      for (int j = 0; j < w; ++j) rounded(r, j) = from_half(to_half(km.centroids(r, j)));
    std::vector<char> used(static_cast<std::size_t>(rounded.rows()), 0);
    for (const auto a : km.assignment) used[a] = 1;
    std::vector<Eigen::Index> rows;
    for (Eigen::Index r = 0; r < rounded.rows(); ++r)
      if (used[static_cast<std::size_t>(r)]) rows.push_back(r);
    std::stable_sort(rows.begin(), rows.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return kmeans_detail::row_less(rounded, a, b); });
    std::vector<std::uint16_t> remap(static_cast<std::size_t>(rounded.rows()), 0);
    std::uint16_t next = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i > 0 && !kmeans_detail::row_equal(rounded, rows[i - 1], rows[i])) ++next;
      if (out.codebook_size() == next)
        for (int j = 0; j < w; ++j) out.codebook.push_back(to_half(rounded(rows[i], j)));
      remap[static_cast<std::size_t>(rows[i])] = next;
    }
    out.sh_index.reserve(n);
    for (const auto a : km.assignment) out.sh_index.push_back(remap[a]);
  }
  return out;
}

inline GaussianCloud<float> decompress(const CompressedCloud& c) {
  using namespace quant_detail;
  GaussianCloud<float> cloud;
  cloud.sh_degree = c.sh_degree;
  cloud.layer_count = c.layer_count;
  const std::size_t n = c.size();
  const int m = c.rest_per_splat(), w = c.rest_width();
  cloud.gaussians.resize(n);
  std::size_t i = 0;
  for (int l = 0; l < c.layer_count; ++l)
    for (std::uint32_t j = 0; j < c.layer_counts[static_cast<std::size_t>(l)]; ++j, ++i) {
      auto& g = cloud.gaussians[i];
      g.layer = l;
      for (int a = 0; a < 3; ++a) g.position[a] = from_half(c.position[3 * i + static_cast<std::size_t>(a)]);
      for (int a = 0; a < 3; ++a) g.log_scale[a] = from_half(c.scale[3 * i + static_cast<std::size_t>(a)]);
      for (int a = 0; a < 4; ++a) g.rotation[a] = from_half(c.rotation[4 * i + static_cast<std::size_t>(a)]);
      g.opacity_logit = from_half(c.opacity[i]);
      unpack(c.sh_dc[i], c.dc_range.data(), &g.sh[0]);
      if (c.profile == QuantProfile::low) {
        for (int k = 1; k <= m; ++k)
          unpack(c.sh_rest[i * static_cast<std::size_t>(m) + static_cast<std::size_t>(k - 1)],
                 &c.rest_range[static_cast<std::size_t>(3 * (k - 1))], &g.sh[static_cast<std::size_t>(3 * k)]);
      } else if (w > 0) {
        const std::size_t row = static_cast<std::size_t>(c.sh_index[i]) * static_cast<std::size_t>(w);
        for (int j2 = 0; j2 < w; ++j2) g.sh[static_cast<std::size_t>(3 + j2)] = from_half(c.codebook[row + static_cast<std::size_t>(j2)]);
      }
    }
  return cloud;
}

/// Codebook rows referenced by splats of more than one layer.
inline std::size_t shared_codebook_entries(const CompressedCloud& c) {
  if (c.sh_index.empty()) return 0;
  std::vector<int> first(c.codebook_size(), -1);
  std::vector<char> shared(c.codebook_size(), 0);
  std::size_t i = 0;
  for (int l = 0; l < c.layer_count; ++l)
    for (std::uint32_t j = 0; j < c.layer_counts[static_cast<std::size_t>(l)]; ++j, ++i) {
      const auto e = c.sh_index[i];
      if (first[e] < 0) first[e] = l;
      else if (first[e] != l) shared[e] = 1;
    }
  return static_cast<std::size_t>(std::count(shared.begin(), shared.end(), 1));
}

}  // namespace lgs
