// Reads .lspl files the way a viewer would: straight from the byte layout in
// docs/formats.md, without the library decoder.
#include "lgs/format/lspl.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cstring>

using namespace lgs;
using lgs::test::Rng;

namespace {

struct ViewerSection {
  std::uint32_t count = 0;
  std::size_t offset = 0;  // byte offset of the first record
};

struct ViewerFile {
  std::uint32_t version = 0, splats = 0, layers = 0, sh_degree = 0, profile = 0, codebook = 0, record = 0;
  std::vector<ViewerSection> sections;
  std::size_t codebook_offset = 0;
  float dc_min[3]{}, dc_max[3]{};
};

template <class V> V load(const std::string& b, std::size_t at) {
  V v;
  std::memcpy(&v, b.data() + at, sizeof(V));
  return v;
}

ViewerFile parse(const std::string& b) {
  ViewerFile f;
  if (b.size() < 32 || b.compare(0, 4, "LSPL") != 0) throw std::runtime_error("bad magic");
  f.version = load<std::uint32_t>(b, 4);
  f.splats = load<std::uint32_t>(b, 8);
  f.layers = load<std::uint32_t>(b, 12);
  f.sh_degree = load<std::uint32_t>(b, 16);
  f.profile = load<std::uint32_t>(b, 20);
  f.codebook = load<std::uint32_t>(b, 24);
  f.record = load<std::uint32_t>(b, 28);
  std::size_t at = 32 + 4 * std::size_t{f.layers};
  for (int c = 0; c < 3; ++c) {
    f.dc_min[c] = load<float>(b, at + 8 * static_cast<std::size_t>(c));
    f.dc_max[c] = load<float>(b, at + 8 * static_cast<std::size_t>(c) + 4);
  }
  at += 48 * 8;
  for (std::uint32_t l = 0; l < f.layers; ++l) {
    const auto n = load<std::uint32_t>(b, 32 + 4 * std::size_t{l});
    f.sections.push_back({n, at});
    at += std::size_t{n} * f.record;
  }
  f.codebook_offset = at;
  const std::size_t rest = 3 * ((f.sh_degree + 1) * (f.sh_degree + 1) - 1);
  if (at + std::size_t{f.codebook} * rest * 2 != b.size()) throw std::runtime_error("size mismatch");
  return f;
}

float half_to_float(std::uint16_t h) {
  const std::uint32_t sign = (h >> 15) & 1, exp = (h >> 10) & 31, man = h & 1023;
  float v;
  if (exp == 0) v = std::ldexp(static_cast<float>(man), -24);
  else if (exp == 31) v = man ? std::numeric_limits<float>::quiet_NaN() : std::numeric_limits<float>::infinity();
  else v = std::ldexp(static_cast<float>(man | 1024), static_cast<int>(exp) - 25);
  return sign ? -v : v;
}

}  // namespace

TEST(ViewerFormat, EmptyCloudIsHeaderOnly) {
  GaussianCloud<float> empty;
  const std::string b = encode_lspl(compress(empty));
  const auto f = parse(b);
  EXPECT_EQ(f.version, 1u);
  EXPECT_EQ(f.splats, 0u);
  EXPECT_EQ(f.layers, 1u);
  ASSERT_EQ(f.sections.size(), 1u);
  EXPECT_EQ(f.sections[0].count, 0u);
  EXPECT_EQ(f.codebook_offset, b.size());
}

TEST(ViewerFormat, ThreeLayersGiveThreeContiguousSections) {
  Rng rng(1);
  const auto cloud = test::random_cloud<float>(rng, 240, 3);
  for (auto profile : {QuantProfile::low, QuantProfile::clustered}) {
    CompressOptions opt;
    opt.profile = profile;
    const std::string b = encode_lspl(compress(cloud, opt));
    const auto f = parse(b);
    ASSERT_EQ(f.sections.size(), 3u);
    std::uint32_t total = 0;
    for (int l = 0; l < 3; ++l) {
      EXPECT_EQ(f.sections[static_cast<std::size_t>(l)].count, cloud.count_in_layer(l));
      total += f.sections[static_cast<std::size_t>(l)].count;
      if (l > 0) {
        EXPECT_EQ(f.sections[static_cast<std::size_t>(l)].offset,
                  f.sections[static_cast<std::size_t>(l) - 1].offset + f.sections[static_cast<std::size_t>(l) - 1].count * f.record);
      }
    }
    EXPECT_EQ(total, f.splats);
    EXPECT_EQ(f.record, profile == QuantProfile::low ? 86u : 28u);
    if (profile == QuantProfile::clustered) {
      EXPECT_GT(f.codebook, 0u);
    }
  }
}

TEST(ViewerFormat, RecordsDecodeToTheSplats) {
  Rng rng(2);
  const auto cloud = test::random_cloud<float>(rng, 60, 2);
  const std::string b = encode_lspl(compress(cloud));
  const auto f = parse(b);
  std::size_t checked = 0;
  for (std::uint32_t l = 0; l < f.layers; ++l) {
    std::vector<const Gaussian<float>*> in_layer;
    for (const auto& g : cloud.gaussians)
      if (g.layer == static_cast<int>(l)) in_layer.push_back(&g);
    for (std::uint32_t i = 0; i < f.sections[l].count; ++i) {
      const std::size_t r = f.sections[l].offset + std::size_t{i} * f.record;
      const auto& g = *in_layer[i];
      for (int a = 0; a < 3; ++a)
        EXPECT_NEAR(half_to_float(load<std::uint16_t>(b, r + 2 * static_cast<std::size_t>(a))), g.position[a], 2e-3);
      EXPECT_NEAR(half_to_float(load<std::uint16_t>(b, r + 20)), g.opacity_logit, 2e-3);
      const auto dc = load<std::uint32_t>(b, r + 22);
      const float red = f.dc_min[0] + (f.dc_max[0] - f.dc_min[0]) * static_cast<float>(dc & 2047) / 2047.0f;
      EXPECT_NEAR(red, g.sh_at(0, 0), (f.dc_max[0] - f.dc_min[0]) / 2047.0f);
      ++checked;
    }
  }
  EXPECT_EQ(checked, cloud.size());
}
