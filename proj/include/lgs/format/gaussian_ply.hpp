#pragma once

#include "lgs/format/ply_io.hpp"
#include "lgs/splat/gaussian.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

namespace lgs {

// Binary little-endian vertex PLY with the usual 3DGS property names plus a
// `layer` uchar. f_rest is channel-major on disk: f_rest_{c * m + (k - 1)}
// for coefficient k >= 1 of channel c, m = coefficients per channel - 1.
// Coefficients above sh_degree are not persisted and read back as zero.

namespace gply_detail {

inline void put_f32(std::string& out, float v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

inline int degree_for_rest_count(std::size_t n) {
  for (int d = 0; d <= kMaxShDegree; ++d)
    if (static_cast<std::size_t>(3 * (sh_coeff_count(d) - 1)) == n) return d;
  return -1;
}

}  // namespace gply_detail

inline std::string encode_gaussian_ply(const GaussianCloud<float>& cloud) {
  cloud.validate();
  const int m = sh_coeff_count(cloud.sh_degree) - 1;
  std::string out = "ply\nformat binary_little_endian 1.0\ncomment layer_count " +
                    std::to_string(cloud.layer_count) + "\nelement vertex " + std::to_string(cloud.size()) + "\n";
  for (const char* p : {"x", "y", "z", "nx", "ny", "nz", "f_dc_0", "f_dc_1", "f_dc_2"})
    out += std::string("property float ") + p + "\n";
  for (int i = 0; i < 3 * m; ++i) out += "property float f_rest_" + std::to_string(i) + "\n";
  out += "property float opacity\n";
  for (int i = 0; i < 3; ++i) out += "property float scale_" + std::to_string(i) + "\n";
  for (int i = 0; i < 4; ++i) out += "property float rot_" + std::to_string(i) + "\n";
  out += "property uchar layer\nend_header\n";
  out.reserve(out.size() + cloud.size() * (4 * (3 * m + 17) + 1));
  for (const auto& g : cloud.gaussians) {
    for (int i = 0; i < 3; ++i) gply_detail::put_f32(out, g.position[i]);
    for (int i = 0; i < 3; ++i) gply_detail::put_f32(out, 0.0f);
    for (int c = 0; c < 3; ++c) gply_detail::put_f32(out, g.sh_at(0, c));
    for (int c = 0; c < 3; ++c)
      for (int k = 1; k <= m; ++k) gply_detail::put_f32(out, g.sh_at(k, c));
    gply_detail::put_f32(out, g.opacity_logit);
    for (int i = 0; i < 3; ++i) gply_detail::put_f32(out, g.log_scale[i]);
    for (int i = 0; i < 4; ++i) gply_detail::put_f32(out, g.rotation[i]);
    out.push_back(static_cast<char>(static_cast<std::uint8_t>(g.layer)));
  }
  return out;
}

/// Accepts any scalar types and extra properties. A file without `layer`
/// loads as a single-layer cloud.
inline GaussianCloud<float> decode_gaussian_ply(std::string_view bytes) {
  const ply::Header h = ply::parse_header(bytes);
  const ply::Table t = ply::read_element(bytes, h, "vertex");
  auto need = [&](const std::string& name) {
    const auto* c = t.column(name);
    if (!c) throw ply::FormatError("Gaussian PLY lacks property '" + name + "'");
    return c;
  };
  const std::vector<double>* pos[3] = {need("x"), need("y"), need("z")};
  const std::vector<double>* dc[3] = {need("f_dc_0"), need("f_dc_1"), need("f_dc_2")};
  const std::vector<double>* opacity = need("opacity");
  const std::vector<double>* scale[3] = {need("scale_0"), need("scale_1"), need("scale_2")};
  const std::vector<double>* rot[4] = {need("rot_0"), need("rot_1"), need("rot_2"), need("rot_3")};
  std::vector<const std::vector<double>*> rest;
  while (const auto* c = t.column("f_rest_" + std::to_string(rest.size()))) rest.push_back(c);
  const int degree = gply_detail::degree_for_rest_count(rest.size());
  if (degree < 0) throw ply::FormatError("unsupported f_rest count " + std::to_string(rest.size()));
  const int m = sh_coeff_count(degree) - 1;
  const auto* layer = t.column("layer");

  int layer_count = 1;
  for (const auto& c : h.comments)
    if (c.rfind("layer_count ", 0) == 0) {
      try {
        layer_count = std::stoi(c.substr(12));
      } catch (const std::exception&) {
        throw ply::FormatError("malformed layer_count comment");
      }
    }

  GaussianCloud<float> cloud;
  cloud.sh_degree = degree;
  const std::size_t n = t.element->count;
  cloud.gaussians.resize(n);
  int max_layer = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto& g = cloud.gaussians[i];
    for (int a = 0; a < 3; ++a) {
      g.position[a] = static_cast<float>((*pos[a])[i]);
      g.log_scale[a] = static_cast<float>((*scale[a])[i]);
      g.sh_at(0, a) = static_cast<float>((*dc[a])[i]);
    }
    for (int a = 0; a < 4; ++a) g.rotation[a] = static_cast<float>((*rot[a])[i]);
    g.opacity_logit = static_cast<float>((*opacity)[i]);
    for (int c = 0; c < 3; ++c)
      for (int k = 1; k <= m; ++k) g.sh_at(k, c) = static_cast<float>((*rest[static_cast<std::size_t>(c * m + k - 1)])[i]);
    g.layer = layer ? static_cast<int>((*layer)[i]) : 0;
    max_layer = std::max(max_layer, g.layer);
  }
  cloud.layer_count = layer ? std::max(layer_count, max_layer + 1) : 1;
  cloud.validate();
  return cloud;
}

inline void write_gaussian_ply(const std::filesystem::path& path, const GaussianCloud<float>& cloud) {
  const std::string bytes = encode_gaussian_ply(cloud);
  std::ofstream f(path, std::ios::binary);
  if (!f || !f.write(bytes.data(), static_cast<std::streamsize>(bytes.size())))
    throw std::runtime_error("cannot write " + path.string());
}

inline GaussianCloud<float> read_gaussian_ply(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_gaussian_ply(bytes);
}

}  // namespace lgs
