#pragma once

#include "lgs/format/quantize.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lgs {

static_assert(std::endian::native == std::endian::little, "the .lspl codec assumes a little-endian host");

struct LsplError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kLsplVersion = 1;
inline constexpr std::size_t kLsplFixedHeader = 32;
inline constexpr std::size_t kLsplRangeBlock = (3 + kShRestCoeffs) * 8;

inline std::size_t lspl_record_size(QuantProfile profile, int sh_degree) {
  const std::size_t m = static_cast<std::size_t>(sh_coeff_count(sh_degree) - 1);
  return 22 + 4 + (profile == QuantProfile::low ? 4 * m : (m > 0 ? 2 : 0));
}

inline std::size_t lspl_header_size(int layer_count) {
  return kLsplFixedHeader + 4 * static_cast<std::size_t>(layer_count) + kLsplRangeBlock;
}

namespace lspl_detail {

template <class V> void put(std::string& out, V v) {
  char b[sizeof(V)];
  std::memcpy(b, &v, sizeof(V));
  out.append(b, sizeof(V));
}

struct Reader {
  std::string_view bytes;
  std::size_t pos = 0;

  template <class V> V get() {
    if (pos + sizeof(V) > bytes.size()) throw LsplError("truncated .lspl file");
    V v;
    std::memcpy(&v, bytes.data() + pos, sizeof(V));
    pos += sizeof(V);
    return v;
  }
};

}  // namespace lspl_detail

inline std::string encode_lspl(const CompressedCloud& c) {
  using lspl_detail::put;
  const int m = c.rest_per_splat(), w = c.rest_width();
  std::string out = "LSPL";
  put<std::uint32_t>(out, kLsplVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.layer_count));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.sh_degree));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.profile));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.codebook_size()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(lspl_record_size(c.profile, c.sh_degree)));
  for (const auto n : c.layer_counts) put<std::uint32_t>(out, n);
  for (const auto& r : c.dc_range) put(out, r.min), put(out, r.max);
  for (const auto& r : c.rest_range) put(out, r.min), put(out, r.max);
  out.reserve(out.size() + c.size() * lspl_record_size(c.profile, c.sh_degree) + 2 * c.codebook.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    for (int a = 0; a < 3; ++a) put(out, c.position[3 * i + static_cast<std::size_t>(a)]);
    for (int a = 0; a < 3; ++a) put(out, c.scale[3 * i + static_cast<std::size_t>(a)]);
    for (int a = 0; a < 4; ++a) put(out, c.rotation[4 * i + static_cast<std::size_t>(a)]);
    put(out, c.opacity[i]);
    put(out, c.sh_dc[i]);
    if (c.profile == QuantProfile::low)
      for (int k = 0; k < m; ++k) put(out, c.sh_rest[i * static_cast<std::size_t>(m) + static_cast<std::size_t>(k)]);
    else if (w > 0)
      put(out, c.sh_index[i]);
  }
  for (const auto v : c.codebook) put(out, v);
  return out;
}

inline CompressedCloud decode_lspl(std::string_view bytes) {
  lspl_detail::Reader r{bytes};
  if (bytes.size() < 4 || bytes.substr(0, 4) != "LSPL") throw LsplError("not an .lspl file");
  r.pos = 4;
  if (r.get<std::uint32_t>() != kLsplVersion) throw LsplError("unsupported .lspl version");
  const auto count = r.get<std::uint32_t>();
  const auto layers = r.get<std::uint32_t>();
  const auto degree = r.get<std::uint32_t>();
  const auto profile = r.get<std::uint32_t>();
  const auto k = r.get<std::uint32_t>();
  const auto record = r.get<std::uint32_t>();
  if (layers < 1 || layers > static_cast<std::uint32_t>(kMaxLayers)) throw LsplError("bad layer count");
  if (degree > static_cast<std::uint32_t>(kMaxShDegree)) throw LsplError("bad SH degree");
  if (profile > 1) throw LsplError("unknown quantization profile");

  CompressedCloud c;
  c.profile = static_cast<QuantProfile>(profile);
  c.sh_degree = static_cast<int>(degree);
  c.layer_count = static_cast<int>(layers);
  if (record != lspl_record_size(c.profile, c.sh_degree)) throw LsplError("record size does not match header");
  if (c.profile == QuantProfile::low && k != 0) throw LsplError("low profile file carries a codebook");
  std::uint64_t total = 0;
  for (std::uint32_t l = 0; l < layers; ++l) total += c.layer_counts.emplace_back(r.get<std::uint32_t>());
  if (total != count) throw LsplError("layer counts do not sum to the splat count");
  for (auto& q : c.dc_range) q.min = r.get<float>(), q.max = r.get<float>();
  for (auto& q : c.rest_range) q.min = r.get<float>(), q.max = r.get<float>();

  const int m = c.rest_per_splat(), w = c.rest_width();
  const std::size_t expected = lspl_header_size(c.layer_count) + std::size_t{count} * record +
                               std::size_t{k} * static_cast<std::size_t>(w) * 2;
  if (bytes.size() != expected) throw LsplError("file size does not match header");
  for (std::uint32_t i = 0; i < count; ++i) {
    for (int a = 0; a < 3; ++a) c.position.push_back(r.get<std::uint16_t>());
    for (int a = 0; a < 3; ++a) c.scale.push_back(r.get<std::uint16_t>());
    for (int a = 0; a < 4; ++a) c.rotation.push_back(r.get<std::uint16_t>());
    c.opacity.push_back(r.get<std::uint16_t>());
    c.sh_dc.push_back(r.get<std::uint32_t>());
    if (c.profile == QuantProfile::low)
      for (int j = 0; j < m; ++j) c.sh_rest.push_back(r.get<std::uint32_t>());
    else if (w > 0) {
      c.sh_index.push_back(r.get<std::uint16_t>());
      if (c.sh_index.back() >= k) throw LsplError("codebook index out of range");
    }
  }
  for (std::size_t i = 0; i < std::size_t{k} * static_cast<std::size_t>(w); ++i) c.codebook.push_back(r.get<std::uint16_t>());
  return c;
}

inline void write_lspl(const std::filesystem::path& path, const CompressedCloud& c) {
  const std::string bytes = encode_lspl(c);
  std::ofstream f(path, std::ios::binary);
  if (!f || !f.write(bytes.data(), static_cast<std::streamsize>(bytes.size())))
    throw std::runtime_error("cannot write " + path.string());
}

inline CompressedCloud read_lspl(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_lspl(bytes);
}

}  // namespace lgs
