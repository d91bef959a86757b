#pragma once

#include <cstdint>
#include <vector>

namespace lgs {

/// Describes how a per-Gaussian array changes when the cloud is edited:
/// output slot i takes input `source[i]`, or a fresh value when negative.
struct Remap {
  std::vector<std::int64_t> source;

  std::size_t size() const { return source.size(); }

  static Remap keep(const std::vector<std::uint8_t>& keep_mask) {
    Remap r;
    for (std::size_t i = 0; i < keep_mask.size(); ++i)
      if (keep_mask[i]) r.source.push_back(static_cast<std::int64_t>(i));
    return r;
  }

  /// Remap equal to applying `first` and then `second`.
  static Remap compose(const Remap& first, const Remap& second) {
    Remap r;
    r.source.reserve(second.size());
    for (std::int64_t s : second.source) r.source.push_back(s < 0 ? -1 : first.source[static_cast<std::size_t>(s)]);
    return r;
  }
};

template <class V> void apply_remap(std::vector<V>& v, const Remap& r, const V& fresh = V{}) {
  std::vector<V> out;
  out.reserve(r.size());
  for (std::int64_t s : r.source) out.push_back(s < 0 ? fresh : v[static_cast<std::size_t>(s)]);
  v.swap(out);
}

}  // namespace lgs
