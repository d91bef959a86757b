#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <span>
#include <type_traits>
#include <vector>

namespace lgs {

namespace detail {

template <class F> struct SortableBits;
template <> struct SortableBits<float> { using type = std::uint32_t; };
template <> struct SortableBits<double> { using type = std::uint64_t; };

/// Maps an IEEE float to an unsigned integer with the same total order
/// (negatives below positives, -0 below +0).
template <class F> typename SortableBits<F>::type sortable_key(F v) {
  using U = typename SortableBits<F>::type;
  constexpr U sign = U(1) << (sizeof(U) * 8 - 1);
  const U bits = std::bit_cast<U>(v);
  return (bits & sign) ? ~bits : (bits | sign);
}

}  // namespace detail

/// Stable LSD radix sort of `indices` by ascending `keys[indices[i]]`. Equal
/// keys keep their incoming order, so an ascending index list sorts with an
/// index tie-break.
template <class F>
void radix_sort_indices(std::span<const F> keys, std::vector<std::uint32_t>& indices) {
  static_assert(std::is_floating_point_v<F>);
  using U = typename detail::SortableBits<F>::type;
  const std::size_t n = indices.size();
  if (n < 2) return;

  std::vector<U> k(n), k_tmp(n);
  std::vector<std::uint32_t> idx_tmp(n);
  for (std::size_t i = 0; i < n; ++i) k[i] = detail::sortable_key(keys[indices[i]]);

  constexpr int kBits = 8;
  constexpr int kBuckets = 1 << kBits;
  constexpr int kPasses = sizeof(U) * 8 / kBits;
  std::array<std::size_t, kBuckets> count{};
  for (int pass = 0; pass < kPasses; ++pass) {
    const int shift = pass * kBits;
    count.fill(0);
    for (std::size_t i = 0; i < n; ++i) ++count[(k[i] >> shift) & (kBuckets - 1)];
    // A pass where every key lands in one bucket is a no-op.
    bool trivial = false;
    for (std::size_t c : count)
      if (c == n) trivial = true;
    if (trivial) continue;
    std::size_t sum = 0;
    for (auto& c : count) {
      const std::size_t t = c;
      c = sum;
      sum += t;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t b = (k[i] >> shift) & (kBuckets - 1);
      const std::size_t dst = count[b]++;
      k_tmp[dst] = k[i];
      idx_tmp[dst] = indices[i];
    }
    k.swap(k_tmp);
    indices.swap(idx_tmp);
  }
}

}  // namespace lgs
