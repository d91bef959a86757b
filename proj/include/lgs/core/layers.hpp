#pragma once

#include "lgs/core/math.hpp"

#include <bitset>
#include <cstdint>
#include <optional>
#include <stdexcept>

namespace lgs {

inline constexpr int kMaxLayers = 256;

/// Set of active layers.
class LayerMask {
 public:
  LayerMask() = default;

  static LayerMask all(int layer_count) {
    LayerMask m;
    for (int i = 0; i < layer_count && i < kMaxLayers; ++i) m.bits_.set(i);
    return m;
  }
  static LayerMask only(int layer) {
    LayerMask m;
    m.set(layer);
    return m;
  }
  /// Layers 0..layer inclusive.
  static LayerMask up_to(int layer) { return all(layer + 1); }

  void set(int layer, bool on = true) {
    if (layer < 0 || layer >= kMaxLayers) throw std::out_of_range("layer index out of range");
    bits_.set(static_cast<std::size_t>(layer), on);
  }
  bool test(int layer) const {
    return layer >= 0 && layer < kMaxLayers && bits_.test(static_cast<std::size_t>(layer));
  }
  bool any() const { return bits_.any(); }
  int count() const { return static_cast<int>(bits_.count()); }

  friend bool operator==(const LayerMask&, const LayerMask&) = default;

 private:
  std::bitset<kMaxLayers> bits_;
};

/// Half-space cut on Gaussian centers: a center p is removed when
/// normal . p > offset and its layer is in `layers`.
struct CutPlane {
  Vec3d normal = Vec3d::UnitX();
  double offset = 0.0;
  LayerMask layers;

  bool removes(const Vec3d& p, int layer) const {
    return layers.test(layer) && normal.dot(p) > offset;
  }

  void validate() const {
    if (std::abs(normal.norm() - 1.0) > 1e-6)
      throw std::invalid_argument("cut plane normal must have unit length");
  }
};

/// Layer and cut filter applied before sorting.
struct SplatFilter {
  LayerMask layers;
  std::optional<CutPlane> cut;

  bool keeps(const Vec3d& p, int layer) const {
    if (!layers.test(layer)) return false;
    return !(cut && cut->removes(p, layer));
  }
};

}  // namespace lgs
