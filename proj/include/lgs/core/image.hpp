#pragma once

#include <cassert>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgs {

/// Dense interleaved image, row-major, `channels` values per pixel.
template <class T> struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<T> data;

  Image() = default;
  Image(int w, int h, int c, T fill = T(0))
      : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, fill) {}

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  bool empty() const { return data.empty(); }

  T& at(int x, int y, int c) {
    assert(x >= 0 && x < width && y >= 0 && y < height && c >= 0 && c < channels);
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  const T& at(int x, int y, int c) const {
    assert(x >= 0 && x < width && y >= 0 && y < height && c >= 0 && c < channels);
    return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  bool same_shape(const Image& o) const {
    return width == o.width && height == o.height && channels == o.channels;
  }

  template <class U> Image<U> cast() const {
    Image<U> out(width, height, channels);
    for (std::size_t i = 0; i < data.size(); ++i) out.data[i] = static_cast<U>(data[i]);
    return out;
  }

  friend bool operator==(const Image& a, const Image& b) {
    return a.same_shape(b) && a.data == b.data;
  }
};

template <class T> void require_same_shape(const Image<T>& a, const Image<T>& b, const char* what) {
  if (a.width != b.width || a.height != b.height)
    throw std::invalid_argument(std::string(what) + ": image dimensions differ");
}

/// Copies channels [first, first + count) into a new image.
template <class T> Image<T> extract_channels(const Image<T>& img, int first, int count) {
  Image<T> out(img.width, img.height, count);
  for (std::size_t p = 0; p < img.pixel_count(); ++p)
    for (int c = 0; c < count; ++c) out.data[p * count + c] = img.data[p * img.channels + first + c];
  return out;
}

}  // namespace lgs
