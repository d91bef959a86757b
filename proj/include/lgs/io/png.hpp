#pragma once

#include "lgs/core/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgs::io {

inline std::uint8_t to_byte(float v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

/// Writes an 8-bit PNG; 3 channels become RGB, 4 channels RGBA (straight alpha).
inline void write_png(const std::filesystem::path& path, const Image<float>& img) {
  if (img.channels != 3 && img.channels != 4)
    throw std::invalid_argument("write_png: image must have 3 or 4 channels");
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  if (!fp) throw std::runtime_error("cannot open for writing: " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("libpng initialisation failed");
  }
  std::vector<std::uint8_t> rows(img.data.size());
  for (std::size_t i = 0; i < img.data.size(); ++i) rows[i] = to_byte(img.data[i]);
  std::vector<png_bytep> row_ptrs(static_cast<std::size_t>(img.height));
  for (int y = 0; y < img.height; ++y)
    row_ptrs[static_cast<std::size_t>(y)] = rows.data() + static_cast<std::size_t>(y) * img.width * img.channels;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("failed writing PNG: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width), static_cast<png_uint_32>(img.height), 8,
               img.channels == 4 ? PNG_COLOR_TYPE_RGBA : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

/// Reads any 8-bit PNG as RGBA floats in [0,1].
inline Image<float> read_png(const std::filesystem::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "rb"), &std::fclose);
  if (!fp) throw std::runtime_error("cannot open for reading: " + path.string());
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("failed reading PNG: " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_gray_to_rgb(png);
  png_set_add_alpha(png, 0xff, PNG_FILLER_AFTER);
  png_read_update_info(png, info);
  const int w = static_cast<int>(png_get_image_width(png, info));
  const int h = static_cast<int>(png_get_image_height(png, info));
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h * 4);
  std::vector<png_bytep> row_ptrs(static_cast<std::size_t>(h));
  for (int y = 0; y < h; ++y) row_ptrs[static_cast<std::size_t>(y)] = bytes.data() + static_cast<std::size_t>(y) * w * 4;
  png_read_image(png, row_ptrs.data());
  png_destroy_read_struct(&png, &info, nullptr);
  Image<float> img(w, h, 4);
  for (std::size_t i = 0; i < bytes.size(); ++i) img.data[i] = bytes[i] / 255.0f;
  return img;
}

/// Rounds every value to the nearest 8-bit level, as a PNG round trip would.
inline Image<float> quantize_8bit(const Image<float>& img) {
  Image<float> out = img;
  for (auto& v : out.data) v = to_byte(v) / 255.0f;
  return out;
}

}  // namespace lgs::io
