#pragma once

// 8-bit PNG read/write through libpng's simplified API. Values are carried as
// floats in [0, 255]; writing rounds and clamps.

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "salwarp/error.hpp"
#include "salwarp/geometry.hpp"

namespace salwarp::io {

inline RasterF read_png(const std::string& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw InputError("cannot read PNG '" + path + "': " + image.message);
  }
  int channels = 1;
  if (image.format & PNG_FORMAT_FLAG_COLOR) {
    image.format = (image.format & PNG_FORMAT_FLAG_ALPHA) ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
    channels = (image.format & PNG_FORMAT_FLAG_ALPHA) ? 4 : 3;
  } else {
    image.format = (image.format & PNG_FORMAT_FLAG_ALPHA) ? PNG_FORMAT_GA : PNG_FORMAT_GRAY;
    channels = (image.format & PNG_FORMAT_FLAG_ALPHA) ? 2 : 1;
  }
  std::vector<png_byte> buf(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buf.data(), 0, nullptr)) {
    png_image_free(&image);
    throw InputError("cannot decode PNG '" + path + "': " + image.message);
  }
  RasterF r(static_cast<int>(image.height), static_cast<int>(image.width), channels);
  for (std::size_t i = 0; i < buf.size(); ++i) r.data()[i] = static_cast<float>(buf[i]);
  return r;
}

inline void write_png(const std::string& path, const RasterF& r) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(r.width());
  image.height = static_cast<png_uint_32>(r.height());
  switch (r.channels()) {
    case 1: image.format = PNG_FORMAT_GRAY; break;
    case 2: image.format = PNG_FORMAT_GA; break;
    case 3: image.format = PNG_FORMAT_RGB; break;
    case 4: image.format = PNG_FORMAT_RGBA; break;
    default:
      throw ShapeError("PNG output needs 1-4 channels, raster has " + std::to_string(r.channels()));
  }
  std::vector<png_byte> buf(r.size());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    buf[i] = static_cast<png_byte>(std::clamp(std::lround(r.data()[i]), 0L, 255L));
  }
  if (!png_image_write_to_file(&image, path.c_str(), 0, buf.data(), 0, nullptr)) {
    throw InputError("cannot write PNG '" + path + "': " + image.message);
  }
}

inline bool has_png_extension(const std::string& path) {
  if (path.size() < 4) return false;
  std::string ext = path.substr(path.size() - 4);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png";
}

}  // namespace salwarp::io
