#pragma once

// On-disk formats.
//
// Float raster (.sgr): little-endian
//   bytes 0-3   magic "SGWR"
//   bytes 4-7   uint32 version (1)
//   bytes 8-19  uint32 height, width, channels
//   then height*width*channels float32 values, row-major, channels last.
//
// Grid CSV: two lines, the map_x knots then the map_y knots, each value in
// shortest round-trip decimal form. Image dims follow from the pinned last
// knot (W-1, H-1).

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "salwarp/error.hpp"
#include "salwarp/geometry.hpp"
#include "salwarp/grid.hpp"

namespace salwarp::io {

inline constexpr std::array<char, 4> kRasterMagic{'S', 'G', 'W', 'R'};
inline constexpr std::uint32_t kRasterVersion = 1;

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot open '" + path + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("failed writing '" + path + "'");
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline std::string encode_raster(const RasterF& r) {
  std::string out(kRasterMagic.begin(), kRasterMagic.end());
  detail::put_u32(out, kRasterVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(r.height()));
  detail::put_u32(out, static_cast<std::uint32_t>(r.width()));
  detail::put_u32(out, static_cast<std::uint32_t>(r.channels()));
  out.reserve(out.size() + r.size() * 4);
  for (float v : r.data()) detail::put_u32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

inline RasterF decode_raster(const std::string& bytes) {
  constexpr std::size_t kHeader = 20;
  if (bytes.size() < kHeader || std::memcmp(bytes.data(), kRasterMagic.data(), 4) != 0) {
    throw InputError("not a float raster (bad magic)");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  if (detail::get_u32(p + 4) != kRasterVersion) throw InputError("unsupported raster version");
  const std::uint32_t h = detail::get_u32(p + 8);
  const std::uint32_t w = detail::get_u32(p + 12);
  const std::uint32_t c = detail::get_u32(p + 16);
  const std::uint64_t n = static_cast<std::uint64_t>(h) * w * c;
  if (c < 1 || h > (1u << 20) || w > (1u << 20) || bytes.size() != kHeader + n * 4) {
    throw InputError("float raster header does not match payload size");
  }
  std::vector<float> data(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    data[i] = std::bit_cast<float>(detail::get_u32(p + kHeader + 4 * i));
  }
  RasterF r(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c), std::move(data));
  if (!r.all_finite()) throw InputError("float raster contains non-finite values");
  return r;
}

inline void write_raster(const std::string& path, const RasterF& r) {
  detail::write_file(path, encode_raster(r));
}

inline RasterF read_raster(const std::string& path) {
  try {
    return decode_raster(detail::read_file(path));
  } catch (const InputError& e) {
    throw InputError("'" + path + "': " + e.what());
  }
}

inline std::string encode_grid_csv(const WarpGrid& g) {
  std::string out;
  auto row = [&](std::span<const double> knots) {
    for (std::size_t i = 0; i < knots.size(); ++i) {
      if (i) out.push_back(',');
      out += detail::format_double(knots[i]);
    }
    out.push_back('\n');
  };
  row(g.map_x());
  row(g.map_y());
  return out;
}

inline WarpGrid decode_grid_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t end = line.find(',', pos);
      if (end == std::string::npos) end = line.size();
      double v = 0.0;
      const char* first = line.data() + pos;
      const char* last = line.data() + end;
      while (first < last && *first == ' ') ++first;
      const auto res = std::from_chars(first, last, v);
      if (res.ec != std::errc{} || res.ptr != last) {
        throw InputError("grid CSV: bad number '" + std::string(line.data() + pos, end - pos) + "'");
      }
      row.push_back(v);
      pos = end + 1;
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() != 2) throw InputError("grid CSV must have exactly two rows (map_x, map_y)");
  const double wx = rows[0].empty() ? 0.0 : rows[0].back() + 1.0;
  const double wy = rows[1].empty() ? 0.0 : rows[1].back() + 1.0;
  if (wx != std::floor(wx) || wy != std::floor(wy) || wx < 2 || wy < 2) {
    throw InputError("grid CSV: last knots must be pinned to W-1 and H-1");
  }
  WarpGrid g(static_cast<int>(wy), static_cast<int>(wx), std::move(rows[0]), std::move(rows[1]));
  g.validate();
  return g;
}

inline void write_grid_csv(const std::string& path, const WarpGrid& g) {
  detail::write_file(path, encode_grid_csv(g));
}

inline WarpGrid read_grid_csv(const std::string& path) {
  try {
    return decode_grid_csv(detail::read_file(path));
  } catch (const Error& e) {
    throw InputError("'" + path + "': " + e.what());
  }
}

/// Two-channel H x W raster of per-pixel source coordinates (x, y).
inline RasterF grid_to_raster(const WarpGrid& g) {
  const auto dx = g.dense_x();
  const auto dy = g.dense_y();
  RasterF r(g.image_h(), g.image_w(), 2);
  for (int v = 0; v < g.image_h(); ++v) {
    for (int u = 0; u < g.image_w(); ++u) {
      r(v, u, 0) = static_cast<float>(dx[u]);
      r(v, u, 1) = static_cast<float>(dy[v]);
    }
  }
  return r;
}

}  // namespace salwarp::io
