#pragma once

// Applying warp grids: out(v, u) = in(map_y[v], map_x[u]) for images and
// label maps, the piecewise inverse for feature unwarping, and corner mapping
// for boxes.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "salwarp/error.hpp"
#include "salwarp/geometry.hpp"
#include "salwarp/grid.hpp"

namespace salwarp {

enum class Interp { Bilinear, Nearest };

inline Interp parse_interp(const std::string& s) {
  if (s == "bilinear") return Interp::Bilinear;
  if (s == "nearest") return Interp::Nearest;
  throw ConfigError("unknown interpolation '" + s + "' (expected bilinear|nearest)");
}

namespace detail {

/// Precomputed sampling taps for one axis.
struct Taps {
  std::vector<int> i0;
  std::vector<int> i1;
  std::vector<double> a;
};

inline Taps make_taps(std::span<const double> coords, int extent, Interp interp) {
  Taps t;
  t.i0.resize(coords.size());
  t.i1.resize(coords.size());
  t.a.resize(coords.size());
  const double hi = extent - 1.0;
  for (std::size_t k = 0; k < coords.size(); ++k) {
    const double x = std::clamp(coords[k], 0.0, hi);
    if (interp == Interp::Nearest) {
      const int n = std::min(static_cast<int>(std::floor(x + 0.5)), extent - 1);
      t.i0[k] = t.i1[k] = n;
      t.a[k] = 0.0;
    } else {
      const int x0 = std::min(static_cast<int>(x), extent - 1);
      t.i0[k] = x0;
      t.i1[k] = std::min(x0 + 1, extent - 1);
      t.a[k] = x - x0;
    }
  }
  return t;
}

template <typename T>
Raster<T> resample_separable(const Raster<T>& in, std::span<const double> src_x,
                             std::span<const double> src_y, Interp interp) {
  const Taps tx = make_taps(src_x, in.width(), interp);
  const Taps ty = make_taps(src_y, in.height(), interp);
  const int out_w = static_cast<int>(src_x.size());
  const int out_h = static_cast<int>(src_y.size());
  const int C = in.channels();
  Raster<T> out(out_h, out_w, C);
  for (int v = 0; v < out_h; ++v) {
    const int y0 = ty.i0[v], y1 = ty.i1[v];
    const double ay = ty.a[v];
    for (int u = 0; u < out_w; ++u) {
      const int x0 = tx.i0[u], x1 = tx.i1[u];
      const double ax = tx.a[u];
      for (int c = 0; c < C; ++c) {
        if (interp == Interp::Nearest) {
          out(v, u, c) = in(y0, x0, c);
          continue;
        }
        const double top = (1.0 - ax) * in(y0, x0, c) + ax * in(y0, x1, c);
        const double bot = (1.0 - ax) * in(y1, x0, c) + ax * in(y1, x1, c);
        out(v, u, c) = static_cast<T>((1.0 - ay) * top + ay * bot);
      }
    }
  }
  return out;
}

}  // namespace detail

/// Samples one point with border clamping.
template <typename T>
double sample(const Raster<T>& img, double x, double y, int c, Interp interp) {
  const double xs[1] = {x};
  const double ys[1] = {y};
  const auto tx = detail::make_taps(xs, img.width(), interp);
  const auto ty = detail::make_taps(ys, img.height(), interp);
  if (interp == Interp::Nearest) return img(ty.i0[0], tx.i0[0], c);
  const double top = (1 - tx.a[0]) * img(ty.i0[0], tx.i0[0], c) + tx.a[0] * img(ty.i0[0], tx.i1[0], c);
  const double bot = (1 - tx.a[0]) * img(ty.i1[0], tx.i0[0], c) + tx.a[0] * img(ty.i1[0], tx.i1[0], c);
  return (1 - ty.a[0]) * top + ty.a[0] * bot;
}

/// In-place warp: output has the input's dims.
template <typename T>
Raster<T> warp_raster(const Raster<T>& img, const WarpGrid& g,
                      Interp interp = Interp::Bilinear) {
  if (img.height() != g.image_h() || img.width() != g.image_w()) {
    throw ShapeError("warp_raster: raster " + img.shape_string() +
                     " does not match grid " + g.shape_string());
  }
  const auto dx = g.dense_x();
  const auto dy = g.dense_y();
  return detail::resample_separable(img, dx, dy, interp);
}

/// True if a raster of h x w can be a stride-s feature map of an H x W image
/// for some integer s >= 1, i.e. h = ceil(H/s) and w = ceil(W/s).
inline bool stride_compatible(int image_h, int image_w, int h, int w) {
  for (int s = 1; s <= std::max(image_h, image_w); ++s) {
    const int eh = (image_h + s - 1) / s;
    const int ew = (image_w + s - 1) / s;
    if (eh == h && ew == w) return true;
    if (eh < h || ew < w) break;
  }
  return false;
}

/// Resamples a warped-space raster back to unwarped geometry at its own
/// resolution. Feature maps at a backbone stride use the proportionally
/// rescaled inverse.
template <typename T>
Raster<T> unwarp_raster(const Raster<T>& feat, const InverseGrid& inv,
                        Interp interp = Interp::Bilinear) {
  if (!stride_compatible(inv.image_h(), inv.image_w(), feat.height(), feat.width())) {
    throw ShapeError("unwarp_raster: raster " + feat.shape_string() +
                     " is not a strided view of grid image " +
                     std::to_string(inv.image_h()) + "x" + std::to_string(inv.image_w()));
  }
  if (feat.height() == inv.image_h() && feat.width() == inv.image_w()) {
    return detail::resample_separable(feat, inv.dense_x(), inv.dense_y(), interp);
  }
  if (feat.height() < 2 || feat.width() < 2) {
    // A 1-pixel axis has nothing to resample along it.
    const int h = feat.height(), w = feat.width();
    std::vector<double> xs(w), ys(h);
    if (w >= 2) xs = inv.rescaled(2, w).dense_x();
    if (h >= 2) ys = inv.rescaled(h, 2).dense_y();
    return detail::resample_separable(feat, xs, ys, interp);
  }
  const InverseGrid scaled = inv.rescaled(feat.height(), feat.width());
  return detail::resample_separable(feat, scaled.dense_x(), scaled.dense_y(), interp);
}

struct WarpedBoxes {
  std::vector<BBox> boxes;
  /// Index into the input list for each entry of boxes.
  std::vector<std::size_t> source_index;
  std::size_t skipped = 0;
};

/// Forward-maps box corners through T~ and re-axis-aligns them. Boxes that
/// leave the image rectangle are skipped and counted.
inline WarpedBoxes warp_boxes(std::span<const BBox> boxes, const InverseGrid& inv) {
  WarpedBoxes out;
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const BBox& b = boxes[i];
    try {
      if (!b.valid()) throw InputError("invalid box");
      const PointD a = forward_map_point(inv, {b.x0(), b.y0()});
      const PointD c = forward_map_point(inv, {b.x1(), b.y1()});
      out.boxes.push_back(BBox::from_corners(std::min(a.x, c.x), std::min(a.y, c.y),
                                             std::max(a.x, c.x), std::max(a.y, c.y),
                                             b.class_id));
      out.source_index.push_back(i);
    } catch (const InputError&) {
      ++out.skipped;
    }
  }
  return out;
}

inline WarpedBoxes warp_boxes(std::span<const BBox> boxes, const WarpGrid& g) {
  return warp_boxes(boxes, invert_grid(g));
}

}  // namespace salwarp
