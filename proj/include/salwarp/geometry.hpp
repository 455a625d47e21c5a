#pragma once

// Value types shared by every stage of the warping pipeline: boxes, COCO-style
// size classes, scale distributions and the H x W x C raster container.
//
// Coordinate convention: pixel (x, y) has its center at integer (x, y), so an
// image of width W spans centers 0..W-1 and the continuous image rectangle is
// [-0.5, W-0.5] x [-0.5, H-0.5]. Boxes, saliency lattices and warp grids all
// use this frame.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "salwarp/error.hpp"

namespace salwarp {

struct BBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;
  int class_id = 0;

  double area() const { return w * h; }
  double x0() const { return cx - 0.5 * w; }
  double y0() const { return cy - 0.5 * h; }
  double x1() const { return cx + 0.5 * w; }
  double y1() const { return cy + 0.5 * h; }
  bool valid() const {
    return w > 0.0 && h > 0.0 && std::isfinite(cx) && std::isfinite(cy) &&
           std::isfinite(w) && std::isfinite(h);
  }

  static BBox from_corners(double x0, double y0, double x1, double y1,
                           int class_id = 0) {
    return BBox{0.5 * (x0 + x1), 0.5 * (y0 + y1), x1 - x0, y1 - y0, class_id};
  }

  friend bool operator==(const BBox&, const BBox&) = default;
};

enum class SizeClass { Small = 0, Medium = 1, Large = 2 };

inline const char* to_string(SizeClass c) {
  switch (c) {
    case SizeClass::Small:
      return "small";
    case SizeClass::Medium:
      return "medium";
    case SizeClass::Large:
      return "large";
  }
  return "?";
}

/// Area thresholds in px². COCO: 32² and 96².
struct SizeThresholds {
  double t1 = 32.0 * 32.0;
  double t2 = 96.0 * 96.0;

  void validate() const {
    if (!(t1 < t2) || !std::isfinite(t1) || !std::isfinite(t2)) {
      throw ConfigError("size thresholds must satisfy t1 < t2 (got t1=" +
                        std::to_string(t1) + ", t2=" + std::to_string(t2) +
                        ")");
    }
  }
};

/// Area exactly at a threshold belongs to the upper class.
inline SizeClass classify_size(const BBox& box, const SizeThresholds& t) {
  t.validate();
  if (!box.valid()) throw InputError("classify_size: box must have w > 0 and h > 0");
  const double a = box.area();
  if (a < t.t1) return SizeClass::Small;
  if (a < t.t2) return SizeClass::Medium;
  return SizeClass::Large;
}

/// Fractions (ψ_small, ψ_medium, ψ_large). An empty input produces the Empty
/// state (no fractions) instead of NaNs.
class ScaleDistribution {
 public:
  ScaleDistribution() = default;

  static ScaleDistribution from_counts(std::array<std::size_t, 3> counts) {
    ScaleDistribution d;
    d.counts_ = counts;
    return d;
  }

  bool empty() const { return total() == 0; }
  std::size_t total() const { return counts_[0] + counts_[1] + counts_[2]; }
  std::size_t count(SizeClass c) const { return counts_[static_cast<int>(c)]; }
  const std::array<std::size_t, 3>& counts() const { return counts_; }

  /// Fraction of class c. Throws on the Empty state.
  double psi(SizeClass c) const {
    if (empty()) throw InputError("scale distribution is empty");
    return static_cast<double>(count(c)) / static_cast<double>(total());
  }
  double small() const { return psi(SizeClass::Small); }
  double medium() const { return psi(SizeClass::Medium); }
  double large() const { return psi(SizeClass::Large); }

  std::optional<std::array<double, 3>> fractions() const {
    if (empty()) return std::nullopt;
    return std::array<double, 3>{small(), medium(), large()};
  }

  friend bool operator==(const ScaleDistribution&,
                         const ScaleDistribution&) = default;

 private:
  std::array<std::size_t, 3> counts_{0, 0, 0};
};

inline ScaleDistribution scale_distribution(std::span<const BBox> boxes,
                                            const SizeThresholds& t) {
  t.validate();
  std::array<std::size_t, 3> counts{0, 0, 0};
  for (const auto& b : boxes) ++counts[static_cast<int>(classify_size(b, t))];
  return ScaleDistribution::from_counts(counts);
}

/// Dense row-major H x W x C array. Images, feature maps, label maps and
/// saliency fields all travel through the pipeline as rasters.
template <typename T>
class Raster {
 public:
  using value_type = T;

  Raster() = default;
  Raster(int height, int width, int channels = 1, T fill = T{})
      : height_(height), width_(width), channels_(channels) {
    if (height < 0 || width < 0 || channels < 1) {
      throw ShapeError("raster dims must be non-negative with >= 1 channel");
    }
    data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
  }
  Raster(int height, int width, int channels, std::vector<T> data)
      : height_(height), width_(width), channels_(channels),
        data_(std::move(data)) {
    if (height < 0 || width < 0 || channels < 1 ||
        data_.size() != static_cast<std::size_t>(height) * width * channels) {
      throw ShapeError("raster data length must equal height*width*channels");
    }
  }

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T& operator()(int y, int x, int c = 0) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  const T& operator()(int y, int x, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  bool same_shape(const Raster& o) const {
    return height_ == o.height_ && width_ == o.width_ &&
           channels_ == o.channels_;
  }
  std::string shape_string() const {
    return std::to_string(height_) + "x" + std::to_string(width_) + "x" +
           std::to_string(channels_);
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](T v) { return std::isfinite(static_cast<double>(v)); });
  }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 1;
  std::vector<T> data_;
};

using RasterF = Raster<float>;

}  // namespace salwarp
