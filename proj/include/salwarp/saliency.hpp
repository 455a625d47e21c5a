#pragma once

// Saliency guidance for the warp: instance-level KDE over object boxes, the
// dataset-average static prior and a single-Gaussian vanishing-point prior.
// Every generator returns a finalized map: clip(raw, 0, U) + floor_eps.

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "salwarp/error.hpp"
#include "salwarp/geometry.hpp"

namespace salwarp {

struct SaliencyParams {
  double P = 256.0;  // saliency product, s = P / f
  double U = 1.0;    // clip upper bound
  double floor_eps = 1e-2;
  int grid_h = 64;
  int grid_w = 64;

  void validate() const {
    if (!(P > 0.0) || !std::isfinite(P)) throw ConfigError("P must be > 0");
    if (!(U > 0.0) || !std::isfinite(U)) throw ConfigError("U must be > 0");
    if (!(floor_eps > 0.0) || !(floor_eps < U)) {
      throw ConfigError("floor_eps must satisfy 0 < floor_eps < U");
    }
    if (grid_h < 2 || grid_w < 2) {
      throw ConfigError("saliency lattice must be at least 2x2");
    }
  }
};

/// Coarse saliency lattice laid corner-to-corner over the image: cell (r, c)
/// sits at image position (c * (W-1)/(grid_w-1), r * (H-1)/(grid_h-1)).
class SaliencyMap {
 public:
  SaliencyMap() = default;
  SaliencyMap(int grid_h, int grid_w, int image_h, int image_w,
              std::vector<double> values)
      : grid_h_(grid_h), grid_w_(grid_w), image_h_(image_h),
        image_w_(image_w), values_(std::move(values)) {
    if (grid_h < 2 || grid_w < 2 || image_h < 1 || image_w < 1) {
      throw ShapeError("saliency map needs a >= 2x2 lattice and positive image dims");
    }
    if (values_.size() != static_cast<std::size_t>(grid_h) * grid_w) {
      throw ShapeError("saliency values must have grid_h*grid_w entries");
    }
  }

  int grid_h() const { return grid_h_; }
  int grid_w() const { return grid_w_; }
  int image_h() const { return image_h_; }
  int image_w() const { return image_w_; }
  std::span<const double> values() const { return values_; }

  double at(int r, int c) const {
    return values_[static_cast<std::size_t>(r) * grid_w_ + c];
  }

  /// Image-space position of lattice column c / row r.
  double cell_x(int c) const {
    return c * static_cast<double>(image_w_ - 1) / (grid_w_ - 1);
  }
  double cell_y(int r) const {
    return r * static_cast<double>(image_h_ - 1) / (grid_h_ - 1);
  }

  /// Bilinear query at an image-space point, clamped to the lattice.
  double query(double x, double y) const {
    const double gx = image_w_ > 1 ? x * (grid_w_ - 1) / (image_w_ - 1) : 0.0;
    const double gy = image_h_ > 1 ? y * (grid_h_ - 1) / (image_h_ - 1) : 0.0;
    const double cx = std::clamp(gx, 0.0, static_cast<double>(grid_w_ - 1));
    const double cy = std::clamp(gy, 0.0, static_cast<double>(grid_h_ - 1));
    const int c0 = std::min(static_cast<int>(cx), grid_w_ - 2);
    const int r0 = std::min(static_cast<int>(cy), grid_h_ - 2);
    const double ax = cx - c0;
    const double ay = cy - r0;
    const double top = (1 - ax) * at(r0, c0) + ax * at(r0, c0 + 1);
    const double bot = (1 - ax) * at(r0 + 1, c0) + ax * at(r0 + 1, c0 + 1);
    return (1 - ay) * top + ay * bot;
  }

  double max_value() const {
    return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end());
  }
  double min_value() const {
    return values_.empty() ? 0.0 : *std::min_element(values_.begin(), values_.end());
  }

  /// Row-major index of the largest cell (first on ties).
  std::size_t argmax() const {
    return static_cast<std::size_t>(
        std::max_element(values_.begin(), values_.end()) - values_.begin());
  }

  /// S_u: mean over rows, one entry per lattice column.
  std::vector<double> column_means() const {
    std::vector<double> m(grid_w_, 0.0);
    for (int r = 0; r < grid_h_; ++r)
      for (int c = 0; c < grid_w_; ++c) m[c] += at(r, c);
    for (auto& v : m) v /= grid_h_;
    return m;
  }
  /// S_v: mean over columns, one entry per lattice row.
  std::vector<double> row_means() const {
    std::vector<double> m(grid_h_, 0.0);
    for (int r = 0; r < grid_h_; ++r) {
      for (int c = 0; c < grid_w_; ++c) m[r] += at(r, c);
      m[r] /= grid_w_;
    }
    return m;
  }

  RasterF to_raster() const {
    RasterF r(grid_h_, grid_w_, 1);
    for (std::size_t i = 0; i < values_.size(); ++i)
      r.data()[i] = static_cast<float>(values_[i]);
    return r;
  }
  static SaliencyMap from_raster(const RasterF& r, int image_h, int image_w) {
    if (r.channels() != 1) throw ShapeError("saliency raster must be single-channel");
    std::vector<double> v(r.data().begin(), r.data().end());
    return SaliencyMap(r.height(), r.width(), image_h, image_w, std::move(v));
  }

 private:
  int grid_h_ = 0;
  int grid_w_ = 0;
  int image_h_ = 0;
  int image_w_ = 0;
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Expansion factor and saliency scale
// ---------------------------------------------------------------------------

/// f = 2^max(floor(log2(ψs/ψm + ψm/ψl)), 0), over the consecutive pairs of the
/// ordered triple (small, medium, large).
inline double expansion_factor(const std::array<double, 3>& psi) {
  for (double p : psi) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw DegenerateDistributionError("scale fractions must be finite and >= 0");
    }
  }
  if (psi[1] == 0.0 || psi[2] == 0.0) {
    throw DegenerateDistributionError(
        "expansion factor undefined: psi_medium or psi_large is zero");
  }
  const double ratio_sum = psi[0] / psi[1] + psi[1] / psi[2];
  // ilogb is exact floor(log2) for positive normal doubles; log2 can round up
  // just below a power of two.
  const int k = std::max(std::ilogb(ratio_sum), 0);
  return std::ldexp(1.0, k);
}

inline double expansion_factor(const ScaleDistribution& dist) {
  if (dist.empty()) {
    throw DegenerateDistributionError("expansion factor undefined for an empty distribution");
  }
  return expansion_factor({dist.small(), dist.medium(), dist.large()});
}

/// expansion_factor(), or 1 when the distribution is empty or degenerate.
inline double expansion_factor_or_identity(const ScaleDistribution& dist) {
  try {
    return expansion_factor(dist);
  } catch (const DegenerateDistributionError&) {
    return 1.0;
  }
}

inline double saliency_scale(double P, double f) {
  if (!(P > 0.0)) throw ConfigError("saliency_scale: P must be > 0");
  if (!(f >= 1.0)) throw ConfigError("saliency_scale: f must be >= 1");
  return P / f;
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

namespace detail {

inline void check_dims(int image_h, int image_w) {
  if (image_h < 1 || image_w < 1) throw ShapeError("image dims must be positive");
}

inline SaliencyMap finalize(std::vector<double> raw, const SaliencyParams& p,
                            int image_h, int image_w) {
  for (auto& v : raw) v = std::clamp(v, 0.0, p.U) + p.floor_eps;
  return SaliencyMap(p.grid_h, p.grid_w, image_h, image_w, std::move(raw));
}

}  // namespace detail

/// Unclipped sum of unit-peak Gaussians N(c_i, s·diag(w_i, h_i)) on the
/// saliency lattice. Covariance entries are in px².
inline std::vector<double> box_kde(std::span<const BBox> boxes, double s,
                                   const SaliencyParams& p, int image_h,
                                   int image_w) {
  p.validate();
  detail::check_dims(image_h, image_w);
  if (!(s > 0.0)) throw ConfigError("saliency scale s must be > 0");

  const double sx = image_w > 1 ? static_cast<double>(image_w - 1) / (p.grid_w - 1) : 0.0;
  const double sy = image_h > 1 ? static_cast<double>(image_h - 1) / (p.grid_h - 1) : 0.0;
  std::vector<double> field(static_cast<std::size_t>(p.grid_h) * p.grid_w, 0.0);
  for (const auto& b : boxes) {
    if (!b.valid()) throw InputError("box_kde: invalid box");
    const double inv_vx = 1.0 / (s * b.w);
    const double inv_vy = 1.0 / (s * b.h);
    // exp(a+b) = exp(a)·exp(b): tabulate per column and per row.
    std::vector<double> gx(p.grid_w), gy(p.grid_h);
    for (int c = 0; c < p.grid_w; ++c) {
      const double d = c * sx - b.cx;
      gx[c] = std::exp(-0.5 * d * d * inv_vx);
    }
    for (int r = 0; r < p.grid_h; ++r) {
      const double d = r * sy - b.cy;
      gy[r] = std::exp(-0.5 * d * d * inv_vy);
    }
    for (int r = 0; r < p.grid_h; ++r)
      for (int c = 0; c < p.grid_w; ++c)
        field[static_cast<std::size_t>(r) * p.grid_w + c] += gy[r] * gx[c];
  }
  return field;
}

/// Instance-level saliency: KDE of the image's own boxes. An empty box list
/// gives the uniform floor map, which builds an identity warp.
inline SaliencyMap instance_saliency(std::span<const BBox> boxes, double s,
                                     const SaliencyParams& p, int image_h,
                                     int image_w) {
  return detail::finalize(box_kde(boxes, s, p, image_h, image_w), p, image_h,
                          image_w);
}

/// Static prior: KDE over the boxes of a whole dataset (already expressed in
/// this image frame), rescaled so the pre-clip maximum is 1.
inline SaliencyMap static_prior_saliency(std::span<const BBox> dataset_boxes,
                                         double s, const SaliencyParams& p,
                                         int image_h, int image_w) {
  auto field = box_kde(dataset_boxes, s, p, image_h, image_w);
  const double peak = field.empty() ? 0.0 : *std::max_element(field.begin(), field.end());
  if (peak > 0.0)
    for (auto& v : field) v /= peak;
  return detail::finalize(std::move(field), p, image_h, image_w);
}

/// Geometric prior: one isotropic unit-peak Gaussian at the vanishing point.
/// The vanishing point may lie outside the image.
inline SaliencyMap geometric_prior_saliency(double vp_x, double vp_y,
                                            double spread,
                                            const SaliencyParams& p,
                                            int image_h, int image_w) {
  p.validate();
  detail::check_dims(image_h, image_w);
  if (!(spread > 0.0) || !std::isfinite(spread)) {
    throw ConfigError("geometric prior spread must be > 0");
  }
  if (!std::isfinite(vp_x) || !std::isfinite(vp_y)) {
    throw ConfigError("vanishing point must be finite");
  }
  const double sx = image_w > 1 ? static_cast<double>(image_w - 1) / (p.grid_w - 1) : 0.0;
  const double sy = image_h > 1 ? static_cast<double>(image_h - 1) / (p.grid_h - 1) : 0.0;
  const double inv_var = 1.0 / (spread * spread);
  std::vector<double> field(static_cast<std::size_t>(p.grid_h) * p.grid_w);
  for (int r = 0; r < p.grid_h; ++r) {
    for (int c = 0; c < p.grid_w; ++c) {
      const double dx = c * sx - vp_x;
      const double dy = r * sy - vp_y;
      field[static_cast<std::size_t>(r) * p.grid_w + c] =
          std::exp(-0.5 * (dx * dx + dy * dy) * inv_var);
    }
  }
  return detail::finalize(std::move(field), p, image_h, image_w);
}

/// Constant floor map (what every generator returns for an empty input).
inline SaliencyMap uniform_saliency(const SaliencyParams& p, int image_h,
                                    int image_w) {
  p.validate();
  detail::check_dims(image_h, image_w);
  return detail::finalize(
      std::vector<double>(static_cast<std::size_t>(p.grid_h) * p.grid_w, 0.0),
      p, image_h, image_w);
}

}  // namespace salwarp
