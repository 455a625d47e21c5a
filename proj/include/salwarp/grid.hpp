#pragma once

// Separable warp grids. A WarpGrid stores T^-1 as two monotone knot arrays:
// knot i of map_x sits at output pixel i*(W-1)/(Kx-1) and holds the source x
// it samples from. Between knots the map is linear, so its inverse is again a
// piecewise-linear monotone map with the roles of the knot coordinates swapped.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "salwarp/error.hpp"
#include "salwarp/saliency.hpp"

namespace salwarp {

struct GridParams {
  int grid_h = 31;
  int grid_w = 31;
  /// Gaussian kernel bandwidth in grid-lattice units. Unset means K/16 for
  /// an axis with K knots.
  std::optional<double> kernel_sigma;
  /// Kernel support in standard deviations.
  double truncate = 4.0;

  double sigma_x() const { return kernel_sigma.value_or(grid_w / 16.0); }
  double sigma_y() const { return kernel_sigma.value_or(grid_h / 16.0); }

  void validate() const {
    if (grid_h < 2 || grid_w < 2) throw ConfigError("warp grid must be at least 2x2");
    if (kernel_sigma && !(*kernel_sigma > 0.0)) throw ConfigError("kernel_sigma must be > 0");
    if (!(truncate > 0.0)) throw ConfigError("kernel truncation must be > 0");
  }
};

namespace detail {

inline double knot_position(int i, int knots, int extent) {
  if (i == knots - 1) return static_cast<double>(extent - 1);
  return i * static_cast<double>(extent - 1) / (knots - 1);
}

/// Piecewise-linear evaluation of knots at continuous lattice coordinate t.
inline double eval_knots(std::span<const double> knots, double t) {
  const int n = static_cast<int>(knots.size());
  if (t <= 0.0) return knots.front();
  if (t >= n - 1) return knots.back();
  const int i = static_cast<int>(t);
  const double a = t - i;
  return (1.0 - a) * knots[i] + a * knots[i + 1];
}

inline bool strictly_increasing(std::span<const double> v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] > v[i - 1])) return false;
  return true;
}

}  // namespace detail

class WarpGrid {
 public:
  WarpGrid() = default;
  WarpGrid(int image_h, int image_w, std::vector<double> map_x,
           std::vector<double> map_y)
      : image_h_(image_h), image_w_(image_w), map_x_(std::move(map_x)),
        map_y_(std::move(map_y)) {}

  static WarpGrid identity(int image_h, int image_w, int grid_h = 31,
                           int grid_w = 31) {
    if (image_h < 2 || image_w < 2) throw ShapeError("warp grids need image dims >= 2");
    if (grid_h < 2 || grid_w < 2) throw ConfigError("warp grid must be at least 2x2");
    std::vector<double> mx(grid_w), my(grid_h);
    for (int i = 0; i < grid_w; ++i) mx[i] = detail::knot_position(i, grid_w, image_w);
    for (int i = 0; i < grid_h; ++i) my[i] = detail::knot_position(i, grid_h, image_h);
    return WarpGrid(image_h, image_w, std::move(mx), std::move(my));
  }

  int image_h() const { return image_h_; }
  int image_w() const { return image_w_; }
  int grid_h() const { return static_cast<int>(map_y_.size()); }
  int grid_w() const { return static_cast<int>(map_x_.size()); }
  std::span<const double> map_x() const { return map_x_; }
  std::span<const double> map_y() const { return map_y_; }

  /// Output pixel coordinate of knot i.
  double knot_x(int i) const { return detail::knot_position(i, grid_w(), image_w_); }
  double knot_y(int i) const { return detail::knot_position(i, grid_h(), image_h_); }

  /// Source coordinate sampled by output coordinate u (pixels).
  double source_x(double u) const {
    return detail::eval_knots(map_x_, u * (grid_w() - 1) / (image_w_ - 1));
  }
  double source_y(double v) const {
    return detail::eval_knots(map_y_, v * (grid_h() - 1) / (image_h_ - 1));
  }

  /// Per-pixel source coordinates, one per output column / row.
  std::vector<double> dense_x() const { return dense(map_x_, image_w_); }
  std::vector<double> dense_y() const { return dense(map_y_, image_h_); }

  /// Checks sizes, strict monotonicity and exact endpoint pinning.
  void validate() const {
    if (image_h_ < 2 || image_w_ < 2) throw ShapeError("warp grids need image dims >= 2");
    if (map_x_.size() < 2 || map_y_.size() < 2) {
      throw InvariantError("warp grid needs >= 2 knots per axis");
    }
    if (!detail::strictly_increasing(map_x_) || !detail::strictly_increasing(map_y_)) {
      throw InvariantError("warp grid is not strictly increasing (folded)");
    }
    if (map_x_.front() != 0.0 || map_x_.back() != image_w_ - 1.0 ||
        map_y_.front() != 0.0 || map_y_.back() != image_h_ - 1.0) {
      throw InvariantError("warp grid endpoints are not pinned to the image extent");
    }
  }

  /// Same warp expressed for a raster of a different resolution: knots are
  /// multiplied by the resolution ratio (corner-aligned).
  WarpGrid rescaled(int height, int width) const {
    if (height < 1 || width < 1) throw ShapeError("rescale target dims must be positive");
    auto scale = [](std::vector<double> knots, int from, int to) {
      const double r = static_cast<double>(to - 1) / (from - 1);
      for (auto& k : knots) k *= r;
      knots.back() = to - 1.0;
      return knots;
    };
    WarpGrid g;
    g.image_h_ = height;
    g.image_w_ = width;
    g.map_x_ = scale(map_x_, image_w_, width);
    g.map_y_ = scale(map_y_, image_h_, height);
    return g;
  }

  std::string shape_string() const {
    return "image " + std::to_string(image_h_) + "x" + std::to_string(image_w_) +
           ", grid " + std::to_string(grid_h()) + "x" + std::to_string(grid_w());
  }

  friend bool operator==(const WarpGrid&, const WarpGrid&) = default;

 private:
  static std::vector<double> dense(const std::vector<double>& knots, int extent) {
    std::vector<double> out(extent);
    const int n = static_cast<int>(knots.size());
    for (int u = 0; u < extent; ++u) {
      out[u] = extent > 1
                   ? detail::eval_knots(knots, u * static_cast<double>(n - 1) / (extent - 1))
                   : knots.front();
    }
    return out;
  }

  int image_h_ = 0;
  int image_w_ = 0;
  std::vector<double> map_x_;
  std::vector<double> map_y_;
};

namespace detail {

/// reflect-101 index into [0, n-1] (edge sample not repeated).
inline long reflect_index(long p, long n) {
  if (n == 1) return 0;
  const long period = 2 * (n - 1);
  long q = p % period;
  if (q < 0) q += period;
  return q > n - 1 ? period - q : q;
}

/// One axis of the kernel integrals:
///   map[u] = Σ_p m(p) k(p, u) p / Σ_p m(p) k(p, u)
/// over integer pixel positions p, with the marginal m mirrored at both image
/// borders so that the weighted mean at each border is the border itself.
/// The result is then rescaled affinely onto [0, extent-1].
inline std::vector<double> axis_map(std::span<const double> marginal, int extent,
                                    int knots, double sigma_lattice,
                                    double truncate) {
  const int L = static_cast<int>(marginal.size());
  std::vector<double> weight(extent);
  for (int p = 0; p < extent; ++p) {
    const double t = extent > 1 ? p * static_cast<double>(L - 1) / (extent - 1) : 0.0;
    weight[p] = eval_knots(marginal, t);
  }

  const double sigma = sigma_lattice * (extent - 1) / (knots - 1);
  const double reach = truncate * sigma;
  const double inv_2var = 0.5 / (sigma * sigma);

  std::vector<double> raw(knots);
  for (int i = 0; i < knots; ++i) {
    const double u = knot_position(i, knots, extent);
    const long lo = static_cast<long>(std::ceil(u - reach));
    const long hi = static_cast<long>(std::floor(u + reach));
    double num = 0.0;
    double den = 0.0;
    for (long p = lo; p <= hi; ++p) {
      const double d = static_cast<double>(p) - u;
      const double k = std::exp(-d * d * inv_2var);
      const double w = weight[reflect_index(p, extent)] * k;
      num += w * static_cast<double>(p);
      den += w;
    }
    if (!(den > 0.0)) {
      throw InvariantError(
          "build_grid: zero saliency mass under the kernel (map not finalized?)");
    }
    raw[i] = num / den;
  }

  const double a = raw.front();
  const double b = raw.back();
  if (!(b > a)) throw InvariantError("build_grid: degenerate axis map");
  const double scale = (extent - 1) / (b - a);
  std::vector<double> out(knots);
  for (int i = 0; i < knots; ++i) out[i] = (raw[i] - a) * scale;
  out.front() = 0.0;
  out.back() = extent - 1.0;
  return out;
}

}  // namespace detail

/// T^-1 from a finalized saliency map: marginalize S by means along each
/// axis, then run the Gaussian-kernel weighted-mean integral per axis.
inline WarpGrid build_grid(const SaliencyMap& s, const GridParams& params = {}) {
  params.validate();
  if (s.image_h() < 2 || s.image_w() < 2) throw ShapeError("warp grids need image dims >= 2");
  for (double v : s.values()) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvariantError("build_grid: saliency must be finalized (finite, > 0 everywhere)");
    }
  }
  const auto su = s.column_means();
  const auto sv = s.row_means();
  auto mx = detail::axis_map(su, s.image_w(), params.grid_w, params.sigma_x(), params.truncate);
  auto my = detail::axis_map(sv, s.image_h(), params.grid_h, params.sigma_y(), params.truncate);
  WarpGrid g(s.image_h(), s.image_w(), std::move(mx), std::move(my));
  g.validate();
  return g;
}

struct PointD {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const PointD&, const PointD&) = default;
};

/// Piecewise-linear inverse of a WarpGrid (source -> output).
class InverseGrid {
 public:
  InverseGrid() = default;
  explicit InverseGrid(const WarpGrid& g)
      : image_h_(g.image_h()), image_w_(g.image_w()),
        knots_x_(g.map_x().begin(), g.map_x().end()),
        knots_y_(g.map_y().begin(), g.map_y().end()) {}

  int image_h() const { return image_h_; }
  int image_w() const { return image_w_; }

  /// Output position of source x, in knot-lattice units. Exact integer at knots.
  double lattice_x(double x) const { return invert(knots_x_, x); }
  double lattice_y(double y) const { return invert(knots_y_, y); }

  /// Output position of source x, in output pixels.
  double output_x(double x) const {
    return lattice_x(x) * (image_w_ - 1) / (static_cast<double>(knots_x_.size()) - 1);
  }
  double output_y(double y) const {
    return lattice_y(y) * (image_h_ - 1) / (static_cast<double>(knots_y_.size()) - 1);
  }

  /// Per-pixel output coordinates, one per source column / row.
  std::vector<double> dense_x() const { return dense(true); }
  std::vector<double> dense_y() const { return dense(false); }

  InverseGrid rescaled(int height, int width) const {
    return InverseGrid(to_grid().rescaled(height, width));
  }

  WarpGrid to_grid() const { return WarpGrid(image_h_, image_w_, knots_x_, knots_y_); }

 private:
  /// Points up to half a pixel outside [k_0, k_last] extrapolate along the
  /// end segment so box edges on the image border stay mappable.
  static double invert(const std::vector<double>& k, double x) {
    const int n = static_cast<int>(k.size());
    if (x <= k.front()) return (x - k[0]) / (k[1] - k[0]);
    if (x >= k.back()) return (n - 1) + (x - k[n - 1]) / (k[n - 1] - k[n - 2]);
    const auto it = std::upper_bound(k.begin(), k.end(), x);
    const int i = static_cast<int>(it - k.begin()) - 1;
    return i + (x - k[i]) / (k[i + 1] - k[i]);
  }

  std::vector<double> dense(bool along_x) const {
    const int extent = along_x ? image_w_ : image_h_;
    std::vector<double> out(extent);
    for (int p = 0; p < extent; ++p) out[p] = along_x ? output_x(p) : output_y(p);
    return out;
  }

  int image_h_ = 0;
  int image_w_ = 0;
  std::vector<double> knots_x_;
  std::vector<double> knots_y_;
};

/// Validates strict monotonicity and builds T~ (source -> output).
inline InverseGrid invert_grid(const WarpGrid& g) {
  if (g.map_x().size() < 2 || g.map_y().size() < 2 ||
      !detail::strictly_increasing(g.map_x()) ||
      !detail::strictly_increasing(g.map_y())) {
    throw InvariantError("invert_grid: grid is not strictly increasing");
  }
  return InverseGrid(g);
}

/// Maps a source point to warped-output coordinates. Accepts the continuous
/// image rectangle [-0.5, W-0.5] x [-0.5, H-0.5].
inline PointD forward_map_point(const InverseGrid& inv, PointD p) {
  constexpr double kEdge = 0.5 + 1e-9;
  if (!(p.x >= -kEdge && p.x <= inv.image_w() - 1 + kEdge &&
        p.y >= -kEdge && p.y <= inv.image_h() - 1 + kEdge)) {
    throw InputError("forward_map_point: point (" + std::to_string(p.x) + ", " +
                     std::to_string(p.y) + ") outside image");
  }
  return {inv.output_x(p.x), inv.output_y(p.y)};
}

inline PointD forward_map_point(const WarpGrid& g, PointD p) {
  return forward_map_point(invert_grid(g), p);
}

}  // namespace salwarp
