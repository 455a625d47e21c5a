#pragma once

// Deterministic synthetic scenes for tests, demos and golden files. Random
// draws use mt19937_64 words converted by hand so the output does not depend
// on the standard library's distribution implementations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>

#include "salwarp/dataset.hpp"
#include "salwarp/geometry.hpp"

namespace salwarp::synthetic {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int index(int n) { return static_cast<int>(uniform() * n); }

 private:
  std::mt19937_64 engine_;
};

struct CorpusSpec {
  int scenes = 100;
  int width = 512;
  int height = 512;
  int small_per_scene = 7;
  int medium_per_scene = 2;
  int large_per_scene = 1;
  std::uint64_t seed = 20240611;
};

/// Box sides per size class, chosen so w*h lands strictly inside the COCO
/// class intervals for any aspect ratio in [0.8, 1.25].
inline BBox random_box(Rng& rng, SizeClass cls, int width, int height, int class_id) {
  double side = 0.0;
  switch (cls) {
    case SizeClass::Small: side = rng.uniform(8.0, 30.0); break;
    case SizeClass::Medium: side = rng.uniform(36.0, 90.0); break;
    case SizeClass::Large: side = rng.uniform(100.0, 180.0); break;
  }
  const double aspect = rng.uniform(0.8, 1.25);
  const double w = side * std::sqrt(aspect);
  const double h = side / std::sqrt(aspect);
  const double cx = rng.uniform(-0.5 + 0.5 * w, width - 0.5 - 0.5 * w);
  const double cy = rng.uniform(-0.5 + 0.5 * h, height - 0.5 - 0.5 * h);
  return BBox{cx, cy, w, h, class_id};
}

inline AnnotationSet make_corpus(const CorpusSpec& spec) {
  AnnotationSet set;
  set.add_category(1, "car");
  set.add_category(2, "person");
  set.add_category(3, "traffic sign");
  Rng rng(spec.seed);
  for (int i = 0; i < spec.scenes; ++i) {
    const long id = i + 1;
    set.add_image({id, spec.width, spec.height, "scene_" + std::to_string(id) + ".png"});
    auto add = [&](SizeClass cls, int n) {
      for (int k = 0; k < n; ++k) {
        set.add_box(id, random_box(rng, cls, spec.width, spec.height, 1 + rng.index(3)));
      }
    };
    add(SizeClass::Small, spec.small_per_scene);
    add(SizeClass::Medium, spec.medium_per_scene);
    add(SizeClass::Large, spec.large_per_scene);
  }
  return set;
}

/// One 256x256 image holding one small, one medium and one large box.
inline AnnotationSet three_box_scene() {
  AnnotationSet set;
  set.add_category(1, "car");
  set.add_category(2, "person");
  set.add_image({1, 256, 256, "gradient.png"});
  set.add_box(1, BBox{60.0, 70.0, 20.0, 24.0, 2});    // 480 px², small
  set.add_box(1, BBox{180.0, 90.0, 50.0, 40.0, 1});   // 2000 px², medium
  set.add_box(1, BBox{128.0, 190.0, 110.0, 100.0, 1});  // 11000 px², large
  return set;
}

/// Class-id mask for a set of boxes: every pixel whose center lies inside a
/// box takes that box's class id, later boxes painting over earlier ones.
inline Raster<int> box_mask(std::span<const BBox> boxes, int height, int width) {
  Raster<int> m(height, width, 1);
  for (const auto& b : boxes) {
    const int x0 = std::max(0, static_cast<int>(std::ceil(b.x0() + 0.5)));
    const int x1 = std::min(width - 1, static_cast<int>(std::floor(b.x1() - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::ceil(b.y0() + 0.5)));
    const int y1 = std::min(height - 1, static_cast<int>(std::floor(b.y1() - 0.5)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) m(y, x) = b.class_id;
  }
  return m;
}

/// Smooth single-channel test image with values in roughly [40, 240].
inline RasterF gradient_image(int height, int width, int channels = 1) {
  constexpr double kPi = 3.14159265358979323846;
  RasterF img(height, width, channels);
  for (int y = 0; y < height; ++y) {
    const double ty = height > 1 ? static_cast<double>(y) / (height - 1) : 0.0;
    for (int x = 0; x < width; ++x) {
      const double tx = width > 1 ? static_cast<double>(x) / (width - 1) : 0.0;
      for (int c = 0; c < channels; ++c) {
        const double v = 40.0 + 150.0 * tx * (0.5 + 0.5 * ty) + 50.0 * std::sin(kPi * ty) -
                         10.0 * c * tx;
        img(y, x, c) = static_cast<float>(v);
      }
    }
  }
  return img;
}

}  // namespace salwarp::synthetic
