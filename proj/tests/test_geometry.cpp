#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "salwarp/geometry.hpp"

using namespace salwarp;

namespace {

BBox square(double side) { return BBox{100.0, 100.0, side, side, 1}; }

}  // namespace

TEST(ClassifySize, CocoDefaults) {
  const SizeThresholds t;
  EXPECT_DOUBLE_EQ(t.t1, 1024.0);
  EXPECT_DOUBLE_EQ(t.t2, 9216.0);
  EXPECT_EQ(classify_size(square(20), t), SizeClass::Small);
  EXPECT_EQ(classify_size(square(32), t), SizeClass::Medium);  // boundary goes up
  EXPECT_EQ(classify_size(square(100), t), SizeClass::Large);
  EXPECT_EQ(classify_size(square(96), t), SizeClass::Large);
}

TEST(ClassifySize, RejectsBadThresholds) {
  EXPECT_THROW(classify_size(square(10), SizeThresholds{9216, 1024}), ConfigError);
  EXPECT_THROW(classify_size(square(10), SizeThresholds{100, 100}), ConfigError);
}

TEST(ClassifySize, RejectsInvalidBox) {
  EXPECT_THROW(classify_size(BBox{0, 0, 0, 5, 0}, SizeThresholds{}), InputError);
}

TEST(ClassifySize, MonotoneInArea) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> side(0.5, 200.0), grow(1.0, 3.0);
  const SizeThresholds t;
  for (int i = 0; i < 2000; ++i) {
    BBox b{0, 0, side(rng), side(rng), 0};
    BBox bigger = b;
    bigger.w *= grow(rng);
    bigger.h *= grow(rng);
    EXPECT_GE(static_cast<int>(classify_size(bigger, t)), static_cast<int>(classify_size(b, t)));
  }
}

TEST(ScaleDistribution, ThreeAreas) {
  // areas 400, 2000, 10000
  const std::vector<BBox> boxes{BBox{0, 0, 20, 20, 0}, BBox{0, 0, 40, 50, 0}, BBox{0, 0, 100, 100, 0}};
  const auto d = scale_distribution(boxes, SizeThresholds{});
  ASSERT_FALSE(d.empty());
  EXPECT_DOUBLE_EQ(d.small(), 1.0 / 3);
  EXPECT_DOUBLE_EQ(d.medium(), 1.0 / 3);
  EXPECT_DOUBLE_EQ(d.large(), 1.0 / 3);
}

TEST(ScaleDistribution, SevenTwoOne) {
  std::vector<BBox> boxes;
  for (int i = 0; i < 7; ++i) boxes.push_back(square(10));
  for (int i = 0; i < 2; ++i) boxes.push_back(square(50));
  boxes.push_back(square(120));
  const auto d = scale_distribution(boxes, SizeThresholds{});
  EXPECT_DOUBLE_EQ(d.small(), 0.7);
  EXPECT_DOUBLE_EQ(d.medium(), 0.2);
  EXPECT_DOUBLE_EQ(d.large(), 0.1);
}

TEST(ScaleDistribution, EmptyIsDistinguished) {
  const auto d = scale_distribution({}, SizeThresholds{});
  EXPECT_TRUE(d.empty());
  EXPECT_FALSE(d.fractions().has_value());
  EXPECT_THROW(d.small(), InputError);
}

TEST(ScaleDistribution, FractionsSumToOne) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> side(1.0, 150.0);
  std::uniform_int_distribution<int> count(1, 60);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<BBox> boxes(count(rng));
    for (auto& b : boxes) b = BBox{0, 0, side(rng), side(rng), 0};
    const auto f = *scale_distribution(boxes, SizeThresholds{}).fractions();
    for (double v : f) EXPECT_GE(v, 0.0);
    EXPECT_NEAR(f[0] + f[1] + f[2], 1.0, 1e-9);
  }
}

TEST(Raster, ShapeChecks) {
  EXPECT_THROW(RasterF(2, 2, 1, std::vector<float>(3)), ShapeError);
  RasterF r(2, 3, 2, 1.5f);
  EXPECT_EQ(r.size(), 12u);
  r(1, 2, 1) = 4.0f;
  EXPECT_EQ(r.data()[11], 4.0f);
  EXPECT_TRUE(r.all_finite());
}

TEST(BBox, CornerForm) {
  const auto b = BBox::from_corners(0.5, 0.5, 2.5, 2.5, 13);
  EXPECT_DOUBLE_EQ(b.cx, 1.5);
  EXPECT_DOUBLE_EQ(b.w, 2.0);
  EXPECT_EQ(b.class_id, 13);
  EXPECT_DOUBLE_EQ(b.x1(), 2.5);
}
