#include <gtest/gtest.h>

#include <algorithm>
#include <array>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "salwarp/saliency.hpp"

using namespace salwarp;

TEST(ExpansionFactor, WorkedCases) {
  EXPECT_EQ(expansion_factor({1.0 / 3, 1.0 / 3, 1.0 / 3}), 2.0);
  EXPECT_EQ(expansion_factor({0.05, 0.35, 0.60}), 1.0);
  EXPECT_EQ(expansion_factor({0.7, 0.2, 0.1}), 4.0);
}

TEST(ExpansionFactor, MatchesDoublingOracle) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(1e-4, 1.0);
  for (int i = 0; i < 5000; ++i) {
    double a = u(rng), b = u(rng), c = u(rng);
    const double t = a + b + c;
    a /= t, b /= t, c /= t;
    const double f = expansion_factor({a, b, c});
    EXPECT_EQ(f, oracle::expansion_factor(a, b, c));
    // power of two, >= 1
    int e = 0;
    EXPECT_EQ(std::frexp(f, &e), 0.5);
    EXPECT_GE(f, 1.0);
  }
}

TEST(ExpansionFactor, ExactPowersOfTwoJustBelow) {
  // Ratio sums a hair under 4 must not round up to f = 4.
  const double m = 0.25, l = 0.25;
  const double s = std::nextafter(3.0 * m, 0.0);  // s/m + m/l just below 4
  ASSERT_LT(s / m + m / l, 4.0);
  EXPECT_EQ(expansion_factor({s, m, l}), 2.0);
}

TEST(ExpansionFactor, ScaleInvariantInRatios) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int i = 0; i < 500; ++i) {
    const double a = u(rng), b = u(rng), c = u(rng);
    EXPECT_EQ(expansion_factor({a, b, c}), expansion_factor({2 * a, 2 * b, 2 * c}));
  }
}

TEST(ExpansionFactor, DegenerateDistribution) {
  EXPECT_THROW(expansion_factor({0.5, 0.5, 0.0}), DegenerateDistributionError);
  EXPECT_THROW(expansion_factor({0.5, 0.0, 0.5}), DegenerateDistributionError);
  EXPECT_THROW(expansion_factor(ScaleDistribution{}), DegenerateDistributionError);
  EXPECT_EQ(expansion_factor_or_identity(ScaleDistribution{}), 1.0);
  // psi_small == 0 is fine: it only appears in a numerator.
  EXPECT_EQ(expansion_factor({0.0, 0.5, 0.5}), 1.0);
}

TEST(SaliencyScale, Division) {
  EXPECT_EQ(saliency_scale(256, 4), 64.0);
  EXPECT_EQ(saliency_scale(256, 1), 256.0);
  EXPECT_EQ(saliency_scale(128, 2), 64.0);
  EXPECT_THROW(saliency_scale(0, 1), ConfigError);
  EXPECT_THROW(saliency_scale(256, 0.5), ConfigError);
}

TEST(SaliencyParams, Defaults) {
  const SaliencyParams p;
  EXPECT_EQ(p.P, 256.0);
  EXPECT_EQ(p.U, 1.0);
  EXPECT_EQ(p.floor_eps, 1e-2);
  EXPECT_EQ(p.grid_h, 64);
  EXPECT_EQ(p.grid_w, 64);
}

TEST(InstanceSaliency, EmptyIsUniformFloor) {
  const SaliencyParams p;
  const auto s = instance_saliency({}, 64, p, 100, 200);
  for (double v : s.values()) EXPECT_EQ(v, p.floor_eps);
}

TEST(InstanceSaliency, CenteredBoxPeaksAtCenter) {
  SaliencyParams p;
  p.grid_h = p.grid_w = 65;
  const std::vector<BBox> boxes{BBox{127.5, 127.5, 30, 30, 0}};
  const auto s = instance_saliency(boxes, 64, p, 256, 256);
  EXPECT_EQ(s.argmax(), static_cast<std::size_t>(32 * 65 + 32));
}

TEST(InstanceSaliency, OverlappingPeaksClipToU) {
  // Lattice 64 over a 127 px image puts cell 31 at x = 62, the box center;
  // the two unit peaks sum to 2 there and clip to U.
  const SaliencyParams p;
  const std::vector<BBox> boxes{BBox{62, 62, 10, 10, 0}, BBox{62, 62, 10, 10, 0}};
  const auto raw = box_kde(boxes, 64, p, 127, 127);
  EXPECT_DOUBLE_EQ(raw[31 * 64 + 31], 2.0);
  const auto s = instance_saliency(boxes, 64, p, 127, 127);
  EXPECT_DOUBLE_EQ(s.at(31, 31), 1.0 + 1e-2);
  EXPECT_DOUBLE_EQ(s.max_value(), 1.0 + 1e-2);
}

TEST(InstanceSaliency, CovarianceIsScaleTimesBoxSize) {
  // One lattice step (2 px) from the center the unit-peak Gaussian with
  // variance s*w = 64*10 px² is exp(-4 / 1280).
  const SaliencyParams p;
  const std::vector<BBox> boxes{BBox{62, 62, 10, 40, 0}};
  const auto raw = box_kde(boxes, 64, p, 127, 127);
  EXPECT_NEAR(raw[31 * 64 + 32], std::exp(-4.0 / (2 * 640.0)), 1e-15);
  EXPECT_NEAR(raw[32 * 64 + 31], std::exp(-4.0 / (2 * 2560.0)), 1e-15);
}

TEST(InstanceSaliency, BoundsAndPermutationInvariance) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(0, 300), side(4, 120);
  const SaliencyParams p;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<BBox> boxes(1 + trial % 12);
    for (auto& b : boxes) b = BBox{pos(rng), pos(rng), side(rng), side(rng), 0};
    const auto a = instance_saliency(boxes, 32, p, 300, 300);
    std::shuffle(boxes.begin(), boxes.end(), rng);
    const auto b = instance_saliency(boxes, 32, p, 300, 300);
    for (std::size_t i = 0; i < a.values().size(); ++i) {
      EXPECT_GE(a.values()[i], p.floor_eps);
      EXPECT_LE(a.values()[i], p.U + p.floor_eps);
      EXPECT_NEAR(a.values()[i], b.values()[i], 1e-12);
    }
  }
}

TEST(InstanceSaliency, TranslationEquivariance) {
  // Shift by exactly 3 lattice steps (3 * 4 px on a 253 px image, 64 cells).
  const SaliencyParams p;
  const int H = 253, W = 253;
  const double step = (W - 1) / 63.0;
  std::vector<BBox> boxes{BBox{100, 90, 20, 30, 0}, BBox{130, 140, 12, 8, 0}};
  std::vector<BBox> moved = boxes;
  for (auto& b : moved) {
    b.cx += 3 * step;
    b.cy += 2 * step;
  }
  const auto a = box_kde(boxes, 16, p, H, W);
  const auto b = box_kde(moved, 16, p, H, W);
  for (int r = 3; r < 64 - 3 - 2; ++r)
    for (int c = 3; c < 64 - 3 - 3; ++c)
      EXPECT_NEAR(b[(r + 2) * 64 + c + 3], a[r * 64 + c], 1e-12);
}

TEST(StaticPrior, BandDatasetPeaksInBand) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> x(0, 399), y(180, 220);
  std::vector<BBox> boxes(40);
  for (auto& b : boxes) b = BBox{x(rng), y(rng), 20, 16, 0};
  const SaliencyParams p;
  const auto s = static_prior_saliency(boxes, 16, p, 400, 400);
  const auto rows = s.row_means();
  const int best = static_cast<int>(std::max_element(rows.begin(), rows.end()) - rows.begin());
  const double y_best = s.cell_y(best);
  EXPECT_GE(y_best, 180.0);
  EXPECT_LE(y_best, 220.0);
}

TEST(StaticPrior, SingleImageMatchesInstanceUpToRescale) {
  const SaliencyParams p;
  const std::vector<BBox> boxes{BBox{50, 60, 30, 30, 0}, BBox{150, 60, 40, 20, 0}};
  const auto raw = box_kde(boxes, 32, p, 200, 200);
  const double peak = *std::max_element(raw.begin(), raw.end());
  const auto st = static_prior_saliency(boxes, 32, p, 200, 200);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    EXPECT_NEAR(st.values()[i], std::clamp(raw[i] / peak, 0.0, p.U) + p.floor_eps, 1e-12);
  }
  EXPECT_DOUBLE_EQ(st.max_value(), 1.0 + p.floor_eps);
}

TEST(StaticPrior, EmptyIsUniformFloor) {
  const auto s = static_prior_saliency({}, 32, SaliencyParams{}, 50, 50);
  EXPECT_EQ(s.max_value(), s.min_value());
  EXPECT_EQ(s.max_value(), 1e-2);
}

TEST(GeometricPrior, CenterVp) {
  SaliencyParams p;
  p.grid_h = p.grid_w = 33;
  const auto s = geometric_prior_saliency(127.5, 127.5, 40, p, 256, 256);
  EXPECT_EQ(s.argmax(), static_cast<std::size_t>(16 * 33 + 16));
}

TEST(GeometricPrior, VpAboveImageDecreasesDownward) {
  const SaliencyParams p;
  const auto s = geometric_prior_saliency(100, -50, 80, p, 200, 200);
  for (int c = 0; c < p.grid_w; ++c)
    for (int r = 1; r < p.grid_h; ++r) EXPECT_LE(s.at(r, c), s.at(r - 1, c));
}

TEST(GeometricPrior, HugeSpreadIsFlat) {
  const SaliencyParams p;
  const auto s = geometric_prior_saliency(30, 40, 1e6, p, 480, 640);
  EXPECT_LE((s.max_value() - s.min_value()) / s.max_value(), 1e-6);
}

TEST(GeometricPrior, RejectsBadSpread) {
  EXPECT_THROW(geometric_prior_saliency(0, 0, 0, SaliencyParams{}, 10, 10), ConfigError);
}

TEST(SaliencyMap, QueryIsBilinear) {
  SaliencyParams p;
  p.grid_h = p.grid_w = 2;
  SaliencyMap m(2, 2, 11, 11, {0.0, 1.0, 2.0, 3.0});
  EXPECT_DOUBLE_EQ(m.query(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(m.query(10, 10), 3.0);
  EXPECT_DOUBLE_EQ(m.query(5, 5), 1.5);
  EXPECT_DOUBLE_EQ(m.query(-4, 20), 2.0);  // clamped
}
