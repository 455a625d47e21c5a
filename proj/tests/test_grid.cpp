#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "salwarp/grid.hpp"

using namespace salwarp;

namespace {

SaliencyMap random_map(std::mt19937_64& rng, int H, int W) {
  SaliencyParams p;
  std::uniform_real_distribution<double> pos_x(-20, W + 20), pos_y(-20, H + 20);
  std::uniform_real_distribution<double> side(4, 150), scale(4, 256);
  std::uniform_int_distribution<int> count(0, 15);
  std::vector<BBox> boxes(count(rng));
  for (auto& b : boxes) b = BBox{pos_x(rng), pos_y(rng), side(rng), side(rng), 0};
  return instance_saliency(boxes, scale(rng), p, H, W);
}

SaliencyMap left_heavy(int H, int W) {
  SaliencyParams p;
  std::vector<double> v(static_cast<std::size_t>(p.grid_h) * p.grid_w, p.floor_eps);
  for (int r = 0; r < p.grid_h; ++r)
    for (int c = 0; c < p.grid_w / 2; ++c) v[r * p.grid_w + c] = 1.0;
  return SaliencyMap(p.grid_h, p.grid_w, H, W, v);
}

}  // namespace

TEST(BuildGrid, UniformSaliencyIsIdentity) {
  const auto s = uniform_saliency(SaliencyParams{}, 256, 256);
  const GridParams gp;
  const WarpGrid g = build_grid(s, gp);
  EXPECT_EQ(g.map_x().front(), 0.0);
  EXPECT_EQ(g.map_x().back(), 255.0);
  const double sigma_px = gp.sigma_x() * 255.0 / 30.0;
  const auto dense = g.dense_x();
  for (int u = 0; u < 256; ++u) {
    if (u < 3 * sigma_px || u > 255 - 3 * sigma_px) continue;
    EXPECT_LT(std::abs(dense[u] - u), 0.5) << u;
  }
}

TEST(BuildGrid, MatchesQuadratureOracle) {
  std::mt19937_64 rng(21);
  const GridParams gp;
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_map(rng, 200, 300);
    const WarpGrid g = build_grid(s, gp);
    const auto mx = oracle::axis_map_quadrature(oracle::marginal(s, 0), 300, gp.grid_w, gp.sigma_x());
    const auto my = oracle::axis_map_quadrature(oracle::marginal(s, 1), 200, gp.grid_h, gp.sigma_y());
    for (int i = 0; i < gp.grid_w; ++i) EXPECT_NEAR(g.map_x()[i], mx[i], 0.02);
    for (int i = 0; i < gp.grid_h; ++i) EXPECT_NEAR(g.map_y()[i], my[i], 0.02);
  }
}

TEST(BuildGrid, LeftHeavySaliencyOversamplesLeft) {
  const int W = 256;
  const auto s = left_heavy(128, W);
  const WarpGrid g = build_grid(s);
  const auto inv = invert_grid(g);
  // The left half of the source takes more than half of the output.
  EXPECT_GT(inv.output_x((W - 1) / 2.0), (W - 1) / 2.0);
  // Magnified band on the left of the saliency edge, compressed band on the right.
  const auto dense = g.dense_x();
  double min_left = 1e9, max_right = 0;
  for (int u = 1; u < W / 2; ++u) min_left = std::min(min_left, dense[u] - dense[u - 1]);
  for (int u = W / 2; u < W; ++u) max_right = std::max(max_right, dense[u] - dense[u - 1]);
  EXPECT_LT(min_left, 0.9);
  EXPECT_GT(max_right, 1.1);
  // Same shape from the independent quadrature of the integrals.
  const auto mx = oracle::axis_map_quadrature(oracle::marginal(s, 0), W, 31, 31 / 16.0);
  const double step = (W - 1) / 30.0;
  double q_min_left = 1e9;
  for (int i = 1; i <= 15; ++i) q_min_left = std::min(q_min_left, (mx[i] - mx[i - 1]) / step);
  EXPECT_LT(q_min_left, 0.9);
  EXPECT_LT(mx[15], 127.5);
  // Rows are untouched: the marginal along y is constant.
  // (up to the pixel-sum discretization of the integral)
  for (int i = 0; i < g.grid_h(); ++i) EXPECT_NEAR(g.map_y()[i], g.knot_y(i), 1e-2);
}

TEST(BuildGrid, CenteredGaussianIsSymmetric) {
  SaliencyParams p;
  p.grid_h = p.grid_w = 65;
  const std::vector<BBox> boxes{BBox{127.5, 95.5, 40, 30, 0}};
  const auto s = instance_saliency(boxes, 16, p, 192, 256);
  const WarpGrid g = build_grid(s);
  const int n = g.grid_w();
  for (int u = 0; u < n; ++u) EXPECT_NEAR(g.map_x()[u] + g.map_x()[n - 1 - u], 255.0, 1e-6);
  const int m = g.grid_h();
  for (int v = 0; v < m; ++v) EXPECT_NEAR(g.map_y()[v] + g.map_y()[m - 1 - v], 191.0, 1e-6);
}

TEST(BuildGrid, FoldFreeAndPinned) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const int H = 64 + trial % 5 * 50, W = 64 + trial % 7 * 40;
    const WarpGrid g = build_grid(random_map(rng, H, W));
    EXPECT_NO_THROW(g.validate());
    EXPECT_EQ(g.map_x().front(), 0.0);
    EXPECT_EQ(g.map_x().back(), W - 1.0);
    EXPECT_EQ(g.map_y().back(), H - 1.0);
  }
}

TEST(BuildGrid, RejectsUnfinalizedSaliency) {
  SaliencyMap zero(4, 4, 32, 32, std::vector<double>(16, 0.0));
  EXPECT_THROW(build_grid(zero), InvariantError);
}

TEST(BuildGrid, SeparableDenseGridMatchesTwoDimensionalEvaluation) {
  // The implied 2-D sampling field at (u, v) is (map_x(u), map_y(v)):
  // evaluate it cell by cell from the knots and compare to dense_x/dense_y.
  std::mt19937_64 rng(4);
  const auto s = random_map(rng, 150, 220);
  const WarpGrid g = build_grid(s);
  const auto dx = g.dense_x();
  const auto dy = g.dense_y();
  std::uniform_int_distribution<int> ux(0, 219), vy(0, 149);
  for (int k = 0; k < 500; ++k) {
    const int u = ux(rng), v = vy(rng);
    EXPECT_NEAR(oracle::map_at(g.map_x(), 220, u), dx[u], 1e-9);
    EXPECT_NEAR(oracle::map_at(g.map_y(), 150, v), dy[v], 1e-9);
  }
}

TEST(BuildGrid, MoreSaliencyNeverShrinksRegion) {
  std::mt19937_64 rng(12);
  const int W = 400, H = 100;
  const GridParams gp;
  const double reach = gp.truncate * gp.sigma_x() * (W - 1) / (gp.grid_w - 1);
  for (int trial = 0; trial < 50; ++trial) {
    const auto base = random_map(rng, H, W);
    std::vector<double> v(base.values().begin(), base.values().end());
    // Raise lattice columns [c0, c1]; the marginal changes on (c0-1, c1+1).
    std::uniform_int_distribution<int> start(20, 35);
    const int c0 = start(rng), c1 = c0 + 6;
    for (int r = 0; r < base.grid_h(); ++r)
      for (int c = c0; c <= c1; ++c) v[r * base.grid_w() + c] += 0.5;
    const SaliencyMap bumped(base.grid_h(), base.grid_w(), H, W, v);
    const double a = base.cell_x(c0 - 1), b = base.cell_x(c1 + 1);
    ASSERT_GT(a, reach);
    ASSERT_LT(b, W - 1 - reach);
    const auto inv0 = invert_grid(build_grid(base, gp));
    const auto inv1 = invert_grid(build_grid(bumped, gp));
    EXPECT_GE(inv1.output_x(b) - inv1.output_x(a), inv0.output_x(b) - inv0.output_x(a) - 1e-9);
  }
}

TEST(InvertGrid, IdentityInverse) {
  const auto g = WarpGrid::identity(50, 80);
  const auto inv = invert_grid(g);
  for (int x = 0; x < 80; ++x) EXPECT_NEAR(inv.output_x(x), x, 1e-12);
  for (int y = 0; y < 50; ++y) EXPECT_NEAR(inv.output_y(y), y, 1e-12);
}

TEST(InvertGrid, HandWorkedKnots) {
  const WarpGrid g(2, 91, {0.0, 30.0, 90.0}, {0.0, 1.0});
  const auto inv = invert_grid(g);
  EXPECT_DOUBLE_EQ(inv.lattice_x(60.0), 1.5);
  EXPECT_DOUBLE_EQ(inv.lattice_x(30.0), 1.0);
  EXPECT_DOUBLE_EQ(inv.lattice_x(90.0), 2.0);
  EXPECT_DOUBLE_EQ(inv.lattice_x(15.0), 0.5);
}

TEST(InvertGrid, RoundTripOnRandomMonotoneGrids) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> step(0.05, 3.0);
  std::uniform_int_distribution<int> knots(2, 40);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = knots(rng);
    std::vector<double> raw(n, 0.0);
    for (int i = 1; i < n; ++i) raw[i] = raw[i - 1] + step(rng);
    const int W = 120;
    for (auto& v : raw) v *= (W - 1) / raw.back();
    raw.back() = W - 1;
    const WarpGrid g(2, W, raw, {0.0, 1.0});
    const auto inv = invert_grid(g);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(inv.lattice_x(g.map_x()[i]), i, 1e-9);
    // Between knots: compare to the brute-force dense inverse.
    const auto brute = oracle::dense_inverse(g.map_x(), W);
    for (int x = 0; x < W; ++x) {
      EXPECT_NEAR(inv.output_x(x), brute[x], 1e-6);
      EXPECT_NEAR(g.source_x(inv.output_x(x)), x, 1e-9);
    }
  }
}

TEST(InvertGrid, RejectsFolds) {
  const WarpGrid g(2, 91, {0.0, 50.0, 40.0, 90.0}, {0.0, 1.0});
  EXPECT_THROW(invert_grid(g), InvariantError);
  EXPECT_THROW(g.validate(), InvariantError);
}

TEST(ForwardMapPoint, Identity) {
  const auto g = WarpGrid::identity(100, 100);
  const auto p = forward_map_point(g, {10, 20});
  EXPECT_NEAR(p.x, 10, 1e-12);
  EXPECT_NEAR(p.y, 20, 1e-12);
}

TEST(ForwardMapPoint, OriginIsFixed) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = build_grid(random_map(rng, 120, 160));
    const auto p = forward_map_point(g, {0, 0});
    EXPECT_EQ(p.x, 0.0);
    EXPECT_EQ(p.y, 0.0);
    const auto q = forward_map_point(g, {159, 119});
    EXPECT_EQ(q.x, 159.0);
    EXPECT_EQ(q.y, 119.0);
  }
}

TEST(ForwardMapPoint, OversampledBoxGrows) {
  const std::vector<BBox> boxes{BBox{128, 128, 40, 40, 0}};
  const auto g = build_grid(instance_saliency(boxes, 8, SaliencyParams{}, 256, 256));
  const auto a = forward_map_point(g, {108, 108});
  const auto b = forward_map_point(g, {148, 148});
  EXPECT_GT((b.x - a.x) / 40.0, 1.0);
  EXPECT_GT((b.y - a.y) / 40.0, 1.0);
}

TEST(ForwardMapPoint, OutsideImage) {
  const auto g = WarpGrid::identity(10, 10);
  EXPECT_THROW(forward_map_point(g, {-1.0, 0}), InputError);
  EXPECT_THROW(forward_map_point(g, {0, 9.6}), InputError);
  EXPECT_NO_THROW(forward_map_point(g, {-0.5, 9.5}));
}

TEST(WarpGrid, RescaleKeepsPinning) {
  std::mt19937_64 rng(1);
  const auto g = build_grid(random_map(rng, 256, 256));
  const auto r = g.rescaled(32, 32);
  EXPECT_NO_THROW(r.validate());
  EXPECT_NEAR(r.map_x()[5], g.map_x()[5] * 31.0 / 255.0, 1e-12);
}
