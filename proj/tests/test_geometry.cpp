#include <gtest/gtest.h>

#include <random>

#include "support/oracles.hpp"
#include "twinbench/errors.hpp"
#include "twinbench/geometry.hpp"

using namespace twinbench;

TEST(Obb, DisjointAndIdentical) {
  const OrientedBox a{{0, 0}, 0, 2, 2}, b{{5, 0}, 0, 2, 2};
  EXPECT_FALSE(obb_intersects(a, b));
  EXPECT_TRUE(obb_intersects(a, a));
  EXPECT_NEAR(obb_distance(a, b), 3.0, 1e-12);
  EXPECT_EQ(obb_distance(a, a), 0.0);
}

TEST(Obb, RotatedNeighbourMatchesLattice) {
  const OrientedBox a{{0, 0}, 0, 4, 2}, b{{3.0, 0}, kPi / 4, 4, 2};
  EXPECT_EQ(obb_intersects(a, b), oracle::sampled_overlap(a, b, 200));
  EXPECT_TRUE(obb_intersects(a, b));
}

TEST(Obb, TouchingCountsAsOverlap) {
  const OrientedBox a{{0, 0}, 0, 2, 2}, b{{2, 0}, 0, 2, 2};
  EXPECT_TRUE(obb_intersects(a, b));
  EXPECT_EQ(obb_distance(a, b), 0.0);
}

TEST(Obb, RandomPairsAgreeWithOracles) {
  std::mt19937_64 rng(7);
  constexpr int n = 60;
  int checked = 0;
  for (int i = 0; i < 2000; ++i) {
    const OrientedBox a = oracle::random_box(rng, 4.0, 0.4, 5.0);
    const OrientedBox b = oracle::random_box(rng, 4.0, 0.4, 5.0);
    const double gap = oracle::box_gap(a, b);
    EXPECT_NEAR(obb_distance(a, b), gap, 1e-9);
    EXPECT_EQ(obb_intersects(a, b), gap == 0.0) << i;
    const bool sampled = oracle::sampled_overlap(a, b, n);
    const double h = 5.0 / (n - 1);
    if (!sampled && gap < h) continue;
    ++checked;
    EXPECT_EQ(obb_intersects(a, b), sampled) << i;
  }
  EXPECT_GT(checked, 1900);
}

TEST(Obb, SymmetricAndPerimeterOnBoundary) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const OrientedBox a = oracle::random_box(rng, 3.0, 0.5, 4.0);
    const OrientedBox b = oracle::random_box(rng, 3.0, 0.5, 4.0);
    EXPECT_EQ(obb_intersects(a, b), obb_intersects(b, a));
    EXPECT_DOUBLE_EQ(obb_distance(a, b), obb_distance(b, a));
    for (Vec2 p : a.perimeter_samples(12)) {
      EXPECT_TRUE(oracle::box_contains(a, p, 1e-9));
      EXPECT_FALSE(oracle::box_contains(a, p, -1e-6));
    }
  }
}

TEST(PointInPolygon, ConvexAndOutside) {
  const Polygon sq{{0, 0}, {10, 0}, {10, 10}, {0, 10}};
  EXPECT_TRUE(point_in_polygon(sq, {5, 5}));
  EXPECT_FALSE(point_in_polygon(sq, {25, 5}));
  EXPECT_TRUE(point_in_polygon(sq, {10, 5}));
}

TEST(PointInPolygon, ConcaveNotch) {
  const Polygon u{{0, 0}, {10, 0}, {10, 10}, {7, 10}, {7, 3}, {3, 3}, {3, 10}, {0, 10}};
  for (Vec2 p : {Vec2{5, 6}, Vec2{5, 2}, Vec2{1, 9}, Vec2{8.5, 9.5}, Vec2{5, 3.0000001}})
    EXPECT_EQ(point_in_polygon(u, p), oracle::winding_number(u, p) != 0) << p.x << "," << p.y;
  EXPECT_FALSE(point_in_polygon(u, {5, 6}));
}

TEST(PointInPolygon, RandomStarPolygons) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> r(2.0, 10.0), pt(-11, 11);
  for (int k = 0; k < 100; ++k) {
    Polygon poly;
    const int n = 5 + k % 12;
    for (int i = 0; i < n; ++i) {
      const double a = 2 * kPi * i / n;
      const double rad = r(rng);
      poly.push_back({rad * std::cos(a), rad * std::sin(a)});
    }
    for (int j = 0; j < 200; ++j) {
      const Vec2 p{pt(rng), pt(rng)};
      if (oracle::boundary_distance(poly, p) < 1e-9) continue;
      EXPECT_EQ(point_in_polygon(poly, p), oracle::winding_number(poly, p) != 0);
    }
  }
}

TEST(Projection, ClosedFormCases) {
  const Polyline line{{0, 0}, {100, 0}};
  auto pr = project_onto_polyline(line, {50, 3});
  EXPECT_NEAR(pr.s, 50.0, 1e-12);
  EXPECT_NEAR(pr.d, 3.0, 1e-12);
  pr = project_onto_polyline(line, {0, 0});
  EXPECT_EQ(pr.s, 0.0);
  EXPECT_EQ(pr.d, 0.0);
  EXPECT_NEAR(project_onto_polyline(line, {30, -2}).d, -2.0, 1e-12);
}

TEST(Projection, LShapeTieTakesSmallerArcLength) {
  const Polyline l{{0, 0}, {10, 0}, {10, 10}};
  const auto pr = project_onto_polyline(l, {12, -2});
  const auto ref = oracle::brute_projection(l, {12, -2});
  EXPECT_NEAR(pr.s, ref.s, 1e-9);
  EXPECT_NEAR(pr.s, 10.0, 1e-9);
  // (7, 3) is 3 m from both legs.
  const auto tie = project_onto_polyline(l, {7, 3});
  EXPECT_NEAR(tie.s, 7.0, 1e-9);
}

TEST(Projection, RandomPolylinesMatchBruteForce) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-20, 20);
  for (int k = 0; k < 200; ++k) {
    Polyline line{{u(rng), u(rng)}};
    for (int i = 0; i < 6; ++i) line.push_back(line.back() + Vec2{u(rng) * 0.5, u(rng) * 0.5});
    for (int j = 0; j < 20; ++j) {
      const Vec2 p{u(rng), u(rng)};
      const auto got = project_onto_polyline(line, p);
      const auto ref = oracle::brute_projection(line, p);
      EXPECT_NEAR(std::abs(got.d), std::abs(ref.d), 1e-9);
      EXPECT_NEAR(got.s, ref.s, 1e-9);
    }
  }
}

TEST(Polyline, ArcLengthHelpers) {
  const Polyline l{{0, 0}, {3, 4}, {3, 10}};
  EXPECT_DOUBLE_EQ(polyline_length(l), 11.0);
  const auto cum = cumulative_lengths(l);
  EXPECT_DOUBLE_EQ(cum[1], 5.0);
  EXPECT_NEAR(point_at_arclength(l, 8.0).y, 7.0, 1e-12);
  EXPECT_EQ(point_at_arclength(l, 50.0), (Vec2{3, 10}));
  const auto rs = resample_polyline(l, 1.0);
  EXPECT_EQ(rs.front(), l.front());
  EXPECT_EQ(rs.back(), l.back());
}

TEST(SignedSide, ConventionAndRandomOracle) {
  const Segment s{{0, 0}, {1, 0}};
  EXPECT_EQ(signed_side(s, {0.5, 1}), 1);
  EXPECT_EQ(signed_side(s, {0.5, -1}), -1);
  EXPECT_EQ(signed_side(s, {7, 0}), 0);
  EXPECT_THROW(signed_side({{1, 1}, {1, 1}}, {0, 0}), GeometryError);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 5000; ++i) {
    const Segment seg{{u(rng), u(rng)}, {u(rng), u(rng)}};
    const Vec2 p{u(rng), u(rng)};
    const auto o = oracle::orient(seg.a, seg.b, p);
    if (std::fabs(o) < 1e-6) continue;
    EXPECT_EQ(signed_side(seg, p), o > 0 ? 1 : -1);
  }
}

TEST(Ray, BasicCases) {
  const std::vector<OrientedBox> none;
  EXPECT_FALSE(ray_first_hit({0, 0}, {10, 0}, none));
  const std::vector<OrientedBox> mid{{{5, 0}, 0, 1, 1}};
  const auto hit = ray_first_hit({0, 0}, {10, 0}, mid);
  ASSERT_TRUE(hit);
  EXPECT_NEAR(hit->distance, 4.5, 1e-12);
  const std::vector<OrientedBox> behind{{{15, 0}, 0, 1, 1}};
  EXPECT_FALSE(ray_first_hit({0, 0}, {10, 0}, behind));
  const std::vector<OrientedBox> around{{{0, 0}, 0, 2, 2}};
  EXPECT_FALSE(ray_first_hit({0, 0}, {10, 0}, around));
}

TEST(Ray, NearestHitMatchesClipping) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(-20, 20);
  for (int k = 0; k < 500; ++k) {
    std::vector<OrientedBox> boxes;
    for (int i = 0; i < 8; ++i) boxes.push_back(oracle::random_box(rng, 15.0, 0.5, 6.0));
    const Vec2 o{u(rng), u(rng)}, t{u(rng), u(rng)};
    std::optional<std::pair<std::size_t, double>> best;
    for (std::size_t i = 0; i < boxes.size(); ++i) {
      if (auto tt = oracle::clip_segment(o, t, boxes[i]); tt && *tt < 1.0) {
        const double d = *tt * distance(o, t);
        if (!best || d < best->second) best = {{i, d}};
      }
    }
    const auto got = ray_first_hit(o, t, boxes);
    ASSERT_EQ(got.has_value(), best.has_value()) << k;
    if (got) {
      EXPECT_NEAR(got->distance, best->second, 1e-9);
      for (std::size_t i = 0; i < boxes.size(); ++i) {
        if (i == got->index) continue;
        if (auto tt = oracle::clip_segment(o, t, boxes[i]); tt && *tt < 1.0)
          EXPECT_GE(*tt * distance(o, t), got->distance - 1e-9);
      }
    }
  }
}

TEST(Angles, NormalizeAndDiff) {
  EXPECT_NEAR(normalize_angle(3 * kPi), kPi, 1e-12);
  EXPECT_NEAR(angle_diff(-170 * kPi / 180, 170 * kPi / 180), 20 * kPi / 180, 1e-12);
}

TEST(Hull, ContainsInputPoints) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-5, 5);
  std::vector<Vec2> pts;
  for (int i = 0; i < 50; ++i) pts.push_back({u(rng), u(rng)});
  const Polygon hull = convex_hull(pts);
  EXPECT_GT(polygon_area(hull), 0.0);
  for (Vec2 p : pts) EXPECT_TRUE(point_in_polygon(hull, p));
}

TEST(RigidTransform, PreservesDistances) {
  const RigidTransform tf{0.7, {3, -2}};
  const Vec2 a{1, 2}, b{-4, 5};
  EXPECT_NEAR(distance(tf.apply(a), tf.apply(b)), distance(a, b), 1e-12);
  EXPECT_NEAR(tf.apply_heading(kPi), normalize_angle(kPi + 0.7), 1e-12);
}
