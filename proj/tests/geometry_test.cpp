#include "harmap/geometry.hpp"
#include "harmap/spatial.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace harmap;

TEST(Geometry, Orientation) {
  EXPECT_EQ(orientation(Point{0, 0}, Point{1, 0}, Point{0, 1}), 1);
  EXPECT_EQ(orientation(Point{0, 0}, Point{1, 0}, Point{0, -1}), -1);
  EXPECT_EQ(orientation(Point{0, 0}, Point{1, 0}, Point{5, 0}), 0);
  EXPECT_EQ(orientation(Point{0, 0}, Point{1, 1}, Point{2, 2 + 1e-14}), 0);
  EXPECT_EQ(orientation(Point{0, 0}, Point{1, 1}, Point{2, 2 + 1e-9}), 1);
}

TEST(Geometry, SegmentContacts) {
  // proper crossing at (0.5, 0.5)
  auto h = segment_hit(Point{0, 0}, Point{1, 1}, Point{0, 1}, Point{1, 0});
  ASSERT_TRUE(h);
  EXPECT_NEAR(h->t0, 0.5, 1e-15);
  // touching at an endpoint
  EXPECT_TRUE(segments_intersect(Point{0, 0}, Point{1, 0}, Point{1, 0}, Point{1, 5}));
  EXPECT_TRUE(segments_intersect(Point{0, 0}, Point{2, 0}, Point{1, 0}, Point{1, 5}));
  // disjoint, parallel
  EXPECT_FALSE(segments_intersect(Point{0, 0}, Point{1, 0}, Point{0, 1}, Point{1, 1}));
  // collinear, separated
  EXPECT_FALSE(segments_intersect(Point{0, 0}, Point{1, 0}, Point{2, 0}, Point{3, 0}));
  // collinear overlap
  auto o = segment_hit(Point{0, 0}, Point{4, 0}, Point{3, 0}, Point{1, 0});
  ASSERT_TRUE(o);
  EXPECT_DOUBLE_EQ(o->t0, 0.25);
  EXPECT_DOUBLE_EQ(o->t1, 0.75);
  // line through but segment misses
  EXPECT_FALSE(segments_intersect(Point{0, 0}, Point{1, 1}, Point{3, 0}, Point{2, 1 - 1e-3}));
}

TEST(Geometry, Simplicity) {
  PolyPath z{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  EXPECT_TRUE(is_simple(z));
  PolyPath bow{{{0, 0}, {1, 1}, {1, 0}, {0, 1}}};
  EXPECT_FALSE(is_simple(bow));
  PolyPath back{{{0, 0}, {2, 0}, {1, 0}}};
  EXPECT_FALSE(is_simple(back));
  PolyPath closed{{{0, 0}, {1, 0}, {1, 1}, {0, 0}}};
  EXPECT_FALSE(is_simple(closed));
  PolyPath dup{{{0, 0}, {0, 0}, {1, 1}}};
  EXPECT_FALSE(is_simple(dup));
  PolyPath straight{{{0, 0}, {1, 0}, {2, 0}}};
  EXPECT_TRUE(is_simple(straight));
}

TEST(Geometry, DiameterAndDistances) {
  PolyPath p{{{0, 0}, {3, 0}, {3, 4}, {1, 1}}};
  EXPECT_DOUBLE_EQ(diameter(p), 5.0);
  EXPECT_DOUBLE_EQ(min_distance_to(p, Point{1.5, -2}), 2.0);
  EXPECT_DOUBLE_EQ(max_distance_from(p, Point{0, 0}), 5.0);
  EXPECT_DOUBLE_EQ(path_length(p), 3 + 4 + std::hypot(2, 3));
}

TEST(GeometryProperty, DiameterMatchesBruteForce) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int k = 0; k < 50; ++k) {
    std::vector<Point> pts(40);
    for (auto& q : pts) q = {g(rng), g(rng)};
    double brute = 0;
    for (auto& a : pts)
      for (auto& b : pts) brute = std::max(brute, distance(a, b));
    EXPECT_DOUBLE_EQ(diameter(pts), brute);
  }
}

TEST(GeometryProperty, IntersectionIsSymmetric) {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> c(0, 4);  // small lattice: many degenerate cases
  for (int k = 0; k < 20000; ++k) {
    Point a{double(c(rng)), double(c(rng))}, b{double(c(rng)), double(c(rng))};
    Point d{double(c(rng)), double(c(rng))}, e{double(c(rng)), double(c(rng))};
    if (a == b || d == e) continue;
    ASSERT_EQ(segments_intersect(a, b, d, e), segments_intersect(d, e, a, b));
    ASSERT_EQ(segments_intersect(a, b, d, e), segments_intersect(b, a, e, d));
    // exact oracle via integer arithmetic
    auto orient = [](Point p, Point q, Point r) {
      long v = std::lround((q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x));
      return (v > 0) - (v < 0);
    };
    auto on = [](Point p, Point q, Point r) {
      return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
             r.y <= std::max(p.y, q.y);
    };
    int o1 = orient(a, b, d), o2 = orient(a, b, e), o3 = orient(d, e, a), o4 = orient(d, e, b);
    bool exact = (o1 * o2 < 0 && o3 * o4 < 0) || (o1 == 0 && on(a, b, d)) || (o2 == 0 && on(a, b, e)) ||
                 (o3 == 0 && on(d, e, a)) || (o4 == 0 && on(d, e, b));
    ASSERT_EQ(segments_intersect(a, b, d, e), exact);
  }
}

TEST(Spatial, IndexesAgreeWithBruteForce) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-5, 5);
  std::vector<Point> pts(500);
  for (auto& q : pts) q = {u(rng), u(rng)};
  PointIndex idx(pts, 0.3);
  PolylineSet s;
  s.lines.push_back({pts, Source::critical_contour});
  SegmentIndex seg(s, 0.3);
  for (int k = 0; k < 200; ++k) {
    Point p{u(rng) * 2, u(rng) * 2};
    double b = 1e300, bs = 1e300;
    for (auto& q : pts) b = std::min(b, distance(p, q));
    for (std::size_t i = 1; i < pts.size(); ++i) bs = std::min(bs, point_segment_distance(p, pts[i - 1], pts[i]));
    EXPECT_DOUBLE_EQ(idx.nearest(p), b);
    EXPECT_DOUBLE_EQ(seg.nearest(p), bs);
  }
}

TEST(Geometry, PointAgainstSegment) {
  EXPECT_FALSE(segments_intersect(Point{0.6, 0.5}, Point{0.6, 0.5}, Point{0, 0}, Point{1, 1}));
  EXPECT_TRUE(segments_intersect(Point{0.5, 0.5}, Point{0.5, 0.5}, Point{0, 0}, Point{1, 1}));
  EXPECT_FALSE(segments_intersect(Point{2, 2}, Point{2, 2}, Point{0, 0}, Point{1, 1}));
  EXPECT_TRUE(segments_intersect(Point{0, 0}, Point{1, 1}, Point{0.5, 0.5}, Point{0.5, 0.5}));
}
