#include "harmap/paths.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace harmap;

namespace {

// Independent simplicity oracle in long double: no two non-adjacent
// segments meet and adjacent ones share only their common vertex.
bool oracle_simple(const std::vector<Point>& v) {
  using L = long double;
  auto orient = [](Point a, Point b, Point c) {
    L o = (L(b.x) - a.x) * (L(c.y) - a.y) - (L(b.y) - a.y) * (L(c.x) - a.x);
    return (o > 0) - (o < 0);
  };
  auto on = [](Point a, Point b, Point p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
           p.y <= std::max(a.y, b.y);
  };
  auto meet = [&](Point a, Point b, Point c, Point d) {
    int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 * o2 < 0 && o3 * o4 < 0) return true;
    return (o1 == 0 && on(a, b, c)) || (o2 == 0 && on(a, b, d)) || (o3 == 0 && on(c, d, a)) ||
           (o4 == 0 && on(c, d, b));
  };
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] == v[i - 1]) return false;
  for (std::size_t i = 0; i + 1 < v.size(); ++i)
    for (std::size_t j = i + 1; j + 1 < v.size(); ++j) {
      if (j == i + 1) {
        if (orient(v[i], v[i + 1], v[j + 1]) == 0 && dot(v[i + 1] - v[i], v[j + 1] - v[j]) < 0) return false;
        continue;
      }
      if (meet(v[i], v[i + 1], v[j], v[j + 1])) return false;
    }
  return true;
}

bool all_in_region(const PolyPath& p, const RegionOracle& r, double h) {
  for (std::size_t i = 1; i < p.size(); ++i)
    if (!segment_in_region(p.vertices[i - 1], p.vertices[i], r, h)) return false;
  return true;
}

// Every output vertex lies on the input trace.
bool on_trace(const PolyPath& out, const PolyPath& in) {
  for (const auto& q : out.vertices)
    if (min_distance_to(in, q) > 1e-12) return false;
  return true;
}

}  // namespace

TEST(MakeSimple, Examples) {
  PolyPath bow{{{0, 0}, {2, 2}, {2, 0}, {0, 2}}};
  auto s = make_simple(bow);
  EXPECT_TRUE(oracle_simple(s.vertices));
  EXPECT_EQ(s.front(), (Point{0, 0}));
  EXPECT_EQ(s.back(), (Point{0, 2}));
  EXPECT_TRUE(on_trace(s, bow));
  // the loop through (2,2),(2,0) is excised at the crossing (1,1)
  ASSERT_EQ(s.size(), 3u);
  EXPECT_NEAR(s.vertices[1].x, 1, 1e-15);
  EXPECT_NEAR(s.vertices[1].y, 1, 1e-15);

  PolyPath back{{{0, 0}, {3, 0}, {1, 0}, {1, 2}}};
  auto b = make_simple(back);
  EXPECT_TRUE(oracle_simple(b.vertices));
  EXPECT_EQ(b.vertices, (std::vector<Point>{{0, 0}, {1, 0}, {1, 2}}));

  PolyPath already{{{0, 0}, {1, 0}, {1, 1}}};
  EXPECT_EQ(make_simple(already).vertices, already.vertices);

  EXPECT_THROW(make_simple(PolyPath{{{0, 0}, {1, 0}, {0, 0}}}), PathError);
}

TEST(MakeSimpleProperty, RandomWalksBecomeSimpleSubtraces) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int k = 0; k < 300; ++k) {
    PolyPath p{{{0, 0}}};
    int n = 3 + k % 25;
    for (int i = 0; i < n; ++i) p.vertices.push_back(p.back() + Point{g(rng), g(rng)});
    if (p.front() == p.back()) continue;
    auto s = make_simple(p);
    ASSERT_TRUE(oracle_simple(s.vertices)) << k;
    ASSERT_EQ(s.front(), p.front());
    ASSERT_EQ(s.back(), p.back());
    ASSERT_TRUE(on_trace(s, p));
    ASSERT_LE(path_length(s), path_length(p) + 1e-9);
    EXPECT_EQ(make_simple(s).vertices, s.vertices);  // idempotent
  }
}

TEST(MakeSimpleProperty, LatticeWalksWithCollinearOverlaps) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> d(0, 3);
  const Point steps[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (int k = 0; k < 300; ++k) {
    PolyPath p{{{0, 0}}};
    for (int i = 0; i < 30; ++i) {
      Point q = p.back() + static_cast<double>(1 + d(rng)) * steps[d(rng)];
      if (!(q == p.back())) p.vertices.push_back(q);
    }
    if (p.front() == p.back()) continue;
    auto s = make_simple(p);
    ASSERT_TRUE(oracle_simple(s.vertices)) << k;
    ASSERT_TRUE(on_trace(s, p));
  }
}

TEST(Connect, StraightWhenVisible) {
  auto r = regions::disk({0, 0}, 2);
  auto p = polygonal_connect({-1, 0}, {1, 0}, r, 3);
  EXPECT_EQ(p.size(), 2u);
}

TEST(Connect, AroundObstacles) {
  // slit disk: the segment across the slit is blocked
  auto slit = regions::slit_disk({0, 0}, 1, M_PI, 0.01);
  Point a{-0.5, 0.2}, b{-0.5, -0.2};
  auto p = polygonal_connect(a, b, slit, 1.99);
  EXPECT_TRUE(oracle_simple(p.vertices));
  EXPECT_TRUE(all_in_region(p, slit, 1e-3));
  EXPECT_LT(diameter(p), 1.99);
  EXPECT_EQ(p.front(), a);
  EXPECT_EQ(p.back(), b);

  // annulus: opposite points
  auto ann = regions::annulus({0, 0}, 0.5, 1.0, 0.01);
  auto q = polygonal_connect({0.75, 0}, {-0.75, 0}, ann, 1.99);
  EXPECT_TRUE(oracle_simple(q.vertices));
  EXPECT_TRUE(all_in_region(q, ann, 1e-3));
  EXPECT_LT(diameter(q), 1.99);

  // two disks touching through a narrow waist
  auto two = regions::disks({Disk({-1, 0}, 1.05), Disk({1, 0}, 1.05)}, 0.01);
  auto w = polygonal_connect({-1.5, 0.5}, {1.5, -0.5}, two, 3.9);
  EXPECT_TRUE(all_in_region(w, two, 1e-3));
  EXPECT_TRUE(oracle_simple(w.vertices));
}

TEST(Connect, ReportsFailure) {
  auto two = regions::disks({Disk({-1, 0}, 0.9), Disk({1, 0}, 0.9)}, 0.01);
  EXPECT_THROW(polygonal_connect({-1, 0}, {1, 0}, two, 3.0), PathError);
  // budget too small for the detour around the slit
  auto slit = regions::slit_disk({0, 0}, 1, M_PI, 0.01);
  EXPECT_THROW(polygonal_connect({-0.5, 0.2}, {-0.5, -0.2}, slit, 0.5), PathError);
}

TEST(ConnectProperty, RandomPairsInSlitDisk) {
  auto slit = regions::slit_disk({0, 0}, 1, M_PI, 0.02);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-0.95, 0.95);
  int ok = 0;
  for (int k = 0; k < 40; ++k) {
    Point a{u(rng), u(rng)}, b{u(rng), u(rng)};
    if (!slit(a) || !slit(b)) continue;
    PolyPath p;
    try {
      p = polygonal_connect(a, b, slit, 2.0);
    } catch (const PathError&) {
      continue;  // budget can be too tight near the slit
    }
    ++ok;
    ASSERT_TRUE(oracle_simple(p.vertices));
    ASSERT_TRUE(all_in_region(p, slit, 2e-3));
    ASSERT_LT(diameter(p), 2.0);
  }
  EXPECT_GT(ok, 20);
}

TEST(Tube, ExampleBound) {
  PolyPath gamma{{{0, 0}, {1, 0}}};
  auto r = regions::plane(0.01);
  auto t = tube_detour(gamma, {0.5, 0.1}, 0.2, r);
  EXPECT_EQ(t.front(), (Point{0.5, 0.1}));
  EXPECT_EQ(t.back(), (Point{1, 0}));
  EXPECT_LT(diameter(t), 1.4);
  EXPECT_TRUE(oracle_simple(t.vertices));
  // meets gamma only at the endpoint
  for (std::size_t i = 1; i < t.size(); ++i) {
    auto h = segment_hit(t.vertices[i - 1], t.vertices[i], gamma.front(), gamma.back());
    if (h) {
      EXPECT_EQ(i + 1, t.size());
      EXPECT_GE(h->t0, 1.0);
    }
  }
  EXPECT_THROW(tube_detour(gamma, {0.5, 0}, 0.2, r), PathError);
}

TEST(Tube, ZigZagFromTheFarSide) {
  PolyPath gamma{{{0, 0}, {1, 1}, {2, 0}, {3, 1}, {4, 0}}};
  auto r = regions::plane(0.01);
  // start below the first leg: must go around the zig-zag to reach (4, 0)
  Point zeta{0.6, 0.5};
  auto t = tube_detour(gamma, zeta, 0.3, r);
  EXPECT_TRUE(oracle_simple(t.vertices));
  EXPECT_LT(diameter(t), diameter(gamma) + 0.6);
  for (std::size_t i = 1; i < t.size(); ++i)
    for (std::size_t k = 1; k < gamma.size(); ++k) {
      auto h = segment_hit(t.vertices[i - 1], t.vertices[i], gamma.vertices[k - 1], gamma.vertices[k]);
      if (h) ASSERT_TRUE(i + 1 == t.size() && h->t0 >= 1);
    }
}

TEST(EndCut, SlitDiskSequence) {
  // sequence spiralling into the tip of a slit; limit at the origin
  auto slit = regions::slit_disk({0, 0}, 1, M_PI, 0.01);
  std::vector<Point> seq;
  for (int k = 0; k < 60; ++k) {
    double r = 0.4 * std::pow(0.7, k);
    double a = 2.5 * std::sin(1.3 * k);
    seq.push_back({r * std::cos(a), r * std::sin(a)});
  }
  EndCutOptions opt;
  auto res = end_cut(seq, slit, 0.8, opt);
  ASSERT_GE(res.kept_indices.size(), 4u) << res.diagnostic;
  EXPECT_TRUE(oracle_simple(res.path.vertices));
  EXPECT_TRUE(all_in_region(res.path, slit, 1e-4));
  // kept points visited in order with decreasing distances
  for (std::size_t k = 1; k < res.kept_indices.size(); ++k) {
    EXPECT_GT(res.kept_indices[k], res.kept_indices[k - 1]);
    EXPECT_EQ(res.path.vertices[res.piece_end[k]], seq[res.kept_indices[k]]);
  }
  // schedule laws
  const auto& s = res.schedule;
  EXPECT_EQ(s.rho_n(1), 0.8);
  for (std::size_t n = 1; n + 1 < s.rho.size(); ++n)
    EXPECT_DOUBLE_EQ(s.d_n(n + 1), std::min(0.8 / std::ldexp(1.0, static_cast<int>(n + 1)), s.rho_n(n) / 4));
  for (std::size_t n = 2; n <= res.pieces.size(); ++n)
    EXPECT_LT(max_distance_from(res.pieces[n - 1], Point{0, 0}), 0.875 * s.rho_n(n - 1));
  for (std::size_t n = 1; n < s.rho.size(); ++n) EXPECT_LE(s.rho[n], s.rho[n - 1]);
}

TEST(EndCut, ConvexSectorReachesMaxStages) {
  auto sec = regions::sector({0, 0}, 1, -0.5, 0.5, 0.01);
  std::vector<Point> seq;
  for (int k = 0; k < 200; ++k) {
    double r = 0.3 * std::pow(0.8, k);
    double a = 0.4 * std::cos(0.9 * k);
    seq.push_back({r * std::cos(a), r * std::sin(a)});
  }
  EndCutOptions opt;
  opt.max_stages = 6;
  auto res = end_cut(seq, sec, 0.5, opt);
  EXPECT_FALSE(res.stalled) << res.diagnostic;
  EXPECT_EQ(res.pieces.size(), 6u);
  EXPECT_TRUE(oracle_simple(res.path.vertices));
}

TEST(EndCut, StallsOnNonConvergentSequence) {
  auto d = regions::disk({0, 0}, 1);
  std::vector<Point> seq(10, Point{0.3, 0.3});
  auto res = end_cut(seq, d, 0.5);
  EXPECT_TRUE(res.stalled);
  EXPECT_FALSE(res.diagnostic.empty());
}

TEST(Ulac, ProbeScores) {
  auto d = regions::disk({0, 0}, 1, 0.01);
  EXPECT_EQ(ulac_probe(d, {0, 0}, 0.9, 0.1, 0.2, 20, 3).score, 1.0);
  // across a slit small connections fail near the cut
  auto slit = regions::slit_disk({0, 0}, 1, M_PI, 0.01);
  auto p = ulac_probe(slit, {-0.5, 0}, 0.05, 0.1, 0.2, 40, 3);
  EXPECT_LT(p.score, 1.0);
}

TEST(EndCut, AlternatesAroundSlitTip) {
  // points on both sides of the slit: pieces must wind around the tip
  auto slit = regions::slit_disk({0, 0}, 1, M_PI, 0.01);
  std::vector<Point> seq;
  for (int k = 0; k < 30; ++k) {
    double r = 0.4 * std::pow(0.1, k), a = k % 2 ? 3.1 : -3.1;
    seq.push_back({r * std::cos(a), r * std::sin(a)});
  }
  auto res = end_cut(seq, slit, 0.8);
  EXPECT_FALSE(res.stalled) << res.diagnostic;
  EXPECT_EQ(res.pieces.size(), 12u);
  EXPECT_TRUE(oracle_simple(res.path.vertices));
  EXPECT_TRUE(all_in_region(res.path, slit, 0));
  bool wound = false;
  for (const auto& p : res.pieces) wound = wound || p.size() > 2;
  EXPECT_TRUE(wound);
}
