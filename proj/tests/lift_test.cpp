#include "harmap/lift.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace harmap;

namespace {

PolyPath segment(Point a, Point b) { return PolyPath{{a, b}}; }

void expect_traces(const PlanarMap& f, const LiftResult& r, double tol) {
  ASSERT_EQ(r.lifted.size(), r.targets.size());
  for (std::size_t k = 0; k < r.lifted.size(); ++k)
    ASSERT_LE(distance(f(r.lifted.vertices[k]), r.targets[k]), tol);
}

}  // namespace

TEST(Preimages, Examples) {
  auto ex1 = preimages(builtin("ex1-nono"), {2, 0}, Window{-5, 5, -5, 5, 64, 64});
  ASSERT_EQ(ex1.points.size(), 1u);
  EXPECT_NEAR(ex1.points[0].x, std::log(2.0), 1e-10);
  EXPECT_NEAR(ex1.points[0].y, 0.0, 1e-10);
  EXPECT_TRUE(ex1.window_limited);

  auto id = preimages(builtin("identity"), {5, -1}, Window{0, 10, -5, 5, 16, 16});
  ASSERT_EQ(id.points.size(), 1u);
  EXPECT_EQ(id.points[0], (Point{5, -1}));

  auto sq = preimages(builtin("zsquared"), {1, 0}, square_window(2));
  ASSERT_EQ(sq.points.size(), 2u);
  EXPECT_NEAR(sq.points[0].x, -1, 1e-12);
  EXPECT_NEAR(sq.points[1].x, 1, 1e-12);

  // left half-plane is omitted by e^x cos y + i xy on the real axis
  EXPECT_TRUE(preimages(builtin("ex1-nono"), {-2, 0}, square_window(6)).points.empty());
}

TEST(Preimages, DeterministicAcrossThreads) {
  auto f = builtin("ex6-imexp");
  PreimageOptions one, many;
  many.threads = 3;
  auto a = preimages(f, {0.5, 2.0}, square_window(3, 40), one);
  auto b = preimages(f, {0.5, 2.0}, square_window(3, 40), many);
  EXPECT_EQ(a.points, b.points);
}

TEST(LiftPath, IdentityIsExact) {
  PolyPath g{{{0, 0}, {1, 2}, {-3, 0.5}, {4, 4}}};
  auto r = lift_path(builtin("identity"), g, g.front());
  EXPECT_EQ(r.status, LiftStatus::complete);
  ASSERT_EQ(r.vertex_index.size(), g.size());
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(r.lifted.vertices[r.vertex_index[k]], g.vertices[k]);
  EXPECT_EQ(r.max_residual, 0.0);
}

TEST(LiftPath, SquareRootBranch) {
  auto r = lift_path(builtin("zsquared"), segment({1, 0}, {4, 0}), Point{1, 0});
  ASSERT_EQ(r.status, LiftStatus::complete);
  EXPECT_NEAR(r.lifted.back().x, 2.0, 1e-8);
  EXPECT_NEAR(r.lifted.back().y, 0.0, 1e-8);
  expect_traces(builtin("zsquared"), r, 1e-10);
}

TEST(LiftPath, StopsAtBranchPoint) {
  auto r = lift_path(builtin("zsquared"), segment({1, 0}, {-1, 0}), Point{1, 0});
  EXPECT_EQ(r.status, LiftStatus::hit_critical);
  EXPECT_LT(norm(r.lifted.back()), 1e-3);
}

TEST(LiftPath, LeavesWindow) {
  LiftOptions opt;
  opt.window = square_window(1.5);
  auto r = lift_path(builtin("identity"), segment({0, 0}, {3, 0}), Point{0, 0}, opt);
  EXPECT_EQ(r.status, LiftStatus::left_window);
}

TEST(LiftPath, ExtendedPrecision) {
  PrecisionGuard guard(50);
  using V = Vec2<xreal>;
  BasicPolyPath<xreal> g{{V(xreal(1), xreal(0)), V(xreal(0), xreal(3)), V(xreal(4), xreal(0))}};
  BasicLiftOptions<xreal> opt;
  opt.tol = 1e-35;
  auto r = lift_path(builtin("zsquared"), g, V(xreal(1), xreal(0)), opt);
  ASSERT_EQ(r.status, LiftStatus::complete);
  EXPECT_LT(to_double(abs(r.lifted.back().x - 2)), 1e-33);
  EXPECT_LE(r.max_residual, 1e-35);
}

TEST(LiftAll, Examples) {
  auto sq = lift_all(builtin("zsquared"), PolyPath{{{1, 0}, {1.1, 0.2}, {1.2, 0.1}}}, square_window(2));
  ASSERT_EQ(sq.lifts.size(), 2u);
  EXPECT_NEAR(sq.lifts[0].lifted.front().x, -1, 1e-9);
  EXPECT_NEAR(sq.lifts[1].lifted.front().x, 1, 1e-9);
  EXPECT_NEAR(sq.min_separation, 2.0, 0.2);

  auto id = lift_all(builtin("identity"), segment({0, 0}, {1, 1}), square_window(2));
  EXPECT_EQ(id.lifts.size(), 1u);

  // Re w sin(Im w) > 0: two preimages z^2 = log(a / sin b) + i b.
  auto f = builtin("ex6-imexp");
  auto ex6 = lift_all(f, PolyPath{{{1, 1}, {1.5, 1.2}, {1.3, 1.6}}}, square_window(3));
  ASSERT_EQ(ex6.lifts.size(), 2u);
  for (const auto& l : ex6.lifts) {
    EXPECT_EQ(l.status, LiftStatus::complete);
    EXPECT_LE(l.max_residual, 1e-10);
    expect_traces(f, l, 1e-10);
  }
  EXPECT_GT(ex6.min_separation, 1e-9);
}

TEST(LiftProperty, PredictorMatchesFiniteDifferences) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.5, 1.5), ang(0, 2 * M_PI);
  for (const char* name : {"ex3-zplusre", "ex4-cubic", "ex6-imexp", "zsquared"}) {
    auto f = builtin(name);
    for (int k = 0; k < 100; ++k) {
      Point z{u(rng), u(rng)};
      auto j = f.jet(z);
      if (std::abs(j.jacobian()) < 1e-2 * std::pow(big_lambda(j), 2)) continue;
      double t = ang(rng);
      Point dgamma{std::cos(t), std::sin(t)};
      Point dz = predictor_step(f, z, dgamma);
      double s = 1e-6 / norm(dz);
      Point actual = f(z + s * dz) - f(z);
      ASSERT_LE(distance(actual, s * dgamma), 1e-3 * s) << name;
    }
  }
}

TEST(LiftProperty, RandomPathsTraceAndRefineStably) {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(-1, 1);
  for (const char* name : {"identity", "zsquared", "ex3-zplusre"}) {
    auto f = builtin(name);
    int complete = 0;
    for (int k = 0; k < 30; ++k) {
      Point z0{1.5 + 0.3 * u(rng), 0.8 * u(rng)};
      PolyPath g{{f(z0)}};
      for (int v = 0; v < 4; ++v) g.vertices.push_back(g.back() + Point{0.3 * u(rng), 0.3 * u(rng)});
      auto r = lift_path(f, g, z0);
      if (r.status != LiftStatus::complete) continue;
      ++complete;
      expect_traces(f, r, 1e-10);
      // Homotopy consistency under vertex insertion.
      PolyPath fine{{g.front()}};
      for (std::size_t i = 1; i < g.size(); ++i) {
        fine.vertices.push_back(0.5 * (g.vertices[i - 1] + g.vertices[i]));
        fine.vertices.push_back(g.vertices[i]);
      }
      auto rf = lift_path(f, fine, z0);
      ASSERT_EQ(rf.status, LiftStatus::complete);
      EXPECT_LE(distance(rf.lifted.back(), r.lifted.back()), 1e-9) << name;
    }
    EXPECT_GT(complete, 10) << name;
  }
}

TEST(LiftProperty, DistinctStartsStayDisjoint) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.4, 0.4);
  auto f = builtin("zsquared");
  for (int k = 0; k < 20; ++k) {
    PolyPath g{{{1.0, 0.5}}};
    for (int v = 0; v < 3; ++v) g.vertices.push_back(g.back() + Point{u(rng), u(rng)});
    auto set = lift_all(f, g, square_window(3));
    ASSERT_EQ(set.lifts.size(), 2u);
    if (set.lifts[0].status == LiftStatus::complete && set.lifts[1].status == LiftStatus::complete)
      EXPECT_GT(set.min_separation, 1e-9);
  }
}
