#include "harmap/bloch.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace harmap;

namespace {

// ex2 zeros: e^z = -iy at y = (4k+3) pi/2, x = log y
std::vector<Point> ex2_roots(int n) {
  std::vector<Point> z;
  for (int k = 1; k <= n; ++k) {
    double y = (4 * k + 3) * M_PI / 2;
    z.push_back({std::log(y), y});
  }
  return z;
}

// points on ex1's critical curve x = -y tan y
std::vector<Point> ex1_on_s(int n) {
  std::vector<Point> z;
  for (int k = 1; k <= n; ++k) {
    double y = k * M_PI + 0.3;
    z.push_back({-y * std::tan(y), y});
  }
  return z;
}

const Window ex2_window{-1, 6, 0, 40, 141, 801};
const Window ex1_window{-8, 8, 0, 20, 321, 401};

}  // namespace

TEST(BlochRadii, CghExamples) {
  auto [a, b] = cgh_radii(1);
  EXPECT_DOUBLE_EQ(a, M_PI / 8);
  EXPECT_DOUBLE_EQ(b, M_PI / 16);
  auto [c, d] = cgh_radii(3);
  EXPECT_DOUBLE_EQ(c, M_PI / 16);
  EXPECT_DOUBLE_EQ(d, M_PI / 32);
  double prev = b;
  for (double L = 2; L < 1e6; L *= 3) {
    double r = cgh_radii(L).second;
    EXPECT_LT(r, prev);
    prev = r;
  }
  EXPECT_THROW(cgh_radii(0.5), BlochError);
}

TEST(BlochRadii, QuasiregularExamples) {
  EXPECT_NEAR(bloch_radius_k(1), M_PI / (24 * std::sqrt(2.0)), 1e-15);
  EXPECT_NEAR(bloch_radius_k(1), 0.09255, 2e-5);  // quoted to four figures
  EXPECT_NEAR(bloch_radius_k(2), M_PI / 80, 1e-15);
  EXPECT_THROW(bloch_radius_k(0.9), BlochError);
}

TEST(Certificate, Ex2Passes) {
  auto f = builtin("ex2-bloch");
  auto z = ex2_roots(5);
  auto c = check_conditions(f, z, std::log(2.0) / 2, ex2_window);
  EXPECT_TRUE(c.pass) << (c.violations.empty() ? "" : c.violations[0]);
  EXPECT_LE(c.M, 0.5 + 1e-6);
  EXPECT_LE(c.K, 3 + 1e-6);
  EXPECT_LE(c.j_ratio_sup, 2 + 2 * std::sqrt(2.0) / (3 * M_PI) + 0.05);
  for (int k = 1; k <= 5; ++k) {
    double y = (4 * k + 3) * M_PI / 2;
    EXPECT_NEAR(c.jacobians[k - 1], y * y, 1e-9 * y * y);
  }
}

TEST(Certificate, IdentityIsTrivial) {
  std::vector<Point> z{{1, 0}, {2, 0}, {3, 0}, {4, 0}};
  auto c = check_conditions(builtin("identity"), z, 1, square_window(6, 61));
  EXPECT_TRUE(c.pass);
  EXPECT_EQ(c.M, 0);
  EXPECT_EQ(c.K, 1);
  EXPECT_EQ(c.eta_sq, 1);
  EXPECT_EQ(c.j_ratio_sup, 1);
}

TEST(Certificate, Ex1OnTheCriticalCurveFailsDelta) {
  auto c = check_conditions(builtin("ex1-nono"), ex1_on_s(5), 0.1, ex1_window);
  EXPECT_FALSE(c.pass);
  EXPECT_LE(c.delta, c.delta_floor);
  bool cited = false;
  for (const auto& v : c.violations) cited = cited || v.rfind("delta", 0) == 0;
  EXPECT_TRUE(cited);
}

TEST(Certificate, NegativeJacobianIsAViolationUnlessFixed) {
  auto g = builtin("ex2-bloch").conjugate();
  auto z = ex2_roots(3);
  auto bad = check_conditions(g, z, 0.3, ex2_window);
  EXPECT_FALSE(bad.pass);
  CertifyOptions flip;
  flip.sign_fix = SignFix::conjugate;
  auto good = check_conditions(g, z, 0.3, ex2_window, flip);
  EXPECT_TRUE(good.conjugated);
  EXPECT_TRUE(good.pass);
  CertifyOptions sub;
  sub.sign_fix = SignFix::subsequence;
  auto none = check_conditions(g, z, 0.3, ex2_window, sub);
  EXPECT_TRUE(none.used.empty());
  EXPECT_FALSE(none.pass);
}

TEST(CertificateProperty, AlgebraIsExact) {
  for (double rho : {0.1, 0.2, std::log(2.0) / 2}) {
    auto c = check_conditions(builtin("ex2-bloch"), ex2_roots(4), rho, ex2_window);
    ASSERT_TRUE(c.pass);
    EXPECT_EQ(c.K, (1 + c.M) / (1 - c.M));
    EXPECT_EQ(c.Lambda, c.K * std::sqrt(c.j_ratio_sup));
    EXPECT_EQ(c.r0, M_PI / (8 * (1 + c.Lambda)));
    EXPECT_EQ(c.r1, c.r0 * c.rho * std::sqrt(c.eta_sq) / std::sqrt(c.K));
  }
}

TEST(CertificateProperty, QuasiregularOnTheSampledBalls) {
  auto f = builtin("ex2-bloch");
  auto z = ex2_roots(5);
  CertifyOptions opt;
  auto c = check_conditions(f, z, std::log(2.0) / 2, ex2_window, opt);
  ASSERT_TRUE(c.pass);
  for (const auto& zn : z)
    bloch_detail::for_ball(zn, c.rho, opt.radial, opt.angular, [&](const Point& p) {
      auto w = wirtinger(f, p);
      ASSERT_LE(w.big_lambda * w.big_lambda, c.K * w.jacobian + 1e-9 * w.big_lambda * w.big_lambda);
    });
}

TEST(Schlicht, Ex2CoversTheDisk) {
  auto f = builtin("ex2-bloch");
  auto z = ex2_roots(5);
  auto c = check_conditions(f, z, std::log(2.0) / 2, ex2_window);
  auto r = schlicht_disk_verify(f, z[0], c.rho, c.r1, 15);
  EXPECT_GT(r.total, 100u);
  EXPECT_EQ(r.fraction, 1.0);
  EXPECT_LE(r.max_residual, 1e-8);
}

TEST(Schlicht, IdentityAndAntiTest) {
  auto id = schlicht_disk_verify(builtin("identity"), {3, -1}, 1, 0.5, 11);
  EXPECT_EQ(id.fraction, 1.0);
  auto f = builtin("ex2-bloch");
  auto z = ex2_roots(2);
  auto c = check_conditions(f, z, 0.3, ex2_window);
  auto far = schlicht_disk_verify(f, z[0], c.rho, 10 * c.rho * c.Lambda * wirtinger(f, z[0]).big_lambda, 15);
  EXPECT_LT(far.fraction, 1.0);
}

TEST(Normalized, IdentityIsIdentity) {
  auto f = builtin("identity");
  auto F = normalized_map(f, {2, 5}, 0.7);
  for (Point p : {Point{0.3, -0.2}, Point{-0.9, 0.1}, Point{0, 0}}) EXPECT_LE(distance(F(p), p), 1e-14);
}

TEST(Normalized, UnitStretchAndJacobian) {
  for (const char* name : {"ex2-bloch", "ex3-zplusre", "ex6-imexp"}) {
    auto f = builtin(name);
    Point zn{0.7, 1.3};
    auto F = normalized_map(f, zn, 0.4);
    auto w0 = wirtinger_from_jet(F.jet({0, 0}));
    EXPECT_LE(norm(F({0, 0})), 1e-10);
    EXPECT_NEAR(w0.small_lambda, 1, 1e-10) << name;
    auto wf = wirtinger(f, zn);
    EXPECT_NEAR(w0.jacobian, wf.jacobian / (wf.small_lambda * wf.small_lambda), 1e-10 * std::abs(w0.jacobian)) << name;
  }
  EXPECT_THROW(normalized_map(builtin("zsquared"), {0, 0}, 1), BlochError);
}

TEST(Diagnose, Ex2HoldsNone) {
  auto d = diagnose_sequence(builtin("ex2-bloch"), ex2_roots(5), {0.1, std::log(2.0) / 2}, ex2_window);
  EXPECT_TRUE(d.images_converge);
  for (const auto& c : d.conditions) EXPECT_FALSE(c.holds) << c.detail;
  EXPECT_TRUE(d.certificates.back().pass);
}

TEST(Diagnose, Ex1OnTheCriticalCurveFlagsDistance) {
  auto d = diagnose_sequence(builtin("ex1-nono"), ex1_on_s(6), {0.1, 0.3}, ex1_window);
  EXPECT_TRUE(d.conditions[0].holds);
}

TEST(Diagnose, IdentityIsVacuous) {
  std::vector<Point> z{{1, 0}, {2, 0}, {3, 0}, {4, 0}, {5, 0}};
  auto d = diagnose_sequence(builtin("identity"), z, {0.5}, square_window(6, 61));
  for (const auto& c : d.conditions) EXPECT_FALSE(c.holds);
  EXPECT_FALSE(d.images_converge);
  ASSERT_FALSE(d.notes.empty());
  EXPECT_NE(d.notes[0].find("vacuous"), std::string::npos);
}
