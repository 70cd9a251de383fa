#include <cmath>

#include <gtest/gtest.h>

#include "hyperflock/conditions.hpp"
#include "test_util.hpp"

using namespace hyperflock;

TEST(PairMarginCheck, SphereS2Passes) {
  auto s = make_sphere(3);
  Rng rng(1);
  auto report = check_pair_margin(s, 10000, rng);
  EXPECT_FALSE(report.violated);
  EXPECT_GE(report.min_value, -kMarginTol);
}

TEST(PairMarginCheck, CircleViolates) {
  auto s = make_sphere(2);
  Rng rng(2);
  auto report = check_pair_margin(s, 1000, rng);
  EXPECT_TRUE(report.violated);
  // The worst sampled pair must actually violate when re-evaluated.
  EXPECT_LT(pair_margin(s, report.argmin_y, report.argmin_z), -kMarginTol);
}

TEST(PairMarginCheck, TorusViolates) {
  auto s = make_torus(2.0, 0.5);
  Rng rng(3);
  auto report = check_pair_margin(s, 1000, rng);
  EXPECT_TRUE(report.violated);
}

TEST(PairMarginCheck, QuarticViolatesAtFlatFaces) {
  // The quartic body is convex, but its boundary has quartically flat face
  // centers where the curvature term of the margin vanishes, so pairs with
  // misaligned normals go negative (e.g. y near (1,0,0), z near (0,0,1)).
  auto s = make_quartic(3);
  Rng rng(4);
  auto report = check_pair_margin(s, 1000, rng);
  EXPECT_TRUE(report.violated);
  Vec y = (Vec(3) << 1, 0, 0).finished();
  Vec z = (Vec(3) << 0, 0, 1).finished();
  EXPECT_NEAR(pair_margin(s, y, z), -1.0, 1e-12);
}

TEST(ConvexityCheck, EllipsoidPasses) {
  Mat a = Mat::Zero(3, 3);
  a.diagonal() << 4.0, 1.0, 1.0;
  auto s = make_ellipsoid(a);
  Rng rng(5);
  auto report = check_convexity(s, 1000, rng);
  EXPECT_FALSE(report.violated);
}

TEST(ConvexityCheck, TorusViolates) {
  auto s = make_torus(2.0, 0.5);
  Rng rng(6);
  auto report = check_convexity(s, 1000, rng);
  EXPECT_TRUE(report.violated);
  EXPECT_LT((report.argmin_y - report.argmin_z)
                .dot(s.grad_c(report.argmin_y)),
            -kMarginTol);
}

TEST(ConvexityCheck, QuarticPasses) {
  auto s = make_quartic(3);
  Rng rng(7);
  auto report = check_convexity(s, 1000, rng);
  EXPECT_FALSE(report.violated);
}

TEST(StrongConvexity, SphereS2SitsOnTheGate) {
  auto s = make_sphere(3);
  Rng rng(8);
  auto report = strong_convexity_alpha(s, 10000, rng);
  EXPECT_NEAR(report.m, 1.0, 1e-12);
  EXPECT_NEAR(report.big_m, 1.0, 1e-12);
  EXPECT_NEAR(report.grad_max, 1.0, 1e-9);
  EXPECT_NEAR(report.lipschitz, 1.0, 1e-9);
  EXPECT_NEAR(report.alpha, 2.0, 0.05);
  EXPECT_TRUE(report.passes);
  ASSERT_TRUE(report.exact_alpha.has_value());
  EXPECT_DOUBLE_EQ(*report.exact_alpha, 2.0);
}

TEST(StrongConvexity, CircleFails) {
  auto s = make_sphere(2);
  Rng rng(9);
  auto report = strong_convexity_alpha(s, 2000, rng);
  EXPECT_NEAR(report.alpha, 1.0, 0.05);
  EXPECT_FALSE(report.passes);
}

TEST(StrongConvexity, EllipsoidHessianBoundsAreExact) {
  Mat a = Mat::Zero(4, 4);
  a.diagonal() << 1.2, 1.0, 1.0, 1.0;
  auto s = make_ellipsoid(a);
  Rng rng(10);
  auto report = strong_convexity_alpha(s, 500, rng);
  EXPECT_NEAR(report.m, 1.0, 1e-12);
  EXPECT_NEAR(report.big_m, 1.2, 1e-12);
}

TEST(StrongConvexity, ReportsAreDeterministic) {
  auto s = make_sphere(3);
  Rng a(11), b(11);
  auto ra = strong_convexity_alpha(s, 200, a);
  auto rb = strong_convexity_alpha(s, 200, b);
  EXPECT_EQ(ra.alpha, rb.alpha);
  EXPECT_EQ(ra.lipschitz, rb.lipschitz);
  EXPECT_EQ(ra.grad_max, rb.grad_max);
}

TEST(AngleBound, ClosedFormMinimumMatchesGridSearch) {
  for (double alpha : {0.0, 0.3, 1.0, 1.9, 2.0, 2.5, 5.0}) {
    double grid_min = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 200000; ++k) {
      grid_min = std::min(grid_min, angle_bound(M_PI * k / 200000.0, alpha));
    }
    EXPECT_NEAR(angle_bound_min(alpha), grid_min, 1e-9) << "alpha = " << alpha;
  }
}

TEST(AngleBound, GateAtTwo) {
  // min_theta g(theta, alpha) reaches 1 exactly at alpha >= 2.
  EXPECT_DOUBLE_EQ(angle_bound_min(2.0), 1.0);
  EXPECT_DOUBLE_EQ(angle_bound_min(0.0), 0.0);
  EXPECT_LT(angle_bound_min(1.0), 1.0);
  EXPECT_NEAR(angle_bound_min(1.0), 0.75, 1e-12);
  EXPECT_DOUBLE_EQ(angle_bound_min(3.0), 1.0);
}

TEST(Checks, InvalidSampleCountsThrow) {
  auto s = make_sphere(3);
  Rng rng(12);
  EXPECT_THROW(check_pair_margin(s, 0, rng), InvalidParameter);
  EXPECT_THROW(check_convexity(s, 0, rng), InvalidParameter);
  EXPECT_THROW(strong_convexity_alpha(s, 1, rng), InvalidParameter);
}
