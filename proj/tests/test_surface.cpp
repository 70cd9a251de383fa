#include <cmath>

#include <gtest/gtest.h>

#include "hyperflock/sampling.hpp"
#include "hyperflock/surface.hpp"
#include "test_util.hpp"

using namespace hyperflock;
using testutil::fd_gradient;
using testutil::fd_jacobian;

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }

std::vector<ImplicitSurface> builtin_suite() {
  std::vector<ImplicitSurface> out;
  out.push_back(make_sphere(3));
  out.push_back(make_sphere(2));
  Mat a = Mat::Zero(3, 3);
  a.diagonal() << 4.0, 1.0, 1.0;
  out.push_back(make_ellipsoid(a));
  out.push_back(make_quartic(3));
  out.push_back(make_torus(2.0, 0.5));
  return out;
}

}  // namespace

TEST(GaussMap, SphereIsRadial) {
  auto s = make_sphere(3);
  Vec y = v3(1, 0, 0);
  EXPECT_LT((gauss_map(s, y) - y).norm(), 1e-12);
}

TEST(GaussMap, EllipsoidAxisPoint) {
  Mat a = Mat::Zero(2, 2);
  a.diagonal() << 4.0, 1.0;
  auto s = make_ellipsoid(a);
  Vec y = v2(0.0, std::sqrt(2.0));
  ASSERT_NEAR(s.c(y), 0.0, 1e-12);
  EXPECT_LT((gauss_map(s, y) - v2(0, 1)).norm(), 1e-12);
}

TEST(GaussMap, QuarticMatchesFiniteDifferenceGradient) {
  auto s = make_quartic(3);
  Vec y = v3(1, 0, 0);
  EXPECT_LT((gauss_map(s, y) - v3(1, 0, 0)).norm(), 1e-12);
  Vec fd = fd_gradient(s.c, y);
  EXPECT_LT((gauss_map(s, y) - fd / fd.norm()).norm(), 1e-6);
}

TEST(GaussMap, SingularPointThrows) {
  // The quartic gradient vanishes at the origin (off the surface, but the
  // map itself must refuse it).
  auto s = make_quartic(3);
  EXPECT_THROW(gauss_map(s, Vec::Zero(3)), SingularPoint);
}

TEST(TangentProject, SphereExamples) {
  auto s = make_sphere(3);
  Vec y = v3(1, 0, 0);
  EXPECT_LT(tangent_project(s, y, v3(1, 0, 0)).norm(), 1e-12);
  EXPECT_LT((tangent_project(s, y, v3(0, 1, 0)) - v3(0, 1, 0)).norm(), 1e-12);
  Vec p = tangent_project(s, y, v3(2, 3, 0));
  EXPECT_LT((p - v3(0, 3, 0)).norm(), 1e-12);
  EXPECT_NEAR(p.dot(gauss_map(s, y)), 0.0, 1e-12);
}

TEST(TangentProject, OrthogonalAndIdempotentOnAllBuiltins) {
  Rng rng(7);
  std::normal_distribution<double> gauss;
  for (const auto& s : builtin_suite()) {
    for (int k = 0; k < 100; ++k) {
      Vec y = sample_point(s, rng).coords;
      Vec z(s.ambient_dim);
      for (int i = 0; i < s.ambient_dim; ++i) z(i) = 3.0 * gauss(rng);
      Vec p = tangent_project(s, y, z);
      EXPECT_LE(std::abs(p.dot(gauss_map(s, y))), 1e-10 * z.norm()) << s.name;
      EXPECT_LE((tangent_project(s, y, p) - p).norm(), 1e-10 * z.norm()) << s.name;
    }
  }
}

TEST(Retract, SphereRadialProjection) {
  auto s = make_sphere(3);
  RetractOptions opt;
  opt.c_max = 2.0;  // (2,0,0) has c = 1.5, beyond the default capture distance
  Vec z = retract(s, v3(2, 0, 0), opt).coords;
  EXPECT_LT((z - v3(1, 0, 0)).norm(), 1e-9);
}

TEST(Retract, FixedPointOnSurface) {
  auto s = make_sphere(3);
  Vec y = v3(0.6, 0.8, 0);
  EXPECT_EQ(retract(s, y).coords, y);
}

TEST(Retract, OutsideCaptureDistanceThrows) {
  auto s = make_sphere(3);
  EXPECT_THROW(retract(s, v3(2, 0, 0)), RetractionDiverged);
}

TEST(Retract, EllipseNearestPointMatchesBruteForce) {
  Mat a = Mat::Zero(2, 2);
  a.diagonal() << 4.0, 1.0;
  auto s = make_ellipsoid(a);
  Vec target = v2(1, 1);
  RetractOptions opt;
  opt.c_max = 10.0;
  Vec z = retract(s, target, opt).coords;
  Vec oracle = testutil::nearest_on_ellipse(4.0, 1.0, 1.0, target);
  EXPECT_LT((z - oracle).norm(), 1e-4);
}

TEST(Retract, DisplacementParallelToNormal) {
  Rng rng(11);
  std::normal_distribution<double> gauss;
  for (const auto& s : builtin_suite()) {
    for (int k = 0; k < 50; ++k) {
      Vec y = sample_point(s, rng).coords;
      Vec off = y;
      for (int i = 0; i < s.ambient_dim; ++i) off(i) += 0.05 * gauss(rng);
      if (std::abs(s.c(off)) > 0.5) continue;
      Vec z = retract(s, off).coords;
      EXPECT_LE(std::abs(s.c(z)), kTolSurface) << s.name;
      Vec disp = off - z;
      if (disp.norm() > 1e-9) {
        Vec n = gauss_map(s, z);
        double angle = std::asin(std::min(1.0, (disp - n.dot(disp) * n).norm() / disp.norm()));
        EXPECT_LE(angle, 1e-4) << s.name;
      }
      // Idempotence
      EXPECT_LE((retract(s, z).coords - z).norm(), kTolSurface) << s.name;
    }
  }
}

TEST(Derivatives, MatchFiniteDifferencesOnAllBuiltins) {
  Rng rng(13);
  for (const auto& s : builtin_suite()) {
    for (int k = 0; k < 20; ++k) {
      Vec y = sample_point(s, rng).coords;
      Vec g = s.grad_c(y);
      Vec g_fd = fd_gradient(s.c, y);
      EXPECT_LE((g - g_fd).norm(), 1e-5 * std::max(1.0, g.norm())) << s.name;
      Mat h = s.hess_c(y);
      EXPECT_LE((h - h.transpose()).norm(), 1e-12 * std::max(1.0, h.norm())) << s.name;
      Mat h_fd = fd_jacobian(s.grad_c, y);
      EXPECT_LE((h - h_fd).norm(), 1e-5 * std::max(1.0, h.norm())) << s.name;
    }
  }
}

TEST(Builtins, SphereLaplacianAndMembership) {
  auto s = make_sphere(3);
  EXPECT_NEAR(s.c(v3(1, 0, 0)), 0.0, 1e-15);
  EXPECT_NEAR(s.hess_c(v3(1, 0, 0)).trace(), 3.0, 1e-15);
}

TEST(Builtins, EllipsoidCholeskyAxisMembership) {
  Mat a = Mat::Zero(2, 2);
  a.diagonal() << 4.0, 1.0;
  auto s = make_ellipsoid(a);
  // y = A^{-1/2} e scaled to the level set <y, Ay> = 2.
  Vec y = v2(std::sqrt(2.0) / 2.0, 0.0);
  EXPECT_NEAR(s.c(y), 0.0, 1e-12);
}

TEST(Builtins, InvalidParametersThrow) {
  Mat bad = Mat::Zero(2, 2);
  bad.diagonal() << -1.0, 1.0;
  EXPECT_THROW(make_ellipsoid(bad), NotSPD);
  Mat asym(2, 2);
  asym << 1.0, 0.5, 0.0, 1.0;
  EXPECT_THROW(make_ellipsoid(asym), NotSPD);
  EXPECT_THROW(make_torus(0.5, 2.0), InvalidParameter);
  EXPECT_THROW(make_torus(2.0, 0.5, 4), InvalidParameter);
  EXPECT_THROW(make_sphere(1), InvalidParameter);
}

TEST(Builtins, GradientPointsOutward) {
  // Moving a surface point slightly along grad c must increase c (the
  // unbounded region carries the positive sign).
  Rng rng(17);
  for (const auto& s : builtin_suite()) {
    for (int k = 0; k < 20; ++k) {
      Vec y = sample_point(s, rng).coords;
      Vec n = gauss_map(s, y);
      EXPECT_GT(s.c(y + 1e-4 * n), s.c(y)) << s.name;
    }
  }
}

TEST(PairMargin, ZeroAtCoincidentPoints) {
  auto s = make_sphere(3);
  Vec y = v3(1, 0, 0);
  EXPECT_NEAR(pair_margin(s, y, y), 0.0, 1e-10);
}

TEST(PairMargin, SphereClosedForm) {
  // On S^n the margin reduces to (1 - cos t)(n - (1 + cos t)).
  for (int n = 1; n <= 3; ++n) {
    auto s = make_sphere(n + 1);
    Rng rng(100 + n);
    for (int k = 0; k < 100; ++k) {
      Vec y = sample_point(s, rng, 1e-12).coords;
      Vec z = sample_point(s, rng, 1e-12).coords;
      double theta = std::acos(std::clamp(y.dot(z) / (y.norm() * z.norm()), -1.0, 1.0));
      EXPECT_NEAR(pair_margin(s, y, z), testutil::sphere_margin(n, theta), 1e-9);
    }
  }
}

TEST(PairMargin, CircleAtSixtyDegreesIsNegative) {
  auto s = make_sphere(2);
  Vec y = v2(1, 0);
  Vec z = v2(std::cos(M_PI / 3.0), std::sin(M_PI / 3.0));
  EXPECT_NEAR(pair_margin(s, y, z), -0.25, 1e-12);
}

TEST(Sampling, OnSurfaceForAllBuiltins) {
  for (const auto& s : builtin_suite()) {
    Rng rng(42);
    for (int k = 0; k < 200; ++k) {
      Vec y = sample_point(s, rng).coords;
      EXPECT_LE(std::abs(s.c(y)), kTolSurface) << s.name;
    }
  }
}

TEST(Sampling, SphereMeanIsNearZero) {
  auto s = make_sphere(3);
  Rng rng(42);
  Vec mean = Vec::Zero(3);
  const int n = 10000;
  for (int k = 0; k < n; ++k) mean += sample_point(s, rng).coords;
  mean /= static_cast<double>(n);
  EXPECT_LE(mean.norm(), 0.05);
}

TEST(Sampling, Deterministic) {
  auto s = make_torus(2.0, 0.5);
  Rng a(5), b(5);
  for (int k = 0; k < 10; ++k) {
    EXPECT_EQ(sample_point(s, a).coords, sample_point(s, b).coords);
  }
}

TEST(Sampling, FailsCleanlyWhenRayNeverCrosses) {
  // A constraint that stays negative everywhere: the bracketing loop must
  // give up with the typed error instead of spinning.
  ImplicitSurface s;
  s.ambient_dim = 3;
  s.name = "sublevel-only";
  s.c = [](const Vec& y) { return -std::exp(-y.squaredNorm()) - 0.1; };
  s.grad_c = [](const Vec& y) { return Vec(2.0 * std::exp(-y.squaredNorm()) * y); };
  s.hess_c = [](const Vec& y) {
    double e = std::exp(-y.squaredNorm());
    return Mat(2.0 * e * Mat::Identity(3, 3) - 4.0 * e * y * y.transpose());
  };
  s.interior_anchor = (Vec(3) << 0.3, 0.0, 0.0).finished();
  Rng rng(1);
  EXPECT_THROW(sample_point(s, rng), SamplingFailed);
}

TEST(CustomSurface, ShiftedSphereWorksThroughTheStack) {
  // User-supplied surfaces only need the constraint and its derivatives;
  // here a unit sphere centered at p, exercised end to end.
  Vec p = (Vec(3) << 2.0, -1.0, 0.5).finished();
  ImplicitSurface s;
  s.ambient_dim = 3;
  s.name = "shifted-sphere";
  s.c = [p](const Vec& y) { return 0.5 * ((y - p).squaredNorm() - 1.0); };
  s.grad_c = [p](const Vec& y) { return Vec(y - p); };
  s.hess_c = [](const Vec&) { return Mat(Mat::Identity(3, 3)); };
  s.interior_anchor = p;

  Rng rng(2);
  for (int k = 0; k < 50; ++k) {
    Vec y = sample_point(s, rng, 1e-12).coords;
    EXPECT_NEAR((y - p).norm(), 1.0, 1e-11);
  }
  Vec off = p + (Vec(3) << 1.3, 0.0, 0.0).finished();
  EXPECT_LT((retract(s, off).coords - (p + (Vec(3) << 1, 0, 0).finished())).norm(), 1e-9);

  // The pair margin is translation invariant, so the sphere closed form
  // applies with the angle measured from the center.
  Vec y = sample_point(s, rng, 1e-12).coords;
  Vec z = sample_point(s, rng, 1e-12).coords;
  double theta = std::acos(std::clamp((y - p).dot(z - p), -1.0, 1.0));
  EXPECT_NEAR(pair_margin(s, y, z), testutil::sphere_margin(2, theta), 1e-9);
}
