#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "hyperflock/errors.hpp"

namespace hyperflock {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// A closed hypersurface M = { y in R^d : c(y) = 0 }, d = n+1, described by
/// its scalar constraint c together with analytic first and second
/// derivatives. The gradient points toward the unbounded region, so the
/// enclosed body is the sublevel set { c < 0 }.
///
/// Instances are immutable after construction and safe to share across
/// threads; every operation below is a pure function of its arguments.
struct ImplicitSurface {
  int ambient_dim = 0;  // d; manifold dimension is n = d - 1
  std::function<double(const Vec&)> c;
  std::function<Vec(const Vec&)> grad_c;
  std::function<Mat(const Vec&)> hess_c;
  std::string name;

  /// A point with c < 0, used to anchor ray sampling. All built-ins are
  /// closed surfaces around their anchor.
  Vec interior_anchor;

  /// Gradient norms below this are treated as singular.
  double eps_sing = 1e-8;

  int manifold_dim() const { return ambient_dim - 1; }
};

/// A point satisfying |c(coords)| <= tol_surface. Produced by the checked
/// constructors below (retract, sample_point, validation of user input).
struct SurfacePoint {
  Vec coords;
};

inline constexpr double kTolSurface = 1e-9;

namespace detail {

inline Vec checked_grad(const ImplicitSurface& s, const Vec& y) {
  Vec g = s.grad_c(y);
  if (g.norm() < s.eps_sing) {
    throw SingularPoint("gradient of " + s.name +
                        " is numerically zero at the requested point");
  }
  return g;
}

}  // namespace detail

/// Outward unit normal n(y) = grad c(y) / ||grad c(y)||.
inline Vec gauss_map(const ImplicitSurface& s, const Vec& y) {
  Vec g = detail::checked_grad(s, y);
  return g / g.norm();
}

/// Orthogonal projection of z onto the tangent space at y:
/// (I - n n^T) z. Idempotent and orthogonal to grad c(y).
inline Vec tangent_project(const ImplicitSurface& s, const Vec& y, const Vec& z) {
  if (z.size() != s.ambient_dim) {
    throw DimensionMismatch("tangent_project: vector dimension " +
                            std::to_string(z.size()) + " != ambient dimension " +
                            std::to_string(s.ambient_dim));
  }
  Vec n = gauss_map(s, y);
  return z - n.dot(z) * n;
}

struct RetractOptions {
  double tol = kTolSurface;
  int max_iter = 50;
  /// Capture distance: |c(y_off)| must not exceed this.
  double c_max = 0.5;
};

/// Nearest-point projection onto the surface. The minimizer z of
/// ||y_off - z|| over M satisfies y_off - z = lambda * grad c(z). A
/// normal-flow sweep brings the iterate onto the surface; for displacements
/// above 1e-6 a Newton polish on (z, lambda) then enforces stationarity, so
/// the displacement is parallel to the normal at the result.
inline SurfacePoint retract(const ImplicitSurface& s, const Vec& y_off,
                            const RetractOptions& opt = {}) {
  const double c0 = s.c(y_off);
  if (std::abs(c0) > opt.c_max) {
    throw RetractionDiverged("retract: point with |c| = " + std::to_string(std::abs(c0)) +
                             " is outside the capture distance " + std::to_string(opt.c_max));
  }
  if (std::abs(c0) <= opt.tol) return SurfacePoint{y_off};

  const int d = s.ambient_dim;
  Vec z = y_off;
  int iter = 0;

  // Normal flow: z <- z - (c / ||grad c||^2) grad c. Quadratic once close.
  double cz = c0;
  while (std::abs(cz) > opt.tol) {
    if (++iter > opt.max_iter) {
      throw RetractionDiverged("retract: no convergence after " +
                               std::to_string(opt.max_iter) + " iterations, |c| = " +
                               std::to_string(std::abs(cz)));
    }
    Vec g = detail::checked_grad(s, z);
    z -= (cz / g.squaredNorm()) * g;
    cz = s.c(z);
  }

  // Stationarity polish: Newton on F(z, lambda) = (z + lambda grad c(z) - y_off, c(z)).
  // Skipped for tiny displacements, where the normal flow is already
  // parallel to the local normal far beyond the required accuracy.
  const double disp = (y_off - z).norm();
  if (disp > 1e-6) {
    Vec g = detail::checked_grad(s, z);
    double lambda = g.dot(y_off - z) / g.squaredNorm();
    Eigen::MatrixXd jac(d + 1, d + 1);
    Eigen::VectorXd rhs(d + 1), step(d + 1);
    for (; iter <= opt.max_iter; ++iter) {
      g = detail::checked_grad(s, z);
      cz = s.c(z);
      Vec res = z + lambda * g - y_off;
      if (res.norm() <= opt.tol * (1.0 + y_off.norm()) && std::abs(cz) <= opt.tol) {
        return SurfacePoint{z};
      }
      jac.topLeftCorner(d, d) = Mat::Identity(d, d) + lambda * s.hess_c(z);
      jac.topRightCorner(d, 1) = g;
      jac.bottomLeftCorner(1, d) = g.transpose();
      jac(d, d) = 0.0;
      rhs.head(d) = -res;
      rhs(d) = -cz;
      step = jac.partialPivLu().solve(rhs);
      z += step.head(d);
      lambda += step(d);
    }
    throw RetractionDiverged("retract: stationarity polish did not converge");
  }
  return SurfacePoint{z};
}

/// Margin of the pairwise normal-alignment inequality
///
///   <n(y), n(z)>^2
///     + <y - z, grad c(y)> (lap c(y) - <n(y), hess c(y) n(y)>) / ||grad c(y)||^2
///   >= 1,
///
/// returned as LHS - 1 (lap c = trace of the Euclidean Hessian).
/// Nonnegativity of this margin over all surface pairs is the sufficient
/// condition under which every non-consensus equilibrium of the consensus
/// flow is exponentially unstable, making the consensus manifold almost
/// globally attractive. The margin vanishes at y = z.
inline double pair_margin(const ImplicitSurface& s, const Vec& y, const Vec& z) {
  Vec gy = detail::checked_grad(s, y);
  Vec gz = detail::checked_grad(s, z);
  Vec ny = gy / gy.norm();
  Vec nz = gz / gz.norm();
  Mat hy = s.hess_c(y);
  double lap = hy.trace();
  double normal_curv = ny.dot(hy * ny);
  double align = ny.dot(nz);
  return align * align +
         (y - z).dot(gy) * (lap - normal_curv) / gy.squaredNorm() - 1.0;
}

// ---------------------------------------------------------------------------
// Built-in surfaces
// ---------------------------------------------------------------------------

/// Unit sphere S^{d-1}: c(y) = (||y||^2 - 1) / 2, grad c = y, hess c = I.
inline ImplicitSurface make_sphere(int d) {
  if (d < 2) throw InvalidParameter("sphere: ambient dimension must be >= 2");
  ImplicitSurface s;
  s.ambient_dim = d;
  s.name = "sphere(d=" + std::to_string(d) + ")";
  s.c = [](const Vec& y) { return 0.5 * (y.squaredNorm() - 1.0); };
  s.grad_c = [](const Vec& y) { return y; };
  s.hess_c = [d](const Vec&) { return Mat::Identity(d, d); };
  s.interior_anchor = Vec::Zero(d);
  return s;
}

/// Ellipsoid c(y) = <y, A y>/2 - level, A symmetric positive definite.
/// level = 1 gives the quadratic form <y, Ay> = 2; level = 1/2 gives the
/// normalization <y, Ay> = 1 used by the sphere-equivalence construction.
inline ImplicitSurface make_ellipsoid(const Mat& A, double level = 1.0) {
  const int d = static_cast<int>(A.rows());
  if (A.cols() != d || d < 2) throw InvalidParameter("ellipsoid: A must be square, d >= 2");
  if (!A.isApprox(A.transpose(), 1e-12)) throw NotSPD("ellipsoid: A is not symmetric");
  Eigen::LLT<Mat> llt(A);
  if (llt.info() != Eigen::Success) throw NotSPD("ellipsoid: A is not positive definite");
  if (level <= 0.0) throw InvalidParameter("ellipsoid: level must be positive");
  ImplicitSurface s;
  s.ambient_dim = d;
  s.name = "ellipsoid(d=" + std::to_string(d) + ")";
  s.c = [A, level](const Vec& y) { return 0.5 * y.dot(A * y) - level; };
  s.grad_c = [A](const Vec& y) { return Vec(A * y); };
  s.hess_c = [A](const Vec&) { return A; };
  s.interior_anchor = Vec::Zero(d);
  return s;
}

/// Quartic surface c(y) = sum_i y_i^4 - 1. The enclosed body is convex but
/// the boundary has quartically flat face centers where the second
/// fundamental form vanishes.
inline ImplicitSurface make_quartic(int d) {
  if (d < 2) throw InvalidParameter("quartic: ambient dimension must be >= 2");
  ImplicitSurface s;
  s.ambient_dim = d;
  s.name = "quartic(d=" + std::to_string(d) + ")";
  s.c = [](const Vec& y) { return y.array().pow(4).sum() - 1.0; };
  s.grad_c = [](const Vec& y) { return Vec(4.0 * y.array().pow(3)); };
  s.hess_c = [d](const Vec& y) {
    Mat h = Mat::Zero(d, d);
    h.diagonal() = 12.0 * y.array().square();
    return h;
  };
  s.interior_anchor = Vec::Zero(d);
  return s;
}

/// Torus of revolution about the y3 axis, polynomial form
///   c(y) = (||y||^2 + R^2 - r^2)^2 - 4 R^2 (y1^2 + y2^2),
/// which is smooth on all of R^3 (no square roots). Requires 0 < r < R and
/// d = 3. Multiply connected: the standard negative test case for the
/// pairwise margin and convexity checks.
inline ImplicitSurface make_torus(double R, double r, int d = 3) {
  if (d != 3) throw InvalidParameter("torus: only ambient dimension 3 is supported");
  if (!(r > 0.0 && r < R)) throw InvalidParameter("torus: need 0 < r < R");
  ImplicitSurface s;
  s.ambient_dim = 3;
  s.name = "torus(R=" + std::to_string(R) + ",r=" + std::to_string(r) + ")";
  const double k = R * R - r * r;
  s.c = [R, k](const Vec& y) {
    double u = y.squaredNorm() + k;
    return u * u - 4.0 * R * R * (y(0) * y(0) + y(1) * y(1));
  };
  s.grad_c = [R, k](const Vec& y) {
    double u = y.squaredNorm() + k;
    Vec g = 4.0 * u * y;
    g(0) -= 8.0 * R * R * y(0);
    g(1) -= 8.0 * R * R * y(1);
    return g;
  };
  s.hess_c = [R, k](const Vec& y) {
    double u = y.squaredNorm() + k;
    Mat h = 8.0 * y * y.transpose() + 4.0 * u * Mat::Identity(3, 3);
    h(0, 0) -= 8.0 * R * R;
    h(1, 1) -= 8.0 * R * R;
    return h;
  };
  s.interior_anchor = (Vec(3) << R, 0.0, 0.0).finished();
  return s;
}

}  // namespace hyperflock
