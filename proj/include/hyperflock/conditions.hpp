#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "hyperflock/sampling.hpp"
#include "hyperflock/surface.hpp"

namespace hyperflock {

inline constexpr double kMarginTol = 1e-10;

/// Monte Carlo relaxation of a pointwise two-point condition: the smallest
/// sampled value, where it was attained, and whether it dipped below the
/// violation tolerance.
struct MarginReport {
  long n_pairs = 0;
  double min_value = 0.0;
  Vec argmin_y;
  Vec argmin_z;
  bool violated = false;
};

/// Samples the pair margin (see pair_margin) over n_pairs random surface
/// pairs plus the coincident pairs (y, y), which must sit at zero. A
/// negative minimum beyond kMarginTol refutes the inequality on this
/// surface.
inline MarginReport check_pair_margin(const ImplicitSurface& s, long n_pairs, Rng& rng) {
  if (n_pairs < 1) throw InvalidParameter("check_pair_margin: need n_pairs >= 1");
  MarginReport report;
  report.n_pairs = n_pairs;
  report.min_value = std::numeric_limits<double>::infinity();
  auto consider = [&](double value, const Vec& y, const Vec& z) {
    if (value < report.min_value) {
      report.min_value = value;
      report.argmin_y = y;
      report.argmin_z = z;
    }
  };
  for (long k = 0; k < n_pairs; ++k) {
    Vec y = sample_point(s, rng).coords;
    Vec z = sample_point(s, rng).coords;
    consider(pair_margin(s, y, z), y, z);
    consider(pair_margin(s, y, y), y, y);
  }
  report.violated = report.min_value < -kMarginTol;
  return report;
}

/// Supporting-halfspace test <y - z, grad c(y)> >= 0 over sampled pairs;
/// violations certify that the enclosed body is not convex.
inline MarginReport check_convexity(const ImplicitSurface& s, long n_pairs, Rng& rng) {
  if (n_pairs < 1) throw InvalidParameter("check_convexity: need n_pairs >= 1");
  MarginReport report;
  report.n_pairs = n_pairs;
  report.min_value = std::numeric_limits<double>::infinity();
  for (long k = 0; k < n_pairs; ++k) {
    Vec y = sample_point(s, rng).coords;
    Vec z = sample_point(s, rng).coords;
    double value = (y - z).dot(detail::checked_grad(s, y));
    if (value < report.min_value) {
      report.min_value = value;
      report.argmin_y = y;
      report.argmin_z = z;
    }
  }
  report.violated = report.min_value < -kMarginTol;
  return report;
}

/// g(theta, alpha) = cos^2 theta + alpha (1 - cos theta): the worst-case
/// two-point bound as a function of the normal angle. For alpha in [0, 2)
/// the interior critical point cos theta = alpha/2 yields the minimum
/// alpha - alpha^2/4 < 1; for alpha >= 2 the minimum is 1 (at theta = 0),
/// so the bound g >= 1 holds over [0, pi] exactly when alpha >= 2.
inline double angle_bound(double theta, double alpha) {
  const double c = std::cos(theta);
  return c * c + alpha * (1.0 - c);
}

inline double angle_bound_min(double alpha) {
  double best = std::min(1.0, 1.0 + 2.0 * alpha);  // endpoints theta = 0, pi
  if (std::abs(alpha) <= 2.0) best = std::min(best, alpha - 0.25 * alpha * alpha);
  return best;
}

/// Sampled strong-convexity constants and the ratio
///   alpha = m ((n+1) m - M) / (L K)^2,
/// whose value >= 2 is the sufficient gate implying the pair-margin
/// inequality. m/M bound the constraint Hessian, K the gradient norm, and L
/// is the Gauss-map Lipschitz quotient maximized over sampled pairs (a lower
/// estimate of the true constant, making alpha an optimistic upper
/// estimate; exact constants are attached for surfaces where they are
/// known).
struct StrongConvexityReport {
  long n_samples = 0;
  double m = 0.0;
  double big_m = 0.0;
  double lipschitz = 0.0;  // sampled lower estimate of L
  double grad_max = 0.0;   // K
  double alpha = 0.0;
  bool passes = false;
  /// Relative slack applied to the alpha >= 2 gate so that surfaces sitting
  /// exactly on the boundary are not flipped by sampling noise.
  double gate_rtol = 1e-9;
  std::optional<double> exact_lipschitz;
  std::optional<double> exact_alpha;
};

inline StrongConvexityReport strong_convexity_alpha(const ImplicitSurface& s, long n_samples,
                                                    Rng& rng) {
  if (n_samples < 2) throw InvalidParameter("strong_convexity_alpha: need n_samples >= 2");
  StrongConvexityReport report;
  report.n_samples = n_samples;

  std::vector<Vec> pts;
  pts.reserve(static_cast<size_t>(n_samples));
  // Tight retraction so the constants are not polluted by surface noise.
  for (long k = 0; k < n_samples; ++k) pts.push_back(sample_point(s, rng, 1e-12).coords);

  double m = std::numeric_limits<double>::infinity();
  double big_m = -std::numeric_limits<double>::infinity();
  double grad_max = 0.0;
  Eigen::SelfAdjointEigenSolver<Mat> solver;
  for (const Vec& y : pts) {
    solver.compute(s.hess_c(y), Eigen::EigenvaluesOnly);
    m = std::min(m, solver.eigenvalues().minCoeff());
    big_m = std::max(big_m, solver.eigenvalues().maxCoeff());
    grad_max = std::max(grad_max, s.grad_c(y).norm());
  }

  // Lipschitz quotient over consecutive and random pairs.
  double lipschitz = 0.0;
  std::uniform_int_distribution<size_t> pick(0, pts.size() - 1);
  auto quotient = [&](const Vec& y, const Vec& z) {
    const double dist = (y - z).norm();
    if (dist < 1e-12) return 0.0;
    return (gauss_map(s, y) - gauss_map(s, z)).norm() / dist;
  };
  for (size_t k = 0; k + 1 < pts.size(); ++k) {
    lipschitz = std::max(lipschitz, quotient(pts[k], pts[k + 1]));
  }
  for (long k = 0; k < n_samples; ++k) {
    lipschitz = std::max(lipschitz, quotient(pts[pick(rng)], pts[pick(rng)]));
  }

  report.m = m;
  report.big_m = big_m;
  report.grad_max = grad_max;
  report.lipschitz = lipschitz;
  const double lk = lipschitz * grad_max;
  report.alpha = lk > 0.0 ? m * (s.ambient_dim * m - big_m) / (lk * lk)
                          : std::numeric_limits<double>::infinity();
  report.passes = report.alpha >= 2.0 * (1.0 - report.gate_rtol);

  if (s.name.rfind("sphere", 0) == 0) {
    // On the unit sphere the Gauss map is the identity: L = 1 exactly.
    report.exact_lipschitz = 1.0;
    report.exact_alpha = static_cast<double>(s.ambient_dim) - 1.0;
  }
  return report;
}

}  // namespace hyperflock
