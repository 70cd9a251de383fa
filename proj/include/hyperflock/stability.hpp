#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hyperflock/flow.hpp"
#include "hyperflock/graph.hpp"
#include "hyperflock/surface.hpp"

namespace hyperflock {

/// Equilibrium tolerance used as the entry precondition of the second-order
/// machinery (per-agent field norm).
inline constexpr double kEquilibriumTol = 1e-8;
/// Tangent eigenvalues below -kTolEig count as genuinely negative; the
/// consensus directions contribute exactly n numerical zeros.
inline constexpr double kTolEig = 1e-7;
/// A configuration with V below this is classified as consensus.
inline constexpr double kConsensusV = 1e-12;

inline void require_equilibrium(const ImplicitSurface& s, const Graph& g,
                                const Configuration& x, double tol = kEquilibriumTol) {
  require_network(g, x);
  std::vector<Vec> f(x.points.size());
  detail::eval_field(s, g, x.points, FieldKind::gradient, f);
  const double r = max_field_norm(f);
  if (r > tol) {
    throw NotEquilibrium("configuration is not an equilibrium: field norm " +
                         std::to_string(r) + " > " + std::to_string(tol), r);
  }
}

/// Multipliers of the constrained first-order conditions,
///   lambda_i = (1/||grad_i c||^2) sum_j a_ij <grad c(x_i), x_j - x_i>,
/// chosen so that sum_j a_ij (x_i - x_j) + lambda_i grad c(x_i) vanishes at
/// an equilibrium.
inline Vec lagrange_multipliers(const ImplicitSurface& s, const Graph& g,
                                const Configuration& x, double tol = kEquilibriumTol) {
  require_equilibrium(s, g, x, tol);
  const int n = g.n_agents();
  Vec lambdas(n);
  for (int i = 0; i < n; ++i) {
    const Vec& xi = x.points[static_cast<size_t>(i)];
    Vec grad = detail::checked_grad(s, xi);
    double acc = 0.0;
    for (const auto& [j, w] : g.neighbors(i)) {
      acc += w * grad.dot(x.points[static_cast<size_t>(j)] - xi);
    }
    lambdas(i) = acc / grad.squaredNorm();
  }
  return lambdas;
}

/// Projected second-order matrix H = Z (hess L) Z of the disagreement
/// function, size (N d) x (N d). The blocks of hess L are
///   (i,i): (sum_j a_ij) I + lambda_i hess c(x_i)
///   (i,k): -a_ik I for neighbors k,
/// and Z is block diagonal with the tangent projectors Z_i = I - n_i n_i^T.
/// H is symmetric and annihilates the per-agent normal directions.
inline Mat projected_hessian(const ImplicitSurface& s, const Graph& g, const Configuration& x,
                             const Vec& lambdas) {
  require_network(g, x);
  const int n = g.n_agents();
  const int d = s.ambient_dim;
  if (lambdas.size() != n) {
    throw DimensionMismatch("projected_hessian: expected " + std::to_string(n) + " multipliers");
  }

  std::vector<Mat> z(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    Vec ni = gauss_map(s, x.points[static_cast<size_t>(i)]);
    z[static_cast<size_t>(i)] = Mat::Identity(d, d) - ni * ni.transpose();
  }

  Mat h = Mat::Zero(n * d, n * d);
  for (int i = 0; i < n; ++i) {
    const Vec& xi = x.points[static_cast<size_t>(i)];
    const Mat& zi = z[static_cast<size_t>(i)];
    double degree = 0.0;
    for (const auto& [j, w] : g.neighbors(i)) {
      degree += w;
      h.block(i * d, j * d, d, d) = -w * zi * z[static_cast<size_t>(j)];
    }
    h.block(i * d, i * d, d, d) = degree * zi + lambdas(i) * zi * s.hess_c(xi) * zi;
  }
  return h;
}

/// Deterministic orthonormal basis of the tangent space at a point with unit
/// normal `normal`: the last d-1 columns of the Householder reflection that
/// maps e_1 to -sign(normal_1) * normal.
inline Mat tangent_basis(const Vec& normal) {
  const int d = static_cast<int>(normal.size());
  const double sign = normal(0) >= 0.0 ? 1.0 : -1.0;
  Vec v = normal;
  v(0) += sign;
  Mat house = Mat::Identity(d, d) - (2.0 / v.squaredNorm()) * v * v.transpose();
  return house.rightCols(d - 1);
}

/// Eigenvalues of H restricted to the tangent bundle: eigs of B^T H B where
/// B stacks per-agent orthonormal tangent bases (N*n values, ascending).
/// Invariant under the basis choice by similarity.
inline std::vector<double> tangent_restricted_eigs(const ImplicitSurface& s,
                                                   const Configuration& x, const Mat& h) {
  const int n = x.n_agents();
  const int d = s.ambient_dim;
  const int nt = d - 1;
  if (h.rows() != n * d || h.cols() != n * d) {
    throw DimensionMismatch("tangent_restricted_eigs: H has wrong size");
  }
  Mat basis = Mat::Zero(n * d, n * nt);
  for (int i = 0; i < n; ++i) {
    basis.block(i * d, i * nt, d, nt) =
        tangent_basis(gauss_map(s, x.points[static_cast<size_t>(i)]));
  }
  Mat restricted = basis.transpose() * h * basis;
  Eigen::SelfAdjointEigenSolver<Mat> solver(0.5 * (restricted + restricted.transpose()));
  const Vec& ev = solver.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + ev.size());
}

/// The d x d matrix M whose quadratic form <u, M u> equals <v, L v> for the
/// stacked tangent vector v = (Z_1 u, ..., Z_N u), L = -H being the flow
/// linearization:
///   M = -sum_i [ lambda_i Z_i hess c(x_i) Z_i + sum_j a_ij (Z_i - Z_i Z_j) ].
/// Perturbing all agents in a common ambient direction u probes the
/// linearization along v; a positive trace of M therefore certifies a
/// positive Rayleigh value, i.e. exponential instability.
inline Mat rayleigh_matrix(const ImplicitSurface& s, const Graph& g, const Configuration& x,
                           const Vec& lambdas) {
  require_network(g, x);
  const int n = g.n_agents();
  const int d = s.ambient_dim;
  if (lambdas.size() != n) {
    throw DimensionMismatch("rayleigh_matrix: expected " + std::to_string(n) + " multipliers");
  }
  std::vector<Mat> z(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    Vec ni = gauss_map(s, x.points[static_cast<size_t>(i)]);
    z[static_cast<size_t>(i)] = Mat::Identity(d, d) - ni * ni.transpose();
  }
  Mat m = Mat::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    const Mat& zi = z[static_cast<size_t>(i)];
    m -= lambdas(i) * zi * s.hess_c(x.points[static_cast<size_t>(i)]) * zi;
    for (const auto& [j, w] : g.neighbors(i)) {
      m -= w * (zi - zi * z[static_cast<size_t>(j)]);
    }
  }
  return m;
}

/// trace M via the matrix construction above. Coincides with the directed
/// weighted sum of pair margins, sum_i sum_{j in N_i} a_ij * margin(x_i, x_j).
inline double rayleigh_trace(const ImplicitSurface& s, const Graph& g, const Configuration& x,
                             const Vec& lambdas) {
  return rayleigh_matrix(s, g, x, lambdas).trace();
}

inline double rayleigh_trace(const ImplicitSurface& s, const Graph& g, const Configuration& x) {
  return rayleigh_trace(s, g, x, lagrange_multipliers(s, g, x));
}

struct DirectedEdgeMargin {
  int i;
  int j;
  double weight;
  double margin;
};

/// Pair margins over directed edges; their weighted sum reproduces trace M.
inline std::vector<DirectedEdgeMargin> directed_edge_margins(const ImplicitSurface& s,
                                                             const Graph& g,
                                                             const Configuration& x) {
  std::vector<DirectedEdgeMargin> out;
  for (int i = 0; i < g.n_agents(); ++i) {
    for (const auto& [j, w] : g.neighbors(i)) {
      out.push_back({i, j, w,
                     pair_margin(s, x.points[static_cast<size_t>(i)],
                                 x.points[static_cast<size_t>(j)])});
    }
  }
  return out;
}

enum class Classification { consensus, exponentially_unstable, inconclusive };

inline std::string to_string(Classification c) {
  switch (c) {
    case Classification::consensus: return "consensus";
    case Classification::exponentially_unstable: return "exponentially_unstable";
    default: return "inconclusive";
  }
}

/// Second-order verdict at an equilibrium.
struct StabilityReport {
  Vec lambdas;
  std::vector<double> hessian_eigs;  // tangent-restricted, ascending, N*n values
  double trace_m = 0.0;
  Classification classification = Classification::inconclusive;
  /// Spectral abscissa of the linearization L = -H on the tangent bundle.
  double spectral_abscissa = 0.0;
  double disagreement_value = 0.0;
  std::vector<DirectedEdgeMargin> margins;
};

/// Assembles multipliers, the projected Hessian spectrum and the trace-M
/// certificate at an equilibrium and classifies it:
///   consensus                if V <= kConsensusV,
///   exponentially_unstable   if min tangent eigenvalue < -tol_eig,
///   inconclusive             otherwise.
inline StabilityReport classify_equilibrium(const ImplicitSurface& s, const Graph& g,
                                            const Configuration& x,
                                            double equilibrium_tol = kEquilibriumTol,
                                            double tol_eig = kTolEig) {
  StabilityReport report;
  report.lambdas = lagrange_multipliers(s, g, x, equilibrium_tol);
  Mat h = projected_hessian(s, g, x, report.lambdas);
  report.hessian_eigs = tangent_restricted_eigs(s, x, h);
  report.trace_m = rayleigh_trace(s, g, x, report.lambdas);
  report.margins = directed_edge_margins(s, g, x);
  report.disagreement_value = disagreement(g, x);
  const double min_eig = *std::min_element(report.hessian_eigs.begin(), report.hessian_eigs.end());
  report.spectral_abscissa = -min_eig;
  if (report.disagreement_value <= kConsensusV) {
    report.classification = Classification::consensus;
  } else if (min_eig < -tol_eig) {
    report.classification = Classification::exponentially_unstable;
  } else {
    report.classification = Classification::inconclusive;
  }
  return report;
}

}  // namespace hyperflock
