#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hyperflock/graph.hpp"
#include "hyperflock/surface.hpp"

namespace hyperflock {

/// The joint state of the network: one ambient-space point per agent, each
/// expected to satisfy the surface constraint.
struct Configuration {
  std::vector<Vec> points;

  int n_agents() const { return static_cast<int>(points.size()); }
};

/// Throws unless every agent satisfies |c| <= tol.
inline void require_on_surface(const ImplicitSurface& s, const Configuration& x,
                               double tol = kTolSurface) {
  for (size_t i = 0; i < x.points.size(); ++i) {
    if (static_cast<int>(x.points[i].size()) != s.ambient_dim) {
      throw DimensionMismatch("configuration: agent " + std::to_string(i) +
                              " has dimension " + std::to_string(x.points[i].size()) +
                              ", surface has " + std::to_string(s.ambient_dim));
    }
    double ci = s.c(x.points[i]);
    if (std::abs(ci) > tol) {
      throw NotOnSurface("configuration: agent " + std::to_string(i) +
                         " is off the surface, |c| = " + std::to_string(std::abs(ci)));
    }
  }
}

/// Shared precondition of the flow and stability entry points: a consistent
/// configuration over a connected graph with at least two agents.
inline void require_network(const Graph& g, const Configuration& x) {
  if (g.n_agents() < 2) {
    throw InvalidParameter("flow: need at least two agents");
  }
  if (!is_connected(g)) {
    throw InvalidParameter("flow: the interaction graph must be connected");
  }
  if (x.n_agents() != g.n_agents()) {
    throw DimensionMismatch("flow: configuration has " + std::to_string(x.n_agents()) +
                            " agents, graph has " + std::to_string(g.n_agents()));
  }
}

/// Disagreement function V(x) = 1/2 sum_{{i,j} in E} a_ij ||x_j - x_i||^2.
/// Zero exactly on the consensus set.
inline double disagreement(const Graph& g, const Configuration& x) {
  if (x.n_agents() != g.n_agents()) {
    throw DimensionMismatch("disagreement: configuration/graph size mismatch");
  }
  double v = 0.0;
  for (const auto& e : g.edges()) {
    v += 0.5 * e.weight *
         (x.points[static_cast<size_t>(e.j)] - x.points[static_cast<size_t>(e.i)]).squaredNorm();
  }
  return v;
}

enum class FieldKind { gradient, zhu };

inline std::string to_string(FieldKind k) {
  return k == FieldKind::gradient ? "gradient" : "zhu";
}

namespace detail {

/// Projected consensus field, written into `out`:
///   gradient:  dx_i = (I - n_i n_i^T) sum_j a_ij (x_j - x_i)
///   zhu:       dx_i = (I - x_i grad_c(x_i)^T / <x_i, grad_c(x_i)>) sum_j a_ij (x_j - x_i)
/// Both outputs are tangent: the oblique projector also annihilates grad c.
inline void eval_field(const ImplicitSurface& s, const Graph& g,
                       const std::vector<Vec>& pts, FieldKind kind,
                       std::vector<Vec>& out) {
  const int n = g.n_agents();
  for (int i = 0; i < n; ++i) {
    const Vec& xi = pts[static_cast<size_t>(i)];
    Vec& vi = out[static_cast<size_t>(i)];
    vi.setZero(s.ambient_dim);
    for (const auto& [j, w] : g.neighbors(i)) {
      vi += w * (pts[static_cast<size_t>(j)] - xi);
    }
    Vec grad = s.grad_c(xi);
    const double gn2 = grad.squaredNorm();
    if (gn2 < s.eps_sing * s.eps_sing) {
      throw SingularPoint("field: singular constraint gradient at agent " + std::to_string(i));
    }
    if (kind == FieldKind::gradient) {
      vi -= (grad.dot(vi) / gn2) * grad;
    } else {
      const double denom = xi.dot(grad);
      if (std::abs(denom) < 1e-6 * xi.norm() * std::sqrt(gn2)) {
        throw TransversalityViolated("zhu field: <x, grad c(x)> is numerically zero at agent " +
                                     std::to_string(i));
      }
      vi -= (grad.dot(vi) / denom) * xi;
    }
  }
}

}  // namespace detail

/// dx_i = -(Pi_i grad_i V): the projected consensus field.
inline std::vector<Vec> gradient_field(const ImplicitSurface& s, const Graph& g,
                                       const Configuration& x) {
  require_network(g, x);
  std::vector<Vec> out(x.points.size());
  detail::eval_field(s, g, x.points, FieldKind::gradient, out);
  return out;
}

/// The obliquely projected consensus field. Requires <x, grad c(x)> != 0 in
/// addition to nonsingularity; coincides with gradient_field on spheres,
/// where grad c(x) is parallel to x.
inline std::vector<Vec> zhu_field(const ImplicitSurface& s, const Graph& g,
                                  const Configuration& x) {
  require_network(g, x);
  std::vector<Vec> out(x.points.size());
  detail::eval_field(s, g, x.points, FieldKind::zhu, out);
  return out;
}

inline double max_field_norm(const std::vector<Vec>& field) {
  double m = 0.0;
  for (const Vec& v : field) m = std::max(m, v.norm());
  return m;
}

/// True iff the chosen field vanishes at x up to `tol` (per-agent norm).
inline bool is_equilibrium(const ImplicitSurface& s, const Graph& g, const Configuration& x,
                           double tol, FieldKind kind = FieldKind::gradient) {
  require_network(g, x);
  std::vector<Vec> f(x.points.size());
  detail::eval_field(s, g, x.points, kind, f);
  return max_field_norm(f) <= tol;
}

struct FlowParams {
  double dt = 1e-2;
  double t_end = 100.0;
  /// Record one sample every this many steps (the final state is always
  /// recorded).
  int record_every = 1;
  double retraction_tol = 1e-12;
  /// Early-exit thresholds. A run is declared converged to consensus when
  /// V < v_threshold or the field norm drops below field_threshold.
  double v_threshold = 1e-8;
  double field_threshold = 1e-10;

  void validate() const {
    if (!(dt > 0.0)) throw InvalidParameter("flow params: dt must be positive");
    if (!(t_end > 0.0)) throw InvalidParameter("flow params: t_end must be positive");
    if (record_every < 1) throw InvalidParameter("flow params: record_every must be >= 1");
    if (!(retraction_tol > 0.0)) throw InvalidParameter("flow params: retraction tol must be positive");
  }
};

enum class Termination { horizon, consensus, equilibrium };

inline std::string to_string(Termination t) {
  switch (t) {
    case Termination::horizon: return "horizon";
    case Termination::consensus: return "consensus";
    default: return "equilibrium";
  }
}

/// Time-sampled solution with diagnostics. `disagreement[k]` is V at
/// `times[k]`; drift is the worst |c| seen over all agents and steps before
/// the per-step retraction pulled the state back onto the surface.
struct Trajectory {
  std::vector<double> times;
  std::vector<Configuration> states;
  std::vector<double> disagreement;
  double max_constraint_drift = 0.0;
  /// Worst single-step increase of V over the whole run (integration noise;
  /// the continuous gradient flow is monotone).
  double max_v_increase = 0.0;
  /// True iff the run reached consensus (V below v_threshold). A run may
  /// also stop early at a non-consensus equilibrium (field norm below
  /// field_threshold); that is reported as Termination::equilibrium with
  /// converged = false.
  bool converged = false;
  Termination termination = Termination::horizon;
  double final_field_norm = 0.0;
  long n_steps = 0;
};

/// Integrates the chosen consensus field with the classical 4th-order
/// Runge-Kutta scheme in ambient coordinates; every completed step is
/// followed by a nearest-point retraction of each agent, so recorded states
/// satisfy |c| <= retraction_tol. Stops early once the convergence
/// thresholds in `params` are met.
inline Trajectory integrate(const ImplicitSurface& s, const Graph& g, const Configuration& x0,
                            const FlowParams& params, FieldKind kind = FieldKind::gradient) {
  params.validate();
  require_network(g, x0);
  require_on_surface(s, x0, 10.0 * params.retraction_tol + kTolSurface);

  const int n = g.n_agents();
  const long total_steps = static_cast<long>(std::ceil(params.t_end / params.dt - 1e-12));

  Trajectory traj;
  RetractOptions ropt;
  ropt.tol = params.retraction_tol;

  std::vector<Vec> x = x0.points;
  for (Vec& p : x) p = retract(s, p, ropt).coords;
  std::vector<Vec> k1(n), k2(n), k3(n), k4(n), stage(n);
  for (int i = 0; i < n; ++i) stage[static_cast<size_t>(i)].resize(s.ambient_dim);

  auto record = [&](double t, double v) {
    traj.times.push_back(t);
    traj.states.push_back(Configuration{x});
    traj.disagreement.push_back(v);
  };

  double v_prev = disagreement(g, Configuration{x});
  for (long step = 0;; ++step) {
    const double t = static_cast<double>(step) * params.dt;
    detail::eval_field(s, g, x, kind, k1);
    const double fnorm = max_field_norm(k1);
    const double v = disagreement(g, Configuration{x});
    if (step > 0) traj.max_v_increase = std::max(traj.max_v_increase, v - v_prev);
    v_prev = v;

    const bool due = (step % params.record_every == 0);
    const bool consensus = v < params.v_threshold;
    const bool stalled = fnorm < params.field_threshold;
    const bool last = (step == total_steps) || consensus || stalled;
    if (due || last) record(t, v);

    if (last) {
      traj.converged = consensus;
      traj.termination = consensus ? Termination::consensus
                                   : (stalled ? Termination::equilibrium : Termination::horizon);
      traj.final_field_norm = fnorm;
      traj.n_steps = step;
      return traj;
    }

    const double h = params.dt;
    for (int i = 0; i < n; ++i)
      stage[static_cast<size_t>(i)] = x[static_cast<size_t>(i)] + 0.5 * h * k1[static_cast<size_t>(i)];
    detail::eval_field(s, g, stage, kind, k2);
    for (int i = 0; i < n; ++i)
      stage[static_cast<size_t>(i)] = x[static_cast<size_t>(i)] + 0.5 * h * k2[static_cast<size_t>(i)];
    detail::eval_field(s, g, stage, kind, k3);
    for (int i = 0; i < n; ++i)
      stage[static_cast<size_t>(i)] = x[static_cast<size_t>(i)] + h * k3[static_cast<size_t>(i)];
    detail::eval_field(s, g, stage, kind, k4);
    for (int i = 0; i < n; ++i) {
      auto ui = static_cast<size_t>(i);
      x[ui] += (h / 6.0) * (k1[ui] + 2.0 * k2[ui] + 2.0 * k3[ui] + k4[ui]);
      traj.max_constraint_drift = std::max(traj.max_constraint_drift, std::abs(s.c(x[ui])));
      x[ui] = retract(s, x[ui], ropt).coords;
    }
  }
}

/// Maps an ellipsoid configuration (<y, A y> = quad_norm for every agent)
/// onto the unit sphere via z = L^T y / sqrt(quad_norm), A = L L^T. Because
/// the consensus field is linear in the chordal offsets, this conjugates the
/// obliquely projected flow on the ellipsoid with the projected gradient
/// flow on the unit sphere.
inline Configuration cholesky_pullback(const Mat& A, const Configuration& x,
                                       double quad_norm = 1.0, double tol = 1e-9) {
  if (!A.isApprox(A.transpose(), 1e-12)) throw NotSPD("cholesky_pullback: A is not symmetric");
  Eigen::LLT<Mat> llt(A);
  if (llt.info() != Eigen::Success) throw NotSPD("cholesky_pullback: A is not positive definite");
  if (!(quad_norm > 0.0)) throw InvalidParameter("cholesky_pullback: quad_norm must be positive");
  const Mat L = llt.matrixL();
  Configuration z;
  z.points.reserve(x.points.size());
  const double scale = 1.0 / std::sqrt(quad_norm);
  for (size_t i = 0; i < x.points.size(); ++i) {
    const Vec& y = x.points[i];
    const double q = y.dot(A * y);
    if (std::abs(q - quad_norm) > tol * std::max(1.0, quad_norm)) {
      throw NotOnSurface("cholesky_pullback: agent " + std::to_string(i) +
                         " has <y, Ay> = " + std::to_string(q) + ", expected " +
                         std::to_string(quad_norm));
    }
    z.points.push_back(scale * (L.transpose() * y));
  }
  return z;
}

}  // namespace hyperflock
