#pragma once

#include <algorithm>
#include <atomic>
#include <climits>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <thread>
#include <vector>

#include "hyperflock/conditions.hpp"
#include "hyperflock/config.hpp"
#include "hyperflock/flow.hpp"
#include "hyperflock/io.hpp"
#include "hyperflock/sampling.hpp"
#include "hyperflock/stability.hpp"

namespace hyperflock {

// Experiment drivers shared by the CLI and the test suites. Each writes its
// report(s) under `out_dir` and returns the machine-readable exit code:
//   0 pass, 1 condition violated, 2 config error, 3 numerical failure,
//   4 not an equilibrium.

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int violated = 1;
inline constexpr int config_error = 2;
inline constexpr int numerical_failure = 3;
inline constexpr int not_equilibrium = 4;
}  // namespace exit_code

/// Materializes the requested initial state on the surface. Inline and file
/// states are admitted up to |c| <= 1e-6 and then retracted tightly;
/// `perturbation` adds a seeded unit tangent step of that length per agent.
inline Configuration build_initial_state(const ImplicitSurface& s, int n_agents,
                                         const InitialStateSpec& spec, double perturbation,
                                         Rng& rng) {
  Configuration x;
  switch (spec.kind) {
    case InitialStateSpec::Kind::random: {
      for (int i = 0; i < n_agents; ++i) x.points.push_back(sample_point(s, rng, 1e-12).coords);
      break;
    }
    case InitialStateSpec::Kind::splay: {
      if (s.ambient_dim != 2) {
        throw ConfigError("initial_state: splay states require a 1-dimensional surface (dim 2)");
      }
      for (int k = 0; k < n_agents; ++k) {
        double t = 2.0 * M_PI * spec.twist * k / n_agents;
        x.points.push_back((Vec(2) << std::cos(t), std::sin(t)).finished());
      }
      break;
    }
    case InitialStateSpec::Kind::inline_points:
    case InitialStateSpec::Kind::file: {
      std::vector<Vec> pts = spec.points;
      if (spec.kind == InitialStateSpec::Kind::file) {
        json doc = load_json_file(spec.path);
        const json& arr = doc.is_object() && doc.contains("points") ? doc.at("points") : doc;
        if (!arr.is_array()) throw ConfigError(spec.path + ": expected {\"points\": [[...], ...]}");
        pts.clear();
        for (const auto& row : arr) {
          Vec p(static_cast<int>(row.size()));
          for (size_t k = 0; k < row.size(); ++k) p(static_cast<int>(k)) = row.at(k).get<double>();
          pts.push_back(p);
        }
      }
      if (static_cast<int>(pts.size()) != n_agents) {
        throw ConfigError("initial_state: expected " + std::to_string(n_agents) +
                          " points, got " + std::to_string(pts.size()));
      }
      for (Vec& p : pts) {
        if (p.size() != s.ambient_dim) {
          throw ConfigError("initial_state: point dimension " + std::to_string(p.size()) +
                            " does not match surface dimension " + std::to_string(s.ambient_dim));
        }
        if (std::abs(s.c(p)) > 1e-6) {
          throw ConfigError("initial_state: point is too far off the surface (|c| = " +
                            std::to_string(std::abs(s.c(p))) + ")");
        }
        p = retract(s, p, {1e-12, 50, 0.5}).coords;
      }
      x.points = std::move(pts);
      break;
    }
  }
  if (perturbation > 0.0) {
    std::normal_distribution<double> gauss;
    for (Vec& p : x.points) {
      Vec dir(s.ambient_dim);
      Vec tangent;
      do {
        for (int k = 0; k < s.ambient_dim; ++k) dir(k) = gauss(rng);
        tangent = tangent_project(s, p, dir);
      } while (tangent.norm() < 1e-9);
      p = retract(s, p + perturbation * tangent / tangent.norm(), {1e-12, 50, 0.5}).coords;
    }
  }
  return x;
}

inline json trajectory_summary(const RunConfig& cfg, const ImplicitSurface& s,
                               const Trajectory& traj, std::uint64_t seed) {
  return json{{"command", "simulate"},
              {"surface", cfg.surface.to_json()},
              {"graph", cfg.graph.to_json()},
              {"field", to_string(cfg.field)},
              {"seed", seed},
              {"initial_V", traj.disagreement.front()},
              {"final_V", traj.disagreement.back()},
              {"converged", traj.converged},
              {"termination", to_string(traj.termination)},
              {"t_final", traj.times.back()},
              {"n_steps", traj.n_steps},
              {"final_field_norm", traj.final_field_norm},
              {"max_constraint_drift", traj.max_constraint_drift},
              {"max_v_increase", traj.max_v_increase},
              {"v_threshold", cfg.flow.v_threshold},
              {"field_threshold", cfg.flow.field_threshold},
              {"ambient_dim", s.ambient_dim}};
}

/// simulate: one trajectory, written as trajectory.csv + summary.json.
inline int run_simulate(const RunConfig& cfg, const std::filesystem::path& out_dir,
                        Trajectory* out_traj = nullptr) {
  ImplicitSurface s = cfg.surface.build();
  Graph g = cfg.graph.build();
  Rng rng(cfg.experiment.seed);
  Configuration x0 = build_initial_state(s, g.n_agents(), cfg.experiment.initial_state,
                                         cfg.experiment.perturbation, rng);
  Trajectory traj = integrate(s, g, x0, cfg.flow, cfg.field);
  std::filesystem::create_directories(out_dir);
  write_trajectory_csv(out_dir / "trajectory.csv", traj, s.ambient_dim);
  write_json(out_dir / "summary.json", trajectory_summary(cfg, s, traj, cfg.experiment.seed));
  if (out_traj) *out_traj = std::move(traj);
  return exit_code::ok;
}

struct BasinTrial {
  int trial = 0;
  std::uint64_t seed = 0;
  bool converged = false;
  bool failed = false;
  std::string error;
  double final_v = 0.0;
  double t_final = 0.0;
  double max_constraint_drift = 0.0;
  double max_v_increase = 0.0;
  std::string termination;
};

/// basin: `trials` independent runs from random initial conditions with
/// per-trial seeds master_seed + trial. Trials execute concurrently; the
/// report is ordered by trial index, so it is byte-identical regardless of
/// scheduling. Per-trial numerical failures are recorded, not fatal.
inline int run_basin(const RunConfig& cfg, const std::filesystem::path& out_dir,
                     json* out_report = nullptr) {
  ImplicitSurface s = cfg.surface.build();
  Graph g = cfg.graph.build();
  const int trials = cfg.experiment.trials;
  std::vector<BasinTrial> results(static_cast<size_t>(trials));

  FlowParams params = cfg.flow;
  params.record_every = INT_MAX;  // endpoints only

  auto run_trial = [&](int t) {
    BasinTrial& r = results[static_cast<size_t>(t)];
    r.trial = t;
    r.seed = cfg.experiment.seed + static_cast<std::uint64_t>(t);
    try {
      Rng rng(r.seed);
      Configuration x0 = build_initial_state(s, g.n_agents(), InitialStateSpec{}, 0.0, rng);
      Trajectory traj = integrate(s, g, x0, params, cfg.field);
      r.converged = traj.converged;
      r.final_v = traj.disagreement.back();
      r.t_final = traj.times.back();
      r.max_constraint_drift = traj.max_constraint_drift;
      r.max_v_increase = traj.max_v_increase;
      r.termination = to_string(traj.termination);
    } catch (const std::exception& e) {
      r.failed = true;
      r.error = e.what();
    }
  };

  const unsigned workers = std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                                              static_cast<unsigned>(trials));
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int t = next.fetch_add(1); t < trials; t = next.fetch_add(1)) run_trial(t);
    });
  }
  for (auto& th : pool) th.join();

  int n_converged = 0;
  json trials_json = json::array();
  json failures = json::array();
  for (const auto& r : results) {
    if (r.converged) ++n_converged;
    json entry{{"trial", r.trial},   {"seed", r.seed},
               {"converged", r.converged}, {"final_V", r.final_v},
               {"t_final", r.t_final},     {"termination", r.termination},
               {"max_constraint_drift", r.max_constraint_drift},
               {"max_v_increase", r.max_v_increase}};
    if (r.failed) {
      entry["error"] = r.error;
      failures.push_back(r.trial);
    } else if (!r.converged) {
      failures.push_back(r.trial);
    }
    trials_json.push_back(std::move(entry));
  }

  json report{{"command", "basin"},
              {"surface", cfg.surface.to_json()},
              {"graph", cfg.graph.to_json()},
              {"field", to_string(cfg.field)},
              {"master_seed", cfg.experiment.seed},
              {"n_trials", trials},
              {"n_converged", n_converged},
              {"fraction", static_cast<double>(n_converged) / static_cast<double>(trials)},
              {"failures", failures},
              {"trials", trials_json},
              {"dt", cfg.flow.dt},
              {"t_end", cfg.flow.t_end},
              {"v_threshold", cfg.flow.v_threshold}};
  std::filesystem::create_directories(out_dir);
  write_json(out_dir / "basin.json", report);
  if (out_report) *out_report = std::move(report);
  return exit_code::ok;
}

/// check: one of the three surface condition checkers, selected by `which`
/// (assumption1 = pairwise margin sampling, convexity = supporting
/// halfspaces, alpha = strong-convexity ratio gate). Exit 0 when the surface
/// passes, 1 when the condition is violated.
inline int run_check(const RunConfig& cfg, const std::filesystem::path& out_dir,
                     std::string which = {}, json* out_report = nullptr) {
  if (which.empty()) which = cfg.experiment.which;
  if (which.empty()) {
    throw ConfigError("experiment.which: required for `check` (assumption1|convexity|alpha)");
  }
  ImplicitSurface s = cfg.surface.build();
  Rng rng(cfg.experiment.seed);
  json report{{"command", "check"},
              {"which", which},
              {"surface", cfg.surface.to_json()},
              {"seed", cfg.experiment.seed}};
  int code = exit_code::ok;
  if (which == "assumption1" || which == "convexity") {
    MarginReport mr = which == "assumption1" ? check_pair_margin(s, cfg.experiment.n_pairs, rng)
                                             : check_convexity(s, cfg.experiment.n_pairs, rng);
    report["n_pairs"] = mr.n_pairs;
    report["min_margin"] = mr.min_value;
    report["argmin_pair"] = json::array({to_json(mr.argmin_y), to_json(mr.argmin_z)});
    report["violated"] = mr.violated;
    code = mr.violated ? exit_code::violated : exit_code::ok;
  } else if (which == "alpha") {
    StrongConvexityReport sr = strong_convexity_alpha(s, cfg.experiment.n_samples, rng);
    report["n_samples"] = sr.n_samples;
    report["m"] = sr.m;
    report["M"] = sr.big_m;
    report["L"] = sr.lipschitz;
    report["K"] = sr.grad_max;
    report["n"] = s.manifold_dim();
    report["alpha"] = sr.alpha;
    report["passes"] = sr.passes;
    report["gate_rtol"] = sr.gate_rtol;
    if (sr.exact_lipschitz || sr.exact_alpha) {
      json exact;
      if (sr.exact_lipschitz) exact["L"] = *sr.exact_lipschitz;
      if (sr.exact_alpha) exact["alpha"] = *sr.exact_alpha;
      report["exact"] = exact;
    }
    code = sr.passes ? exit_code::ok : exit_code::violated;
  } else {
    throw ConfigError("experiment.which: unknown check '" + which +
                      "' (expected assumption1|convexity|alpha)");
  }
  std::filesystem::create_directories(out_dir);
  write_json(out_dir / ("check_" + which + ".json"), report);
  if (out_report) *out_report = std::move(report);
  return code;
}

/// classify: second-order report at a supplied equilibrium configuration.
/// Exit 4 (with the residual printed) when the state fails the equilibrium
/// precondition.
inline int run_classify(const RunConfig& cfg, const std::filesystem::path& out_dir,
                        const std::string& state_path = {}, json* out_report = nullptr) {
  ImplicitSurface s = cfg.surface.build();
  Graph g = cfg.graph.build();
  Rng rng(cfg.experiment.seed);
  InitialStateSpec state = cfg.experiment.initial_state;
  if (!state_path.empty()) {
    state = InitialStateSpec{};
    state.kind = InitialStateSpec::Kind::file;
    state.path = state_path;
  }
  Configuration x = build_initial_state(s, g.n_agents(), state, 0.0, rng);

  StabilityReport sr = classify_equilibrium(s, g, x);
  double margin_sum = 0.0;
  for (const auto& m : sr.margins) margin_sum += m.weight * m.margin;

  json report{{"command", "classify"},
              {"surface", cfg.surface.to_json()},
              {"graph", cfg.graph.to_json()},
              {"equilibrium", to_json(x)},
              {"lambdas", to_json(sr.lambdas)},
              {"eigs", sr.hessian_eigs},
              {"trace_M", sr.trace_m},
              {"trace_M_margin_sum", margin_sum},
              {"classification", to_string(sr.classification)},
              {"spectral_abscissa", sr.spectral_abscissa},
              {"V", sr.disagreement_value},
              {"margins", to_json(sr.margins)},
              {"seed", cfg.experiment.seed}};
  std::filesystem::create_directories(out_dir);
  write_json(out_dir / "classification.json", report);
  if (out_report) *out_report = std::move(report);
  return exit_code::ok;
}

/// equivalence: integrates the oblique-projection flow on the configured
/// ellipsoid and the gradient flow on the unit sphere from the Cholesky
/// image of the same initial state, and reports the worst deviation
/// max_t ||L^T y(t) / sqrt(q) - z(t)|| over shared sample times.
inline int run_equivalence(const RunConfig& cfg, const std::filesystem::path& out_dir,
                           json* out_report = nullptr) {
  if (cfg.surface.kind != "ellipsoid") {
    throw ConfigError("equivalence: surface.kind must be 'ellipsoid'");
  }
  const Mat& a = cfg.surface.ellipsoid_a;
  const double q = cfg.experiment.quad_norm;
  ImplicitSurface ell = [&] {
    try {
      return make_ellipsoid(a, q / 2.0);  // <y, Ay> = q
    } catch (const Error& e) {
      throw ConfigError(std::string("equivalence: ") + e.what());
    }
  }();
  ImplicitSurface sph = make_sphere(static_cast<int>(a.rows()));
  Graph g = cfg.graph.build();

  Rng rng(cfg.experiment.seed);
  Configuration y0 = build_initial_state(ell, g.n_agents(), cfg.experiment.initial_state,
                                         cfg.experiment.perturbation, rng);
  Configuration z0 = cholesky_pullback(a, y0, q, 1e-9);
  for (Vec& p : z0.points) p = retract(sph, p, {1e-12, 50, 0.5}).coords;

  FlowParams params = cfg.flow;
  params.v_threshold = 0.0;  // run both systems over the full horizon
  params.field_threshold = 0.0;
  Trajectory ty = integrate(ell, g, y0, params, FieldKind::zhu);
  Trajectory tz = integrate(sph, g, z0, params, FieldKind::gradient);

  const Mat l = Eigen::LLT<Mat>(a).matrixL();
  const double scale = 1.0 / std::sqrt(q);
  double max_dev = 0.0;
  for (size_t k = 0; k < ty.states.size(); ++k) {
    for (int i = 0; i < g.n_agents(); ++i) {
      Vec mapped = scale * (l.transpose() * ty.states[k].points[static_cast<size_t>(i)]);
      max_dev = std::max(max_dev, (mapped - tz.states[k].points[static_cast<size_t>(i)]).norm());
    }
  }
  const bool passes = max_dev <= cfg.experiment.max_deviation;

  json report{{"command", "equivalence"},
              {"A", to_json(a)},
              {"quad_norm", q},
              {"graph", cfg.graph.to_json()},
              {"seed", cfg.experiment.seed},
              {"dt", params.dt},
              {"t_end", params.t_end},
              {"max_deviation", max_dev},
              {"threshold", cfg.experiment.max_deviation},
              {"passes", passes},
              {"ellipsoid_final_V", ty.disagreement.back()},
              {"sphere_final_V", tz.disagreement.back()},
              {"ellipsoid_max_constraint_drift", ty.max_constraint_drift},
              {"sphere_max_constraint_drift", tz.max_constraint_drift},
              {"sphere_max_v_increase", tz.max_v_increase}};
  std::filesystem::create_directories(out_dir);
  write_json(out_dir / "equivalence.json", report);
  if (out_report) *out_report = std::move(report);
  return passes ? exit_code::ok : exit_code::violated;
}

/// CLI entry shared with the tests: loads the config, applies overrides,
/// dispatches, and maps typed errors to exit codes.
inline int run_command(const std::string& command, const std::string& config_path,
                       const std::string& out_dir, std::optional<std::uint64_t> seed_override,
                       const std::string& state_path = {}, const std::string& which = {},
                       std::ostream& err = std::cerr) {
  try {
    RunConfig cfg = load_config(config_path);
    if (seed_override) cfg.experiment.seed = *seed_override;
    if (command == "simulate") return run_simulate(cfg, out_dir);
    if (command == "basin") return run_basin(cfg, out_dir);
    if (command == "check") return run_check(cfg, out_dir, which);
    if (command == "classify") return run_classify(cfg, out_dir, state_path);
    if (command == "equivalence") return run_equivalence(cfg, out_dir);
    err << "unknown command: " << command << "\n";
    return exit_code::config_error;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_code::config_error;
  } catch (const NotEquilibrium& e) {
    err << "not an equilibrium: " << e.what() << " (residual " << format_double(e.residual)
        << ")\n";
    return exit_code::not_equilibrium;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << "\n";
    return exit_code::numerical_failure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::numerical_failure;
  }
}

}  // namespace hyperflock
