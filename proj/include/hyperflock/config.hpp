#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <variant>

#include <json.hpp>

#include "hyperflock/flow.hpp"
#include "hyperflock/graph.hpp"
#include "hyperflock/io.hpp"
#include "hyperflock/surface.hpp"

namespace hyperflock {

// Run configuration: a single JSON document with blocks `surface`, `graph`,
// `flow` and `experiment`. Parsing reports precise paths on error and maps
// to CLI exit code 2.

namespace cfgdetail {

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

inline const json& need(const json& doc, const std::string& path, const char* key) {
  if (!doc.is_object()) fail(path, "expected an object");
  auto it = doc.find(key);
  if (it == doc.end()) fail(path + "." + key, "missing required field");
  return *it;
}

inline double need_number(const json& doc, const std::string& path, const char* key) {
  const json& v = need(doc, path, key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

inline double opt_number(const json& doc, const std::string& path, const char* key,
                         double fallback) {
  if (!doc.is_object() || !doc.contains(key)) return fallback;
  const json& v = doc.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

inline int opt_int(const json& doc, const std::string& path, const char* key, int fallback) {
  if (!doc.is_object() || !doc.contains(key)) return fallback;
  const json& v = doc.at(key);
  if (!v.is_number_integer()) fail(path + "." + key, "expected an integer");
  return v.get<int>();
}

inline std::string need_string(const json& doc, const std::string& path, const char* key) {
  const json& v = need(doc, path, key);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

inline Mat parse_matrix(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array");
  if (v.front().is_array()) {  // nested rows
    const int n = static_cast<int>(v.size());
    Mat m(n, n);
    for (int i = 0; i < n; ++i) {
      const json& row = v.at(static_cast<size_t>(i));
      if (!row.is_array() || static_cast<int>(row.size()) != n) {
        fail(path, "expected a square matrix (row " + std::to_string(i) + " has wrong length)");
      }
      for (int j = 0; j < n; ++j) {
        const json& e = row.at(static_cast<size_t>(j));
        if (!e.is_number()) fail(path, "matrix entries must be numbers");
        m(i, j) = e.get<double>();
      }
    }
    return m;
  }
  // flat row-major list
  const auto total = v.size();
  const int n = static_cast<int>(std::llround(std::sqrt(static_cast<double>(total))));
  if (static_cast<size_t>(n) * static_cast<size_t>(n) != total) {
    fail(path, "flat matrix must have a square number of entries");
  }
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const json& e = v.at(static_cast<size_t>(i * n + j));
      if (!e.is_number()) fail(path, "matrix entries must be numbers");
      m(i, j) = e.get<double>();
    }
  return m;
}

}  // namespace cfgdetail

struct SurfaceSpec {
  std::string kind;
  int dim = 3;
  Mat ellipsoid_a;
  double level = 1.0;
  double torus_R = 2.0;
  double torus_r = 0.5;

  ImplicitSurface build() const {
    try {
      if (kind == "sphere") return make_sphere(dim);
      if (kind == "quartic") return make_quartic(dim);
      if (kind == "ellipsoid") return make_ellipsoid(ellipsoid_a, level);
      if (kind == "torus") return make_torus(torus_R, torus_r);
    } catch (const Error& e) {
      throw ConfigError(std::string("surface: ") + e.what());
    }
    throw ConfigError("surface.kind: unknown kind '" + kind +
                      "' (expected sphere|ellipsoid|quartic|torus)");
  }

  json to_json() const {
    json out{{"kind", kind}};
    if (kind == "sphere" || kind == "quartic") out["dim"] = dim;
    if (kind == "ellipsoid") {
      out["A"] = hyperflock::to_json(ellipsoid_a);
      out["level"] = level;
    }
    if (kind == "torus") {
      out["R"] = torus_R;
      out["r"] = torus_r;
    }
    return out;
  }

  static SurfaceSpec parse(const json& doc) {
    using namespace cfgdetail;
    SurfaceSpec spec;
    spec.kind = need_string(doc, "surface", "kind");
    if (spec.kind == "sphere" || spec.kind == "quartic") {
      spec.dim = opt_int(doc, "surface", "dim", 3);
      if (spec.dim < 2) fail("surface.dim", "must be >= 2");
    } else if (spec.kind == "ellipsoid") {
      spec.ellipsoid_a = parse_matrix(need(doc, "surface", "A"), "surface.A");
      spec.dim = static_cast<int>(spec.ellipsoid_a.rows());
      spec.level = opt_number(doc, "surface", "level", 1.0);
    } else if (spec.kind == "torus") {
      spec.torus_R = need_number(doc, "surface", "R");
      spec.torus_r = need_number(doc, "surface", "r");
      spec.dim = 3;
    } else {
      fail("surface.kind", "unknown kind '" + spec.kind +
                               "' (expected sphere|ellipsoid|quartic|torus)");
    }
    return spec;
  }
};

struct GraphSpec {
  std::string kind;
  int n = 0;
  double weight = 1.0;
  std::vector<Graph::Edge> edges;

  Graph build() const {
    try {
      if (kind == "complete") return complete_graph(n, weight);
      if (kind == "ring") return ring_graph(n, weight);
      if (kind == "path") return path_graph(n, weight);
      if (kind == "star") return star_graph(n, weight);
      if (kind == "edges") return graph_from_edges(edges, n > 0 ? n : -1);
    } catch (const Error& e) {
      throw ConfigError(std::string("graph: ") + e.what());
    }
    throw ConfigError("graph.kind: unknown kind '" + kind +
                      "' (expected complete|ring|path|star|edges)");
  }

  json to_json() const {
    json out{{"kind", kind}};
    if (n > 0) out["n"] = n;
    if (kind == "edges") {
      json list = json::array();
      for (const auto& e : edges) list.push_back({e.i, e.j, e.weight});
      out["edges"] = list;
    }
    return out;
  }

  static GraphSpec parse(const json& doc) {
    using namespace cfgdetail;
    GraphSpec spec;
    spec.kind = need_string(doc, "graph", "kind");
    spec.weight = opt_number(doc, "graph", "weight", 1.0);
    if (spec.kind == "edges") {
      const json& list = need(doc, "graph", "edges");
      if (!list.is_array()) fail("graph.edges", "expected an array of [i, j, weight]");
      for (size_t k = 0; k < list.size(); ++k) {
        const json& e = list.at(k);
        if (!e.is_array() || e.size() < 2 || e.size() > 3) {
          fail("graph.edges[" + std::to_string(k) + "]", "expected [i, j] or [i, j, weight]");
        }
        Graph::Edge edge;
        edge.i = e.at(0).get<int>();
        edge.j = e.at(1).get<int>();
        edge.weight = e.size() == 3 ? e.at(2).get<double>() : 1.0;
        spec.edges.push_back(edge);
      }
      spec.n = opt_int(doc, "graph", "n", 0);
    } else {
      spec.n = opt_int(doc, "graph", "n", 0);
      if (spec.n < 2) fail("graph.n", "must be given and >= 2 for generated graphs");
    }
    return spec;
  }
};

/// Initial-state request: random (default), a splay/twisted circle state,
/// inline coordinates, or a JSON file with {"points": [[...], ...]}.
struct InitialStateSpec {
  enum class Kind { random, splay, inline_points, file };
  Kind kind = Kind::random;
  int twist = 1;
  std::vector<Vec> points;
  std::string path;

  static InitialStateSpec parse(const json& v, const std::string& path) {
    using namespace cfgdetail;
    InitialStateSpec spec;
    if (v.is_string()) {
      spec.kind = Kind::file;
      spec.path = v.get<std::string>();
      return spec;
    }
    if (v.is_array()) {
      spec.kind = Kind::inline_points;
      for (size_t i = 0; i < v.size(); ++i) {
        const json& row = v.at(i);
        if (!row.is_array() || row.empty()) {
          fail(path + "[" + std::to_string(i) + "]", "expected a coordinate array");
        }
        Vec p(static_cast<int>(row.size()));
        for (size_t k = 0; k < row.size(); ++k) p(static_cast<int>(k)) = row.at(k).get<double>();
        spec.points.push_back(p);
      }
      return spec;
    }
    if (v.is_object()) {
      std::string kind = need_string(v, path, "kind");
      if (kind == "random") {
        spec.kind = Kind::random;
      } else if (kind == "splay") {
        spec.kind = Kind::splay;
        spec.twist = opt_int(v, path, "twist", 1);
      } else {
        fail(path + ".kind", "expected random|splay");
      }
      return spec;
    }
    fail(path, "expected a string, array or object");
  }
};

struct ExperimentSpec {
  std::uint64_t seed = 0;
  int trials = 100;
  long n_pairs = 1000;
  long n_samples = 10000;
  std::string which;  // check: assumption1 | convexity | alpha
  InitialStateSpec initial_state;
  double perturbation = 0.0;
  double quad_norm = 1.0;     // equivalence: <y, Ay> level
  double max_deviation = 1e-5;

  static ExperimentSpec parse(const json& doc) {
    using namespace cfgdetail;
    ExperimentSpec spec;
    if (doc.is_null()) return spec;
    if (!doc.is_object()) fail("experiment", "expected an object");
    if (doc.contains("seed")) {
      const json& s = doc.at("seed");
      if (!s.is_number_unsigned() && !s.is_number_integer()) fail("experiment.seed", "expected an integer");
      spec.seed = s.get<std::uint64_t>();
    }
    spec.trials = opt_int(doc, "experiment", "trials", spec.trials);
    if (spec.trials < 1) fail("experiment.trials", "must be >= 1");
    spec.n_pairs = opt_int(doc, "experiment", "n_pairs", static_cast<int>(spec.n_pairs));
    spec.n_samples = opt_int(doc, "experiment", "n_samples", static_cast<int>(spec.n_samples));
    if (doc.contains("which")) spec.which = need_string(doc, "experiment", "which");
    if (doc.contains("initial_state")) {
      spec.initial_state = InitialStateSpec::parse(doc.at("initial_state"),
                                                   "experiment.initial_state");
    }
    spec.perturbation = opt_number(doc, "experiment", "perturbation", 0.0);
    spec.quad_norm = opt_number(doc, "experiment", "quad_norm", 1.0);
    spec.max_deviation = opt_number(doc, "experiment", "max_deviation", 1e-5);
    return spec;
  }
};

struct RunConfig {
  SurfaceSpec surface;
  GraphSpec graph;
  FlowParams flow;
  FieldKind field = FieldKind::gradient;
  ExperimentSpec experiment;

  static RunConfig parse(const json& doc) {
    using namespace cfgdetail;
    if (!doc.is_object()) fail("<config>", "expected a JSON object");
    RunConfig cfg;
    cfg.surface = SurfaceSpec::parse(need(doc, "<config>", "surface"));
    if (doc.contains("graph")) cfg.graph = GraphSpec::parse(doc.at("graph"));
    if (doc.contains("flow")) {
      const json& f = doc.at("flow");
      cfg.flow.dt = opt_number(f, "flow", "dt", cfg.flow.dt);
      cfg.flow.t_end = opt_number(f, "flow", "t_end", cfg.flow.t_end);
      cfg.flow.record_every = opt_int(f, "flow", "record_every", cfg.flow.record_every);
      cfg.flow.retraction_tol = opt_number(f, "flow", "retraction_tol", cfg.flow.retraction_tol);
      cfg.flow.v_threshold = opt_number(f, "flow", "v_threshold", cfg.flow.v_threshold);
      cfg.flow.field_threshold = opt_number(f, "flow", "field_threshold", cfg.flow.field_threshold);
      if (f.is_object() && f.contains("field")) {
        std::string field = need_string(f, "flow", "field");
        if (field == "gradient") {
          cfg.field = FieldKind::gradient;
        } else if (field == "zhu") {
          cfg.field = FieldKind::zhu;
        } else {
          fail("flow.field", "expected gradient|zhu");
        }
      }
      try {
        cfg.flow.validate();
      } catch (const Error& e) {
        throw ConfigError(std::string("flow: ") + e.what());
      }
    }
    cfg.experiment = ExperimentSpec::parse(doc.contains("experiment") ? doc.at("experiment")
                                                                      : json());
    return cfg;
  }
};

inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError(path + ": JSON parse error: " + e.what());
  }
  return doc;
}

inline RunConfig load_config(const std::string& path) {
  return RunConfig::parse(load_json_file(path));
}

}  // namespace hyperflock
