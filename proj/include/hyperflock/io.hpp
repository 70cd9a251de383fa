#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyperflock/flow.hpp"
#include "hyperflock/stability.hpp"

namespace hyperflock {

using json = nlohmann::json;

/// Fixed 17-significant-digit formatting: round-trip exact and byte-stable
/// across runs.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline json to_json(const Vec& v) {
  json out = json::array();
  for (int i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline json to_json(const Mat& m) {
  json out = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

inline json to_json(const Configuration& x) {
  json out = json::array();
  for (const Vec& p : x.points) out.push_back(to_json(p));
  return out;
}

inline json to_json(const std::vector<DirectedEdgeMargin>& margins) {
  json out = json::array();
  for (const auto& m : margins) {
    out.push_back({{"i", m.i}, {"j", m.j}, {"weight", m.weight}, {"margin", m.margin}});
  }
  return out;
}

/// Trajectory CSV: header `t,agent,coord0..coord{d-1},V`, one row per
/// recorded sample and agent.
inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj,
                                 int ambient_dim) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << "t,agent";
  for (int k = 0; k < ambient_dim; ++k) out << ",coord" << k;
  out << ",V\n";
  for (size_t s = 0; s < traj.times.size(); ++s) {
    const auto& state = traj.states[s];
    for (int i = 0; i < state.n_agents(); ++i) {
      out << format_double(traj.times[s]) << ',' << i;
      const Vec& p = state.points[static_cast<size_t>(i)];
      for (int k = 0; k < ambient_dim; ++k) out << ',' << format_double(p(k));
      out << ',' << format_double(traj.disagreement[s]) << '\n';
    }
  }
}

inline void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << doc.dump(2) << '\n';
}

}  // namespace hyperflock
