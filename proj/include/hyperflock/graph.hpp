#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "hyperflock/errors.hpp"

namespace hyperflock {

/// Weighted undirected interaction graph. Edges are unordered pairs {i, j},
/// i != j, with strictly positive weights; absent pairs have weight zero by
/// convention. Immutable after construction.
class Graph {
 public:
  struct Edge {
    int i;
    int j;
    double weight;
  };

  Graph(int n_agents, std::vector<Edge> edges) : n_(n_agents) {
    if (n_ < 1) throw InvalidParameter("graph: need at least one node");
    adj_.resize(static_cast<size_t>(n_));
    for (const Edge& e : edges) {
      if (e.i < 0 || e.i >= n_ || e.j < 0 || e.j >= n_) {
        throw IndexOutOfRange("graph: edge endpoint out of range");
      }
      if (e.i == e.j) throw InvalidParameter("graph: self-loops are not allowed");
      if (!(e.weight > 0.0)) throw InvalidParameter("graph: edge weights must be positive");
      for (const auto& [k, w] : adj_[static_cast<size_t>(e.i)]) {
        if (k == e.j) throw InvalidParameter("graph: duplicate edge");
      }
      adj_[static_cast<size_t>(e.i)].emplace_back(e.j, e.weight);
      adj_[static_cast<size_t>(e.j)].emplace_back(e.i, e.weight);
    }
    edges_ = std::move(edges);
    for (auto& nbrs : adj_) {
      std::sort(nbrs.begin(), nbrs.end());
    }
  }

  int n_agents() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Incident edges of agent i as (neighbor, weight) pairs.
  const std::vector<std::pair<int, double>>& neighbors(int i) const {
    if (i < 0 || i >= n_) {
      throw IndexOutOfRange("graph: agent index " + std::to_string(i) +
                            " out of range [0, " + std::to_string(n_) + ")");
    }
    return adj_[static_cast<size_t>(i)];
  }

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<int, double>>> adj_;
};

/// True iff a traversal from node 0 reaches every node.
inline bool is_connected(const Graph& g) {
  const int n = g.n_agents();
  std::vector<char> seen(static_cast<size_t>(n), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (const auto& [w, weight] : g.neighbors(v)) {
      if (!seen[static_cast<size_t>(w)]) {
        seen[static_cast<size_t>(w)] = 1;
        ++reached;
        stack.push_back(w);
      }
    }
  }
  return reached == n;
}

inline Graph complete_graph(int n, double weight = 1.0) {
  if (n < 2) throw InvalidParameter("complete graph: need n >= 2");
  std::vector<Graph::Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j, weight});
  return Graph(n, std::move(edges));
}

inline Graph ring_graph(int n, double weight = 1.0) {
  if (n < 3) throw InvalidParameter("ring graph: need n >= 3");
  std::vector<Graph::Edge> edges;
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n, weight});
  return Graph(n, std::move(edges));
}

inline Graph path_graph(int n, double weight = 1.0) {
  if (n < 2) throw InvalidParameter("path graph: need n >= 2");
  std::vector<Graph::Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, weight});
  return Graph(n, std::move(edges));
}

inline Graph star_graph(int n, double weight = 1.0) {
  if (n < 2) throw InvalidParameter("star graph: need n >= 2");
  std::vector<Graph::Edge> edges;
  for (int i = 1; i < n; ++i) edges.push_back({0, i, weight});
  return Graph(n, std::move(edges));
}

/// Builds a graph from an explicit edge list; the node count is inferred as
/// 1 + max endpoint unless given explicitly.
inline Graph graph_from_edges(std::vector<Graph::Edge> edges, int n_agents = -1) {
  if (edges.empty() && n_agents < 1) {
    throw InvalidParameter("graph_from_edges: empty edge list with no node count");
  }
  int n = n_agents;
  if (n < 0) {
    n = 0;
    for (const auto& e : edges) n = std::max({n, e.i + 1, e.j + 1});
  }
  return Graph(n, std::move(edges));
}

}  // namespace hyperflock
