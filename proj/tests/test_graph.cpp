#include <gtest/gtest.h>

#include "hyperflock/graph.hpp"

using namespace hyperflock;

TEST(Graph, NeighborsOfGenerators) {
  auto c3 = complete_graph(3);
  auto nb = c3.neighbors(0);
  ASSERT_EQ(nb.size(), 2u);
  EXPECT_EQ(nb[0], std::make_pair(1, 1.0));
  EXPECT_EQ(nb[1], std::make_pair(2, 1.0));

  auto r4 = ring_graph(4);
  nb = r4.neighbors(0);
  ASSERT_EQ(nb.size(), 2u);
  EXPECT_EQ(nb[0].first, 1);
  EXPECT_EQ(nb[1].first, 3);

  auto p3 = path_graph(3);
  nb = p3.neighbors(1);
  ASSERT_EQ(nb.size(), 2u);
  EXPECT_EQ(nb[0].first, 0);
  EXPECT_EQ(nb[1].first, 2);
}

TEST(Graph, EdgeCounts) {
  EXPECT_EQ(complete_graph(4).edges().size(), 6u);
  EXPECT_EQ(ring_graph(10).edges().size(), 10u);
  EXPECT_EQ(path_graph(3).edges().size(), 2u);
  EXPECT_EQ(star_graph(5).edges().size(), 4u);
}

TEST(Graph, GeneratorsAreConnected) {
  EXPECT_TRUE(is_connected(complete_graph(2)));
  EXPECT_TRUE(is_connected(complete_graph(6)));
  EXPECT_TRUE(is_connected(ring_graph(5)));
  EXPECT_TRUE(is_connected(path_graph(7)));
  EXPECT_TRUE(is_connected(star_graph(4)));
}

TEST(Graph, DisjointEdgesAreNotConnected) {
  Graph g(4, {{0, 1, 1.0}, {2, 3, 1.0}});
  EXPECT_FALSE(is_connected(g));
}

TEST(Graph, FromEdgeListInfersSize) {
  auto g = graph_from_edges({{0, 1, 2.5}});
  EXPECT_EQ(g.n_agents(), 2);
  ASSERT_EQ(g.neighbors(0).size(), 1u);
  EXPECT_DOUBLE_EQ(g.neighbors(0)[0].second, 2.5);
}

TEST(Graph, RejectsBadInput) {
  EXPECT_THROW(Graph(3, {{0, 0, 1.0}}), InvalidParameter);
  EXPECT_THROW(Graph(3, {{0, 1, 0.0}}), InvalidParameter);
  EXPECT_THROW(Graph(3, {{0, 1, -2.0}}), InvalidParameter);
  EXPECT_THROW(Graph(3, {{0, 5, 1.0}}), IndexOutOfRange);
  EXPECT_THROW(Graph(3, {{0, 1, 1.0}, {1, 0, 1.0}}), InvalidParameter);
  EXPECT_THROW(ring_graph(2), InvalidParameter);
  EXPECT_THROW(complete_graph(1), InvalidParameter);
  Graph g(2, {{0, 1, 1.0}});
  EXPECT_THROW(g.neighbors(2), IndexOutOfRange);
  EXPECT_THROW(g.neighbors(-1), IndexOutOfRange);
}
