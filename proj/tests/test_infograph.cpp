#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"

using namespace declqr;
using declqr::testing::example1_graph;

namespace {

// s_{k,j} = { i : D(i, j) <= k }.
NodeSet reach_set(const DelayMatrix& D, int k, int j) {
  NodeSet s;
  for (int i = 0; i < D.size(); ++i) {
    if (D.reachable(i, j) && D.at(i, j) <= k) s.push_back(i);
  }
  return s;
}

CommGraph random_dag_ish(Rng& rng, int p) {
  std::vector<Edge> edges;
  for (int a = 0; a < p; ++a) {
    for (int b = 0; b < p; ++b) {
      if (a == b || rng() % 2) continue;
      edges.push_back({a, b, a < b ? int(rng() % 2) : 1});
    }
  }
  return CommGraph(p, edges);
}

}  // namespace

TEST(InfoGraph, Example1Tree1) {
  const InfoGraph ig = build_info_graph(compute_delay_matrix(example1_graph()));
  std::set<NodeSet> T1;
  for (int r : ig.trees[0]) T1.insert(ig.nodes[r]);
  EXPECT_EQ(T1, (std::set<NodeSet>{{0, 1, 2}, {0, 1}, {2}, {0}}));
  EXPECT_TRUE(verify_lemma1(ig).ok);
}

TEST(InfoGraph, Example1LeafOrder) {
  const InfoGraph ig = build_info_graph(compute_delay_matrix(example1_graph()));
  EXPECT_EQ(ordered_leaves(ig, 1), (std::vector<NodeSet>{{0}, {2}, {0, 1}}));
  // Row 1 of D is (0, 0, 1): {3} first, then {1} and {1,2} by origin.
  EXPECT_EQ(ordered_leaves(ig, 0), (std::vector<NodeSet>{{2}, {0}, {0, 1}}));
}

TEST(InfoGraph, NodesAreReachSetsAndSuccessorsAdvanceK) {
  Rng rng(17);
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 2 + static_cast<int>(rng() % 5);
    const DelayMatrix D = compute_delay_matrix(random_dag_ish(rng, p));
    const InfoGraph ig = build_info_graph(D);
    std::set<NodeSet> expected;
    for (int j = 0; j < p; ++j) {
      for (int k = 0; k <= p; ++k) expected.insert(reach_set(D, k, j));
    }
    const std::set<NodeSet> got(ig.nodes.begin(), ig.nodes.end());
    EXPECT_EQ(got, expected);
    for (int j = 0; j < p; ++j) {
      int node = ig.leaf_of[j];
      EXPECT_EQ(ig.nodes[node], reach_set(D, 0, j));
      for (int k = 1; k <= p; ++k) {
        node = ig.successor[node];
        EXPECT_EQ(ig.nodes[node], reach_set(D, k, j));
      }
    }
    EXPECT_TRUE(verify_lemma1(ig).ok) << verify_lemma1(ig).diagnostic;
    EXPECT_GE(ig.size(), p);
    EXPECT_LE(ig.size(), p * p - p + 1);
  }
}

TEST(InfoGraph, PathLengthsMatchSuccessorWalk) {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const InfoGraph ig = build_info_graph(compute_delay_matrix(random_dag_ish(rng, 5)));
    for (int v : ig.leaves) {
      int node = v;
      for (int len = 0; len <= ig.size(); ++len) {
        EXPECT_EQ(ig.path_len[v][node], len);
        if (ig.successor[node] == node) break;
        node = ig.successor[node];
      }
    }
  }
}

TEST(InfoGraph, StronglyConnectedGraphsHaveOneRoot) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    GeneratorSpec spec;
    spec.shape = "strongly_connected";
    spec.p = 5;
    const GeneratedSystem gs = generate_system(spec, 1.0, rng);
    const InfoGraph ig = build_info_graph(compute_delay_matrix(gs.system.graph));
    EXPECT_TRUE(verify_lemma1(ig).ok);
    ASSERT_EQ(ig.roots.size(), 1u);
    EXPECT_EQ(ig.nodes[ig.roots[0]], (NodeSet{0, 1, 2, 3, 4}));
  }
}

TEST(InfoGraph, DisconnectedNodesAreTheirOwnRoots) {
  const InfoGraph ig = build_info_graph(compute_delay_matrix(CommGraph(3, {})));
  EXPECT_EQ(ig.size(), 3);
  EXPECT_EQ(ig.roots.size(), 3u);
}

TEST(InfoGraph, ExportListsEveryNode) {
  const InfoGraph ig = build_info_graph(compute_delay_matrix(example1_graph()));
  const std::string text = export_info_graph(ig);
  for (const NodeSet& s : ig.nodes) EXPECT_NE(text.find(format_node(s)), std::string::npos);
  EXPECT_EQ(format_node({0, 1}), "{1,2}");
}
