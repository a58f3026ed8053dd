#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace declqr;
using declqr::testing::example1_graph;

TEST(CommGraph, RejectsMalformedEdges) {
  EXPECT_THROW(CommGraph(2, {{0, 0, 1}}), std::invalid_argument);
  EXPECT_THROW(CommGraph(2, {{0, 1, 1}, {0, 1, 0}}), std::invalid_argument);
  EXPECT_THROW(CommGraph(2, {{0, 2, 1}}), std::invalid_argument);
  EXPECT_THROW(CommGraph(2, {{0, 1, 2}}), std::invalid_argument);
}

TEST(DelayMatrix, Example1Row2) {
  const DelayMatrix D = compute_delay_matrix(example1_graph());
  EXPECT_EQ(D.at(1, 0), 1);
  EXPECT_EQ(D.at(1, 1), 0);
  EXPECT_EQ(D.at(1, 2), 1);
  EXPECT_EQ(D.max_finite(), 1);
}

TEST(DelayMatrix, ChainAccumulatesDelay) {
  const DelayMatrix D = compute_delay_matrix(CommGraph(3, {{0, 1, 1}, {1, 2, 1}}));
  EXPECT_EQ(D.at(2, 0), 2);
  EXPECT_FALSE(D.reachable(0, 2));
  EXPECT_THROW(D.at(0, 2), std::out_of_range);
}

TEST(DelayMatrix, ZeroDelayCycleNeedsOptIn) {
  const CommGraph g(2, {{0, 1, 0}, {1, 0, 0}});
  EXPECT_THROW(compute_delay_matrix(g), std::invalid_argument);
  const DelayMatrix D = compute_delay_matrix(g, true);
  EXPECT_EQ(D.at(0, 1), 0);
  EXPECT_EQ(D.at(1, 0), 0);
}

TEST(DelayMatrix, BruteForcePathEnumeration) {
  // Oracle: Bellman-Ford with explicit path lengths up to p edges.
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const int p = 5;
    std::vector<Edge> edges;
    for (int a = 0; a < p; ++a) {
      for (int b = 0; b < p; ++b) {
        if (a != b && rng() % 3 == 0) edges.push_back({a, b, a < b ? int(rng() % 2) : 1});
      }
    }
    const DelayMatrix D = compute_delay_matrix(CommGraph(p, edges));
    std::vector<std::vector<int>> best(p, std::vector<int>(p, 1 << 20));
    for (int i = 0; i < p; ++i) best[i][i] = 0;
    for (int round = 0; round < p; ++round) {
      for (const Edge& e : edges) {
        for (int src = 0; src < p; ++src) {
          best[e.to][src] = std::min(best[e.to][src], best[e.from][src] + e.delay);
        }
      }
    }
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) {
        if (best[i][j] >= (1 << 20)) {
          EXPECT_FALSE(D.reachable(i, j));
        } else {
          EXPECT_EQ(D.at(i, j), best[i][j]);
        }
      }
    }
  }
}

TEST(PartialNestedness, Example1PatternHolds) {
  const GeneratedSystem gs = declqr::testing::example1(1);
  EXPECT_TRUE(check_partial_nestedness(gs.system, compute_delay_matrix(gs.system.graph)));
}

TEST(PartialNestedness, CouplingWithoutPathFails) {
  Eigen::MatrixXd A(2, 2);
  A << 0.5, 0.3, 0.0, 0.5;  // A_12 != 0 with no edge 2 -> 1
  const NetworkedSystem sys(CommGraph(2, {{0, 1, 1}}), BlockLayout({1, 1}, {1, 1}), A,
                            Eigen::MatrixXd::Identity(2, 2), 1.0);
  EXPECT_FALSE(check_partial_nestedness(sys, compute_delay_matrix(sys.graph)));
}

TEST(Scc, TwoDisjointCycles) {
  const CommGraph g(4, {{0, 1, 1}, {1, 0, 1}, {2, 3, 1}, {3, 2, 1}});
  const auto parts = scc_partition(g);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0], (std::vector<int>{0, 1}));
  EXPECT_EQ(parts[1], (std::vector<int>{2, 3}));
  EXPECT_TRUE(components_isolated(g, parts));
}

TEST(CostStructure, DenseCostAllowedWhenStronglyConnected) {
  const CommGraph g = example1_graph();
  const BlockLayout L({1, 1, 1}, {1, 1, 1});
  CostSpec cost{Eigen::MatrixXd::Constant(3, 3, 0.1) + Eigen::MatrixXd::Identity(3, 3),
                Eigen::MatrixXd::Identity(3, 3)};
  EXPECT_TRUE(validate_cost_structure(cost, L, scc_partition(g)));
  EXPECT_FALSE(validate_cost_structure(cost, L, {{0}, {1, 2}}));
}

TEST(Step, ScalarArithmetic) {
  const NetworkedSystem s = declqr::testing::scalar_system(0.5, 1.0);
  const VectorXd x = VectorXd::Constant(1, 2.0);
  EXPECT_DOUBLE_EQ(step(s, x, VectorXd::Constant(1, 1.0), VectorXd::Constant(1, 0.1))(0), 2.1);
  EXPECT_THROW(step(s, x, VectorXd::Zero(2), VectorXd::Zero(1)), std::invalid_argument);
}

TEST(StageCost, Arithmetic) {
  const CostSpec c{Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(1, 1)};
  EXPECT_DOUBLE_EQ(stage_cost(c, VectorXd::Ones(2), VectorXd::Constant(1, 2.0)), 6.0);
}

TEST(SpectralEnvelope, JordanBlockBoundsPowers) {
  Eigen::MatrixXd M(2, 2);
  M << 0.5, 1.0, 0.0, 0.5;
  const SpectralEnvelope env = spectral_envelope(M);
  EXPECT_DOUBLE_EQ(env.gamma, 0.75);
  Eigen::MatrixXd Mk = Eigen::MatrixXd::Identity(2, 2);
  for (int k = 0; k <= kEnvelopeHorizon; ++k) {
    EXPECT_LE(spectral_norm(Mk), env.kappa * std::pow(env.gamma, k) * (1 + 1e-12)) << k;
    Mk = M * Mk;
  }
  EXPECT_THROW(spectral_envelope(Eigen::MatrixXd::Identity(2, 2)), std::domain_error);
}

TEST(Validation, Example1Passes) {
  const GeneratedSystem gs = declqr::testing::example1(2);
  EXPECT_TRUE(validate_system(gs.system, gs.cost).ok());
  EXPECT_TRUE(is_open_loop_stable(gs.system));
}
