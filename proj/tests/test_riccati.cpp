#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"

using namespace declqr;
using namespace declqr::testing;

namespace {

// b = q = r = 1: p = 1 + a^2 p - a^2 p^2 / (1 + p) reduces to p^2 - a^2 p - 1 = 0.
double scalar_root(double a) {
  const double a2 = a * a;
  return 0.5 * (a2 + std::sqrt(a2 * a2 + 4.0));
}

}  // namespace

TEST(Dare, ScalarRoot) {
  const double a = 0.5;
  const DareSolution s = solve_root_dare(MatrixXd::Constant(1, 1, a), MatrixXd::Ones(1, 1),
                                         MatrixXd::Ones(1, 1), MatrixXd::Ones(1, 1));
  const double P = scalar_root(a);
  EXPECT_NEAR(s.P(0, 0), P, 1e-10);
  EXPECT_NEAR(s.K(0, 0), -a * P / (1.0 + P), 1e-10);
}

TEST(Dare, UnstabilizableThrows) {
  EXPECT_THROW(solve_root_dare(MatrixXd::Constant(1, 1, 2.0), MatrixXd::Zero(1, 1),
                               MatrixXd::Ones(1, 1), MatrixXd::Ones(1, 1)),
               DareError);
}

TEST(Synthesis, ScalarCostIsNoiseTimesP) {
  const NetworkedSystem s = scalar_system(0.5, 1.0, 0.7);
  const Synthesis syn = synthesize(s, identity_cost(1, 1));
  EXPECT_NEAR(syn.J_star, 0.49 * scalar_root(0.5), 1e-10);
}

TEST(Synthesis, DecoupledNodesSolveIndependently) {
  MatrixXd A = MatrixXd::Zero(3, 3), B = MatrixXd::Zero(3, 3);
  A.diagonal() << 0.2, -0.5, 0.9;
  B.diagonal() << 1.0, 0.5, 2.0;
  const NetworkedSystem sys(CommGraph(3, {}), BlockLayout({1, 1, 1}, {1, 1, 1}), A, B, 1.0);
  const Synthesis syn = synthesize(sys, identity_cost(3, 3));
  double J = 0.0;
  for (int i = 0; i < 3; ++i) {
    const DareSolution ref = solve_root_dare(A.block(i, i, 1, 1), B.block(i, i, 1, 1),
                                             MatrixXd::Ones(1, 1), MatrixXd::Ones(1, 1));
    const int node = syn.ig.leaf_of[i];
    EXPECT_NEAR(syn.gains.K[node](0, 0), ref.K(0, 0), 1e-10);
    EXPECT_NEAR(syn.gains.P[node](0, 0), ref.P(0, 0), 1e-10);
    J += ref.P(0, 0);
  }
  EXPECT_NEAR(syn.J_star, J, 1e-9);
}

TEST(Synthesis, Example1GainsArePsdAndRootsStable) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const GeneratedSystem gs = example1(seed);
    const Synthesis syn = synthesize(gs.system, gs.cost);
    for (const MatrixXd& P : syn.gains.P) EXPECT_TRUE(is_psd(P));
    for (int r : syn.ig.roots) EXPECT_LT(spectral_radius(syn.gains.F[r]), 1.0);
    EXPECT_GT(syn.J_star, 0.0);
  }
}

TEST(OptimalController, InternalStatesSumToPlantState) {
  const GeneratedSystem gs = example1(4);
  const Synthesis syn = synthesize(gs.system, gs.cost);
  const int n = syn.layout.n();
  std::vector<VectorXd> zeta = zero_zeta(syn);
  VectorXd x = VectorXd::Zero(n);
  Rng rng(9);
  for (int t = 0; t < 200; ++t) {
    VectorXd sum = VectorXd::Zero(n);
    for (int s = 0; s < syn.ig.size(); ++s) {
      const auto& idx = syn.coords.state_idx[s];
      for (std::size_t a = 0; a < idx.size(); ++a) sum(idx[a]) += zeta[s](a);
    }
    ASSERT_LT((sum - x).cwiseAbs().maxCoeff(), 1e-10) << "t=" << t;
    const VectorXd w = gaussian_vector(rng, n, 1.0);
    OptimalStep os = optimal_controller_step(syn, zeta, w);
    x = step(gs.system, x, os.u, w);
    zeta = std::move(os.zeta_next);
  }
}

TEST(AnalysisConstants, ScalarGamma) {
  const NetworkedSystem s = scalar_system(0.5, 1.0);
  const Synthesis syn = synthesize(s, identity_cost(1, 1));
  const AnalysisConstants c = analysis_constants(s, syn);
  const double k = syn.gains.K[0](0, 0);
  EXPECT_NEAR(c.gamma, std::max((std::abs(0.5 + k) + 1.0) / 2.0, 0.75), 1e-12);
  EXPECT_GE(c.Gamma, 1.0);
  EXPECT_EQ(c.D_max, 0);
}

TEST(AnalysisConstants, Example1DelayBound) {
  const GeneratedSystem gs = example1(1);
  const Synthesis syn = synthesize(gs.system, gs.cost);
  EXPECT_EQ(analysis_constants(gs.system, syn).D_max, 1);
}

TEST(AnalysisConstants, BoundFormula) {
  AnalysisConstants c;
  c.kappa = 2.0;
  c.gamma = 0.5;
  c.Gamma = 3.0;
  c.D_max = 1;
  EXPECT_DOUBLE_EQ(lemma6_bound(c, 3, 2), 2.0 * 0.5 * 3 * 27.0);
}

TEST(Export, GainsMentionEveryNode) {
  const GeneratedSystem gs = example1(1);
  const Synthesis syn = synthesize(gs.system, gs.cost);
  const std::string text = export_gains(syn);
  for (const NodeSet& s : syn.ig.nodes) EXPECT_NE(text.find(format_node(s)), std::string::npos);
}
