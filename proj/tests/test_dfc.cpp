#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace declqr;
using namespace declqr::testing;

namespace {

DfcParams random_params(const DfcStructure& st, Rng& rng, double scale) {
  DfcParams M(st, 1e300);
  std::normal_distribution<double> normal;
  for (MatrixXd& b : M.blocks()) {
    b = scale * MatrixXd::NullaryExpr(b.rows(), b.cols(), [&] { return normal(rng); });
  }
  return M;
}

Estimate exact(const NetworkedSystem& s) {
  Estimate e;
  e.A_hat = s.A;
  e.B_hat = s.B;
  return e;
}

}  // namespace

TEST(DisturbanceHistory, WindowSemantics) {
  DisturbanceHistory h(2, 3, 0);
  for (int t = 0; t < 5; ++t) h.push(t, VectorXd::Constant(2, t + 1.0));
  EXPECT_EQ(h.at(-4), VectorXd::Zero(2));
  EXPECT_THROW(h.at(1), std::out_of_range);  // evicted
  EXPECT_EQ(h.at(4), VectorXd::Constant(2, 5.0));
  EXPECT_THROW(h.at(5), std::out_of_range);
  EXPECT_THROW(h.push(7, VectorXd::Zero(2)), std::logic_error);

  DisturbanceHistory z(1, 10, 2);
  EXPECT_EQ(z.next_time(), 2);
  for (int t = 2; t < 4; ++t) z.push(t, VectorXd::Ones(1));
  EXPECT_EQ(z.at(1)(0), 0.0);
  EXPECT_EQ(z.at(2)(0), 1.0);
}

TEST(DfcStructure, RejectsZeroHorizon) {
  const GeneratedSystem gs = example1(1);
  const Synthesis syn = synthesize(gs.system, gs.cost);
  EXPECT_THROW(DfcStructure(syn.ig, syn.layout, 0), std::invalid_argument);
}

TEST(Eta, RootStacksLeavesAtTheirLags) {
  const GeneratedSystem gs = example1(1);
  const Synthesis syn = synthesize(gs.system, gs.cost);
  const DfcStructure st(syn.ig, syn.layout, 4);
  DisturbanceHistory hist(3, 20, 0);
  for (int t = 0; t < 12; ++t) hist.push(t, (VectorXd(3) << 100 + t, 200 + t, 300 + t).finished());
  const int root = syn.ig.find({0, 1, 2});
  ASSERT_GE(root, 0);
  const auto& refs = syn.ig.reach_leaves[root];
  ASSERT_EQ(refs.size(), 3u);
  const VectorXd eta = assemble_eta(st, hist, 10, root);
  for (std::size_t r = 0; r < refs.size(); ++r) {
    // Lag recomputed by walking successors from the leaf.
    int node = refs[r].leaf, lag = 0;
    while (node != root) {
      node = syn.ig.successor[node];
      ++lag;
    }
    EXPECT_EQ(refs[r].lag, lag);
    EXPECT_EQ(eta(r), 100.0 * (refs[r].origin + 1) + 10 - lag);
  }
}

TEST(DisturbanceEstimate, ErrorIsModelMismatchTimesData) {
  const GeneratedSystem gs = example1(2);
  const DelayMatrix D = compute_delay_matrix(gs.system.graph);
  const BlockLayout& L = gs.system.layout;
  Rng rng(5);
  Estimate e;
  e.A_hat = gs.system.A + 0.1 * MatrixXd::Random(3, 3);
  e.B_hat = gs.system.B + 0.1 * MatrixXd::Random(3, 3);
  e = sparsify((MatrixXd(3, 6) << e.A_hat, e.B_hat).finished(), D, L);
  for (int j = 0; j < 3; ++j) {
    const VectorXd x = gaussian_vector(rng, 3, 1.0), u = gaussian_vector(rng, 3, 1.0),
                   w = gaussian_vector(rng, 3, 1.0);
    const VectorXd x_next = step(gs.system, x, u, w);
    const std::vector<int> nbrs = structural_neighbors(D, j);
    const VectorXd got = estimate_disturbance(e, L, D, j, x_next.segment(j, 1),
                                              gather(x, L.state_indices(nbrs)),
                                              gather(u, L.input_indices(nbrs)));
    const Estimate loc = neighbor_restricted(e, D, L);
    const VectorXd expect = w + (gs.system.A - loc.A_hat) * x + (gs.system.B - loc.B_hat) * u;
    EXPECT_NEAR(got(0), expect(j), 1e-12);
  }
}

TEST(DfcControl, OptimalParametersReproduceOptimalInputs) {
  const GeneratedSystem gs = example1(3);
  const Synthesis syn = synthesize(gs.system, gs.cost);
  const int h = 60;
  const DfcStructure st(syn.ig, syn.layout, h);
  const DfcParams M = dfc_of_optimal(syn, st, 1e300);
  DisturbanceHistory hist(3, 2 * h + 4, 0);
  std::vector<VectorXd> zeta = zero_zeta(syn);
  Rng rng(8);
  for (int t = 0; t < h; ++t) {
    const VectorXd w = gaussian_vector(rng, 3, 1.0);
    const OptimalStep os = optimal_controller_step(syn, zeta, w);
    EXPECT_LT((dfc_control(st, M, hist, t) - os.u).cwiseAbs().maxCoeff(), 1e-10);
    hist.push(t, w);
    zeta = os.zeta_next;
  }
}

TEST(Counterfactual, ExactModelMatchesPlantRollout) {
  const GeneratedSystem gs = example1(4);
  const Synthesis syn = synthesize(gs.system, gs.cost);
  const int h = 6;
  const DfcStructure st(syn.ig, syn.layout, h);
  Rng rng(12);
  const DfcParams M = random_params(st, rng, 0.3);
  DisturbanceHistory hist(3, 30, 0);
  VectorXd x = VectorXd::Zero(3);
  for (int t = 0; t < h; ++t) {
    const VectorXd w = gaussian_vector(rng, 3, 1.0);
    const VectorXd u = dfc_control(st, M, hist, t);
    hist.push(t, w);
    x = step(gs.system, x, u, w);
  }
  const std::vector<DfcParams> window(h, M);
  const VectorXd xc = counterfactual_state(st, window, exact(gs.system), hist, h);
  EXPECT_LT((xc - x).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(UnaryCost, QuadraticAlongRays) {
  const GeneratedSystem gs = example1(5);
  const Synthesis syn = synthesize(gs.system, gs.cost);
  const DfcStructure st(syn.ig, syn.layout, 3);
  Rng rng(13);
  const DfcParams M = random_params(st, rng, 1.0);
  DisturbanceHistory hist(3, 20, 0);
  for (int t = 0; t < 10; ++t) hist.push(t, gaussian_vector(rng, 3, 1.0));
  const Estimate e = exact(gs.system);
  std::vector<double> f;
  for (int c = 0; c < 4; ++c) f.push_back(unary_cost(st, double(c) * M, e, gs.cost, hist, 10));
  const double third_difference = f[3] - 3 * f[2] + 3 * f[1] - f[0];
  EXPECT_NEAR(third_difference, 0.0, 1e-9 * std::abs(f[3]));
  EXPECT_GT(f[2] - 2 * f[1] + f[0], 0.0);
}

TEST(PredictionCost, TruncationErrorShrinksWithHorizon) {
  const GeneratedSystem gs = example1(6, 0.8);
  const Synthesis syn = synthesize(gs.system, gs.cost);
  Rng rng(14);
  const int T = 80;
  std::vector<VectorXd> w;
  for (int t = 0; t < T; ++t) w.push_back(gaussian_vector(rng, 3, 1.0));
  // Realized cost under u = 0 from x_0 = 0, versus its h-step truncations.
  VectorXd x = VectorXd::Zero(3);
  for (int t = 0; t < T; ++t) x = gs.system.A * x + w[t];
  const double realized = stage_cost(gs.cost, x, VectorXd::Zero(3));
  const auto gap = [&](int h) {
    const DfcStructure st(syn.ig, syn.layout, h);
    DisturbanceHistory hist(3, T + 1, 0);
    for (int t = 0; t < T; ++t) hist.push(t, w[t]);
    const DfcParams zero(st, 1.0);
    const std::vector<DfcParams> window(h, zero);
    return std::abs(prediction_cost(st, window, zero, gs.system, gs.cost, hist, hist, T) -
                    realized);
  };
  EXPECT_LT(gap(20), gap(10));
  EXPECT_LT(gap(40), 1e-3 * std::max(1.0, realized));
}

TEST(Gradient, MatchesFiniteDifferences) {
  const GeneratedSystem gs = example1(7);
  const Synthesis syn = synthesize(gs.system, gs.cost);
  const DfcStructure st(syn.ig, syn.layout, 2);
  Rng rng(15);
  Estimate e;
  e.A_hat = 0.5 * MatrixXd::Random(3, 3);
  e.B_hat = MatrixXd::Random(3, 3);
  DisturbanceHistory hist(3, 20, 0);
  for (int t = 0; t < 8; ++t) hist.push(t, gaussian_vector(rng, 3, 1.0));
  const DfcParams M = random_params(st, rng, 1.0);
  const DfcParams g = grad_counterfactual(st, M, e, gs.cost, hist, 8);
  const double d = 1e-5;
  for (std::size_t b = 0; b < M.blocks().size(); ++b) {
    for (Eigen::Index k = 0; k < M.blocks()[b].size(); ++k) {
      DfcParams p = M, m = M;
      p.blocks()[b].data()[k] += d;
      m.blocks()[b].data()[k] -= d;
      const double fd = (unary_cost(st, p, e, gs.cost, hist, 8) -
                         unary_cost(st, m, e, gs.cost, hist, 8)) / (2 * d);
      EXPECT_NEAR(g.blocks()[b].data()[k], fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(Projection, NonExpansiveAndCapped) {
  const GeneratedSystem gs = example1(8);
  const Synthesis syn = synthesize(gs.system, gs.cost);
  const DfcStructure st(syn.ig, syn.layout, 3);
  Rng rng(16);
  for (int trial = 0; trial < 50; ++trial) {
    const DfcParams a = random_params(st, rng, 2.0), b = random_params(st, rng, 2.0);
    const DfcParams pa = project_onto_class(a, 1.5), pb = project_onto_class(b, 1.5);
    EXPECT_TRUE(pa.in_class());
    EXPECT_LE(std::sqrt((pa - pb).squared_norm()), std::sqrt((a - b).squared_norm()) + 1e-12);
    EXPECT_LE(pa.max_block_norm(), 1.5 * (1 + 1e-12));
  }
}
