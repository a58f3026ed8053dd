#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"

using namespace declqr;
using namespace declqr::testing;

namespace {

MatrixXd phi_of(const NetworkedSystem& s) {
  MatrixXd phi(s.layout.n(), s.layout.n() + s.layout.m());
  phi << s.A, s.B;
  return phi;
}

}  // namespace

TEST(RegularizedLs, NoiseFreeRecoveryMatchesDenseSolve) {
  GeneratedSystem gs = example1(11);
  gs.system.sigma_w = 0.0;
  Rng nr(1), ir(2);
  const Trajectory tr = run_exploration(gs.system, 40, 1.0, nr, ir);
  const MatrixXd est = regularized_ls(tr, 0.0);
  EXPECT_LT((est - phi_of(gs.system)).cwiseAbs().maxCoeff(), 1e-8);

  // Independent: least squares on stacked regressors by column-pivoting QR.
  const int d = gs.system.layout.n() + gs.system.layout.m();
  MatrixXd Z(tr.length(), d), X(tr.length(), gs.system.layout.n());
  for (int t = 0; t < tr.length(); ++t) {
    Z.row(t) = tr.regressor(t).transpose();
    X.row(t) = tr.states[t + 1].transpose();
  }
  const MatrixXd ref = Z.colPivHouseholderQr().solve(X).transpose();
  EXPECT_LT((est - ref).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(RegularizedLs, RidgeMatchesClosedForm) {
  const GeneratedSystem gs = example1(12);
  Rng nr(3), ir(4);
  const Trajectory tr = run_exploration(gs.system, 30, 1.0, nr, ir);
  const int d = gs.system.layout.n() + gs.system.layout.m();
  MatrixXd V = 2.5 * MatrixXd::Identity(d, d);
  MatrixXd S = MatrixXd::Zero(gs.system.layout.n(), d);
  for (int t = 0; t < tr.length(); ++t) {
    V += tr.regressor(t) * tr.regressor(t).transpose();
    S += tr.states[t + 1] * tr.regressor(t).transpose();
  }
  const MatrixXd ref = S * V.inverse();
  EXPECT_LT((regularized_ls(tr, 2.5) - ref).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(RegularizedLs, SingularGramWithoutRidgeThrows) {
  GeneratedSystem gs = example1(13);
  Rng nr(1), ir(2);
  const Trajectory tr = run_exploration(gs.system, 2, 1.0, nr, ir);
  EXPECT_THROW(regularized_ls(tr, 0.0), std::domain_error);
}

TEST(Sparsify, ZeroesUnreachableBlocks) {
  const CommGraph chain(3, {{0, 1, 1}, {1, 2, 1}});
  const DelayMatrix D = compute_delay_matrix(chain);
  const BlockLayout L({2, 1, 1}, {1, 1, 2});
  const MatrixXd dense = MatrixXd::Ones(L.n(), L.n() + L.m());
  const Estimate e = sparsify(dense, D, L);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double a = e.A_hat.block(L.state_offset(i), L.state_offset(j), L.state_dim(i),
                                     L.state_dim(j)).sum();
      const double b = e.B_hat.block(L.state_offset(i), L.input_offset(j), L.state_dim(i),
                                     L.input_dim(j)).sum();
      const double expect_a = D.reachable(i, j) ? L.state_dim(i) * L.state_dim(j) : 0.0;
      const double expect_b = D.reachable(i, j) ? L.state_dim(i) * L.input_dim(j) : 0.0;
      EXPECT_EQ(a, expect_a) << i << "," << j;
      EXPECT_EQ(b, expect_b) << i << "," << j;
    }
  }
}

TEST(Sparsify, ErrorWithinSqrtPsiOfRawError) {
  Rng rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    GeneratorSpec spec;
    spec.shape = "random";
    spec.p = 4;
    spec.edge_density = 0.25;
    const GeneratedSystem gs = generate_system(spec, 1.0, rng);
    Rng nr(trial), ir(trial + 100);
    const Trajectory tr = run_exploration(gs.system, 50, 1.0, nr, ir);
    const MatrixXd tilde = regularized_ls(tr, 1.0);
    const Estimate e = sparsify(tilde, compute_delay_matrix(gs.system.graph), gs.system.layout);
    const double psi = static_cast<double>(scc_partition(gs.system.graph).size());
    EXPECT_LE(estimation_error(gs.system, e),
              std::sqrt(psi) * spectral_norm(phi_of(gs.system) - tilde) * (1 + 1e-12));
  }
}

TEST(Threshold, DiscardsBothEstimates) {
  Estimate e;
  e.A_hat = MatrixXd::Identity(2, 2) * 5.0;
  e.B_hat = MatrixXd::Identity(2, 1);
  EXPECT_TRUE(apply_threshold(e, 2.0));
  EXPECT_EQ(e.A_hat.norm(), 0.0);
  EXPECT_EQ(e.B_hat.norm(), 0.0);
  Estimate f;
  f.A_hat = MatrixXd::Identity(2, 2);
  f.B_hat = MatrixXd::Identity(2, 1);
  EXPECT_FALSE(apply_threshold(f, 2.0));
  EXPECT_EQ(f.A_hat, MatrixXd::Identity(2, 2));
}

TEST(ExplorationLength, HandEvaluatedUnitConstants) {
  AnalysisConstants c;
  c.Gamma = 1.0;
  c.kappa = 1.0;
  c.gamma = 0.5;
  c.D_max = 0;
  const double T = 100.0;
  const ExplorationRecommendation r =
      recommend_exploration_length(c, 1, 1, 1, 1, 1, 1.0, 1.0, 1.0, T, 1);
  const double z_b = 10.0 * std::sqrt(6.0 * std::log(200.0));
  const double eps0 = 0.5 / 28.0;
  const double core = 960.0 * std::log((T + z_b * z_b) * T);
  EXPECT_NEAR(r.z_b, z_b, 1e-12 * z_b);
  EXPECT_NEAR(r.epsilon0, eps0, 1e-15);
  EXPECT_NEAR(r.N, std::max(core / (eps0 * eps0), 10.0), 1e-9 * r.N);
  EXPECT_NEAR(r.epsilon_T, std::sqrt(core / 10.0), 1e-12 * r.epsilon_T);
  EXPECT_DOUBLE_EQ(r.epsilon_bar, std::min(r.epsilon_T, eps0));
}

TEST(ExplorationLength, MonotoneInHorizonAndComponents) {
  AnalysisConstants c;
  const auto N = [&](double T, int psi) {
    return recommend_exploration_length(c, 3, 3, 3, 4, 8, 1.0, 1.0, 1.0, T, psi).N;
  };
  EXPECT_LE(N(1e3, 1), N(1e4, 1));
  EXPECT_LE(N(1e4, 1), N(1e4, 2));
}

TEST(Exploration, ErrorShrinksWithData) {
  const GeneratedSystem gs = example1(14);
  const DelayMatrix D = compute_delay_matrix(gs.system.graph);
  const auto mean_err = [&](int N) {
    double sum = 0.0;
    for (int s = 0; s < 20; ++s) {
      Rng nr(derive_seed(5, 1, s)), ir(derive_seed(5, 2, s));
      const Trajectory tr = run_exploration(gs.system, N, 1.0, nr, ir);
      sum += estimation_error(gs.system, sparsify(regularized_ls(tr, 1.0), D, gs.system.layout));
    }
    return sum / 20;
  };
  EXPECT_GT(mean_err(100) / mean_err(1600), 2.5);
}
