#include <gtest/gtest.h>

#include <cmath>

#include "declqr/oco.hpp"
#include "declqr/rng.hpp"

using namespace declqr;

namespace {

struct Quadratic {
  double alpha;
  VectorXd c;
  VectorXd grad(const VectorXd& x) const { return alpha * (x - c); }
  double value(const VectorXd& x) const { return 0.5 * alpha * (x - c).squaredNorm(); }
};

}  // namespace

TEST(Oco, StepSize) {
  EXPECT_DOUBLE_EQ(oco_step_size(2.0, 0), 1.5);
  EXPECT_DOUBLE_EQ(oco_step_size(2.0, 1), 1.5);
  EXPECT_DOUBLE_EQ(oco_step_size(2.0, 6), 0.25);
}

TEST(Oco, BallProjection) {
  const BallSet ball(VectorXd::Zero(2), 1.0);
  const VectorXd p = ball.project((VectorXd(2) << 3.0, 4.0).finished());
  EXPECT_NEAR(p(0), 0.6, 1e-15);
  EXPECT_NEAR(p(1), 0.8, 1e-15);
  EXPECT_TRUE(ball.contains(p));
  EXPECT_EQ(ball.project(VectorXd::Constant(2, 0.1)), VectorXd::Constant(2, 0.1));
  EXPECT_DOUBLE_EQ(ball.diameter(), 2.0);
}

TEST(Oco, QuadraticConvergesWithAndWithoutDelay) {
  const Quadratic f{2.0, (VectorXd(3) << 1.0, -2.0, 0.5).finished()};
  const BallSet ball(VectorXd::Zero(3), 100.0);
  for (int tau : {0, 5}) {
    const OcoConfig cfg{tau, f.alpha, 10000, VectorXd::Constant(3, 10.0)};
    const auto xs = run_oco(cfg, ball, [&](int, const VectorXd& x) { return f.grad(x); });
    ASSERT_EQ(xs.size(), static_cast<std::size_t>(10000 + tau + 1));
    EXPECT_LE((xs.back() - f.c).norm(), 1e-3) << "tau=" << tau;
    for (int k = 0; k <= tau; ++k) EXPECT_EQ(xs[k], cfg.x_init);
  }
}

TEST(Oco, DelayCostsAtMostAConstantFactor) {
  const Quadratic f{1.0, VectorXd::Constant(2, 0.7)};
  const BallSet ball(VectorXd::Zero(2), 5.0);
  const UnaryLoss u = [&](int, const VectorXd& x) { return f.value(x); };
  const MemoryLoss F = [&](int t, const std::vector<VectorXd>& w) { return u(t, w.front()); };
  const auto regret_for = [&](int tau) {
    const OcoConfig cfg{tau, f.alpha, 10000, VectorXd::Constant(2, -3.0)};
    const auto xs = run_oco(cfg, ball, [&](int, const VectorXd& x) { return f.grad(x); });
    return regret_of(xs, 0, 9999, 0, F, u, f.c);
  };
  const double r0 = regret_for(0), r5 = regret_for(5);
  EXPECT_GT(r0, 0.0);
  EXPECT_LE(r5, 6.0 * r0 + 10.0);
}

TEST(Oco, RegretAgainstGridOptimumIsNonNegative) {
  // Drifting 1-D losses f_t(x) = (x - c_t)^2 / 2 with c_t uniform in [-1, 1].
  Rng rng(21);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const int T = 2000;
  std::vector<double> c(T);
  for (double& v : c) v = unif(rng);
  const BallSet ball(VectorXd::Zero(1), 2.0);
  const OcoConfig cfg{0, 1.0, T, VectorXd::Zero(1)};
  const auto xs = run_oco(cfg, ball, [&](int t, const VectorXd& x) {
    return VectorXd::Constant(1, x(0) - c[t]);
  });
  const UnaryLoss u = [&](int t, const VectorXd& x) { return 0.5 * std::pow(x(0) - c[t], 2); };
  const MemoryLoss F = [&](int t, const std::vector<VectorXd>& w) { return u(t, w.front()); };
  double best = std::numeric_limits<double>::infinity();
  for (int g = -2000; g <= 2000; ++g) {
    const VectorXd x = VectorXd::Constant(1, g / 1000.0);
    double total = 0.0;
    for (int t = 0; t < T; ++t) total += u(t, x);
    best = std::min(best, total);
  }
  double alg = 0.0;
  for (int t = 0; t < T; ++t) alg += u(t, xs[t]);
  EXPECT_GE(alg - best, -1e-3);
}

TEST(Oco, RegretGrowsLogarithmically) {
  const Quadratic f{1.0, VectorXd::Constant(4, 0.3)};
  const BallSet ball(VectorXd::Zero(4), 10.0);
  const UnaryLoss u = [&](int, const VectorXd& x) { return f.value(x); };
  const MemoryLoss F = [&](int t, const std::vector<VectorXd>& w) { return u(t, w.front()); };
  const auto regret_at = [&](int T) {
    const OcoConfig cfg{0, f.alpha, T, VectorXd::Constant(4, 5.0)};
    const auto xs = run_oco(cfg, ball, [&](int, const VectorXd& x) { return f.grad(x); });
    return regret_of(xs, 0, T - 1, 0, F, u, f.c);
  };
  EXPECT_LE(regret_at(20000) / regret_at(10000), 1.6);
}

TEST(Oco, GradientFailureNamesTheStep) {
  const BallSet ball(VectorXd::Zero(1), 1.0);
  const OcoConfig cfg{0, 1.0, 10, VectorXd::Zero(1)};
  try {
    run_oco(cfg, ball, [](int t, const VectorXd& x) -> VectorXd {
      if (t == 4) throw std::runtime_error("boom");
      return x;
    });
    FAIL() << "expected a throw";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find('4'), std::string::npos);
  }
}
