#pragma once

#include <vector>

#include "declqr/netsys.hpp"
#include "declqr/rng.hpp"

namespace declqr {

/// States x_0..x_N and inputs u_0..u_{N-1} from one exploration run.
struct Trajectory {
  std::vector<VectorXd> states;
  std::vector<VectorXd> inputs;

  int length() const { return static_cast<int>(inputs.size()); }
  /// Regressor z_t = [x_t; u_t].
  VectorXd regressor(int t) const;
};

struct Estimate {
  MatrixXd A_hat;
  MatrixXd B_hat;
  double lambda = 0.0;
  int N = 0;
};

/// Plays u_t ~ N(0, sigma_u^2 I) for t < N from x_0 = 0. Process noise is drawn
/// from `noise_rng`, inputs from `input_rng`.
Trajectory run_exploration(const NetworkedSystem& system, int N, double sigma_u,
                           Rng& noise_rng, Rng& input_rng);

/// Ridge estimate (sum x_{t+1} z_t^T)(sum z_t z_t^T + lambda I)^{-1}.
/// Throws std::domain_error if lambda == 0 and the Gram matrix is singular.
MatrixXd regularized_ls(const Trajectory& traj, double lambda);

/// Splits [A~ B~] and zeroes every block (i, j) with D(i, j) = INF.
Estimate sparsify(const MatrixXd& phi_tilde, const DelayMatrix& D, const BlockLayout& layout,
                  double lambda = 0.0, int N = 0);

/// Zeroes both estimates if either spectral norm exceeds vartheta. Returns
/// true when the estimates were discarded.
bool apply_threshold(Estimate& estimate, double vartheta);

/// Spectral norm of [A B] - [A^ B^].
double estimation_error(const NetworkedSystem& system, const Estimate& estimate);

struct AnalysisConstants;

struct ExplorationRecommendation {
  double N = 0.0;
  double epsilon0 = 0.0;
  double epsilon_bar = 0.0;
  double epsilon_T = 0.0;  // estimation radius of the sqrt(T) branch alone
  double z_b = 0.0;
  bool epsilon0_binds = false;
};

/// Evaluates the theoretical exploration length, the accuracy target eps_0
/// and the resulting estimation radius eps_bar. Diagnostic only.
ExplorationRecommendation recommend_exploration_length(const AnalysisConstants& constants,
                                                       int n, int m, int p, int q, int h,
                                                       double sigma_w, double sigma_u,
                                                       double lambda, double T, int psi);

}  // namespace declqr
