#include "declqr/sysid.hpp"

#include <cmath>
#include <stdexcept>

#include "declqr/riccati.hpp"

namespace declqr {

VectorXd Trajectory::regressor(int t) const {
  VectorXd z(states[t].size() + inputs[t].size());
  z << states[t], inputs[t];
  return z;
}

Trajectory run_exploration(const NetworkedSystem& system, int N, double sigma_u,
                           Rng& noise_rng, Rng& input_rng) {
  if (N < 1) throw std::invalid_argument("exploration length must be >= 1");
  const int n = system.layout.n();
  const int m = system.layout.m();
  Trajectory traj;
  traj.states.push_back(VectorXd::Zero(n));
  for (int t = 0; t < N; ++t) {
    VectorXd u = gaussian_vector(input_rng, m, sigma_u);
    const VectorXd w = gaussian_vector(noise_rng, n, system.sigma_w);
    traj.states.push_back(step(system, traj.states.back(), u, w));
    traj.inputs.push_back(std::move(u));
  }
  return traj;
}

MatrixXd regularized_ls(const Trajectory& traj, double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  const int N = traj.length();
  if (N < 1) throw std::invalid_argument("empty trajectory");
  const int n = static_cast<int>(traj.states[0].size());
  const int d = n + static_cast<int>(traj.inputs[0].size());
  MatrixXd gram = lambda * MatrixXd::Identity(d, d);
  MatrixXd cross = MatrixXd::Zero(n, d);
  for (int t = 0; t < N; ++t) {
    const VectorXd z = traj.regressor(t);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(z);
    cross.noalias() += traj.states[t + 1] * z.transpose();
  }
  gram = gram.selfadjointView<Eigen::Lower>();

  Eigen::SelfAdjointEigenSolver<MatrixXd> es(gram);
  const VectorXd ev = es.eigenvalues();
  const double top = ev.maxCoeff();
  const double bottom = ev.minCoeff();
  if (lambda == 0.0 && (top <= 0.0 || bottom <= 1e-14 * top)) {
    throw std::domain_error("regularized_ls: singular Gram matrix with lambda = 0 (ill-posed)");
  }
  if (bottom > 1e-12 * top) {
    Eigen::LLT<MatrixXd> llt(gram);
    return llt.solve(cross.transpose()).transpose();
  }
  // Poorly conditioned: pseudo-inverse with an eigenvalue floor.
  VectorXd inv = VectorXd::Zero(d);
  for (int k = 0; k < d; ++k) {
    if (ev(k) > 1e-12 * top) inv(k) = 1.0 / ev(k);
  }
  const MatrixXd& V = es.eigenvectors();
  return cross * V * inv.asDiagonal() * V.transpose();
}

Estimate sparsify(const MatrixXd& phi_tilde, const DelayMatrix& D, const BlockLayout& layout,
                  double lambda, int N) {
  const int n = layout.n();
  const int m = layout.m();
  if (phi_tilde.rows() != n || phi_tilde.cols() != n + m) {
    throw std::invalid_argument("sparsify: estimate must be n x (n + m)");
  }
  Estimate est;
  est.A_hat = phi_tilde.leftCols(n);
  est.B_hat = phi_tilde.rightCols(m);
  est.lambda = lambda;
  est.N = N;
  const int p = layout.nodes();
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (D.reachable(i, j)) continue;
      est.A_hat
          .block(layout.state_offset(i), layout.state_offset(j), layout.state_dim(i),
                 layout.state_dim(j))
          .setZero();
      est.B_hat
          .block(layout.state_offset(i), layout.input_offset(j), layout.state_dim(i),
                 layout.input_dim(j))
          .setZero();
    }
  }
  return est;
}

bool apply_threshold(Estimate& estimate, double vartheta) {
  if (spectral_norm(estimate.A_hat) > vartheta || spectral_norm(estimate.B_hat) > vartheta) {
    estimate.A_hat.setZero();
    estimate.B_hat.setZero();
    return true;
  }
  return false;
}

double estimation_error(const NetworkedSystem& system, const Estimate& estimate) {
  MatrixXd diff(system.layout.n(), system.layout.n() + system.layout.m());
  diff << system.A - estimate.A_hat, system.B - estimate.B_hat;
  return spectral_norm(diff);
}

ExplorationRecommendation recommend_exploration_length(const AnalysisConstants& c, int n,
                                                       int m, int p, int q, int h,
                                                       double sigma_w, double sigma_u,
                                                       double lambda, double T, int psi) {
  ExplorationRecommendation r;
  const double sig_lo = std::min(sigma_w, sigma_u);
  const double sig_hi = std::max(sigma_w, sigma_u);
  const double G = c.Gamma;
  r.z_b = 5.0 * c.kappa / (1.0 - c.gamma) * sig_hi *
          std::sqrt(2.0 * (G * G * m + m + n) * std::log(2.0 * T));
  r.epsilon0 = (1.0 - c.gamma) * sigma_w /
               (14.0 * p * p * q * (G * c.kappa + 1.0) * std::sqrt(double(n)) * c.kappa *
                std::pow(G, 2 * c.D_max + 1) * double(h) * h);
  const double core = 480.0 * psi * n * sigma_w * sigma_w * (n + m) *
                      std::log((T + r.z_b * r.z_b / lambda) * T) * G * G;
  r.N = std::max(core / (sig_lo * sig_lo * r.epsilon0 * r.epsilon0), std::sqrt(T));
  const double eps_T = std::sqrt(core / (std::sqrt(T) * sig_lo * sig_lo));
  r.epsilon_T = eps_T;
  r.epsilon0_binds = r.epsilon0 < eps_T;
  r.epsilon_bar = std::min(eps_T, r.epsilon0);
  return r;
}

}  // namespace declqr
