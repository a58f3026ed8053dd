#pragma once

#include <stdexcept>
#include <vector>

#include "declqr/dfc.hpp"
#include "declqr/infograph.hpp"
#include "declqr/netsys.hpp"

namespace declqr {

struct DareOptions {
  double tol = 1e-12;  // relative change between iterates
  int max_iter = 100000;
};

class DareError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DareSolution {
  MatrixXd P;
  MatrixXd K;
  int iterations = 0;
  double residual = 0.0;
};

/// Value iteration on the Riccati map from P = Q. Throws DareError on
/// non-convergence or an unstable closed loop.
DareSolution solve_root_dare(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                             const MatrixXd& R, const DareOptions& opts = {});

/// Per info-graph node r with successor s: K_r, P_r and F_r = A_sr + B_sr K_r.
struct NodeGains {
  std::vector<MatrixXd> K;
  std::vector<MatrixXd> P;
  std::vector<MatrixXd> F;
  std::vector<int> order;  // processing order, roots first
};

NodeGains backward_gain_recursion(const InfoGraph& ig, const NetworkedSystem& system,
                                  const CostSpec& cost, const DareOptions& opts = {});

/// sigma_w^2 * sum_i trace of the (i, i) block of P at s_{0,i}.
double optimal_cost(const NodeGains& gains, const InfoGraph& ig, const BlockLayout& layout,
                    double sigma_w);

struct AnalysisConstants {
  double Gamma = 1.0;
  double gamma = 0.5;
  double kappa = 1.0;
  int D_max = 0;
  double gamma0 = 0.5;
  double kappa0 = 1.0;
};

/// Everything the controller layers need about the optimal decentralized policy.
struct Synthesis {
  DelayMatrix D;
  InfoGraph ig;
  BlockLayout layout;
  NodeCoords coords;
  NodeGains gains;
  double J_star = 0.0;
};

Synthesis synthesize(const NetworkedSystem& system, const CostSpec& cost,
                     const DareOptions& opts = {});

/// Gamma, gamma, kappa and D_max. Throws std::domain_error if A or a root
/// closed loop is not stable.
AnalysisConstants analysis_constants(const NetworkedSystem& system, const Synthesis& syn);

std::vector<VectorXd> zero_zeta(const Synthesis& syn);

struct OptimalStep {
  VectorXd u;
  std::vector<VectorXd> zeta_next;
};

/// u*_t from the internal states and the advanced states after injecting w_t.
OptimalStep optimal_controller_step(const Synthesis& syn, const std::vector<VectorXd>& zeta,
                                    const VectorXd& w);

/// Stacked leaf matrix [H_{v,s} I_{v,{j_v}}]_{v in L_s}.
MatrixXd leaf_matrix(const Synthesis& syn, int s);

/// M*_s^[k] for k = 1..st.h().
DfcParams dfc_of_optimal(const Synthesis& syn, const DfcStructure& st, double radius);

/// kappa * gamma^{k-1} * p * Gamma^{2 D_max + 1}.
double lemma6_bound(const AnalysisConstants& c, int p, int k);

/// Frobenius cap 2 sqrt(n) kappa p Gamma^{2 D_max + 1}.
double class_radius(const AnalysisConstants& c, int n, int p);

/// Structured-text dump of K_r and P_r per node.
std::string export_gains(const Synthesis& syn);

}  // namespace declqr
