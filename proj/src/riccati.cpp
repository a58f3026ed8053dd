#include "declqr/riccati.hpp"

#include <cmath>
#include <deque>
#include <iomanip>
#include <sstream>

namespace declqr {

namespace {

MatrixXd gain(const MatrixXd& A_sr, const MatrixXd& B_sr, const MatrixXd& P_s,
              const MatrixXd& R_rr) {
  if (B_sr.cols() == 0) return MatrixXd::Zero(0, A_sr.cols());
  const MatrixXd S = R_rr + B_sr.transpose() * P_s * B_sr;
  return -S.ldlt().solve(B_sr.transpose() * P_s * A_sr);
}

MatrixXd value(const MatrixXd& A_sr, const MatrixXd& B_sr, const MatrixXd& K_r,
               const MatrixXd& P_s, const MatrixXd& Q_rr, const MatrixXd& R_rr) {
  const MatrixXd F = A_sr + B_sr * K_r;
  MatrixXd P = Q_rr + K_r.transpose() * R_rr * K_r + F.transpose() * P_s * F;
  return 0.5 * (P + P.transpose());
}

}  // namespace

DareSolution solve_root_dare(const MatrixXd& A, const MatrixXd& B, const MatrixXd& Q,
                             const MatrixXd& R, const DareOptions& opts) {
  DareSolution sol;
  MatrixXd P = 0.5 * (Q + Q.transpose());
  for (int it = 1; it <= opts.max_iter; ++it) {
    const MatrixXd K = gain(A, B, P, R);
    const MatrixXd next = value(A, B, K, P, Q, R);
    const double change = (next - P).norm();
    P = next;
    sol.iterations = it;
    sol.residual = change / std::max(P.norm(), 1.0);
    if (!std::isfinite(sol.residual)) break;
    if (sol.residual <= opts.tol) {
      sol.P = P;
      sol.K = gain(A, B, P, R);
      const double rho = spectral_radius(A + B * sol.K);
      if (!(rho < 1.0)) {
        throw DareError("DARE closed loop unstable (spectral radius " + std::to_string(rho) +
                        ")");
      }
      return sol;
    }
  }
  throw DareError("DARE value iteration did not converge after " +
                  std::to_string(sol.iterations) + " iterations (residual " +
                  std::to_string(sol.residual) + ")");
}

NodeGains backward_gain_recursion(const InfoGraph& ig, const NetworkedSystem& system,
                                  const CostSpec& cost, const DareOptions& opts) {
  const int q = ig.size();
  const NodeCoords c = node_coords(ig, system.layout);
  NodeGains g;
  g.K.resize(q);
  g.P.resize(q);
  g.F.resize(q);

  std::vector<std::vector<int>> preds(q);
  for (int r = 0; r < q; ++r) {
    if (ig.successor[r] != r) preds[ig.successor[r]].push_back(r);
  }
  std::deque<int> queue(ig.roots.begin(), ig.roots.end());
  while (!queue.empty()) {
    const int r = queue.front();
    queue.pop_front();
    g.order.push_back(r);
    const int s = ig.successor[r];
    const MatrixXd A_sr = gather(system.A, c.state_idx[s], c.state_idx[r]);
    const MatrixXd B_sr = gather(system.B, c.state_idx[s], c.input_idx[r]);
    const MatrixXd Q_rr = gather(cost.Q, c.state_idx[r], c.state_idx[r]);
    const MatrixXd R_rr = gather(cost.R, c.input_idx[r], c.input_idx[r]);
    if (s == r) {
      DareSolution sol = solve_root_dare(A_sr, B_sr, Q_rr, R_rr, opts);
      g.P[r] = std::move(sol.P);
      g.K[r] = std::move(sol.K);
    } else {
      g.K[r] = gain(A_sr, B_sr, g.P[s], R_rr);
      g.P[r] = value(A_sr, B_sr, g.K[r], g.P[s], Q_rr, R_rr);
    }
    g.F[r] = A_sr + B_sr * g.K[r];
    for (int pred : preds[r]) queue.push_back(pred);
  }
  if (static_cast<int>(g.order.size()) != q) {
    throw std::logic_error("information graph has nodes unreachable from any root");
  }
  return g;
}

double optimal_cost(const NodeGains& gains, const InfoGraph& ig, const BlockLayout& layout,
                    double sigma_w) {
  double acc = 0.0;
  for (int i = 0; i < ig.p; ++i) {
    const int s = ig.leaf_of[i];
    int offset = 0;
    for (int j : ig.nodes[s]) {
      if (j == i) break;
      offset += layout.state_dim(j);
    }
    acc += gains.P[s].block(offset, offset, layout.state_dim(i), layout.state_dim(i)).trace();
  }
  return sigma_w * sigma_w * acc;
}

Synthesis synthesize(const NetworkedSystem& system, const CostSpec& cost,
                     const DareOptions& opts) {
  Synthesis syn{compute_delay_matrix(system.graph), InfoGraph{}, system.layout, {}, {}, 0.0};
  syn.ig = build_info_graph(syn.D);
  syn.coords = node_coords(syn.ig, system.layout);
  syn.gains = backward_gain_recursion(syn.ig, system, cost, opts);
  syn.J_star = optimal_cost(syn.gains, syn.ig, system.layout, system.sigma_w);
  return syn;
}

AnalysisConstants analysis_constants(const NetworkedSystem& system, const Synthesis& syn) {
  AnalysisConstants c;
  double G = std::max({spectral_norm(system.A), spectral_norm(system.B), 1.0});
  for (int r = 0; r < syn.ig.size(); ++r) {
    G = std::max({G, spectral_norm(syn.gains.P[r]), spectral_norm(syn.gains.K[r])});
  }
  c.Gamma = G;
  const SpectralEnvelope env0 = spectral_envelope(system.A);
  c.gamma0 = env0.gamma;
  c.kappa0 = env0.kappa;
  c.gamma = env0.gamma;
  c.kappa = env0.kappa;
  for (int s : syn.ig.roots) {
    const SpectralEnvelope env = spectral_envelope(syn.gains.F[s]);
    c.gamma = std::max(c.gamma, env.gamma);
    c.kappa = std::max(c.kappa, env.kappa);
  }
  // kappa was fitted per matrix against its own gamma; a larger common gamma
  // keeps every envelope valid.
  c.D_max = syn.D.max_finite();
  return c;
}

std::vector<VectorXd> zero_zeta(const Synthesis& syn) {
  std::vector<VectorXd> zeta;
  for (int s = 0; s < syn.ig.size(); ++s) {
    zeta.push_back(VectorXd::Zero(static_cast<int>(syn.coords.state_idx[s].size())));
  }
  return zeta;
}

OptimalStep optimal_controller_step(const Synthesis& syn, const std::vector<VectorXd>& zeta,
                                    const VectorXd& w) {
  const int q = syn.ig.size();
  OptimalStep out;
  out.u = VectorXd::Zero(syn.layout.m());
  for (int r = 0; r < q; ++r) {
    const VectorXd ur = syn.gains.K[r] * zeta[r];
    const auto& idx = syn.coords.input_idx[r];
    for (std::size_t k = 0; k < idx.size(); ++k) out.u(idx[k]) += ur(k);
  }
  out.zeta_next = zero_zeta(syn);
  for (int r = 0; r < q; ++r) {
    out.zeta_next[syn.ig.successor[r]] += syn.gains.F[r] * zeta[r];
  }
  for (int i = 0; i < syn.ig.p; ++i) {
    const int s = syn.ig.leaf_of[i];
    int offset = 0;
    for (int j : syn.ig.nodes[s]) {
      if (j == i) break;
      offset += syn.layout.state_dim(j);
    }
    out.zeta_next[s].segment(offset, syn.layout.state_dim(i)) +=
        w.segment(syn.layout.state_offset(i), syn.layout.state_dim(i));
  }
  return out;
}

MatrixXd leaf_matrix(const Synthesis& syn, int s) {
  const auto& refs = syn.ig.reach_leaves[s];
  const int rows = static_cast<int>(syn.coords.state_idx[s].size());
  MatrixXd L(rows, syn.coords.eta_dim[s]);
  for (std::size_t k = 0; k < refs.size(); ++k) {
    const int v = refs[k].leaf;
    const int j = refs[k].origin;
    const int nv = static_cast<int>(syn.coords.state_idx[v].size());
    int offset = 0;
    for (int i : syn.ig.nodes[v]) {
      if (i == j) break;
      offset += syn.layout.state_dim(i);
    }
    MatrixXd H = MatrixXd::Zero(nv, syn.layout.state_dim(j));
    H.middleRows(offset, syn.layout.state_dim(j)).setIdentity();
    int r = v;
    for (int step = 0; step < refs[k].lag; ++step) {
      H = syn.gains.F[r] * H;
      r = syn.ig.successor[r];
    }
    L.middleCols(syn.coords.eta_offset[s][k], syn.layout.state_dim(j)) = H;
  }
  return L;
}

DfcParams dfc_of_optimal(const Synthesis& syn, const DfcStructure& st, double radius) {
  DfcParams M(st, radius);
  for (int s = 0; s < syn.ig.size(); ++s) {
    const MatrixXd L = leaf_matrix(syn, s);
    if (!syn.ig.is_root[s]) {
      M.block(s, 1) = syn.gains.K[s] * L;
      continue;
    }
    MatrixXd power = L;  // Acl^{k-1} L
    for (int k = 1; k <= st.h(); ++k) {
      M.block(s, k) = syn.gains.K[s] * power;
      power = syn.gains.F[s] * power;
    }
  }
  return M;
}

double lemma6_bound(const AnalysisConstants& c, int p, int k) {
  return c.kappa * std::pow(c.gamma, k - 1) * p * std::pow(c.Gamma, 2 * c.D_max + 1);
}

double class_radius(const AnalysisConstants& c, int n, int p) {
  return 2.0 * std::sqrt(static_cast<double>(n)) * c.kappa * p *
         std::pow(c.Gamma, 2 * c.D_max + 1);
}

std::string export_gains(const Synthesis& syn) {
  std::ostringstream out;
  out << std::setprecision(17);
  const Eigen::IOFormat fmt(Eigen::FullPrecision, Eigen::DontAlignCols, " ", "; ", "", "", "[",
                            "]");
  out << "J_star " << syn.J_star << '\n';
  for (int r = 0; r < syn.ig.size(); ++r) {
    out << "node " << format_node(syn.ig.nodes[r]) << '\n';
    out << "  K " << syn.gains.K[r].format(fmt) << '\n';
    out << "  P " << syn.gains.P[r].format(fmt) << '\n';
  }
  return out.str();
}

}  // namespace declqr
