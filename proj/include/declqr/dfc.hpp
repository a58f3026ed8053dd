#pragma once

#include <deque>
#include <span>
#include <vector>

#include "declqr/infograph.hpp"
#include "declqr/sysid.hpp"

namespace declqr {

/// Static shape information shared by every DFC evaluation on one system.
class DfcStructure {
 public:
  /// Throws std::invalid_argument if h < 1.
  DfcStructure(InfoGraph ig, BlockLayout layout, int h);

  const InfoGraph& graph() const { return ig_; }
  const BlockLayout& layout() const { return layout_; }
  const NodeCoords& coords() const { return coords_; }
  int h() const { return h_; }
  int num_nodes() const { return ig_.size(); }
  /// Block shape of M_s^[k]: m_s x n_{L_s}.
  int rows(int s) const { return static_cast<int>(coords_.input_idx[s].size()); }
  int cols(int s) const { return coords_.eta_dim[s]; }

 private:
  InfoGraph ig_;
  BlockLayout layout_;
  NodeCoords coords_;
  int h_;
};

/// M = (M_s^[k]) for s in U, k = 1..h, with a per-block Frobenius cap.
class DfcParams {
 public:
  DfcParams() = default;
  /// All-zero parameters shaped after `st`.
  DfcParams(const DfcStructure& st, double radius);

  int h() const { return h_; }
  int num_nodes() const { return h_ == 0 ? 0 : static_cast<int>(blocks_.size()) / h_; }
  double radius() const { return radius_; }
  void set_radius(double r) { radius_ = r; }

  MatrixXd& block(int s, int k) { return blocks_[index(s, k)]; }
  const MatrixXd& block(int s, int k) const { return blocks_[index(s, k)]; }
  std::vector<MatrixXd>& blocks() { return blocks_; }
  const std::vector<MatrixXd>& blocks() const { return blocks_; }

  /// Sum of squared Frobenius norms over all blocks.
  double squared_norm() const;
  double max_block_norm() const;
  /// Every block's Frobenius norm is within radius * (1 + slack).
  bool in_class(double slack = 1e-12) const;

  DfcParams& axpy(double a, const DfcParams& x);
  DfcParams& scale(double a);
  void set_zero();

  friend DfcParams operator+(DfcParams a, const DfcParams& b) { return a.axpy(1.0, b); }
  friend DfcParams operator-(DfcParams a, const DfcParams& b) { return a.axpy(-1.0, b); }
  friend DfcParams operator*(double c, DfcParams a) { return a.scale(c); }
  friend double dot(const DfcParams& a, const DfcParams& b);
  friend bool operator==(const DfcParams& a, const DfcParams& b) {
    return a.h_ == b.h_ && a.radius_ == b.radius_ && a.blocks_ == b.blocks_;
  }

 private:
  std::size_t index(int s, int k) const {
    return static_cast<std::size_t>(s) * h_ + (k - 1);
  }
  int h_ = 0;
  double radius_ = 0.0;
  std::vector<MatrixXd> blocks_;
};

/// Estimated disturbances w^_t (full stacked vectors) over a sliding window.
/// Entries with t < zero_before (or t < 0) read as zero.
class DisturbanceHistory {
 public:
  DisturbanceHistory(int n, int capacity, int zero_before = 0);

  /// Appends w^_t; t must equal next_time().
  void push(int t, const VectorXd& w_hat);
  /// Throws std::out_of_range for evicted or not yet recorded times.
  const VectorXd& at(int t) const;
  bool available(int t) const;
  int next_time() const { return next_; }
  int zero_before() const { return zero_before_; }
  int capacity() const { return capacity_; }

 private:
  int n_;
  int capacity_;
  int zero_before_;
  int next_;
  VectorXd zero_;
  std::vector<VectorXd> ring_;
};

/// Window length 2 D_max + 2h + 2 used by the learner.
int history_capacity(int D_max, int h);

/// Â and B̂ with every block outside N_j = {k : D_jk <= 1} zeroed, so that
/// x_{t+1} - Â_N x_t - B̂_N u_t stacks the per-node estimates.
Estimate neighbor_restricted(const Estimate& estimate, const DelayMatrix& D,
                             const BlockLayout& layout);

/// x_{t+1,j} - Â_j x_{t,N_j} - B̂_j u_{t,N_j}; neighbour vectors stacked in
/// ascending N_j order.
VectorXd estimate_disturbance(const Estimate& estimate, const BlockLayout& layout,
                              const DelayMatrix& D, int j, const VectorXd& x_next_j,
                              const VectorXd& x_neighbors, const VectorXd& u_neighbors);

/// eta^_{t,s}: w^_{t - l_vs, j_v} stacked over v in L_s.
VectorXd assemble_eta(const DfcStructure& st, const DisturbanceHistory& hist, int t, int s);

/// sum_s sum_k embed_s(M_s^[k] eta^_{t-k,s}).
VectorXd dfc_control(const DfcStructure& st, const DfcParams& M,
                     const DisturbanceHistory& hist, int t);

/// h-step rollout under (Â, B̂) driven by w^ and controls from window[k], where
/// window holds M_{t-h}, ..., M_{t-1}.
VectorXd counterfactual_state(const DfcStructure& st, std::span<const DfcParams> window,
                              const Estimate& estimate, const DisturbanceHistory& hist,
                              int t);

double counterfactual_cost(const DfcStructure& st, std::span<const DfcParams> window,
                           const DfcParams& M_t, const Estimate& estimate,
                           const CostSpec& cost, const DisturbanceHistory& hist, int t);

/// Unary form f_t(M): every window entry equal to M.
double unary_cost(const DfcStructure& st, const DfcParams& M, const Estimate& estimate,
                  const CostSpec& cost, const DisturbanceHistory& hist, int t);

/// Rollout under the true (A, B) and true w, with controls computed from w^.
double prediction_cost(const DfcStructure& st, std::span<const DfcParams> window,
                       const DfcParams& M_t, const NetworkedSystem& system,
                       const CostSpec& cost, const DisturbanceHistory& true_w,
                       const DisturbanceHistory& hat_w, int t);

/// Exact gradient of the unary f_t with respect to every block.
DfcParams grad_counterfactual(const DfcStructure& st, const DfcParams& M,
                              const Estimate& estimate, const CostSpec& cost,
                              const DisturbanceHistory& hist, int t);

/// Rescales each block into the Frobenius ball of the given radius.
DfcParams project_onto_class(const DfcParams& M, double radius);

}  // namespace declqr
