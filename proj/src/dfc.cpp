#include "declqr/dfc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace declqr {

DfcStructure::DfcStructure(InfoGraph ig, BlockLayout layout, int h)
    : ig_(std::move(ig)), layout_(std::move(layout)), h_(h) {
  if (h_ < 1) throw std::invalid_argument("DFC horizon h must be >= 1");
  if (ig_.p != layout_.nodes()) {
    throw std::invalid_argument("info graph and layout disagree on the number of subsystems");
  }
  coords_ = node_coords(ig_, layout_);
}

DfcParams::DfcParams(const DfcStructure& st, double radius) : h_(st.h()), radius_(radius) {
  blocks_.reserve(static_cast<std::size_t>(st.num_nodes()) * h_);
  for (int s = 0; s < st.num_nodes(); ++s) {
    for (int k = 1; k <= h_; ++k) blocks_.push_back(MatrixXd::Zero(st.rows(s), st.cols(s)));
  }
}

double DfcParams::squared_norm() const {
  double acc = 0.0;
  for (const MatrixXd& b : blocks_) acc += b.squaredNorm();
  return acc;
}

double DfcParams::max_block_norm() const {
  double best = 0.0;
  for (const MatrixXd& b : blocks_) best = std::max(best, b.norm());
  return best;
}

bool DfcParams::in_class(double slack) const {
  return max_block_norm() <= radius_ * (1.0 + slack);
}

DfcParams& DfcParams::axpy(double a, const DfcParams& x) {
  if (x.blocks_.size() != blocks_.size()) throw std::invalid_argument("DfcParams shape mismatch");
  for (std::size_t k = 0; k < blocks_.size(); ++k) blocks_[k] += a * x.blocks_[k];
  return *this;
}

DfcParams& DfcParams::scale(double a) {
  for (MatrixXd& b : blocks_) b *= a;
  return *this;
}

void DfcParams::set_zero() {
  for (MatrixXd& b : blocks_) b.setZero();
}

double dot(const DfcParams& a, const DfcParams& b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.blocks_.size(); ++k) {
    acc += a.blocks_[k].cwiseProduct(b.blocks_[k]).sum();
  }
  return acc;
}

DisturbanceHistory::DisturbanceHistory(int n, int capacity, int zero_before)
    : n_(n),
      capacity_(capacity),
      zero_before_(std::max(zero_before, 0)),
      next_(std::max(zero_before, 0)),
      zero_(VectorXd::Zero(n)),
      ring_(capacity) {
  if (capacity < 1) throw std::invalid_argument("history capacity must be >= 1");
}

void DisturbanceHistory::push(int t, const VectorXd& w_hat) {
  if (t != next_) {
    throw std::logic_error("disturbance history: expected time " + std::to_string(next_) +
                           ", got " + std::to_string(t));
  }
  if (w_hat.size() != n_) throw std::invalid_argument("disturbance history: dimension");
  ring_[static_cast<std::size_t>(t % capacity_)] = w_hat;
  ++next_;
}

bool DisturbanceHistory::available(int t) const {
  if (t < zero_before_) return true;
  return t < next_ && t >= next_ - capacity_;
}

const VectorXd& DisturbanceHistory::at(int t) const {
  if (t < zero_before_) return zero_;
  if (t >= next_) {
    throw std::out_of_range("disturbance estimate for time " + std::to_string(t) +
                            " not yet available");
  }
  if (t < next_ - capacity_) {
    throw std::out_of_range("disturbance estimate for time " + std::to_string(t) +
                            " was evicted");
  }
  return ring_[static_cast<std::size_t>(t % capacity_)];
}

int history_capacity(int D_max, int h) { return 2 * D_max + 2 * h + 2; }

Estimate neighbor_restricted(const Estimate& estimate, const DelayMatrix& D,
                             const BlockLayout& layout) {
  Estimate out = estimate;
  const int p = layout.nodes();
  for (int j = 0; j < p; ++j) {
    for (int k = 0; k < p; ++k) {
      const Delay d = D(j, k);
      if (d && *d <= 1) continue;
      out.A_hat
          .block(layout.state_offset(j), layout.state_offset(k), layout.state_dim(j),
                 layout.state_dim(k))
          .setZero();
      out.B_hat
          .block(layout.state_offset(j), layout.input_offset(k), layout.state_dim(j),
                 layout.input_dim(k))
          .setZero();
    }
  }
  return out;
}

VectorXd estimate_disturbance(const Estimate& estimate, const BlockLayout& layout,
                              const DelayMatrix& D, int j, const VectorXd& x_next_j,
                              const VectorXd& x_neighbors, const VectorXd& u_neighbors) {
  const std::vector<int> nbrs = structural_neighbors(D, j);
  const std::vector<int> row{j};
  const std::vector<int> rows = layout.state_indices(row);
  const MatrixXd A_j = gather(estimate.A_hat, rows, layout.state_indices(nbrs));
  const MatrixXd B_j = gather(estimate.B_hat, rows, layout.input_indices(nbrs));
  if (x_neighbors.size() != A_j.cols() || u_neighbors.size() != B_j.cols()) {
    throw std::invalid_argument("estimate_disturbance: neighbour vector dimension");
  }
  return x_next_j - A_j * x_neighbors - B_j * u_neighbors;
}

VectorXd assemble_eta(const DfcStructure& st, const DisturbanceHistory& hist, int t, int s) {
  const auto& refs = st.graph().reach_leaves[s];
  const auto& offsets = st.coords().eta_offset[s];
  const BlockLayout& layout = st.layout();
  VectorXd eta = VectorXd::Zero(st.cols(s));
  for (std::size_t k = 0; k < refs.size(); ++k) {
    const int time = t - refs[k].lag;
    if (time < 0) continue;
    const int j = refs[k].origin;
    eta.segment(offsets[k], layout.state_dim(j)) =
        hist.at(time).segment(layout.state_offset(j), layout.state_dim(j));
  }
  return eta;
}

namespace {

/// eta^_{k,s} for k in [lo, hi].
class EtaTable {
 public:
  EtaTable(const DfcStructure& st, const DisturbanceHistory& hist, int lo, int hi)
      : lo_(lo), q_(st.num_nodes()) {
    eta_.reserve(static_cast<std::size_t>(std::max(hi - lo + 1, 0)) * q_);
    for (int k = lo; k <= hi; ++k) {
      for (int s = 0; s < q_; ++s) eta_.push_back(assemble_eta(st, hist, k, s));
    }
  }
  const VectorXd& at(int k, int s) const {
    return eta_[static_cast<std::size_t>(k - lo_) * q_ + s];
  }

 private:
  int lo_;
  int q_;
  std::vector<VectorXd> eta_;
};

VectorXd control_from(const DfcStructure& st, const DfcParams& M, const EtaTable& etas,
                      int t) {
  VectorXd u = VectorXd::Zero(st.layout().m());
  for (int s = 0; s < st.num_nodes(); ++s) {
    const auto& idx = st.coords().input_idx[s];
    if (idx.empty()) continue;
    VectorXd us = VectorXd::Zero(static_cast<int>(idx.size()));
    for (int k = 1; k <= st.h(); ++k) us.noalias() += M.block(s, k) * etas.at(t - k, s);
    for (std::size_t r = 0; r < idx.size(); ++r) u(idx[r]) += us(r);
  }
  return u;
}

void check_window(const DfcStructure& st, std::span<const DfcParams> window) {
  if (static_cast<int>(window.size()) != st.h()) {
    throw std::invalid_argument("parameter window must hold exactly h entries");
  }
}

}  // namespace

VectorXd dfc_control(const DfcStructure& st, const DfcParams& M,
                     const DisturbanceHistory& hist, int t) {
  const EtaTable etas(st, hist, t - st.h(), t - 1);
  return control_from(st, M, etas, t);
}

VectorXd counterfactual_state(const DfcStructure& st, std::span<const DfcParams> window,
                              const Estimate& estimate, const DisturbanceHistory& hist,
                              int t) {
  check_window(st, window);
  const int h = st.h();
  const EtaTable etas(st, hist, t - 2 * h, t - 1);
  VectorXd x = VectorXd::Zero(st.layout().n());
  for (int k = t - h; k < t; ++k) {
    const VectorXd u = control_from(st, window[k - (t - h)], etas, k);
    x = estimate.A_hat * x + hist.at(k) + estimate.B_hat * u;
  }
  return x;
}

double counterfactual_cost(const DfcStructure& st, std::span<const DfcParams> window,
                           const DfcParams& M_t, const Estimate& estimate,
                           const CostSpec& cost, const DisturbanceHistory& hist, int t) {
  const VectorXd x = counterfactual_state(st, window, estimate, hist, t);
  const VectorXd u = dfc_control(st, M_t, hist, t);
  return stage_cost(cost, x, u);
}

double unary_cost(const DfcStructure& st, const DfcParams& M, const Estimate& estimate,
                  const CostSpec& cost, const DisturbanceHistory& hist, int t) {
  const std::vector<DfcParams> window(st.h(), M);
  return counterfactual_cost(st, window, M, estimate, cost, hist, t);
}

double prediction_cost(const DfcStructure& st, std::span<const DfcParams> window,
                       const DfcParams& M_t, const NetworkedSystem& system,
                       const CostSpec& cost, const DisturbanceHistory& true_w,
                       const DisturbanceHistory& hat_w, int t) {
  check_window(st, window);
  const int h = st.h();
  const EtaTable etas(st, hat_w, t - 2 * h, t - 1);
  VectorXd x = VectorXd::Zero(st.layout().n());
  for (int k = t - h; k < t; ++k) {
    const VectorXd u = control_from(st, window[k - (t - h)], etas, k);
    x = system.A * x + true_w.at(k) + system.B * u;
  }
  return stage_cost(cost, x, control_from(st, M_t, etas, t));
}

DfcParams grad_counterfactual(const DfcStructure& st, const DfcParams& M,
                              const Estimate& estimate, const CostSpec& cost,
                              const DisturbanceHistory& hist, int t) {
  const int h = st.h();
  const EtaTable etas(st, hist, t - 2 * h, t - 1);
  std::vector<VectorXd> u(h + 1);
  for (int k = t - h; k <= t; ++k) u[k - (t - h)] = control_from(st, M, etas, k);

  VectorXd x = VectorXd::Zero(st.layout().n());
  for (int k = t - h; k < t; ++k) {
    x = estimate.A_hat * x + hist.at(k) + estimate.B_hat * u[k - (t - h)];
  }

  // Adjoint pass: gu[k] = d f / d u_k.
  std::vector<VectorXd> gu(h + 1);
  gu[h] = 2.0 * (cost.R * u[h]);
  VectorXd a = 2.0 * (cost.Q * x);
  for (int k = t - 1; k >= t - h; --k) {
    gu[k - (t - h)] = estimate.B_hat.transpose() * a;
    a = estimate.A_hat.transpose() * a;
  }

  DfcParams grad = M;
  grad.set_zero();
  for (int s = 0; s < st.num_nodes(); ++s) {
    const auto& idx = st.coords().input_idx[s];
    if (idx.empty()) continue;
    for (int k = t - h; k <= t; ++k) {
      const VectorXd g = gather(gu[k - (t - h)], idx);
      for (int kk = 1; kk <= h; ++kk) {
        grad.block(s, kk).noalias() += g * etas.at(k - kk, s).transpose();
      }
    }
  }
  return grad;
}

DfcParams project_onto_class(const DfcParams& M, double radius) {
  DfcParams out = M;
  out.set_radius(radius);
  for (MatrixXd& b : out.blocks()) {
    const double nrm = b.norm();
    if (nrm > radius) b *= radius / nrm;
  }
  return out;
}

}  // namespace declqr
