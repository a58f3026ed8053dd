#include "declqr/audit.hpp"

#include <algorithm>
#include <climits>
#include <map>
#include <set>
#include <sstream>

#include "declqr/oco.hpp"

namespace declqr {

namespace {

using Key = std::pair<int, int>;  // (time, subsystem or node)

struct Controller {
  int i = 0;
  std::vector<int> tree;     // T_i
  std::vector<bool> in_tree;
  std::vector<int> leaves;   // L(T_i), decreasing delay to i
  std::vector<int> origins;  // C_i, ascending
  std::map<Key, VectorXd> K1;
  std::map<Key, std::vector<MatrixXd>> K2;
  std::vector<int> latched_at;  // per subsystem, INT_MAX if not seen latched
  std::map<Key, VectorXd> input_cache;

  // Component-local coordinates.
  std::vector<int> state_local;  // per subsystem: offset in x_C or -1
  std::vector<int> input_local;  // per subsystem: offset in u_C or -1
  int nC = 0;
  int mC = 0;
  MatrixXd A, B, Q, R;
};

class Auditor {
 public:
  Auditor(const RunTrace& trace, const BlockLayout& layout, const CostSpec& cost,
          const Synthesis& syn, const AuditOptions& opt)
      : tr_(trace),
        L_(layout),
        cost_(cost),
        syn_(syn),
        opt_(opt),
        p_(layout.nodes()),
        q_(syn.ig.size()),
        h_(trace.config.h),
        Dmax_(trace.D_max),
        N_(trace.config.N),
        start_(trace.config.N + trace.D_max),
        end_(trace.steps()),
        local_(neighbor_restricted(trace.estimate, syn.D, layout)) {
    for (int k = 0; k < end_; ++k) {
      if (k < N_) {
        w_global_.push_back(VectorXd::Zero(L_.n()));
      } else {
        w_global_.push_back(tr_.x[k + 1] - local_.A_hat * tr_.x[k] - local_.B_hat * tr_.u[k]);
      }
    }
  }

  AuditReport run() {
    std::vector<Controller> ctrls;
    for (int i = 0; i < p_; ++i) ctrls.push_back(make_controller(i));
    for (int t = start_; t < end_; ++t) {
      if (opt_.record_inputs) rep_.inputs.push_back(VectorXd::Zero(L_.m()));
      for (Controller& c : ctrls) iterate(c, t);
    }
    return rep_;
  }

 private:
  void note(long& counter, const std::string& msg) {
    ++counter;
    if (static_cast<int>(rep_.messages.size()) < opt_.max_messages) rep_.messages.push_back(msg);
  }

  Controller make_controller(int i) {
    Controller c;
    c.i = i;
    c.tree = syn_.ig.trees[i];
    c.in_tree.assign(q_, false);
    for (int r : c.tree) c.in_tree[r] = true;
    c.leaves = syn_.ig.ordered_leaf_sets[i];
    for (int v : c.leaves) c.origins.push_back(syn_.ig.leaf_origin[v]);
    std::sort(c.origins.begin(), c.origins.end());
    c.latched_at.assign(p_, INT_MAX);

    c.state_local.assign(p_, -1);
    c.input_local.assign(p_, -1);
    for (int j : c.origins) {
      c.state_local[j] = c.nC;
      c.input_local[j] = c.mC;
      c.nC += L_.state_dim(j);
      c.mC += L_.input_dim(j);
    }
    const std::vector<int> sx = L_.state_indices(c.origins);
    const std::vector<int> su = L_.input_indices(c.origins);
    c.A = gather(tr_.estimate.A_hat, sx, sx);
    c.B = gather(tr_.estimate.B_hat, sx, su);
    c.Q = gather(cost_.Q, sx, sx);
    c.R = gather(cost_.R, su, su);
    check_coupling(c, sx, su);
    for (int r : c.tree) {
      for (int l : syn_.ig.nodes[r]) {
        if (c.state_local[l] < 0) {
          note(rep_.coupling_flags, "controller " + std::to_string(i + 1) + ": tree node " +
                                        format_node(syn_.ig.nodes[r]) +
                                        " leaves the controller's component");
        }
      }
    }

    // Initial windows at t = N + D_max.
    const int t0 = start_;
    for (int v : c.leaves) {
      const int j = syn_.ig.leaf_origin[v];
      for (int k = t0 - 2 * Dmax_ - 2 * h_; k <= t0 - syn_.D.at(i, j) - 2; ++k) {
        c.K1[{k, j}] = k < N_ ? VectorXd::Zero(L_.state_dim(j)) : reconstruct_w(c, t0, k, j, false);
      }
    }
    for (int k = t0 - Dmax_ - 1; k <= t0; ++k) {
      for (int s : c.tree) {
        std::vector<MatrixXd> blocks;
        for (int kk = 1; kk <= h_; ++kk) {
          blocks.push_back(MatrixXd::Zero(syn_.coords.input_idx[s].size(),
                                          syn_.coords.eta_dim[s]));
        }
        c.K2[{k, s}] = std::move(blocks);
      }
    }
    return c;
  }

  void check_coupling(const Controller& c, const std::vector<int>& sx,
                      const std::vector<int>& su) {
    std::vector<int> ox, ou;
    for (int j = 0; j < p_; ++j) {
      if (c.state_local[j] >= 0) continue;
      for (int k = 0; k < L_.state_dim(j); ++k) ox.push_back(L_.state_offset(j) + k);
      for (int k = 0; k < L_.input_dim(j); ++k) ou.push_back(L_.input_offset(j) + k);
    }
    const auto nonzero = [](const MatrixXd& M) {
      return M.size() > 0 && M.cwiseAbs().maxCoeff() != 0.0;
    };
    const std::string who = "controller " + std::to_string(c.i + 1) + ": ";
    if (nonzero(gather(tr_.estimate.A_hat, sx, ox)) || nonzero(gather(tr_.estimate.A_hat, ox, sx)) ||
        nonzero(gather(tr_.estimate.B_hat, sx, ou)) || nonzero(gather(tr_.estimate.B_hat, ox, su))) {
      note(rep_.coupling_flags, who + "estimated dynamics couple its component to others");
    }
    if (nonzero(gather(cost_.Q, sx, ox)) || nonzero(gather(cost_.R, su, ou))) {
      note(rep_.coupling_flags, who + "cost couples its component to others");
    }
  }

  /// State read through the information-set check of controller c at time t.
  VectorXd state(const Controller& c, int t, int k, int j) {
    const Delay d = syn_.D(c.i, j);
    if (!d || k > t - *d || k < t - Dmax_ - 1) {
      std::ostringstream msg;
      msg << "controller " << c.i + 1 << " at t=" << t << " read x_{" << k << "," << j + 1
          << "} outside its information set";
      note(rep_.info_violations, msg.str());
    }
    return tr_.x[k].segment(L_.state_offset(j), L_.state_dim(j));
  }

  VectorXd w_hat(Controller& c, int k, int j) {
    const auto it = c.K1.find({k, j});
    if (it != c.K1.end()) return it->second;
    std::ostringstream msg;
    msg << "controller " << c.i + 1 << " lacks w^_{" << k << "," << j + 1 << "} in K1";
    note(rep_.missing_memory, msg.str());
    return w_global_.at(k).segment(L_.state_offset(j), L_.state_dim(j));
  }

  VectorXd eta(Controller& c, int k, int s) {
    const auto& refs = syn_.ig.reach_leaves[s];
    VectorXd e = VectorXd::Zero(syn_.coords.eta_dim[s]);
    for (std::size_t r = 0; r < refs.size(); ++r) {
      const int time = k - refs[r].lag;
      if (time < 0) continue;
      e.segment(syn_.coords.eta_offset[s][r], L_.state_dim(refs[r].origin)) =
          w_hat(c, time, refs[r].origin);
    }
    return e;
  }

  const std::vector<MatrixXd>& params(Controller& c, int k, int s) {
    const auto it = c.K2.find({k, s});
    if (it != c.K2.end()) return it->second;
    std::ostringstream msg;
    msg << "controller " << c.i + 1 << " lacks M_{" << k << "," << format_node(syn_.ig.nodes[s])
        << "} in K2";
    note(rep_.missing_memory, msg.str());
    auto& slot = missing_params_[{k, s}];
    if (slot.empty()) {
      for (int kk = 1; kk <= h_; ++kk) {
        slot.push_back(MatrixXd::Zero(syn_.coords.input_idx[s].size(), syn_.coords.eta_dim[s]));
      }
    }
    return slot;
  }

  /// DFC candidate input of subsystem l at time k, from c's memories.
  VectorXd candidate(Controller& c, int k, int l) {
    VectorXd u = VectorXd::Zero(L_.input_dim(l));
    for (int r = 0; r < q_; ++r) {
      if (!syn_.ig.contains(r, l)) continue;
      if (!c.in_tree[r]) {
        note(rep_.missing_memory, "controller " + std::to_string(c.i + 1) +
                                      " needs node outside its trees");
        continue;
      }
      const auto& M = params(c, k, r);
      VectorXd ur = VectorXd::Zero(syn_.coords.input_idx[r].size());
      for (int kk = 1; kk <= h_; ++kk) ur.noalias() += M[kk - 1] * eta(c, k - kk, r);
      int offset = 0;
      for (int member : syn_.ig.nodes[r]) {
        if (member == l) break;
        offset += L_.input_dim(member);
      }
      u += ur.segment(offset, L_.input_dim(l));
    }
    return u;
  }

  /// Applied input of subsystem l at time k as known to controller c at time t.
  VectorXd applied_input(Controller& c, int t, int k, int l) {
    if (k < start_) return VectorXd::Zero(L_.input_dim(l));
    if (const auto it = c.input_cache.find({k, l}); it != c.input_cache.end()) return it->second;
    VectorXd u;
    if (c.latched_at[l] <= k) {
      u = VectorXd::Zero(L_.input_dim(l));
    } else {
      u = candidate(c, k, l);
      if (state(c, t, k, l).norm() > tr_.config.R_x || u.norm() > tr_.config.R_u) {
        c.latched_at[l] = k;
        u.setZero();
      }
    }
    c.input_cache[{k, l}] = u;
    return u;
  }

  VectorXd reconstruct_w(Controller& c, int t, int k, int j, bool premature) {
    const int row = L_.state_offset(j);
    const int nj = L_.state_dim(j);
    VectorXd w = state(c, t, premature ? k + 2 : k + 1, j);
    for (int l : structural_neighbors(syn_.D, j)) {
      w -= local_.A_hat.block(row, L_.state_offset(l), nj, L_.state_dim(l)) * state(c, t, k, l);
      if (L_.input_dim(l) > 0) {
        w -= local_.B_hat.block(row, L_.input_offset(l), nj, L_.input_dim(l)) *
             applied_input(c, t, k, l);
      }
    }
    return w;
  }

  void check_shape(Controller& c, int t) {
    std::set<Key> k1;
    for (int j : c.origins) {
      for (int k = t - 2 * Dmax_ - 2 * h_; k <= t - syn_.D.at(c.i, j) - 2; ++k) k1.insert({k, j});
    }
    std::set<Key> k2;
    for (int s : c.tree) {
      for (int k = t - Dmax_ - 1; k <= t; ++k) k2.insert({k, s});
    }
    const auto keys = [](const auto& m) {
      std::set<Key> out;
      for (const auto& kv : m) out.insert(kv.first);
      return out;
    };
    if (keys(c.K1) != k1 || keys(c.K2) != k2) {
      note(rep_.memory_shape_mismatches, "controller " + std::to_string(c.i + 1) +
                                             ": memory windows differ from closed form at t=" +
                                             std::to_string(t));
    }
    rep_.max_K1 = std::max(rep_.max_K1, c.K1.size());
    rep_.max_K2 = std::max(rep_.max_K2, c.K2.size());
  }

  void iterate(Controller& c, int t) {
    check_shape(c, t);
    const bool fault = opt_.fault && opt_.fault->controller == c.i && opt_.fault->time == t;

    bool first = true;
    for (int v : c.leaves) {
      const int j = syn_.ig.leaf_origin[v];
      const int k = t - syn_.D.at(c.i, j) - 1;
      c.K1[{k, j}] = k < N_ ? VectorXd::Zero(L_.state_dim(j))
                            : reconstruct_w(c, t, k, j, fault && first);
      first = false;
    }

    const VectorXd u = applied_input(c, t, t, c.i);
    const VectorXd recorded = tr_.u[t].segment(L_.input_offset(c.i), L_.input_dim(c.i));
    if (opt_.record_inputs) rep_.inputs.back().segment(L_.input_offset(c.i), u.size()) = u;
    if (u.size() > 0) {
      const double dev = (u - recorded).cwiseAbs().maxCoeff();
      const double scale = std::max(1.0, recorded.cwiseAbs().maxCoeff());
      rep_.max_deviation = std::max(rep_.max_deviation, dev);
      rep_.max_scaled_deviation = std::max(rep_.max_scaled_deviation, dev / scale);
    }

    update_params(c, t);

    for (int s : c.tree) c.K2.erase({t - Dmax_ - 1, s});
    for (int j : c.origins) c.K1.erase({t - 2 * Dmax_ - 2 * h_, j});
    // Cached inputs older than any future reconstruction.
    for (auto it = c.input_cache.begin(); it != c.input_cache.end();) {
      it = it->first.first < t - Dmax_ - 1 ? c.input_cache.erase(it) : std::next(it);
    }
  }

  /// Gradient of f_{t - D_max} restricted to c's component, and the projected
  /// step for every node of its trees.
  void update_params(Controller& c, int t) {
    const int tp = t - Dmax_;
    std::vector<const std::vector<MatrixXd>*> M(q_, nullptr);
    for (int r : c.tree) M[r] = &params(c, tp, r);

    std::map<Key, VectorXd> etas;
    for (int k = tp - 2 * h_; k <= tp - 1; ++k) {
      for (int r : c.tree) etas[{k, r}] = eta(c, k, r);
    }
    const auto local_rows = [&](int r) {
      std::vector<int> rows;
      for (int l : syn_.ig.nodes[r]) {
        for (int d = 0; d < L_.input_dim(l); ++d) {
          rows.push_back(c.input_local[l] < 0 ? -1 : c.input_local[l] + d);
        }
      }
      return rows;
    };
    std::vector<std::vector<int>> rows(q_);
    for (int r : c.tree) rows[r] = local_rows(r);

    std::vector<VectorXd> u(h_ + 1, VectorXd::Zero(c.mC));
    for (int k = tp - h_; k <= tp; ++k) {
      VectorXd& uk = u[k - (tp - h_)];
      for (int r : c.tree) {
        VectorXd ur = VectorXd::Zero(rows[r].size());
        for (int kk = 1; kk <= h_; ++kk) ur.noalias() += (*M[r])[kk - 1] * etas.at({k - kk, r});
        for (std::size_t a = 0; a < rows[r].size(); ++a) {
          if (rows[r][a] >= 0) uk(rows[r][a]) += ur(a);
        }
      }
    }
    VectorXd x = VectorXd::Zero(c.nC);
    for (int k = tp - h_; k < tp; ++k) {
      VectorXd w(c.nC);
      for (int j : c.origins) w.segment(c.state_local[j], L_.state_dim(j)) = w_hat(c, k, j);
      x = c.A * x + w + c.B * u[k - (tp - h_)];
    }
    std::vector<VectorXd> gu(h_ + 1);
    gu[h_] = 2.0 * (c.R * u[h_]);
    VectorXd a = 2.0 * (c.Q * x);
    for (int k = tp - 1; k >= tp - h_; --k) {
      gu[k - (tp - h_)] = c.B.transpose() * a;
      a = c.A.transpose() * a;
    }
    const double eta_t = oco_step_size(tr_.config.alpha, t);
    for (int r : c.tree) {
      std::vector<MatrixXd> next = params(c, t, r);
      for (int k = tp - h_; k <= tp; ++k) {
        VectorXd g = VectorXd::Zero(rows[r].size());
        for (std::size_t b = 0; b < rows[r].size(); ++b) {
          if (rows[r][b] >= 0) g(b) = gu[k - (tp - h_)](rows[r][b]);
        }
        for (int kk = 1; kk <= h_; ++kk) {
          next[kk - 1].noalias() -= eta_t * (g * etas.at({k - kk, r}).transpose());
        }
      }
      for (MatrixXd& blk : next) {
        const double nrm = blk.norm();
        if (nrm > tr_.config.radius) blk *= tr_.config.radius / nrm;
      }
      c.K2[{t + 1, r}] = std::move(next);
    }
  }

  const RunTrace& tr_;
  const BlockLayout& L_;
  const CostSpec& cost_;
  const Synthesis& syn_;
  AuditOptions opt_;
  int p_, q_, h_, Dmax_, N_, start_, end_;
  Estimate local_;
  std::vector<VectorXd> w_global_;
  std::map<Key, std::vector<MatrixXd>> missing_params_;
  AuditReport rep_;
};

}  // namespace

AuditReport decentralized_audit(const RunTrace& trace, const BlockLayout& layout,
                                const CostSpec& cost, const Synthesis& syn,
                                const AuditOptions& options) {
  Auditor auditor(trace, layout, cost, syn, options);
  return auditor.run();
}

}  // namespace declqr
