#include "declqr/netsys.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace declqr {

CommGraph::CommGraph(int p, std::vector<Edge> edges) : p_(p), edges_(std::move(edges)) {
  if (p_ < 1) throw std::invalid_argument("graph needs at least one node");
  std::set<std::pair<int, int>> seen;
  for (const Edge& e : edges_) {
    if (e.from < 0 || e.from >= p_ || e.to < 0 || e.to >= p_) {
      throw std::invalid_argument("edge endpoint out of range");
    }
    if (e.from == e.to) throw std::invalid_argument("self loops are not allowed");
    if (e.delay != 0 && e.delay != 1) {
      throw std::invalid_argument("edge delay must be 0 or 1");
    }
    if (!seen.emplace(e.from, e.to).second) {
      throw std::invalid_argument("duplicate edge");
    }
  }
}

CommGraph CommGraph::without_edge(int from, int to) const {
  std::vector<Edge> kept;
  for (const Edge& e : edges_) {
    if (!(e.from == from && e.to == to)) kept.push_back(e);
  }
  return CommGraph(p_, std::move(kept));
}

DelayMatrix::DelayMatrix(int p) : p_(p), d_(static_cast<std::size_t>(p) * p) {
  for (int i = 0; i < p; ++i) d_[index(i, i)] = 0;
}

int DelayMatrix::at(int i, int j) const {
  const Delay d = (*this)(i, j);
  if (!d) throw std::out_of_range("delay matrix entry is unreachable");
  return *d;
}

int DelayMatrix::max_finite() const {
  int best = 0;
  for (const Delay& d : d_) {
    if (d) best = std::max(best, *d);
  }
  return best;
}

DelayMatrix compute_delay_matrix(const CommGraph& graph, bool allow_zero_delay_cycles) {
  const int p = graph.size();
  DelayMatrix D(p);
  // Bellman-Ford style relaxation; integer weights so p rounds suffice.
  for (int round = 0; round < p; ++round) {
    bool changed = false;
    for (const Edge& e : graph.edges()) {
      // Path j -> ... -> e.from -> e.to.
      for (int j = 0; j < p; ++j) {
        const Delay head = D(e.from, j);
        if (!head) continue;
        const int cand = *head + e.delay;
        const Delay cur = D(e.to, j);
        if (!cur || cand < *cur) {
          D.set(e.to, j, cand);
          changed = true;
        }
      }
    }
    if (!changed) break;
  }
  for (int i = 0; i < p && !allow_zero_delay_cycles; ++i) {
    for (int j = i + 1; j < p; ++j) {
      if (D(i, j) == 0 && D(j, i) == 0) {
        std::ostringstream msg;
        msg << "zero-delay directed cycle through nodes " << i + 1 << " and " << j + 1;
        throw std::invalid_argument(msg.str());
      }
    }
  }
  return D;
}

BlockLayout::BlockLayout(std::vector<int> state_dims, std::vector<int> input_dims)
    : state_dims_(std::move(state_dims)), input_dims_(std::move(input_dims)) {
  if (state_dims_.size() != input_dims_.size()) {
    throw std::invalid_argument("state_dims and input_dims differ in length");
  }
  for (std::size_t i = 0; i < state_dims_.size(); ++i) {
    if (state_dims_[i] < 1) throw std::invalid_argument("state dimension must be >= 1");
    if (input_dims_[i] < 0) throw std::invalid_argument("input dimension must be >= 0");
    state_off_.push_back(n_);
    input_off_.push_back(m_);
    n_ += state_dims_[i];
    m_ += input_dims_[i];
  }
}

std::vector<int> BlockLayout::state_indices(std::span<const int> nodes) const {
  std::vector<int> idx;
  for (int i : nodes) {
    for (int k = 0; k < state_dims_[i]; ++k) idx.push_back(state_off_[i] + k);
  }
  return idx;
}

std::vector<int> BlockLayout::input_indices(std::span<const int> nodes) const {
  std::vector<int> idx;
  for (int i : nodes) {
    for (int k = 0; k < input_dims_[i]; ++k) idx.push_back(input_off_[i] + k);
  }
  return idx;
}

int BlockLayout::state_dim(std::span<const int> nodes) const {
  int d = 0;
  for (int i : nodes) d += state_dims_[i];
  return d;
}

int BlockLayout::input_dim(std::span<const int> nodes) const {
  int d = 0;
  for (int i : nodes) d += input_dims_[i];
  return d;
}

NetworkedSystem::NetworkedSystem(CommGraph graph_in, BlockLayout layout_in, MatrixXd A_in,
                                 MatrixXd B_in, double sigma_w_in)
    : graph(std::move(graph_in)),
      layout(std::move(layout_in)),
      A(std::move(A_in)),
      B(std::move(B_in)),
      sigma_w(sigma_w_in) {
  if (layout.nodes() != graph.size()) {
    throw std::invalid_argument("layout and graph disagree on the number of subsystems");
  }
  if (A.rows() != layout.n() || A.cols() != layout.n()) {
    throw std::invalid_argument("A must be n x n");
  }
  if (B.rows() != layout.n() || B.cols() != layout.m()) {
    throw std::invalid_argument("B must be n x m");
  }
  if (!(sigma_w >= 0.0)) throw std::invalid_argument("sigma_w must be nonnegative");
}

MatrixXd NetworkedSystem::block_A(int i, int j) const {
  return A.block(layout.state_offset(i), layout.state_offset(j), layout.state_dim(i),
                 layout.state_dim(j));
}

MatrixXd NetworkedSystem::block_B(int i, int j) const {
  return B.block(layout.state_offset(i), layout.input_offset(j), layout.state_dim(i),
                 layout.input_dim(j));
}

std::vector<int> structural_neighbors(const DelayMatrix& D, int i) {
  std::vector<int> out;
  for (int j = 0; j < D.size(); ++j) {
    const Delay d = D(i, j);
    if (d && *d <= 1) out.push_back(j);
  }
  return out;
}

bool check_partial_nestedness(const NetworkedSystem& system, const DelayMatrix& D) {
  const int p = system.layout.nodes();
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (i == j) continue;
      const bool coupled = system.block_A(i, j).cwiseAbs().maxCoeff() > 0.0 ||
                           (system.layout.input_dim(j) > 0 &&
                            system.block_B(i, j).cwiseAbs().maxCoeff() > 0.0);
      if (!coupled) continue;
      const Delay d = D(i, j);
      if (!d || *d > 1) return false;
    }
  }
  return true;
}

std::vector<std::vector<int>> scc_partition(const CommGraph& graph) {
  const int p = graph.size();
  std::vector<std::vector<bool>> reach(p, std::vector<bool>(p, false));
  std::vector<std::vector<int>> out_adj(p);
  for (const Edge& e : graph.edges()) out_adj[e.from].push_back(e.to);
  for (int s = 0; s < p; ++s) {
    std::vector<int> stack{s};
    reach[s][s] = true;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : out_adj[v]) {
        if (!reach[s][w]) {
          reach[s][w] = true;
          stack.push_back(w);
        }
      }
    }
  }
  std::vector<int> part_of(p, -1);
  std::vector<std::vector<int>> parts;
  for (int i = 0; i < p; ++i) {
    if (part_of[i] >= 0) continue;
    std::vector<int> part;
    for (int j = i; j < p; ++j) {
      if (reach[i][j] && reach[j][i]) {
        part_of[j] = static_cast<int>(parts.size());
        part.push_back(j);
      }
    }
    parts.push_back(std::move(part));
  }
  return parts;
}

namespace {

std::vector<int> part_labels(int p, const std::vector<std::vector<int>>& partition) {
  std::vector<int> label(p, -1);
  for (std::size_t l = 0; l < partition.size(); ++l) {
    for (int i : partition[l]) label[i] = static_cast<int>(l);
  }
  return label;
}

}  // namespace

bool validate_cost_structure(const CostSpec& cost, const BlockLayout& layout,
                             const std::vector<std::vector<int>>& partition) {
  const int p = layout.nodes();
  const std::vector<int> label = part_labels(p, partition);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (label[i] == label[j]) continue;
      const auto q = cost.Q.block(layout.state_offset(i), layout.state_offset(j),
                                  layout.state_dim(i), layout.state_dim(j));
      if (q.size() > 0 && q.cwiseAbs().maxCoeff() != 0.0) return false;
      if (layout.input_dim(i) == 0 || layout.input_dim(j) == 0) continue;
      const auto r = cost.R.block(layout.input_offset(i), layout.input_offset(j),
                                  layout.input_dim(i), layout.input_dim(j));
      if (r.cwiseAbs().maxCoeff() != 0.0) return false;
    }
  }
  return true;
}

bool components_isolated(const CommGraph& graph,
                         const std::vector<std::vector<int>>& partition) {
  const std::vector<int> label = part_labels(graph.size(), partition);
  return std::all_of(graph.edges().begin(), graph.edges().end(),
                     [&](const Edge& e) { return label[e.from] == label[e.to]; });
}

ValidationReport validate_system(const NetworkedSystem& system, const CostSpec& cost) {
  ValidationReport report;
  const BlockLayout& layout = system.layout;
  for (int i = 0; i < layout.nodes(); ++i) {
    if (layout.state_dim(i) < layout.input_dim(i)) {
      report.warnings.push_back("subsystem " + std::to_string(i + 1) +
                                " has more inputs than states");
    }
  }
  DelayMatrix D(system.graph.size());
  try {
    D = compute_delay_matrix(system.graph);
  } catch (const std::invalid_argument& e) {
    report.errors.emplace_back(e.what());
    return report;
  }
  if (!check_partial_nestedness(system, D)) {
    report.errors.emplace_back("dynamics coupling violates partial nestedness (D_ij > 1)");
  }
  if (cost.Q.rows() != layout.n() || cost.Q.cols() != layout.n()) {
    report.errors.emplace_back("Q must be n x n");
  } else if (!is_psd(cost.Q)) {
    report.errors.emplace_back("Q is not positive semidefinite");
  }
  if (cost.R.rows() != layout.m() || cost.R.cols() != layout.m()) {
    report.errors.emplace_back("R must be m x m");
  } else if (layout.m() > 0 && !is_pd(cost.R)) {
    report.errors.emplace_back("R is not positive definite");
  }
  if (report.ok()) {
    const auto partition = scc_partition(system.graph);
    if (!validate_cost_structure(cost, layout, partition)) {
      report.errors.emplace_back("Q or R couples different strongly connected components");
    }
    if (!components_isolated(system.graph, partition)) {
      report.warnings.push_back(
          "communication edges join different strongly connected components; "
          "per-controller memories may not suffice for local input computation");
    }
  }
  return report;
}

bool is_open_loop_stable(const NetworkedSystem& system) {
  return spectral_radius(system.A) < 1.0;
}

VectorXd step(const NetworkedSystem& system, const VectorXd& x, const VectorXd& u,
              const VectorXd& w) {
  if (x.size() != system.layout.n() || w.size() != system.layout.n() ||
      u.size() != system.layout.m()) {
    throw std::invalid_argument("step: dimension mismatch");
  }
  return system.A * x + system.B * u + w;
}

double stage_cost(const CostSpec& cost, const VectorXd& x, const VectorXd& u) {
  return x.dot(cost.Q * x) + u.dot(cost.R * u);
}

SpectralEnvelope spectral_envelope(const MatrixXd& M, int horizon, double margin) {
  if (M.rows() != M.cols()) throw std::invalid_argument("spectral_envelope: non-square");
  const double rho = spectral_radius(M);
  if (rho >= 1.0 - margin) {
    throw std::domain_error("spectral_envelope: spectral radius " + std::to_string(rho) +
                            " is not below 1");
  }
  SpectralEnvelope env;
  env.gamma = 0.5 * (rho + 1.0);
  env.kappa = 1.0;
  MatrixXd power = MatrixXd::Identity(M.rows(), M.cols());
  double gamma_k = 1.0;
  for (int k = 1; k <= horizon; ++k) {
    power = power * M;
    gamma_k *= env.gamma;
    env.kappa = std::max(env.kappa, spectral_norm(power) / gamma_k);
  }
  return env;
}

}  // namespace declqr
