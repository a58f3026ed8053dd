#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "declqr/linalg.hpp"

namespace declqr {

/// Directed communication link `from -> to`; information sent along it arrives
/// after `delay` steps (0 or 1).
struct Edge {
  int from = 0;
  int to = 0;
  int delay = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Communication graph over p subsystems (zero-based node indices).
class CommGraph {
 public:
  /// Throws std::invalid_argument on self loops, duplicate ordered pairs,
  /// out-of-range indices or delays outside {0, 1}.
  CommGraph(int p, std::vector<Edge> edges);

  int size() const { return p_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Copy of the graph with the edge `from -> to` removed (no-op if absent).
  CommGraph without_edge(int from, int to) const;

 private:
  int p_;
  std::vector<Edge> edges_;
};

/// A delay-matrix entry. `std::nullopt` means "no directed path".
using Delay = std::optional<int>;

/// D(i, j) is the smallest accumulated delay over directed paths j -> i.
class DelayMatrix {
 public:
  explicit DelayMatrix(int p);

  int size() const { return p_; }
  Delay operator()(int i, int j) const { return d_[index(i, j)]; }
  bool reachable(int i, int j) const { return d_[index(i, j)].has_value(); }
  /// Finite entry; throws std::out_of_range if j cannot reach i.
  int at(int i, int j) const;
  void set(int i, int j, Delay d) { d_[index(i, j)] = d; }

  /// Largest finite entry (D_max).
  int max_finite() const;

  friend bool operator==(const DelayMatrix&, const DelayMatrix&) = default;

 private:
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * p_ + j;
  }
  int p_;
  std::vector<Delay> d_;
};

/// Min-sum path relaxation over {0,1} edge weights. Throws
/// std::invalid_argument if the graph has a directed cycle of total delay 0,
/// unless `allow_zero_delay_cycles` is set. Nodes joined by such a cycle share
/// all information instantly (the centralized limit when every pair is).
DelayMatrix compute_delay_matrix(const CommGraph& graph, bool allow_zero_delay_cycles = false);

/// Maps subsystem indices to row/column ranges of the stacked state and input.
class BlockLayout {
 public:
  BlockLayout(std::vector<int> state_dims, std::vector<int> input_dims);

  int nodes() const { return static_cast<int>(state_dims_.size()); }
  int n() const { return n_; }
  int m() const { return m_; }
  int state_dim(int i) const { return state_dims_[i]; }
  int input_dim(int i) const { return input_dims_[i]; }
  int state_offset(int i) const { return state_off_[i]; }
  int input_offset(int i) const { return input_off_[i]; }
  const std::vector<int>& state_dims() const { return state_dims_; }
  const std::vector<int>& input_dims() const { return input_dims_; }

  /// Stacked coordinates of the listed subsystems, in the listed order.
  std::vector<int> state_indices(std::span<const int> nodes) const;
  std::vector<int> input_indices(std::span<const int> nodes) const;
  int state_dim(std::span<const int> nodes) const;
  int input_dim(std::span<const int> nodes) const;

 private:
  std::vector<int> state_dims_, input_dims_, state_off_, input_off_;
  int n_ = 0;
  int m_ = 0;
};

/// x_{t+1} = A x_t + B u_t + w_t with w_t ~ N(0, sigma_w^2 I).
struct NetworkedSystem {
  NetworkedSystem(CommGraph graph, BlockLayout layout, MatrixXd A, MatrixXd B,
                  double sigma_w);

  CommGraph graph;
  BlockLayout layout;
  MatrixXd A;
  MatrixXd B;
  double sigma_w;

  MatrixXd block_A(int i, int j) const;
  MatrixXd block_B(int i, int j) const;
};

struct CostSpec {
  MatrixXd Q;
  MatrixXd R;
};

/// Subsystems whose state/input may directly enter subsystem i: D(i, j) <= 1.
std::vector<int> structural_neighbors(const DelayMatrix& D, int i);

/// True iff every nonzero coupling block (i, j), i != j, of A or B has D(i, j) <= 1.
bool check_partial_nestedness(const NetworkedSystem& system, const DelayMatrix& D);

/// Strongly connected components, each sorted ascending, ordered by smallest member.
std::vector<std::vector<int>> scc_partition(const CommGraph& graph);

/// True iff the Q and R blocks coupling different parts are exactly zero.
bool validate_cost_structure(const CostSpec& cost, const BlockLayout& layout,
                             const std::vector<std::vector<int>>& partition);

/// True iff no communication edge joins two different parts.
bool components_isolated(const CommGraph& graph,
                         const std::vector<std::vector<int>>& partition);

/// Structural diagnostics: hard errors (empty result means valid) plus
/// warnings that do not invalidate the system.
struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

ValidationReport validate_system(const NetworkedSystem& system, const CostSpec& cost);

bool is_open_loop_stable(const NetworkedSystem& system);

/// Returns A x + B u + w. Throws std::invalid_argument on dimension mismatch.
VectorXd step(const NetworkedSystem& system, const VectorXd& x, const VectorXd& u,
              const VectorXd& w);

/// x^T Q x + u^T R u.
double stage_cost(const CostSpec& cost, const VectorXd& x, const VectorXd& u);

struct SpectralEnvelope {
  double kappa = 1.0;
  double gamma = 0.5;
};

inline constexpr int kEnvelopeHorizon = 200;

/// (kappa, gamma) with ||M^k|| <= kappa * gamma^k for k = 0..horizon, where
/// gamma = (rho(M) + 1) / 2. Throws std::domain_error if rho(M) >= 1 - margin.
SpectralEnvelope spectral_envelope(const MatrixXd& M, int horizon = kEnvelopeHorizon,
                                   double margin = 1e-9);

}  // namespace declqr
