#pragma once

#include <string>
#include <vector>

#include "declqr/netsys.hpp"

namespace declqr {

/// Sorted ascending list of zero-based subsystem indices.
using NodeSet = std::vector<int>;

/// A leaf v that reaches some node s, with its path length l_{vs}.
struct LeafRef {
  int leaf = 0;    // info-graph node index of v
  int origin = 0;  // subsystem j with s_{0,j} = v
  int lag = 0;     // l_{vs}
};

/// The information graph. Node indices refer to positions in `nodes`, which
/// are ordered by (size, lexicographic content).
struct InfoGraph {
  int p = 0;
  std::vector<NodeSet> nodes;
  std::vector<int> successor;
  std::vector<bool> is_root;
  std::vector<int> leaf_of;      // per subsystem j: node index of s_{0,j}
  std::vector<int> leaf_origin;  // per node: originating subsystem, or -1
  std::vector<int> leaves;       // leaf node indices, ascending by origin
  std::vector<int> roots;
  std::vector<int> root_of;      // per node: the root its successor walk ends at
  /// path_len[v][s] = l_{vs} if v reaches s, else -1.
  std::vector<std::vector<int>> path_len;
  /// reach_leaves[s] = L_s ordered ascending by origin.
  std::vector<std::vector<LeafRef>> reach_leaves;
  /// trees[i] = node indices of every tree whose root contains i, ascending.
  std::vector<std::vector<int>> trees;
  /// ordered_leaf_sets[i] = leaves of trees[i] in decreasing D(i, origin),
  /// ties by ascending origin.
  std::vector<std::vector<int>> ordered_leaf_sets;

  int size() const { return static_cast<int>(nodes.size()); }
  /// Node index with the given content, or -1.
  int find(const NodeSet& s) const;
  bool contains(int node, int i) const;
};

InfoGraph build_info_graph(const DelayMatrix& D);

/// Leaves of T_i by decreasing delay to i (ties by origin), as node subsets.
std::vector<NodeSet> ordered_leaves(const InfoGraph& ig, int i);

struct Lemma1Result {
  bool ok = true;
  std::string diagnostic;
};

/// Checks unique successors, termination of successor walks at self loops,
/// and p <= |U| <= p^2 - p + 1.
Lemma1Result verify_lemma1(const InfoGraph& ig);

/// Stacked-vector coordinates of every info-graph node.
struct NodeCoords {
  std::vector<std::vector<int>> state_idx;  // per node: global state coordinates
  std::vector<std::vector<int>> input_idx;  // per node: global input coordinates
  std::vector<int> eta_dim;                 // per node: sum of n_j over L_s
  /// eta_offset[s][k]: offset of the k-th entry of reach_leaves[s] in eta_s.
  std::vector<std::vector<int>> eta_offset;
};

NodeCoords node_coords(const InfoGraph& ig, const BlockLayout& layout);

/// One-based subset label, e.g. "{1,2}".
std::string format_node(const NodeSet& s);

/// Plain-text adjacency listing: one line per node with successor and origin.
std::string export_info_graph(const InfoGraph& ig);

}  // namespace declqr
