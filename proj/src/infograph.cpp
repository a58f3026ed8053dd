#include "declqr/infograph.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <stdexcept>

namespace declqr {

int InfoGraph::find(const NodeSet& s) const {
  const auto it = std::find(nodes.begin(), nodes.end(), s);
  return it == nodes.end() ? -1 : static_cast<int>(it - nodes.begin());
}

bool InfoGraph::contains(int node, int i) const {
  return std::binary_search(nodes[node].begin(), nodes[node].end(), i);
}

namespace {

bool canonical_less(const NodeSet& a, const NodeSet& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

}  // namespace

InfoGraph build_info_graph(const DelayMatrix& D) {
  const int p = D.size();
  // Chains s_{0,j}, s_{1,j}, ... until the set stops growing.
  std::vector<std::vector<NodeSet>> chains(p);
  for (int j = 0; j < p; ++j) {
    for (int k = 0;; ++k) {
      NodeSet s;
      for (int i = 0; i < p; ++i) {
        const Delay d = D(i, j);
        if (d && *d <= k) s.push_back(i);
      }
      if (!chains[j].empty() && chains[j].back() == s) break;
      chains[j].push_back(std::move(s));
    }
  }

  std::vector<NodeSet> all;
  for (const auto& chain : chains) all.insert(all.end(), chain.begin(), chain.end());
  std::sort(all.begin(), all.end(), canonical_less);
  all.erase(std::unique(all.begin(), all.end()), all.end());

  InfoGraph ig;
  ig.p = p;
  ig.nodes = all;
  const int q = ig.size();
  std::map<NodeSet, int> index;
  for (int r = 0; r < q; ++r) index[ig.nodes[r]] = r;

  ig.successor.assign(q, -1);
  for (const auto& chain : chains) {
    for (std::size_t k = 0; k < chain.size(); ++k) {
      const int from = index.at(chain[k]);
      const int to = index.at(k + 1 < chain.size() ? chain[k + 1] : chain[k]);
      if (ig.successor[from] >= 0 && ig.successor[from] != to) {
        throw std::logic_error("information graph node " + format_node(chain[k]) +
                               " has two successors");
      }
      ig.successor[from] = to;
    }
  }

  ig.is_root.assign(q, false);
  for (int r = 0; r < q; ++r) {
    if (ig.successor[r] == r) {
      ig.is_root[r] = true;
      ig.roots.push_back(r);
    }
  }

  ig.leaf_origin.assign(q, -1);
  ig.leaf_of.assign(p, -1);
  for (int j = 0; j < p; ++j) {
    const int v = index.at(chains[j].front());
    ig.leaf_of[j] = v;
    // Shared only under zero-delay cycles; the smallest origin names the leaf.
    if (ig.leaf_origin[v] < 0) {
      ig.leaf_origin[v] = j;
      ig.leaves.push_back(v);
    }
  }

  ig.root_of.assign(q, -1);
  for (int r = 0; r < q; ++r) {
    int s = r;
    for (int steps = 0; steps <= q && ig.successor[s] != s; ++steps) s = ig.successor[s];
    ig.root_of[r] = s;
  }

  ig.path_len.assign(q, std::vector<int>(q, -1));
  ig.reach_leaves.assign(q, {});
  for (int j = 0; j < p; ++j) {
    const int v = ig.leaf_of[j];
    int s = v;
    for (int l = 0;; ++l) {
      ig.path_len[v][s] = l;
      ig.reach_leaves[s].push_back(LeafRef{v, j, l});
      if (ig.successor[s] == s) break;
      s = ig.successor[s];
    }
  }

  ig.trees.assign(p, {});
  ig.ordered_leaf_sets.assign(p, {});
  for (int i = 0; i < p; ++i) {
    for (int r = 0; r < q; ++r) {
      if (ig.contains(ig.root_of[r], i)) ig.trees[i].push_back(r);
    }
    for (int r : ig.trees[i]) {
      if (ig.leaf_origin[r] >= 0) ig.ordered_leaf_sets[i].push_back(r);
    }
    auto& ordered = ig.ordered_leaf_sets[i];
    std::sort(ordered.begin(), ordered.end(), [&](int a, int b) {
      const int ja = ig.leaf_origin[a];
      const int jb = ig.leaf_origin[b];
      const int da = D.at(i, ja);
      const int db = D.at(i, jb);
      if (da != db) return da > db;
      return ja < jb;
    });
  }
  return ig;
}

std::vector<NodeSet> ordered_leaves(const InfoGraph& ig, int i) {
  std::vector<NodeSet> out;
  for (int v : ig.ordered_leaf_sets.at(i)) out.push_back(ig.nodes[v]);
  return out;
}

Lemma1Result verify_lemma1(const InfoGraph& ig) {
  Lemma1Result res;
  const int q = ig.size();
  const auto fail = [&](const std::string& msg) {
    res.ok = false;
    res.diagnostic = msg;
    return res;
  };
  if (static_cast<int>(ig.successor.size()) != q) return fail("(i) successor map incomplete");
  for (int r = 0; r < q; ++r) {
    if (ig.successor[r] < 0 || ig.successor[r] >= q) {
      return fail("(i) node " + format_node(ig.nodes[r]) + " lacks a unique successor");
    }
  }
  for (int r = 0; r < q; ++r) {
    int s = r;
    int steps = 0;
    while (ig.successor[s] != s && steps <= q) {
      s = ig.successor[s];
      ++steps;
    }
    if (ig.successor[s] != s) {
      return fail("(ii) successor walk from " + format_node(ig.nodes[r]) +
                  " does not reach a self loop");
    }
  }
  // The lower bound is the number of distinct leaves, which is p unless
  // zero-delay cycles merge some of them.
  const long long p = ig.p;
  const long long lo = static_cast<long long>(ig.leaves.size());
  if (q < lo || q > p * p - p + 1) {
    return fail("(iii) |U| = " + std::to_string(q) + " outside [" + std::to_string(lo) +
                ", p^2 - p + 1]");
  }
  return res;
}

std::string format_node(const NodeSet& s) {
  std::ostringstream out;
  out << '{';
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (k) out << ',';
    out << s[k] + 1;
  }
  out << '}';
  return out.str();
}

std::string export_info_graph(const InfoGraph& ig) {
  std::ostringstream out;
  out << "nodes " << ig.size() << '\n';
  for (int r = 0; r < ig.size(); ++r) {
    out << format_node(ig.nodes[r]) << " -> " << format_node(ig.nodes[ig.successor[r]]);
    if (ig.is_root[r]) out << " root";
    if (ig.leaf_origin[r] >= 0) out << " leaf w" << ig.leaf_origin[r] + 1;
    out << '\n';
  }
  return out.str();
}

NodeCoords node_coords(const InfoGraph& ig, const BlockLayout& layout) {
  NodeCoords c;
  const int q = ig.size();
  c.state_idx.resize(q);
  c.input_idx.resize(q);
  c.eta_dim.assign(q, 0);
  c.eta_offset.resize(q);
  for (int s = 0; s < q; ++s) {
    c.state_idx[s] = layout.state_indices(ig.nodes[s]);
    c.input_idx[s] = layout.input_indices(ig.nodes[s]);
    for (const LeafRef& ref : ig.reach_leaves[s]) {
      c.eta_offset[s].push_back(c.eta_dim[s]);
      c.eta_dim[s] += layout.state_dim(ref.origin);
    }
  }
  return c;
}

}  // namespace declqr
