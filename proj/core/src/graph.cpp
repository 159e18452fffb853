#include "lpgnn/graph.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace lpgnn {

namespace {
std::int64_t arc_key(int u, int v) {
  return (static_cast<std::int64_t>(u) << 32) | static_cast<std::uint32_t>(v);
}
}  // namespace

void Graph::validate(bool allow_self_loops) const {
  if (num_nodes < 0) throw GraphError("negative node count");
  if (node_features.rows != num_nodes) {
    throw GraphError("node_features has " + std::to_string(node_features.rows) +
                     " rows for " + std::to_string(num_nodes) + " nodes");
  }
  if (arc_features.cols > 0 &&
      arc_features.rows != static_cast<int>(arcs.size())) {
    throw GraphError("arc_features rows do not match the arc count");
  }
  std::set<std::pair<int, int>> seen;
  for (const Arc& a : arcs) {
    if (a.from < 0 || a.from >= num_nodes || a.to < 0 || a.to >= num_nodes) {
      throw GraphError("arc (" + std::to_string(a.from) + ", " +
                       std::to_string(a.to) + ") out of range");
    }
    if (a.from == a.to && !allow_self_loops) {
      throw GraphError("self-loop at node " + std::to_string(a.from));
    }
    if (!seen.insert({a.from, a.to}).second) {
      throw GraphError("duplicate arc (" + std::to_string(a.from) + ", " +
                       std::to_string(a.to) + ")");
    }
  }
  if (supervised_nodes.size() != node_targets.size()) {
    throw GraphError("node_targets not aligned with supervised_nodes");
  }
  for (std::size_t i = 0; i < supervised_nodes.size(); ++i) {
    int v = supervised_nodes[i];
    if (v < 0 || v >= num_nodes) {
      throw GraphError("supervised node " + std::to_string(v) + " out of range");
    }
    if (i > 0 && supervised_nodes[i - 1] >= v) {
      throw GraphError("supervised_nodes must be sorted ascending, unique");
    }
  }
}

int NeighborIndex::arc_row(int u, int v) const {
  auto it = arc_lookup.find(arc_key(u, v));
  return it == arc_lookup.end() ? -1 : it->second;
}

NeighborIndex build_neighbor_index(const Graph& g) {
  NeighborIndex idx;
  const int n = g.num_nodes;
  idx.parents.resize(n);
  idx.children.resize(n);
  idx.neighbors.resize(n);
  idx.incoming.resize(n);
  idx.arc_lookup.reserve(g.arcs.size());

  for (std::size_t i = 0; i < g.arcs.size(); ++i) {
    const Arc& a = g.arcs[i];
    idx.parents[a.to].push_back(a.from);
    idx.children[a.from].push_back(a.to);
    idx.arc_lookup.emplace(arc_key(a.from, a.to), static_cast<int>(i));
  }

  for (int v = 0; v < n; ++v) {
    std::sort(idx.parents[v].begin(), idx.parents[v].end());
    std::sort(idx.children[v].begin(), idx.children[v].end());
    auto& ne = idx.neighbors[v];
    std::set_union(idx.parents[v].begin(), idx.parents[v].end(),
                   idx.children[v].begin(), idx.children[v].end(),
                   std::back_inserter(ne));
  }
  // Transpose of `neighbors`: node ids ascend in the outer loop, so each
  // incoming list comes out sorted.
  for (int w = 0; w < n; ++w) {
    for (int v : idx.neighbors[w]) idx.incoming[v].push_back(w);
  }
  return idx;
}

DisjointUnion disjoint_union(const std::vector<Graph>& graphs) {
  if (graphs.empty()) throw GraphError("disjoint_union of zero graphs");
  const int m = graphs.front().feature_dim();
  const int d = graphs.front().arc_feature_dim();

  DisjointUnion u;
  u.offsets.reserve(graphs.size() + 1);
  int total_nodes = 0;
  std::size_t total_arcs = 0;
  for (const Graph& g : graphs) {
    if (g.feature_dim() != m || g.arc_feature_dim() != d) {
      throw GraphError("disjoint_union: feature dimensions differ across graphs");
    }
    u.offsets.push_back(total_nodes);
    total_nodes += g.num_nodes;
    total_arcs += g.arcs.size();
  }
  u.offsets.push_back(total_nodes);

  Graph& out = u.graph;
  out.num_nodes = total_nodes;
  out.arcs.reserve(total_arcs);
  out.node_features = Matrix(total_nodes, m);
  out.arc_features = Matrix(d > 0 ? static_cast<int>(total_arcs) : 0, d);

  int arc_pos = 0;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const Graph& g = graphs[gi];
    const int off = u.offsets[gi];
    for (int v = 0; v < g.num_nodes; ++v) {
      std::copy_n(g.node_features.row(v), m, out.node_features.row(off + v));
    }
    for (std::size_t ai = 0; ai < g.arcs.size(); ++ai) {
      out.arcs.push_back({g.arcs[ai].from + off, g.arcs[ai].to + off});
      if (d > 0) {
        std::copy_n(g.arc_features.row(static_cast<int>(ai)), d,
                    out.arc_features.row(arc_pos));
      }
      ++arc_pos;
    }
    for (std::size_t si = 0; si < g.supervised_nodes.size(); ++si) {
      out.supervised_nodes.push_back(g.supervised_nodes[si] + off);
      out.node_targets.push_back(g.node_targets[si]);
    }
    u.component_targets.push_back(g.graph_target);
  }
  return u;
}

Graph extract_component(const DisjointUnion& u, int i) {
  auto [begin, end] = u.component_range(i);
  const int n = end - begin;
  const int m = u.graph.feature_dim();
  const int d = u.graph.arc_feature_dim();

  Graph g;
  g.num_nodes = n;
  g.node_features = Matrix(n, m);
  for (int v = 0; v < n; ++v) {
    std::copy_n(u.graph.node_features.row(begin + v), m, g.node_features.row(v));
  }
  std::vector<int> arc_rows;
  for (std::size_t ai = 0; ai < u.graph.arcs.size(); ++ai) {
    const Arc& a = u.graph.arcs[ai];
    if (a.from >= begin && a.from < end) {
      g.arcs.push_back({a.from - begin, a.to - begin});
      arc_rows.push_back(static_cast<int>(ai));
    }
  }
  if (d > 0) {
    g.arc_features = Matrix(static_cast<int>(arc_rows.size()), d);
    for (std::size_t k = 0; k < arc_rows.size(); ++k) {
      std::copy_n(u.graph.arc_features.row(arc_rows[k]), d,
                  g.arc_features.row(static_cast<int>(k)));
    }
  }
  for (std::size_t si = 0; si < u.graph.supervised_nodes.size(); ++si) {
    int v = u.graph.supervised_nodes[si];
    if (v >= begin && v < end) {
      g.supervised_nodes.push_back(v - begin);
      g.node_targets.push_back(u.graph.node_targets[si]);
    }
  }
  g.graph_target = u.component_targets[i];
  return g;
}

Matrix degree_one_hot_features(const Graph& g, int max_degree) {
  NeighborIndex idx = build_neighbor_index(g);
  Matrix features(g.num_nodes, max_degree + 1);
  for (int v = 0; v < g.num_nodes; ++v) {
    const int de = idx.degree(v);
    if (de > max_degree) {
      throw GraphError("node " + std::to_string(v) + " has degree " +
                       std::to_string(de) + " > max_degree " +
                       std::to_string(max_degree));
    }
    features.at(v, de) = 1.0;
  }
  return features;
}

int max_degree(const std::vector<Graph>& graphs) {
  int best = 0;
  for (const Graph& g : graphs) {
    NeighborIndex idx = build_neighbor_index(g);
    for (int v = 0; v < g.num_nodes; ++v) best = std::max(best, idx.degree(v));
  }
  return best;
}

}  // namespace lpgnn
