#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "lpgnn/matrix.hpp"

namespace lpgnn {

struct GraphError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Arc {
  int from = 0;
  int to = 0;
};

// Directed graph with per-node and optional per-arc feature vectors plus
// supervision. Undirected inputs are ingested as two directed arcs.
// Immutable after construction; safe to share across threads.
struct Graph {
  int num_nodes = 0;
  std::vector<Arc> arcs;
  Matrix node_features;  // num_nodes x m
  Matrix arc_features;   // |arcs| x d; d == 0 when arcs carry no features

  // Supervision. node_targets is aligned with supervised_nodes, which is
  // kept sorted ascending.
  std::vector<int> supervised_nodes;
  std::vector<int> node_targets;
  std::optional<int> graph_target;

  int feature_dim() const { return node_features.cols; }
  int arc_feature_dim() const { return arc_features.cols; }

  // Checks arc endpoints, self-loops, duplicate arcs, feature shapes, and
  // supervision alignment. Throws GraphError on the first violation.
  void validate(bool allow_self_loops = false) const;
};

// Parent/child/neighbor lists per node, all sorted ascending so iteration
// order is deterministic. `incoming[v]` lists the nodes w whose neighborhood
// contains v; it is built by transposing `neighbors` rather than copying it.
struct NeighborIndex {
  std::vector<std::vector<int>> parents;    // {u : (u,v) in E}
  std::vector<std::vector<int>> children;   // {u : (v,u) in E}
  std::vector<std::vector<int>> neighbors;  // parents[v] ∪ children[v]
  std::vector<std::vector<int>> incoming;   // {w : v in neighbors[w]}

  int degree(int v) const { return static_cast<int>(neighbors[v].size()); }

  // Row of Graph::arc_features for directed arc (u,v), or -1 when absent.
  int arc_row(int u, int v) const;

  std::unordered_map<std::int64_t, int> arc_lookup;
};

NeighborIndex build_neighbor_index(const Graph& g);

// Result of batching several graphs into one graph with the inputs as
// disconnected components. offsets[i] is added to graph i's node ids;
// a trailing entry equal to the total node count closes the last range.
struct DisjointUnion {
  Graph graph;
  std::vector<int> offsets;  // size = #inputs + 1
  std::vector<std::optional<int>> component_targets;

  std::pair<int, int> component_range(int i) const {
    return {offsets[i], offsets[i + 1]};
  }
  int num_components() const { return static_cast<int>(offsets.size()) - 1; }
};

DisjointUnion disjoint_union(const std::vector<Graph>& graphs);

// Extracts component i of a union back out as a standalone graph.
Graph extract_component(const DisjointUnion& u, int i);

// One-hot encoding of node degrees (|ne[v]|), width max_degree + 1.
// Throws GraphError when some node exceeds max_degree.
Matrix degree_one_hot_features(const Graph& g, int max_degree);

// Largest |ne[v]| over every node of every graph.
int max_degree(const std::vector<Graph>& graphs);

}  // namespace lpgnn
