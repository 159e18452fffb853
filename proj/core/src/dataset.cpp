#include "lpgnn/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <utility>

#include "json.hpp"
#include "lpgnn/rng.hpp"

namespace lpgnn {

namespace {

using nlohmann::json;

// Small undirected scratch graph used by both generators.
struct Undirected {
  int n = 0;
  std::vector<std::vector<char>> adj;

  explicit Undirected(int nodes)
      : n(nodes), adj(nodes, std::vector<char>(nodes, 0)) {}

  void add_edge(int a, int b) {
    adj[a][b] = 1;
    adj[b][a] = 1;
  }
  void remove_edge(int a, int b) {
    adj[a][b] = 0;
    adj[b][a] = 0;
  }
  bool has_edge(int a, int b) const { return adj[a][b] != 0; }
};

Undirected erdos_renyi(int n, double p, Rng& rng) {
  Undirected g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (rng.bernoulli(p)) g.add_edge(i, j);
    }
  }
  return g;
}

// Connected pattern: random recursive tree plus extra edges drawn at the
// host density, with uniform node tags.
struct Pattern {
  Undirected graph;
  std::vector<int> tags;
};

Pattern draw_pattern(int size, double edge_prob, int num_tags, Rng& rng) {
  Pattern pat{Undirected(size), std::vector<int>(size)};
  for (int v = 1; v < size; ++v) {
    pat.graph.add_edge(v, rng.uniform_int(0, v - 1));
  }
  for (int i = 0; i < size; ++i) {
    for (int j = i + 1; j < size; ++j) {
      if (!pat.graph.has_edge(i, j) && rng.bernoulli(edge_prob)) {
        pat.graph.add_edge(i, j);
      }
    }
  }
  for (int& t : pat.tags) t = rng.uniform_int(0, num_tags - 1);
  return pat;
}

// Recursive backtracking over injective, tag- and edge-preserving maps of the
// pattern into the host; every node covered by any complete embedding is
// marked. This is the labeling authority: the planted copy is never trusted.
void mark_embeddings(const Pattern& pat, const Undirected& host,
                     const std::vector<int>& host_tags, int next,
                     std::vector<int>& assign, std::vector<char>& used,
                     std::vector<char>& positive) {
  if (next == pat.graph.n) {
    for (int v : assign) positive[v] = 1;
    return;
  }
  for (int cand = 0; cand < host.n; ++cand) {
    if (used[cand] || host_tags[cand] != pat.tags[next]) continue;
    bool ok = true;
    for (int prev = 0; prev < next; ++prev) {
      if (pat.graph.has_edge(prev, next) && !host.has_edge(assign[prev], cand)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    assign[next] = cand;
    used[cand] = 1;
    mark_embeddings(pat, host, host_tags, next + 1, assign, used, positive);
    used[cand] = 0;
  }
}

std::vector<char> label_by_embedding(const Pattern& pat, const Undirected& host,
                                     const std::vector<int>& host_tags) {
  std::vector<char> positive(host.n, 0);
  std::vector<int> assign(pat.graph.n, -1);
  std::vector<char> used(host.n, 0);
  mark_embeddings(pat, host, host_tags, 0, assign, used, positive);
  return positive;
}

// Recursive clique search in increasing-vertex order. Marks members of every
// clique of exactly `size` when `positive` is given; returns whether at least
// one such clique exists.
bool visit_cliques(const Undirected& g, int size, int start,
                   std::vector<int>& members, std::vector<char>* positive) {
  if (static_cast<int>(members.size()) == size) {
    if (positive == nullptr) return true;
    for (int v : members) (*positive)[v] = 1;
    return true;
  }
  bool found = false;
  for (int cand = start; cand < g.n; ++cand) {
    bool ok = true;
    for (int m : members) {
      if (!g.has_edge(m, cand)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    members.push_back(cand);
    found = visit_cliques(g, size, cand + 1, members, positive) || found;
    members.pop_back();
    if (found && positive == nullptr) return true;
  }
  return found;
}

bool has_clique(const Undirected& g, int size) {
  std::vector<int> members;
  return visit_cliques(g, size, 0, members, nullptr);
}

std::vector<char> label_by_clique(const Undirected& g, int size) {
  std::vector<char> positive(g.n, 0);
  std::vector<int> members;
  visit_cliques(g, size, 0, members, &positive);
  return positive;
}

Graph to_graph(const Undirected& g, const Matrix& features,
               const std::vector<char>& positive) {
  Graph out;
  out.num_nodes = g.n;
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      if (i != j && g.has_edge(i, j)) out.arcs.push_back({i, j});
    }
  }
  out.node_features = features;
  for (int v = 0; v < g.n; ++v) {
    out.supervised_nodes.push_back(v);
    out.node_targets.push_back(positive[v] ? 1 : 0);
  }
  return out;
}

}  // namespace

LabeledDataset generate_subgraph_matching(const SubgraphTaskParams& params,
                                          std::uint64_t seed) {
  if (params.pattern_size < 2 || params.pattern_size > params.graph_size) {
    throw DatasetError("pattern size must lie in [2, graph_size]");
  }
  if (params.num_tags < 1) throw DatasetError("need at least one node tag");
  if (params.edge_prob < 0.0 || params.edge_prob > 1.0) {
    throw DatasetError("edge_prob must lie in [0, 1]");
  }

  Rng rng(derive_seed(seed, "subgraph-matching"));
  Pattern pat =
      draw_pattern(params.pattern_size, params.edge_prob, params.num_tags, rng);

  LabeledDataset ds;
  ds.task = DatasetTask::NodeBinary;
  ds.num_classes = 2;
  ds.graphs.reserve(params.n_graphs);

  std::vector<int> positions(params.graph_size);
  std::iota(positions.begin(), positions.end(), 0);

  for (int gi = 0; gi < params.n_graphs; ++gi) {
    Undirected host = erdos_renyi(params.graph_size, params.edge_prob, rng);
    std::vector<int> tags(params.graph_size);
    for (int& t : tags) t = rng.uniform_int(0, params.num_tags - 1);

    // Plant one exact copy: clear the induced slot, then write the pattern.
    rng.shuffle(positions);
    for (int a = 0; a < params.pattern_size; ++a) {
      for (int b = a + 1; b < params.pattern_size; ++b) {
        host.remove_edge(positions[a], positions[b]);
        if (pat.graph.has_edge(a, b)) host.add_edge(positions[a], positions[b]);
      }
      tags[positions[a]] = pat.tags[a];
    }

    std::vector<char> positive = label_by_embedding(pat, host, tags);
    Matrix features(params.graph_size, params.num_tags);
    for (int v = 0; v < params.graph_size; ++v) features.at(v, tags[v]) = 1.0;
    ds.graphs.push_back(to_graph(host, features, positive));
  }

  json pattern_edges = json::array();
  for (int i = 0; i < pat.graph.n; ++i) {
    for (int j = i + 1; j < pat.graph.n; ++j) {
      if (pat.graph.has_edge(i, j)) pattern_edges.push_back({i, j});
    }
  }
  ds.provenance = json{{"generator", "subgraph-matching"},
                       {"n_graphs", params.n_graphs},
                       {"graph_size", params.graph_size},
                       {"pattern_size", params.pattern_size},
                       {"edge_prob", params.edge_prob},
                       {"num_tags", params.num_tags},
                       {"seed", seed},
                       {"pattern_tags", pat.tags},
                       {"pattern_edges", pattern_edges}}
                    .dump();
  return ds;
}

LabeledDataset generate_clique(const CliqueTaskParams& params,
                               std::uint64_t seed) {
  if (params.clique_size < 2 || params.clique_size > params.graph_size) {
    throw DatasetError("clique size must lie in [2, graph_size]");
  }
  if (params.edge_prob < 0.0 || params.edge_prob > 1.0) {
    throw DatasetError("edge_prob must lie in [0, 1]");
  }

  Rng rng(derive_seed(seed, "clique"));
  LabeledDataset ds;
  ds.task = DatasetTask::NodeBinary;
  ds.num_classes = 2;
  ds.graphs.reserve(params.n_graphs);

  std::vector<int> positions(params.graph_size);
  std::iota(positions.begin(), positions.end(), 0);
  Matrix features(params.graph_size, 1);
  for (int v = 0; v < params.graph_size; ++v) features.at(v, 0) = 1.0;

  for (int gi = 0; gi < params.n_graphs; ++gi) {
    bool emitted = false;
    for (int attempt = 0; attempt < params.resample_budget; ++attempt) {
      Undirected host = erdos_renyi(params.graph_size, params.edge_prob, rng);
      rng.shuffle(positions);
      for (int a = 0; a < params.clique_size; ++a) {
        for (int b = a + 1; b < params.clique_size; ++b) {
          host.add_edge(positions[a], positions[b]);
        }
      }
      if (has_clique(host, params.clique_size + 1)) continue;

      std::vector<char> positive = label_by_clique(host, params.clique_size);
      ds.graphs.push_back(to_graph(host, features, positive));
      emitted = true;
      break;
    }
    if (!emitted) {
      throw DatasetError(
          "resample budget exhausted: every draw had a clique larger than " +
          std::to_string(params.clique_size));
    }
  }

  ds.provenance = json{{"generator", "clique"},
                       {"n_graphs", params.n_graphs},
                       {"graph_size", params.graph_size},
                       {"clique_size", params.clique_size},
                       {"edge_prob", params.edge_prob},
                       {"seed", seed}}
                      .dump();
  return ds;
}

std::vector<std::pair<std::vector<int>, std::vector<int>>> k_fold_split(
    const LabeledDataset& ds, int k, std::uint64_t seed) {
  if (k < 2) throw DatasetError("k-fold needs k >= 2");

  // Strata: graph targets when present, otherwise one stratum.
  std::vector<std::vector<int>> strata;
  if (ds.task == DatasetTask::GraphMulticlass) {
    strata.resize(ds.num_classes);
    for (int i = 0; i < ds.size(); ++i) {
      if (!ds.graphs[i].graph_target.has_value()) {
        throw DatasetError("graph " + std::to_string(i) + " has no target");
      }
      strata[*ds.graphs[i].graph_target].push_back(i);
    }
  } else {
    strata.emplace_back(ds.size());
    std::iota(strata.back().begin(), strata.back().end(), 0);
  }

  Rng rng(derive_seed(seed, "k-fold"));
  std::vector<int> fold_of(ds.size(), -1);
  for (auto& members : strata) {
    if (static_cast<int>(members.size()) < k) {
      throw DatasetError("a class has fewer members than folds");
    }
    rng.shuffle(members);
    for (std::size_t i = 0; i < members.size(); ++i) {
      fold_of[members[i]] = static_cast<int>(i) % k;
    }
  }

  std::vector<std::pair<std::vector<int>, std::vector<int>>> folds(k);
  for (int i = 0; i < ds.size(); ++i) {
    for (int f = 0; f < k; ++f) {
      (fold_of[i] == f ? folds[f].second : folds[f].first).push_back(i);
    }
  }
  return folds;
}

ThreeWaySplit train_val_test_split(const LabeledDataset& ds,
                                   std::uint64_t seed) {
  if (ds.size() == 0 || ds.size() % 3 != 0) {
    throw DatasetError("three-way split needs a dataset size divisible by 3");
  }
  std::vector<int> order(ds.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, "three-way-split"));
  rng.shuffle(order);

  const int third = ds.size() / 3;
  ThreeWaySplit split;
  split.train.assign(order.begin(), order.begin() + third);
  split.validation.assign(order.begin() + third, order.begin() + 2 * third);
  split.test.assign(order.begin() + 2 * third, order.end());
  return split;
}

namespace {

json graph_to_json(const Graph& g) {
  json j;
  j["n"] = g.num_nodes;
  json arcs = json::array();
  for (const Arc& a : g.arcs) arcs.push_back({a.from, a.to});
  j["arcs"] = std::move(arcs);
  json x = json::array();
  for (int v = 0; v < g.num_nodes; ++v) {
    x.push_back(std::vector<double>(g.node_features.row(v),
                                    g.node_features.row(v) +
                                        g.node_features.cols));
  }
  j["x"] = std::move(x);
  if (g.arc_feature_dim() > 0) {
    json ax = json::array();
    for (int r = 0; r < g.arc_features.rows; ++r) {
      ax.push_back(std::vector<double>(
          g.arc_features.row(r), g.arc_features.row(r) + g.arc_features.cols));
    }
    j["arc_x"] = std::move(ax);
  }
  j["sup"] = g.supervised_nodes;
  j["y"] = g.node_targets;
  if (g.graph_target.has_value()) {
    j["target"] = *g.graph_target;
  } else {
    j["target"] = nullptr;
  }
  return j;
}

Graph graph_from_json(const json& j) {
  Graph g;
  g.num_nodes = j.at("n").get<int>();
  for (const auto& a : j.at("arcs")) {
    g.arcs.push_back({a.at(0).get<int>(), a.at(1).get<int>()});
  }
  const auto& x = j.at("x");
  const int m = x.empty() ? 0 : static_cast<int>(x.front().size());
  g.node_features = Matrix(g.num_nodes, m);
  for (int v = 0; v < g.num_nodes; ++v) {
    for (int c = 0; c < m; ++c) {
      g.node_features.at(v, c) = x.at(v).at(c).get<double>();
    }
  }
  if (j.contains("arc_x")) {
    const auto& ax = j.at("arc_x");
    const int d = ax.empty() ? 0 : static_cast<int>(ax.front().size());
    g.arc_features = Matrix(static_cast<int>(ax.size()), d);
    for (std::size_t r = 0; r < ax.size(); ++r) {
      for (int c = 0; c < d; ++c) {
        g.arc_features.at(static_cast<int>(r), c) = ax.at(r).at(c).get<double>();
      }
    }
  }
  g.supervised_nodes = j.at("sup").get<std::vector<int>>();
  g.node_targets = j.at("y").get<std::vector<int>>();
  if (j.contains("target") && !j.at("target").is_null()) {
    g.graph_target = j.at("target").get<int>();
  }
  return g;
}

}  // namespace

void save_jsonl(const LabeledDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DatasetError("cannot open for writing: " + path);
  json header{{"format", "lpgnn-graphs"},
              {"version", 1},
              {"task", ds.task == DatasetTask::NodeBinary ? "node-binary"
                                                          : "graph-multiclass"},
              {"num_classes", ds.num_classes},
              {"provenance", ds.provenance}};
  out << header.dump() << '\n';
  for (const Graph& g : ds.graphs) out << graph_to_json(g).dump() << '\n';
  if (!out) throw DatasetError("write failed: " + path);
}

LabeledDataset load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw DatasetError("empty file: " + path);

  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw DatasetError("bad header in " + path + ": " + e.what());
  }
  if (header.value("format", "") != "lpgnn-graphs" ||
      header.value("version", 0) != 1) {
    throw DatasetError("not a supported graph file: " + path);
  }

  LabeledDataset ds;
  const std::string task = header.at("task").get<std::string>();
  if (task == "node-binary") {
    ds.task = DatasetTask::NodeBinary;
  } else if (task == "graph-multiclass") {
    ds.task = DatasetTask::GraphMulticlass;
  } else {
    throw DatasetError("unknown task '" + task + "' in " + path);
  }
  ds.num_classes = header.at("num_classes").get<int>();
  ds.provenance = header.value("provenance", "");

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      ds.graphs.push_back(graph_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw DatasetError("bad graph on line " + std::to_string(line_no) +
                         " of " + path + ": " + e.what());
    }
    ds.graphs.back().validate();
  }
  return ds;
}

}  // namespace lpgnn
